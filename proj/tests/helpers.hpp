#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <random>

#include "crisp/kinematics.hpp"

namespace crisp::testing {

inline Vector make_vec(std::initializer_list<double> vals) {
    Vector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

inline Vector random_in_box(const JointBox& box, std::mt19937& rng) {
    Vector y(box.size());
    for (Eigen::Index j = 0; j < box.size(); ++j) {
        std::uniform_real_distribution<double> dist(box.lower[j], box.upper[j]);
        y[j] = dist(rng);
    }
    return y;
}

// Central finite differences of the full pose map, wrap-aware on the
// orientation rows. Independent oracle for the analytic Jacobian.
inline Matrix fd_jacobian(const KinematicChain& chain, const Vector& y, double h = 1e-6) {
    const Eigen::Index d = chain.position_dim();
    const Eigen::Index c = chain.orientation_dim();
    Matrix j(d + c, y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        Vector hi = y, lo = y;
        hi[k] += h;
        lo[k] -= h;
        const Pose ph = chain.forward(hi);
        const Pose pl = chain.forward(lo);
        j.block(0, k, d, 1) = (ph.position - pl.position) / (2.0 * h);
        for (Eigen::Index a = 0; a < c; ++a)
            j(d + a, k) = wrap_signed(ph.orientation[a] - pl.orientation[a]) / (2.0 * h);
    }
    return j;
}

// Central finite differences of a scalar objective.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& y,
                          double h = 1e-6) {
    Vector g(y.size());
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        Vector hi = y, lo = y;
        hi[k] += h;
        lo[k] -= h;
        g[k] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

// |a - b| / max(1, |b|), elementwise maximum over two matrices.
inline double max_rel_err(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double denom = std::max(1.0, std::abs(b(i, j)));
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
        }
    return worst;
}

} // namespace crisp::testing
