#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

enum class KernelFamily { gaussian, laplacian, linear };

inline std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::laplacian: return "laplacian";
        case KernelFamily::linear: return "linear";
    }
    return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "gaussian") return KernelFamily::gaussian;
    if (s == "laplacian") return KernelFamily::laplacian;
    if (s == "linear") return KernelFamily::linear;
    throw DataError("unknown kernel family: '" + s + "'");
}

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double sigma = 1.0; // bandwidth, ignored for linear

    void validate() const {
        if (family != KernelFamily::linear && !(sigma > 0.0))
            throw DataError("kernel: sigma must be positive");
    }
};

// Kernel-space embedding of a pose: position concatenated with each orientation
// angle mapped to the unit circle as (cos, sin). Keeps the Euclidean kernel
// distance continuous across the 0/2*pi seam; gives a (d + 2c)-vector.
inline Vector embed_pose(const Pose& pose) {
    const Eigen::Index d = pose.position_dim();
    const Eigen::Index c = pose.orientation_dim();
    Vector v(d + 2 * c);
    v.head(d) = pose.position;
    for (Eigen::Index j = 0; j < c; ++j) {
        v[d + 2 * j] = std::cos(pose.orientation[j]);
        v[d + 2 * j + 1] = std::sin(pose.orientation[j]);
    }
    return v;
}

// Rows are embedded poses.
inline Matrix embed_poses(const std::vector<Pose>& poses) {
    if (poses.empty()) throw DataError("embed_poses: empty pose list");
    const Vector first = embed_pose(poses.front());
    Matrix e(static_cast<Eigen::Index>(poses.size()), first.size());
    e.row(0) = first;
    for (std::size_t i = 1; i < poses.size(); ++i) {
        const Vector v = embed_pose(poses[i]);
        if (v.size() != first.size()) throw DataError("embed_poses: mixed pose dimensions");
        e.row(static_cast<Eigen::Index>(i)) = v;
    }
    return e;
}

template <typename DerivedA, typename DerivedB>
inline double kernel_eval_embedded(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& v,
                                   const Eigen::MatrixBase<DerivedB>& w) {
    if (v.size() != w.size()) throw DataError("kernel: embedded dimension mismatch");
    switch (spec.family) {
        case KernelFamily::gaussian:
            return std::exp(-(v - w).squaredNorm() / (spec.sigma * spec.sigma));
        case KernelFamily::laplacian:
            return std::exp(-(v - w).norm() / spec.sigma);
        case KernelFamily::linear:
            return v.dot(w);
    }
    return 0.0;
}

inline double kernel_eval(const KernelSpec& spec, const Pose& x, const Pose& y) {
    spec.validate();
    if (x.position_dim() != y.position_dim() || x.orientation_dim() != y.orientation_dim())
        throw DataError("kernel: pose dimension mismatch");
    return kernel_eval_embedded(spec, embed_pose(x), embed_pose(y));
}

// Evaluation vector K_x against every row of an embedded training matrix.
inline Vector kernel_vector(const KernelSpec& spec, const Matrix& embedded, const Vector& query) {
    if (query.size() != embedded.cols()) throw DataError("kernel_vector: dimension mismatch");
    Vector kx(embedded.rows());
    for (Eigen::Index i = 0; i < embedded.rows(); ++i)
        kx[i] = kernel_eval_embedded(spec, embedded.row(i).transpose(), query);
    return kx;
}

// Gram matrix with exact symmetry (upper triangle computed once, mirrored) and a
// unit diagonal for gaussian/laplacian. Differences are evaluated directly so
// duplicated inputs give exactly k = 1.
inline Matrix gram(const KernelSpec& spec, const Matrix& embedded) {
    spec.validate();
    const Eigen::Index n = embedded.rows();
    if (n < 1) throw DataError("gram: need at least one pose");
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = spec.family == KernelFamily::linear ? embedded.row(i).squaredNorm() : 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v =
                kernel_eval_embedded(spec, embedded.row(i).transpose(), embedded.row(j).transpose());
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

inline Matrix gram(const KernelSpec& spec, const std::vector<Pose>& poses) {
    return gram(spec, embed_poses(poses));
}

// Cholesky factor of (K + n*lambda*I). Immutable once built.
class GramFactor {
public:
    GramFactor() = default;

    Eigen::Index size() const { return l_.rows(); }
    double lambda() const { return lambda_; }
    const Matrix& matrix_l() const { return l_; }

    // Solves (K + n*lambda*I) alpha = kx via two triangular solves.
    Vector solve(const Vector& kx) const {
        if (kx.size() != l_.rows()) throw DataError("weights: kx has wrong length");
        Vector z = l_.triangularView<Eigen::Lower>().solve(kx);
        l_.triangularView<Eigen::Lower>().transpose().solveInPlace(z);
        return z;
    }

    friend GramFactor factorize(Matrix k, double lambda);

private:
    Matrix l_; // lower triangle holds L; upper triangle is unspecified
    double lambda_ = 0.0;
};

inline GramFactor factorize(Matrix k, double lambda) {
    const Eigen::Index n = k.rows();
    if (n == 0 || k.cols() != n) throw DataError("factorize: K must be square and nonempty");
    if (!(lambda > 0.0)) throw DataError("factorize: lambda must be positive");
    k.diagonal().array() += static_cast<double>(n) * lambda;
    Eigen::LLT<Eigen::Ref<Matrix>> llt(k); // in-place, lower triangle
    if (llt.info() != Eigen::Success) {
        // Should be impossible for a PSD kernel matrix with lambda > 0.
        k.diagonal().array() -= static_cast<double>(n) * lambda;
        const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(
                                   k, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        throw NumericError("factorize: Cholesky failed (lambda=" + format_double(lambda) +
                           ", min eigenvalue ~ " + format_double(min_eig) + ")");
    }
    GramFactor f;
    f.l_ = std::move(k);
    f.lambda_ = lambda;
    return f;
}

inline Vector weights(const GramFactor& factor, const Vector& kx) {
    return factor.solve(kx);
}

} // namespace crisp
