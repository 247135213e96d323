#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

struct DlsConfig {
    double damping = 0.1;       // eta; 0 requests the undamped pseudoinverse
    int max_iters = 500;
    double position_tolerance = 1e-5;    // meters
    double orientation_tolerance = 1e-5; // radians, per angle
    double step_clamp = 0.2;             // max joint step per iteration (rad, inf-norm)
    bool selective = false;              // per-singular-direction damping (Buss-Kim style)

    void validate() const {
        if (damping < 0.0 || max_iters < 1 || position_tolerance < 0.0 ||
            orientation_tolerance < 0.0 || !(step_clamp > 0.0))
            throw DataError("dls config: invalid parameter");
    }
};

struct IkResult {
    Vector joints;
    bool converged = false;
    int iterations = 0;
    // Residuals measured with the NOMINAL chain, even when the solver ran on a
    // biased one: the solver believes its own model, the report does not.
    Vector position_residual;
    Vector orientation_residual;
    double position_error = 0.0;
    double orientation_error = 0.0;
};

namespace detail {

// Buss-Kim style selectively damped step: each singular direction's joint-space
// contribution is clamped by how much end-effector motion it can actually produce.
inline Vector sdls_step(const Matrix& j, const Vector& e, double gamma_max) {
    Eigen::JacobiSVD<Matrix> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Vector col_norms(j.cols());
    for (Eigen::Index c = 0; c < j.cols(); ++c) col_norms[c] = j.col(c).norm();

    Vector step = Vector::Zero(j.cols());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] <= 1e-12) continue;
        const double alpha = svd.matrixU().col(i).dot(e);
        const Vector v = svd.matrixV().col(i);
        const double m = v.cwiseAbs().dot(col_norms) / sv[i];
        const double gamma = gamma_max * std::min(1.0, 1.0 / std::max(m, 1e-12));
        Vector phi = (alpha / sv[i]) * v;
        const double mag = phi.cwiseAbs().maxCoeff();
        if (mag > gamma) phi *= gamma / mag;
        step += phi;
    }
    const double mag = step.cwiseAbs().maxCoeff();
    if (mag > gamma_max) step *= gamma_max / mag;
    return step;
}

} // namespace detail

// Iterative Jacobian IK against the supplied (possibly biased) chain. Iterates are
// clamped to the joint box every step. Returns as soon as the solver's own model
// meets the tolerances; the reported residual is evaluated on the nominal chain.
inline IkResult solve_ik(const KinematicChain& chain, const Pose& target, const Vector& start,
                         const DlsConfig& cfg = {}) {
    cfg.validate();
    if (start.size() != chain.joint_count()) throw DataError("solve_ik: start has wrong length");
    if (target.position.size() != chain.position_dim() ||
        target.orientation.size() != chain.orientation_dim())
        throw DataError("solve_ik: target pose dimension mismatch");

    const Eigen::Index d = chain.position_dim();
    const Eigen::Index c = chain.orientation_dim();
    Vector y = clamp_to_box(start, chain.limits());

    IkResult res;
    for (int iter = 0; iter <= cfg.max_iters; ++iter) {
        const Pose pose = chain.forward(y);
        Vector e(d + c);
        e.head(d) = target.position - pose.position;
        for (Eigen::Index k = 0; k < c; ++k)
            e[d + k] = wrap_signed(target.orientation[k] - pose.orientation[k]);

        if (e.head(d).norm() <= cfg.position_tolerance &&
            e.tail(c).cwiseAbs().maxCoeff() <= cfg.orientation_tolerance) {
            res.converged = true;
            res.iterations = iter;
            break;
        }
        if (iter == cfg.max_iters) {
            res.iterations = iter;
            break;
        }

        const Matrix j = chain.jacobian(y);
        Vector step;
        if (cfg.selective) {
            step = detail::sdls_step(j, e, cfg.step_clamp);
        } else {
            Matrix jjt = j * j.transpose();
            if (cfg.damping == 0.0) {
                Eigen::FullPivLU<Matrix> lu(jjt);
                if (!lu.isInvertible())
                    throw NumericError("solve_ik: singular Jacobian with zero damping; raise damping");
                step = j.transpose() * lu.solve(e);
            } else {
                jjt.diagonal().array() += cfg.damping * cfg.damping;
                step = j.transpose() * jjt.llt().solve(e);
            }
            const double mag = step.cwiseAbs().maxCoeff();
            if (mag > cfg.step_clamp) step *= cfg.step_clamp / mag;
        }
        y = clamp_to_box(y + step, chain.limits());
    }

    const KinematicChain nominal = chain.nominal();
    const Pose realized = nominal.forward(y);
    res.joints = std::move(y);
    res.position_residual = target.position - realized.position;
    res.orientation_residual.resize(c);
    for (Eigen::Index k = 0; k < c; ++k)
        res.orientation_residual[k] = wrap_signed(target.orientation[k] - realized.orientation[k]);
    res.position_error = res.position_residual.norm();
    res.orientation_error = res.orientation_residual.norm();
    return res;
}

} // namespace crisp
