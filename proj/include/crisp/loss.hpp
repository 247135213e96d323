#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

// Squared geodesic distance on the c-torus: sum_j min(|y_j - z_j|, 2*pi - |y_j - z_j|)^2.
inline double circle_dist_sq(const Vector& y, const Vector& z) {
    if (y.size() != z.size()) throw DataError("circle_dist_sq: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double w = wrap_signed(y[j] - z[j]);
        acc += w * w;
    }
    return acc;
}

enum class LossKind { fk, radians };

inline std::string to_string(LossKind k) { return k == LossKind::fk ? "fk" : "radians"; }

inline LossKind loss_kind_from_string(const std::string& s) {
    if (s == "fk") return LossKind::fk;
    if (s == "radians") return LossKind::radians;
    throw DataError("unknown loss kind: '" + s + "'");
}

// Structured loss configuration. The fk kind compares configurations through the
// chain's (possibly biased) forward map; radians compares joint angles directly.
struct LossSpec {
    LossKind kind = LossKind::fk;
    std::optional<KinematicChain> chain; // required for fk
    double position_weight = 1.0;
    double orientation_weight = 1.0;

    static LossSpec forward_kinematics(KinematicChain chain, double w_pos = 1.0,
                                       double w_orn = 1.0) {
        LossSpec s;
        s.kind = LossKind::fk;
        s.chain = std::move(chain);
        s.position_weight = w_pos;
        s.orientation_weight = w_orn;
        return s;
    }

    static LossSpec radians() {
        LossSpec s;
        s.kind = LossKind::radians;
        return s;
    }

    void validate() const {
        if (kind == LossKind::fk && !chain.has_value())
            throw DataError("loss: fk kind requires a chain");
        if (position_weight < 0.0 || orientation_weight < 0.0)
            throw DataError("loss: weights must be nonnegative");
    }
};

// Forward-kinematics loss between two configurations:
//   w_p * ||g_p(y) - g_p(y_i)||^2 + w_o * d_O(g_o(y), g_o(y_i))^2
inline double fk_loss(const LossSpec& spec, const Vector& y, const Vector& y_i) {
    spec.validate();
    if (spec.kind != LossKind::fk) throw DataError("fk_loss: spec kind is not fk");
    const Pose a = spec.chain->forward(y);
    const Pose b = spec.chain->forward(y_i);
    return spec.position_weight * (a.position - b.position).squaredNorm() +
           spec.orientation_weight * circle_dist_sq(a.orientation, b.orientation);
}

// Circle geodesic loss applied directly to joint angles.
inline double radians_loss(const Vector& y, const Vector& y_i) {
    return circle_dist_sq(y, y_i);
}

// Evaluator for F_alpha(y) = sum_i alpha_i * loss(y, y_i) with its analytic gradient.
// Training-side forward kinematics are precomputed once, so each evaluation costs
// one FK + Jacobian plus O(n * (d + c)) vectorized work.
class WeightedObjective {
public:
    WeightedObjective(LossSpec spec, Vector alpha, Matrix train_configs)
        : spec_(std::move(spec)), alpha_(std::move(alpha)), ys_(std::move(train_configs)) {
        spec_.validate();
        if (alpha_.size() != ys_.rows())
            throw DataError("weighted objective: alpha length != number of training configs");
        if (spec_.kind == LossKind::fk) {
            const auto& chain = *spec_.chain;
            const Eigen::Index n = ys_.rows();
            train_pos_.resize(n, chain.position_dim());
            train_orn_.resize(n, chain.orientation_dim());
            for (Eigen::Index i = 0; i < n; ++i) {
                const Pose p = chain.forward(ys_.row(i).transpose());
                train_pos_.row(i) = p.position;
                train_orn_.row(i) = p.orientation;
            }
        }
    }

    // Same evaluator with the loss-chain poses of the training configs supplied by
    // the caller (e.g. cached on a trained model) instead of recomputed here.
    WeightedObjective(LossSpec spec, Vector alpha, Matrix train_configs, Matrix train_pos,
                      Matrix train_orn)
        : spec_(std::move(spec)),
          alpha_(std::move(alpha)),
          ys_(std::move(train_configs)),
          train_pos_(std::move(train_pos)),
          train_orn_(std::move(train_orn)) {
        spec_.validate();
        if (alpha_.size() != ys_.rows())
            throw DataError("weighted objective: alpha length != number of training configs");
        if (spec_.kind == LossKind::fk &&
            (train_pos_.rows() != ys_.rows() || train_orn_.rows() != ys_.rows()))
            throw DataError("weighted objective: cached pose rows != training configs");
    }

    Eigen::Index config_dim() const {
        return spec_.kind == LossKind::fk ? spec_.chain->joint_count() : ys_.cols();
    }

    std::pair<double, Vector> operator()(const Vector& y) const {
        return spec_.kind == LossKind::fk ? eval_fk(y) : eval_radians(y);
    }

private:
    std::pair<double, Vector> eval_fk(const Vector& y) const {
        const auto& chain = *spec_.chain;
        const Pose pose = chain.forward(y);
        const auto jac = chain.jacobian_flagged(y);
        const Eigen::Index d = pose.position_dim();
        const Eigen::Index c = pose.orientation_dim();
        const double w_p = spec_.position_weight;
        const double w_o = spec_.orientation_weight;

        double value = 0.0;
        Vector grad = Vector::Zero(y.size());

        // position term: sum_i alpha_i ||p - p_i||^2
        Matrix diffs = (-train_pos_).rowwise() + pose.position.transpose();
        value += w_p * alpha_.dot(diffs.rowwise().squaredNorm());
        grad += jac.matrix.topRows(d).transpose() * (2.0 * w_p * (diffs.transpose() * alpha_));

        // orientation term: sum_i alpha_i sum_j wrap(theta_j - theta_ij)^2
        Vector dtheta = Vector::Zero(c);
        for (Eigen::Index j = 0; j < c; ++j) {
            double v = 0.0, g = 0.0;
            const double theta = pose.orientation[j];
            for (Eigen::Index i = 0; i < train_orn_.rows(); ++i) {
                const double w = wrap_signed(theta - train_orn_(i, j));
                v += alpha_[i] * w * w;
                g += alpha_[i] * w;
            }
            value += w_o * v;
            dtheta[j] = 2.0 * w_o * g;
        }
        if (!jac.orientation_singular)
            grad += jac.matrix.bottomRows(c).transpose() * dtheta;
        return {value, std::move(grad)};
    }

    std::pair<double, Vector> eval_radians(const Vector& y) const {
        if (y.size() != ys_.cols()) throw DataError("weighted objective: config dimension mismatch");
        double value = 0.0;
        Vector grad = Vector::Zero(y.size());
        for (Eigen::Index i = 0; i < ys_.rows(); ++i) {
            for (Eigen::Index j = 0; j < y.size(); ++j) {
                const double w = wrap_signed(y[j] - ys_(i, j));
                value += alpha_[i] * w * w;
                grad[j] += 2.0 * alpha_[i] * w;
            }
        }
        return {value, std::move(grad)};
    }

    LossSpec spec_;
    Vector alpha_;
    Matrix ys_;
    Matrix train_pos_; // fk only: loss-chain poses of training configs
    Matrix train_orn_;
};

// One-shot form of the evaluator, matching the operation contract directly.
inline std::pair<double, Vector> weighted_objective(const LossSpec& spec, const Vector& alpha,
                                                    const Matrix& train_configs, const Vector& y) {
    return WeightedObjective(spec, alpha, train_configs)(y);
}

} // namespace crisp
