#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <utility>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

struct OptimizerConfig {
    int max_iters = 200;
    double gradient_tolerance = 1e-8;   // on the projected gradient inf-norm
    double objective_tolerance = 1e-12; // relative decrease per accepted step
    int memory = 10;                    // curvature pairs

    void validate() const {
        if (max_iters <= 0 || memory <= 0 || !(gradient_tolerance > 0.0) ||
            !(objective_tolerance > 0.0))
            throw DataError("optimizer config: all parameters must be positive");
    }
};

enum class Termination { gradient, objective, max_iters };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::gradient: return "gradient";
        case Termination::objective: return "objective";
        case Termination::max_iters: return "max_iters";
    }
    return "?";
}

struct OptResult {
    Vector minimizer;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    Termination termination = Termination::max_iters;
    bool start_clamped = false;
};

// Box-constrained limited-memory quasi-Newton minimization: projected-gradient
// identification of the active set, L-BFGS two-loop direction on the free
// variables, backtracking Armijo search along the projection arc. Every iterate
// satisfies the box exactly and accepted objective values never increase.
// Deterministic: identical inputs give identical outputs.
template <typename Objective>
OptResult minimize(Objective&& objective, const JointBox& box, const Vector& start,
                   const OptimizerConfig& cfg = {}) {
    cfg.validate();
    if (start.size() != box.size()) throw DataError("minimize: start/box dimension mismatch");

    OptResult res;
    Vector y = clamp_to_box(start, box);
    res.start_clamped = (y - start).cwiseAbs().maxCoeff() > 0.0;

    auto [f, g] = objective(y);
    if (!std::isfinite(f) || !g.allFinite())
        throw NumericError("minimize: objective non-finite at the start point");

    struct Pair {
        Vector s, v;
        double rho;
    };
    std::deque<Pair> history;

    const auto free_mask = [&](const Vector& grad) {
        Vector m = grad;
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            const bool at_lower = y[j] <= box.lower[j] && grad[j] > 0.0;
            const bool at_upper = y[j] >= box.upper[j] && grad[j] < 0.0;
            if (at_lower || at_upper) m[j] = 0.0;
        }
        return m;
    };

    const auto two_loop = [&](const Vector& grad) {
        Vector q = grad;
        std::deque<double> a(history.size());
        for (std::size_t i = history.size(); i-- > 0;) {
            a[i] = history[i].rho * history[i].s.dot(q);
            q -= a[i] * history[i].v;
        }
        if (!history.empty()) {
            const auto& last = history.back();
            q *= last.s.dot(last.v) / last.v.squaredNorm();
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double b = history[i].rho * history[i].v.dot(q);
            q += (a[i] - b) * history[i].s;
        }
        return q;
    };

    constexpr double kArmijoC = 1e-4;
    constexpr int kMaxBacktracks = 60;
    constexpr int kMaxNonFinite = 30;

    int nonfinite_retries = 0;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const Vector pg = free_mask(g);
        if (pg.size() == 0 || pg.cwiseAbs().maxCoeff() <= cfg.gradient_tolerance) {
            res.minimizer = std::move(y);
            res.value = f;
            res.iterations = iter;
            res.converged = true;
            res.termination = Termination::gradient;
            return res;
        }

        Vector d = -two_loop(pg);
        for (Eigen::Index j = 0; j < d.size(); ++j)
            if (pg[j] == 0.0) d[j] = 0.0;
        if (d.dot(g) >= 0.0) d = -pg; // keep a descent direction

        double t = history.empty() ? std::min(1.0, 1.0 / std::max(1e-12, pg.norm())) : 1.0;
        bool accepted = false;
        Vector y_new;
        double f_new = f;
        Vector g_new;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            y_new = clamp_to_box(y + t * d, box);
            auto [fv, gv] = objective(y_new);
            if (!std::isfinite(fv) || !gv.allFinite()) {
                if (++nonfinite_retries > kMaxNonFinite) {
                    res.minimizer = std::move(y);
                    res.value = f;
                    res.iterations = iter;
                    res.converged = false;
                    res.termination = Termination::max_iters;
                    return res;
                }
                t *= 0.5;
                continue;
            }
            if (fv <= f + kArmijoC * g.dot(y_new - y)) {
                f_new = fv;
                g_new = std::move(gv);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No decrease achievable at the rounding floor.
            res.minimizer = std::move(y);
            res.value = f;
            res.iterations = iter;
            res.converged = true;
            res.termination = Termination::objective;
            return res;
        }

        Vector s = y_new - y;
        Vector v = g_new - g;
        const double decrease = f - f_new;
        y = std::move(y_new);
        f = f_new;
        g = std::move(g_new);

        const double sv = s.dot(v);
        if (sv > 1e-10 * s.norm() * v.norm()) {
            history.push_back({std::move(s), std::move(v), 1.0 / sv});
            if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
        }

        if (decrease <= cfg.objective_tolerance * std::max(1.0, std::abs(f))) {
            res.minimizer = std::move(y);
            res.value = f;
            res.iterations = iter + 1;
            res.converged = true;
            res.termination = Termination::objective;
            return res;
        }
    }

    res.minimizer = std::move(y);
    res.value = f;
    res.iterations = cfg.max_iters;
    res.converged = false;
    res.termination = Termination::max_iters;
    return res;
}

} // namespace crisp
