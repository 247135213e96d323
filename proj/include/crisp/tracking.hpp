#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crisp/dls.hpp"
#include "crisp/errors.hpp"
#include "crisp/estimator.hpp"
#include "crisp/loss.hpp"
#include "crisp/trajectory.hpp"

namespace crisp {

struct TrackingRow {
    Pose target;
    Vector joints;
    Pose realized; // from the evaluation (nominal) chain
    double position_error = 0.0;
    double orientation_error = 0.0;
};

struct RmseSummary {
    double pos_rmse = 0.0;
    double orn_rmse = 0.0;
    double pos_std = 0.0;
    double orn_std = 0.0;
};

inline RmseSummary rmse(const std::vector<TrackingRow>& rows) {
    if (rows.empty()) throw DataError("rmse: no rows");
    const auto n = static_cast<double>(rows.size());
    double pos_sq = 0.0, orn_sq = 0.0, pos_sum = 0.0, orn_sum = 0.0;
    for (const auto& r : rows) {
        pos_sq += r.position_error * r.position_error;
        orn_sq += r.orientation_error * r.orientation_error;
        pos_sum += r.position_error;
        orn_sum += r.orientation_error;
    }
    RmseSummary s;
    s.pos_rmse = std::sqrt(pos_sq / n);
    s.orn_rmse = std::sqrt(orn_sq / n);
    const double pos_mean = pos_sum / n, orn_mean = orn_sum / n;
    double pos_var = 0.0, orn_var = 0.0;
    for (const auto& r : rows) {
        pos_var += (r.position_error - pos_mean) * (r.position_error - pos_mean);
        orn_var += (r.orientation_error - orn_mean) * (r.orientation_error - orn_mean);
    }
    s.pos_std = std::sqrt(pos_var / n);
    s.orn_std = std::sqrt(orn_var / n);
    return s;
}

struct TrackingReport {
    std::vector<TrackingRow> rows;
    RmseSummary summary;
    // config echo
    std::string trajectory_name;
    std::string model_hash;
    std::string bias_text;
    OptimizerConfig optimizer;
};

// Warm-started trajectory reconstruction: the first point uses the model's
// multi-start policy, every later point starts from the previous solution.
// Errors are always measured with eval_chain (the nominal model), regardless of
// the chain inside the model's loss.
inline TrackingReport track(const TrainedModel& model, const Trajectory& traj,
                            const OptimizerConfig& optimizer, const KinematicChain& eval_chain) {
    if (traj.points.empty()) throw DataError("track: empty trajectory");
    if (traj.points.front().position_dim() != model.position_dim())
        throw DataError("track: trajectory/model dimension mismatch");
    const KinematicChain nominal = eval_chain.nominal();

    TrackingReport report;
    report.trajectory_name = traj.name;
    report.model_hash = hash_hex(model.hash());
    report.optimizer = optimizer;
    if (model.loss().chain.has_value()) {
        const auto& b = model.loss().chain->bias();
        std::ostringstream bias;
        bias << "joint=[";
        for (Eigen::Index i = 0; i < b.joint_bias.size(); ++i)
            bias << (i ? "," : "") << format_double(b.joint_bias[i]);
        bias << "] link=[";
        for (Eigen::Index i = 0; i < b.link_bias.size(); ++i)
            bias << (i ? "," : "") << format_double(b.link_bias[i]);
        bias << "]";
        report.bias_text = bias.str();
    } else {
        report.bias_text = "none";
    }

    Vector previous;
    for (Eigen::Index t = 0; t < traj.size(); ++t) {
        PredictOptions opts;
        opts.optimizer = optimizer;
        if (t > 0) opts.warm_start = previous;
        Prediction pred;
        try {
            pred = predict(model, traj.points[static_cast<std::size_t>(t)], opts);
        } catch (const std::exception& e) {
            throw NumericError("track: point " + std::to_string(t) + ": " + e.what());
        }
        previous = pred.joints;

        TrackingRow row;
        row.target = traj.points[static_cast<std::size_t>(t)];
        row.joints = pred.joints;
        row.realized = nominal.forward(pred.joints);
        row.position_error = (row.realized.position - row.target.position).norm();
        row.orientation_error =
            std::sqrt(circle_dist_sq(row.realized.orientation, row.target.orientation));
        report.rows.push_back(std::move(row));
    }
    report.summary = rmse(report.rows);
    return report;
}

// Trajectory reconstruction with the iterative Jacobian baseline. The solver runs
// against solver_chain (possibly biased); the first point starts from `start`,
// later points from the previous solution; errors use eval_chain's nominal model.
inline TrackingReport track_dls(const KinematicChain& solver_chain, const Trajectory& traj,
                                const Vector& start, const DlsConfig& cfg,
                                const KinematicChain& eval_chain) {
    if (traj.points.empty()) throw DataError("track_dls: empty trajectory");
    if (traj.points.front().position_dim() != solver_chain.position_dim())
        throw DataError("track_dls: trajectory/chain dimension mismatch");
    const KinematicChain nominal = eval_chain.nominal();

    TrackingReport report;
    report.trajectory_name = traj.name;
    report.model_hash = "dls";
    {
        const auto& b = solver_chain.bias();
        std::ostringstream bias;
        bias << "joint=[";
        for (Eigen::Index i = 0; i < b.joint_bias.size(); ++i)
            bias << (i ? "," : "") << format_double(b.joint_bias[i]);
        bias << "] link=[";
        for (Eigen::Index i = 0; i < b.link_bias.size(); ++i)
            bias << (i ? "," : "") << format_double(b.link_bias[i]);
        bias << "]";
        report.bias_text = bias.str();
    }

    Vector current = start;
    for (Eigen::Index t = 0; t < traj.size(); ++t) {
        const IkResult res =
            solve_ik(solver_chain, traj.points[static_cast<std::size_t>(t)], current, cfg);
        current = res.joints;

        TrackingRow row;
        row.target = traj.points[static_cast<std::size_t>(t)];
        row.joints = res.joints;
        row.realized = nominal.forward(res.joints);
        row.position_error = (row.realized.position - row.target.position).norm();
        row.orientation_error =
            std::sqrt(circle_dist_sq(row.realized.orientation, row.target.orientation));
        report.rows.push_back(std::move(row));
    }
    report.summary = rmse(report.rows);
    return report;
}

// Training config whose nominal pose is embedded-closest to the target: a fair,
// deterministic starting point for the DLS baseline.
inline Vector nearest_config(const Dataset& data, const Pose& target) {
    const Vector q = embed_pose(target);
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const double dist = (embed_pose(data.pose(i)) - q).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    return data.joints.row(best).transpose();
}

// Per-point CSV: joint columns, target pose, realized pose, errors.
inline void write_report_csv(const TrackingReport& report, const std::string& path) {
    if (report.rows.empty()) throw DataError("report: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report file: " + path);

    const Eigen::Index j = report.rows.front().joints.size();
    const Eigen::Index d = report.rows.front().target.position_dim();
    const Eigen::Index c = report.rows.front().target.orientation_dim();
    out << "t";
    for (Eigen::Index k = 0; k < j; ++k) out << ",y" << (k + 1);
    for (Eigen::Index k = 0; k < d; ++k) out << ",t" << static_cast<char>('x' + k);
    for (Eigen::Index k = 0; k < c; ++k) out << ",to" << (k + 1);
    for (Eigen::Index k = 0; k < d; ++k) out << ",r" << static_cast<char>('x' + k);
    for (Eigen::Index k = 0; k < c; ++k) out << ",ro" << (k + 1);
    out << ",pos_err_m,orn_err_rad\n";
    for (std::size_t t = 0; t < report.rows.size(); ++t) {
        const auto& r = report.rows[t];
        out << t;
        for (Eigen::Index k = 0; k < j; ++k) out << ',' << format_double_17(r.joints[k]);
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double_17(r.target.position[k]);
        for (Eigen::Index k = 0; k < c; ++k)
            out << ',' << format_double_17(r.target.orientation[k]);
        for (Eigen::Index k = 0; k < d; ++k)
            out << ',' << format_double_17(r.realized.position[k]);
        for (Eigen::Index k = 0; k < c; ++k)
            out << ',' << format_double_17(r.realized.orientation[k]);
        out << ',' << format_double_17(r.position_error) << ','
            << format_double_17(r.orientation_error) << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

// Target-vs-realized positions only: t, tx, ty(, tz), rx, ry(, rz).
inline void write_plot_csv(const TrackingReport& report, const std::string& path) {
    if (report.rows.empty()) throw DataError("report: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write plot file: " + path);
    const Eigen::Index d = report.rows.front().target.position_dim();
    out << "t";
    for (Eigen::Index k = 0; k < d; ++k) out << ",t" << static_cast<char>('x' + k);
    for (Eigen::Index k = 0; k < d; ++k) out << ",r" << static_cast<char>('x' + k);
    out << '\n';
    for (std::size_t t = 0; t < report.rows.size(); ++t) {
        const auto& r = report.rows[t];
        out << t;
        for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double_17(r.target.position[k]);
        for (Eigen::Index k = 0; k < d; ++k)
            out << ',' << format_double_17(r.realized.position[k]);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

inline nlohmann::ordered_json report_summary_json(const TrackingReport& report) {
    nlohmann::ordered_json j;
    j["trajectory"] = report.trajectory_name;
    j["points"] = report.rows.size();
    j["pos_rmse_m"] = report.summary.pos_rmse;
    j["orn_rmse_rad"] = report.summary.orn_rmse;
    j["pos_std_m"] = report.summary.pos_std;
    j["orn_std_rad"] = report.summary.orn_std;
    j["model_hash"] = report.model_hash;
    j["bias"] = report.bias_text;
    j["optimizer"] = {{"max_iters", report.optimizer.max_iters},
                      {"gradient_tolerance", report.optimizer.gradient_tolerance},
                      {"objective_tolerance", report.optimizer.objective_tolerance},
                      {"memory", report.optimizer.memory}};
    return j;
}

inline void write_report_json(const TrackingReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write summary file: " + path);
    out << report_summary_json(report).dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

} // namespace crisp
