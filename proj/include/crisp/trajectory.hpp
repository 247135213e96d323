#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

enum class TrajectoryKind { eight, circle2d, circle3d, spiral };

inline std::string to_string(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::eight: return "eight";
        case TrajectoryKind::circle2d: return "circle2d";
        case TrajectoryKind::circle3d: return "circle3d";
        case TrajectoryKind::spiral: return "spiral";
    }
    return "?";
}

inline TrajectoryKind trajectory_kind_from_string(const std::string& s) {
    if (s == "eight") return TrajectoryKind::eight;
    if (s == "circle2d") return TrajectoryKind::circle2d;
    if (s == "circle3d") return TrajectoryKind::circle3d;
    if (s == "spiral") return TrajectoryKind::spiral;
    throw DataError("unknown trajectory kind: '" + s + "'");
}

struct TrajectoryParams {
    int count = 64; // L

    // planar kinds
    Eigen::Vector2d center2{0.0, 5.5}; // eight default; circle2d defaults to (0, 6.5)
    double amplitude = 2.0;            // eight half-width
    double radius2 = 2.5;              // circle2d radius
    bool tangent_heading = false;      // fixed heading by default; tangent is optional
    double heading = M_PI / 4;         // fixed planar heading target

    // spatial kinds
    Eigen::Vector3d center3{0.0, 0.044, -0.55};
    double radius3 = 0.03;
    double height = 0.06; // spiral total rise
    double turns = 2.0;   // spiral revolutions
    double yaw = M_PI / 4;
    double pitch = 0.0;
    double roll = 0.0;
};

inline TrajectoryParams default_params(TrajectoryKind kind) {
    TrajectoryParams p;
    if (kind == TrajectoryKind::circle2d) p.center2 = Eigen::Vector2d(0.0, 6.5);
    return p;
}

struct Trajectory {
    std::vector<Pose> points;
    std::string name;
    std::string params_text;

    Eigen::Index size() const { return static_cast<Eigen::Index>(points.size()); }

    void validate() const {
        if (points.size() < 2) throw DataError("trajectory: needs at least 2 points");
        for (std::size_t i = 1; i < points.size(); ++i) {
            const bool same_pos = (points[i].position - points[i - 1].position).norm() == 0.0;
            const bool same_orn =
                (points[i].orientation - points[i - 1].orientation).norm() == 0.0;
            if (same_pos && same_orn)
                throw DataError("trajectory: consecutive points identical at index " +
                                std::to_string(i));
        }
    }
};

inline Trajectory make_trajectory(TrajectoryKind kind, const TrajectoryParams& params) {
    if (params.count < 2) throw DataError("trajectory: count must be >= 2");
    const int L = params.count;
    Trajectory traj;
    traj.name = to_string(kind);

    const auto planar_pose = [&](double px, double py, double hd) {
        Pose p;
        p.position = Eigen::Vector2d(px, py);
        p.orientation = Vector::Constant(1, wrap_two_pi(hd));
        return p;
    };
    const auto spatial_pose = [&](const Eigen::Vector3d& pos) {
        Pose p;
        p.position = pos;
        p.orientation = (Vector(3) << wrap_two_pi(params.yaw), wrap_two_pi(params.pitch),
                         wrap_two_pi(params.roll))
                            .finished();
        return p;
    };

    std::ostringstream meta;
    switch (kind) {
        case TrajectoryKind::eight: {
            // Gerono lemniscate: center + a * (sin t, sin t cos t), t uniform on [0, 2*pi).
            if (!(params.amplitude > 0.0)) throw DataError("eight: amplitude must be positive");
            for (int i = 0; i < L; ++i) {
                const double t = kTwoPi * i / L;
                const double px = params.center2[0] + params.amplitude * std::sin(t);
                const double py = params.center2[1] + params.amplitude * std::sin(t) * std::cos(t);
                const double hd = params.tangent_heading
                                      ? std::atan2(params.amplitude * std::cos(2.0 * t),
                                                   params.amplitude * std::cos(t))
                                      : params.heading;
                traj.points.push_back(planar_pose(px, py, hd));
            }
            meta << "center=(" << params.center2[0] << "," << params.center2[1]
                 << ") a=" << params.amplitude;
            break;
        }
        case TrajectoryKind::circle2d: {
            if (!(params.radius2 > 0.0)) throw DataError("circle2d: radius must be positive");
            for (int i = 0; i < L; ++i) {
                const double t = kTwoPi * i / L;
                const double px = params.center2[0] + params.radius2 * std::cos(t);
                const double py = params.center2[1] + params.radius2 * std::sin(t);
                const double hd = params.tangent_heading ? t + M_PI / 2 : params.heading;
                traj.points.push_back(planar_pose(px, py, hd));
            }
            meta << "center=(" << params.center2[0] << "," << params.center2[1]
                 << ") r=" << params.radius2;
            break;
        }
        case TrajectoryKind::circle3d: {
            if (!(params.radius3 > 0.0)) throw DataError("circle3d: radius must be positive");
            for (int i = 0; i < L; ++i) {
                const double t = kTwoPi * i / L;
                traj.points.push_back(spatial_pose(
                    params.center3 + params.radius3 * Eigen::Vector3d(std::cos(t), std::sin(t), 0.0)));
            }
            meta << "center=(" << params.center3.transpose() << ") r=" << params.radius3
                 << " yaw=" << params.yaw;
            break;
        }
        case TrajectoryKind::spiral: {
            if (!(params.radius3 > 0.0)) throw DataError("spiral: radius must be positive");
            for (int i = 0; i < L; ++i) {
                const double tau = static_cast<double>(i) / (L - 1); // height spans [0, height]
                const double t = params.turns * kTwoPi * tau;
                traj.points.push_back(spatial_pose(
                    params.center3 + Eigen::Vector3d(params.radius3 * std::cos(t),
                                                     params.radius3 * std::sin(t),
                                                     params.height * tau)));
            }
            meta << "center=(" << params.center3.transpose() << ") r=" << params.radius3
                 << " h=" << params.height << " turns=" << params.turns << " yaw=" << params.yaw;
            break;
        }
    }
    traj.params_text = meta.str();
    traj.validate();
    return traj;
}

inline Trajectory make_trajectory(TrajectoryKind kind) {
    return make_trajectory(kind, default_params(kind));
}

} // namespace crisp
