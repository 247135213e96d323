#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crisp/errors.hpp"
#include "crisp/util.hpp"

namespace crisp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Axis-aligned box of admissible joint configurations.
struct JointBox {
    Vector lower;
    Vector upper;

    JointBox() = default;
    JointBox(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    Eigen::Index size() const { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size()) throw DataError("joint box: lower/upper size mismatch");
        for (Eigen::Index j = 0; j < lower.size(); ++j) {
            if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
                throw DataError("joint box: non-finite bound");
            if (lower[j] > upper[j])
                throw DataError("joint box: lower > upper at joint " + std::to_string(j));
            if (upper[j] - lower[j] > kTwoPi + 1e-12)
                throw DataError("joint box: interval wider than 2*pi at joint " + std::to_string(j));
        }
    }

    bool contains(const Vector& y, double tol = 0.0) const {
        if (y.size() != lower.size()) return false;
        return (y.array() >= lower.array() - tol).all() &&
               (y.array() <= upper.array() + tol).all();
    }
};

// Componentwise projection onto the box.
inline Vector clamp_to_box(const Vector& y, const JointBox& box) {
    if (y.size() != box.size()) throw DataError("clamp_to_box: dimension mismatch");
    return y.cwiseMax(box.lower).cwiseMin(box.upper);
}

// End-effector pose: position in R^d plus orientation as c wrapped angles in [0, 2*pi),
// with (d, c) = (2, 1) for planar chains and (3, 3) for spatial ones (ZYX Euler angles).
struct Pose {
    Vector position;
    Vector orientation;

    Eigen::Index position_dim() const { return position.size(); }
    Eigen::Index orientation_dim() const { return orientation.size(); }

    void validate() const {
        const auto d = position.size();
        const auto c = orientation.size();
        if (!((d == 2 && c == 1) || (d == 3 && c == 3)))
            throw DataError("pose: unsupported dimensions (d=" + std::to_string(d) +
                            ", c=" + std::to_string(c) + ")");
        if (!position.allFinite()) throw DataError("pose: non-finite position");
        for (Eigen::Index j = 0; j < c; ++j)
            if (!(orientation[j] >= 0.0 && orientation[j] < kTwoPi))
                throw DataError("pose: orientation angle not wrapped to [0, 2*pi)");
    }
};

// Fixed model misspecification: joint_bias is added to the angles before FK,
// link_bias (signed meters, one entry per link) to the nominal link geometry.
// For planar links the bias goes on the length; for DH rows on both translation
// parameters a and d.
struct BiasSpec {
    Vector joint_bias;
    Vector link_bias;

    static BiasSpec zero(Eigen::Index joints) {
        return BiasSpec{Vector::Zero(joints), Vector::Zero(joints)};
    }

    bool is_zero() const {
        return joint_bias.isZero(0.0) && link_bias.isZero(0.0);
    }
};

// One modified-DH row (Craig convention):
//   T_i = RotX(alpha) * TransX(a) * RotZ(theta_offset + q_i) * TransZ(d)
struct DhRow {
    double a = 0.0;
    double d = 0.0;
    double alpha = 0.0;
    double theta_offset = 0.0;
};

enum class ChainKind { planar, dh };

// Serial revolute-joint chain. Immutable after construction; forward() and
// jacobian() are pure and safe to call concurrently.
class KinematicChain {
public:
    static KinematicChain planar(std::vector<double> lengths, JointBox limits,
                                 BiasSpec bias = {}) {
        KinematicChain c;
        c.kind_ = ChainKind::planar;
        c.lengths_ = std::move(lengths);
        c.limits_ = std::move(limits);
        c.bias_ = std::move(bias);
        c.finish_init();
        return c;
    }

    static KinematicChain dh(std::vector<DhRow> rows, JointBox limits, BiasSpec bias = {}) {
        KinematicChain c;
        c.kind_ = ChainKind::dh;
        c.rows_ = std::move(rows);
        c.limits_ = std::move(limits);
        c.bias_ = std::move(bias);
        c.finish_init();
        return c;
    }

    ChainKind kind() const { return kind_; }
    Eigen::Index joint_count() const { return limits_.size(); }
    Eigen::Index position_dim() const { return kind_ == ChainKind::planar ? 2 : 3; }
    Eigen::Index orientation_dim() const { return kind_ == ChainKind::planar ? 1 : 3; }
    const JointBox& limits() const { return limits_; }
    const BiasSpec& bias() const { return bias_; }
    const std::vector<double>& link_lengths() const { return lengths_; }
    const std::vector<DhRow>& dh_rows() const { return rows_; }

    KinematicChain with_bias(BiasSpec bias) const {
        KinematicChain c = *this;
        c.bias_ = std::move(bias);
        c.check_bias_sizes();
        return c;
    }

    KinematicChain nominal() const { return with_bias(BiasSpec::zero(joint_count())); }

    // Pose of the terminal frame, bias applied, orientation wrapped to [0, 2*pi).
    Pose forward(const Vector& y) const {
        check_config(y);
        return kind_ == ChainKind::planar ? forward_planar(y) : forward_dh(y);
    }

    struct JacobianResult {
        Matrix matrix;                     // (d+c) x J: position rows then orientation-angle rows
        bool orientation_singular = false; // Euler rate map degenerate (|cos(pitch)| ~ 0)
    };

    JacobianResult jacobian_flagged(const Vector& y) const {
        check_config(y);
        return kind_ == ChainKind::planar ? jacobian_planar(y) : jacobian_dh(y);
    }

    Matrix jacobian(const Vector& y) const { return jacobian_flagged(y).matrix; }

    // Upper bound on reachable distance from the base: sum of biased link lengths.
    double max_reach() const {
        double total = 0.0;
        if (kind_ == ChainKind::planar) {
            for (std::size_t i = 0; i < lengths_.size(); ++i)
                total += std::abs(lengths_[i] + bias_.link_bias[static_cast<Eigen::Index>(i)]);
        } else {
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                const double b = bias_.link_bias[static_cast<Eigen::Index>(i)];
                total += std::hypot(rows_[i].a + b, rows_[i].d + b);
            }
        }
        return total;
    }

    // Chain-definition text. Verbatim source when parsed from text/file, canonical
    // otherwise. Bias is never part of the text format.
    const std::string& text() const { return text_; }

    static KinematicChain from_text(const std::string& text);

    static KinematicChain from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open chain file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

private:
    KinematicChain() = default;

    void finish_init() {
        limits_.validate();
        const auto joints = static_cast<std::size_t>(limits_.size());
        if (joints == 0) throw DataError("chain: needs at least one joint");
        if (kind_ == ChainKind::planar) {
            if (lengths_.size() != joints) throw DataError("chain: link count != joint count");
            for (double len : lengths_)
                if (!(len >= 0.0)) throw DataError("chain: negative link length");
        } else {
            if (rows_.size() != joints) throw DataError("chain: DH row count != joint count");
        }
        if (bias_.joint_bias.size() == 0 && bias_.link_bias.size() == 0)
            bias_ = BiasSpec::zero(static_cast<Eigen::Index>(joints));
        check_bias_sizes();
        if (text_.empty()) text_ = canonical_text();
    }

    void check_bias_sizes() const {
        if (bias_.joint_bias.size() != joint_count() || bias_.link_bias.size() != joint_count())
            throw DataError("chain: bias vector size != joint count");
    }

    void check_config(const Vector& y) const {
        if (y.size() != joint_count())
            throw DataError("chain: config has " + std::to_string(y.size()) + " angles, expected " +
                            std::to_string(joint_count()));
    }

    Pose forward_planar(const Vector& y) const {
        const Eigen::Index n = joint_count();
        double cum = 0.0, px = 0.0, py = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            cum += y[j] + bias_.joint_bias[j];
            const double len = lengths_[static_cast<std::size_t>(j)] + bias_.link_bias[j];
            px += len * std::cos(cum);
            py += len * std::sin(cum);
        }
        Pose pose;
        pose.position = Eigen::Vector2d(px, py);
        pose.orientation = Vector::Constant(1, wrap_two_pi(cum));
        return pose;
    }

    JacobianResult jacobian_planar(const Vector& y) const {
        const Eigen::Index n = joint_count();
        Vector cum(n);
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            acc += y[j] + bias_.joint_bias[j];
            cum[j] = acc;
        }
        JacobianResult out;
        out.matrix = Matrix::Zero(3, n);
        // suffix sums: d(pos)/d(theta_j) = sum_{k>=j} len_k * (-sin, cos)(cum_k)
        double sx = 0.0, sy = 0.0;
        for (Eigen::Index j = n - 1; j >= 0; --j) {
            const double len = lengths_[static_cast<std::size_t>(j)] + bias_.link_bias[j];
            sx += -len * std::sin(cum[j]);
            sy += len * std::cos(cum[j]);
            out.matrix(0, j) = sx;
            out.matrix(1, j) = sy;
            out.matrix(2, j) = 1.0; // heading is the plain sum of joint angles
        }
        return out;
    }

    // Accumulates frame i's rotation and origin into (r, p):
    //   T_i = RotX(alpha) * TransX(a) * RotZ(theta) * TransZ(d)
    void advance_frame(std::size_t i, double q, Eigen::Matrix3d& r, Eigen::Vector3d& p) const {
        const double b = bias_.link_bias[static_cast<Eigen::Index>(i)];
        const double a = rows_[i].a + b;
        const double d = rows_[i].d + b;
        const double ca = std::cos(rows_[i].alpha), sa = std::sin(rows_[i].alpha);
        const double th = rows_[i].theta_offset + q;
        const double ct = std::cos(th), st = std::sin(th);
        Eigen::Matrix3d rot;
        rot << ct, -st, 0.0,
               ca * st, ca * ct, -sa,
               sa * st, sa * ct, ca;
        const Eigen::Vector3d trans(a, -sa * d, ca * d);
        p += r * trans;
        r *= rot;
    }

    static Eigen::Vector3d euler_zyx(const Eigen::Matrix3d& r) {
        const double yaw = std::atan2(r(1, 0), r(0, 0));
        const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
        const double roll = std::atan2(r(2, 1), r(2, 2));
        return {yaw, pitch, roll};
    }

public:
    // Terminal frame of a spatial chain without the Euler extraction; the hot path
    // for workspace rejection sampling.
    void forward_frame(const Vector& y, Eigen::Matrix3d& r, Eigen::Vector3d& p) const {
        check_config(y);
        if (kind_ != ChainKind::dh) throw DataError("forward_frame: spatial chains only");
        r.setIdentity();
        p.setZero();
        for (std::size_t i = 0; i < rows_.size(); ++i)
            advance_frame(i, y[static_cast<Eigen::Index>(i)] +
                                 bias_.joint_bias[static_cast<Eigen::Index>(i)],
                          r, p);
    }

    static Pose pose_from_frame(const Eigen::Matrix3d& r, const Eigen::Vector3d& p) {
        const Eigen::Vector3d angles = euler_zyx(r);
        Pose pose;
        pose.position = p;
        pose.orientation =
            (Vector(3) << wrap_two_pi(angles[0]), wrap_two_pi(angles[1]), wrap_two_pi(angles[2]))
                .finished();
        return pose;
    }

private:
    Pose forward_dh(const Vector& y) const {
        Eigen::Matrix3d r;
        Eigen::Vector3d p;
        forward_frame(y, r, p);
        return pose_from_frame(r, p);
    }

    JacobianResult jacobian_dh(const Vector& y) const {
        const Eigen::Index n = joint_count();
        std::vector<Eigen::Matrix3d> rot(static_cast<std::size_t>(n));
        std::vector<Eigen::Vector3d> org(static_cast<std::size_t>(n));
        Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (Eigen::Index j = 0; j < n; ++j) {
            advance_frame(static_cast<std::size_t>(j), y[j] + bias_.joint_bias[j], r, p);
            rot[static_cast<std::size_t>(j)] = r;
            org[static_cast<std::size_t>(j)] = p;
        }
        const Eigen::Vector3d p_ee = p;

        // Geometric Jacobian. In modified DH, joint j rotates about the z-axis of
        // frame j, whose origin lies on the same axis.
        Matrix jp(3, n), jw(3, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Vector3d z = rot[static_cast<std::size_t>(j)].col(2);
            const Eigen::Vector3d o = org[static_cast<std::size_t>(j)];
            jp.col(j) = z.cross(p_ee - o);
            jw.col(j) = z;
        }

        // ZYX Euler angle rates from angular velocity: [yaw';pitch';roll'] = Einv * omega.
        const Eigen::Vector3d angles = euler_zyx(r);
        const double cy = std::cos(angles[0]), sy = std::sin(angles[0]);
        const double sp = std::sin(angles[1]);
        double cp = std::cos(angles[1]);
        JacobianResult out;
        if (std::abs(cp) < kEulerSingularTol) {
            out.orientation_singular = true;
            cp = (cp < 0.0 ? -kEulerSingularTol : kEulerSingularTol); // one-sided limit
        }
        Eigen::Matrix3d einv;
        einv << cy * sp / cp, sy * sp / cp, 1.0,
                -sy, cy, 0.0,
                cy / cp, sy / cp, 0.0;

        out.matrix.resize(6, n);
        out.matrix.topRows<3>() = jp;
        out.matrix.bottomRows<3>() = einv * jw;
        return out;
    }

    std::string canonical_text() const {
        std::ostringstream out;
        if (kind_ == ChainKind::planar) {
            out << "planar\n";
            for (Eigen::Index j = 0; j < joint_count(); ++j)
                out << format_double(lengths_[static_cast<std::size_t>(j)]) << ' '
                    << format_double(limits_.lower[j]) << ' ' << format_double(limits_.upper[j])
                    << '\n';
        } else {
            out << "dh\n";
            for (Eigen::Index j = 0; j < joint_count(); ++j) {
                const auto& r = rows_[static_cast<std::size_t>(j)];
                out << format_double(r.a) << ' ' << format_double(r.d) << ' '
                    << format_double(r.alpha) << ' ' << format_double(r.theta_offset) << ' '
                    << format_double(limits_.lower[j]) << ' ' << format_double(limits_.upper[j])
                    << '\n';
            }
        }
        return out.str();
    }

    static constexpr double kEulerSingularTol = 1e-9;

    ChainKind kind_ = ChainKind::planar;
    std::vector<double> lengths_; // planar only
    std::vector<DhRow> rows_;     // dh only
    JointBox limits_;
    BiasSpec bias_;
    std::string text_;
};

inline KinematicChain KinematicChain::from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line, kind_token;
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        if (kind_token.empty()) {
            if (ls >> kind_token) {
                if (kind_token != "planar" && kind_token != "dh")
                    throw DataError("chain text line " + std::to_string(line_no) +
                                    ": expected 'planar' or 'dh', got '" + kind_token + "'");
            }
            continue;
        }
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) vals.push_back(parse_double(tok, "chain text line " + std::to_string(line_no)));
        if (vals.empty()) continue;
        const std::size_t want = kind_token == "planar" ? 3 : 6;
        if (vals.size() != want)
            throw DataError("chain text line " + std::to_string(line_no) + ": expected " +
                            std::to_string(want) + " values, got " + std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }
    if (kind_token.empty()) throw DataError("chain text: missing 'planar'/'dh' header line");
    if (rows.empty()) throw DataError("chain text: no joint rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    Vector lower(n), upper(n);
    KinematicChain chain;
    if (kind_token == "planar") {
        std::vector<double> lengths(rows.size());
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& r = rows[static_cast<std::size_t>(j)];
            lengths[static_cast<std::size_t>(j)] = r[0];
            lower[j] = r[1];
            upper[j] = r[2];
        }
        chain = planar(std::move(lengths), JointBox(std::move(lower), std::move(upper)));
    } else {
        std::vector<DhRow> dh_rows(rows.size());
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& r = rows[static_cast<std::size_t>(j)];
            dh_rows[static_cast<std::size_t>(j)] = DhRow{r[0], r[1], r[2], r[3]};
            lower[j] = r[4];
            upper[j] = r[5];
        }
        chain = dh(std::move(dh_rows), JointBox(std::move(lower), std::move(upper)));
    }
    chain.text_ = text; // keep the source verbatim
    return chain;
}

// The 5-link planar arm: 2 m links, limits [0,pi] x [-pi,0] x [-pi/2,pi/2] x [-pi,0] x [-pi/2,pi/2].
inline KinematicChain make_planar5() {
    const double pi = M_PI;
    Vector lower(5), upper(5);
    lower << 0.0, -pi, -pi / 2, -pi, -pi / 2;
    upper << pi, 0.0, pi / 2, 0.0, pi / 2;
    return KinematicChain::planar({2.0, 2.0, 2.0, 2.0, 2.0},
                                  JointBox(std::move(lower), std::move(upper)));
}

// Loads a 7-joint spatial chain from a DH table file (see chain text format).
inline KinematicChain make_panda(const std::string& dh_file) {
    KinematicChain chain = KinematicChain::from_file(dh_file);
    if (chain.kind() != ChainKind::dh)
        throw DataError("panda chain file must use the 'dh' format: " + dh_file);
    if (chain.joint_count() != 7)
        throw DataError("panda chain file must have 7 rows, got " +
                        std::to_string(chain.joint_count()));
    return chain;
}

} // namespace crisp
