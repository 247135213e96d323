#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "crisp/errors.hpp"
#include "crisp/kinematics.hpp"

namespace crisp {

// Sampling region for dataset generation: either the whole joint box, or a solid
// torus in the workspace (axis parallel to world z) combined with a band of
// allowed end-effector yaw values.
struct Region {
    enum class Kind { box, torus };

    Kind kind = Kind::box;
    Eigen::Vector3d center{0.0, 0.0, 0.0};
    double ring_radius = 0.0;
    double tube_radius = 0.0;
    std::vector<double> yaws;   // empty = unconstrained orientation
    double yaw_tolerance = 0.05;

    static Region box() { return Region{}; }

    static Region torus(const Eigen::Vector3d& center, double ring_radius, double tube_radius,
                        std::vector<double> yaws = {}, double yaw_tolerance = 0.05) {
        if (!(ring_radius > 0.0) || !(tube_radius > 0.0))
            throw DataError("torus region: radii must be positive");
        Region r;
        r.kind = Kind::torus;
        r.center = center;
        r.ring_radius = ring_radius;
        r.tube_radius = tube_radius;
        r.yaws = std::move(yaws);
        r.yaw_tolerance = yaw_tolerance;
        return r;
    }

    bool accepts_position(const Eigen::Vector3d& p) const {
        if (kind == Kind::box) return true;
        const double dx = p[0] - center[0];
        const double dy = p[1] - center[1];
        const double dz = p[2] - center[2];
        const double ring = std::sqrt(dx * dx + dy * dy) - ring_radius;
        return ring * ring + dz * dz <= tube_radius * tube_radius;
    }

    bool accepts_yaw(double yaw) const {
        if (kind == Kind::box || yaws.empty()) return true;
        for (double allowed : yaws)
            if (std::abs(wrap_signed(yaw - allowed)) <= yaw_tolerance) return true;
        return false;
    }

    bool accepts(const Pose& pose) const {
        if (kind == Kind::box) return true;
        return accepts_position(pose.position) && accepts_yaw(pose.orientation[0]);
    }

    std::string to_text() const {
        if (kind == Kind::box) return "box";
        std::ostringstream out;
        out << "torus " << format_double(center[0]) << ' ' << format_double(center[1]) << ' '
            << format_double(center[2]) << ' ' << format_double(ring_radius) << ' '
            << format_double(tube_radius) << ' ' << format_double(yaw_tolerance);
        for (double y : yaws) out << ' ' << format_double(y);
        return out.str();
    }

    static Region from_text(const std::string& text) {
        std::istringstream in(text);
        std::string kind;
        in >> kind;
        if (kind == "box") return box();
        if (kind != "torus") throw DataError("region: unknown kind '" + kind + "'");
        std::vector<double> vals;
        std::string tok;
        while (in >> tok) vals.push_back(parse_double(tok, "region text"));
        if (vals.size() < 6) throw DataError("region: torus needs at least 6 numbers");
        Region r;
        r.kind = Kind::torus;
        r.center = Eigen::Vector3d(vals[0], vals[1], vals[2]);
        r.ring_radius = vals[3];
        r.tube_radius = vals[4];
        r.yaw_tolerance = vals[5];
        r.yaws.assign(vals.begin() + 6, vals.end());
        return r;
    }
};

// n (pose, joint configuration) pairs plus the generation metadata required to
// reproduce them: chain text, seed, sampling region.
struct Dataset {
    Matrix joints;       // n x J
    Matrix positions;    // n x d
    Matrix orientations; // n x c
    std::string chain_text;
    std::uint64_t seed = 0;
    Region region;

    Eigen::Index size() const { return joints.rows(); }
    Eigen::Index config_dim() const { return joints.cols(); }
    Eigen::Index position_dim() const { return positions.cols(); }
    Eigen::Index orientation_dim() const { return orientations.cols(); }

    Pose pose(Eigen::Index i) const {
        return Pose{positions.row(i).transpose(), orientations.row(i).transpose()};
    }

    std::vector<Pose> poses() const {
        std::vector<Pose> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (Eigen::Index i = 0; i < size(); ++i) out.push_back(pose(i));
        return out;
    }

    KinematicChain chain() const { return KinematicChain::from_text(chain_text); }

    std::string to_csv() const;
    std::uint64_t content_hash() const { return fnv1a(to_csv()); }
};

namespace detail {

inline Vector sample_config(const JointBox& box, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    Vector y(box.size());
    for (Eigen::Index j = 0; j < box.size(); ++j) y[j] = rng.next_in(box.lower[j], box.upper[j]);
    return y;
}

} // namespace detail

// Uniform joint-space sampling. Box region: n draws, poses from the nominal chain.
// Torus region: rejection sampling over the box, accepted in trial-counter order;
// per-trial RNG streams keep the result identical however trials are batched
// across threads. Throws if the measured acceptance rate falls below 1e-6.
inline Dataset sample_dataset(const KinematicChain& chain, Eigen::Index n, const Region& region,
                              std::uint64_t seed) {
    if (n < 1) throw DataError("sample_dataset: n must be >= 1");
    const KinematicChain nominal = chain.nominal();
    const JointBox& box = nominal.limits();
    const Eigen::Index joints = nominal.joint_count();

    Dataset ds;
    ds.chain_text = nominal.text();
    ds.seed = seed;
    ds.region = region;
    ds.joints.resize(n, joints);
    ds.positions.resize(n, nominal.position_dim());
    ds.orientations.resize(n, nominal.orientation_dim());

    if (region.kind == Region::Kind::box) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector y = detail::sample_config(box, seed, static_cast<std::uint64_t>(i));
            const Pose p = nominal.forward(y);
            ds.joints.row(i) = y;
            ds.positions.row(i) = p.position;
            ds.orientations.row(i) = p.orientation;
        }
        return ds;
    }

    if (nominal.position_dim() != 3)
        throw DataError("sample_dataset: torus region requires a spatial chain");

    constexpr std::uint64_t kBlock = 1 << 16;
    constexpr double kMinAcceptance = 1e-6;
    // enough trials that a viable region (rate >= 2e-6) has negligible odds of a
    // spurious low estimate
    constexpr std::uint64_t kMinTrialsBeforeCheck = 16'000'000;

    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t next_counter = 0;
    Eigen::Index accepted = 0;

    using Hit = std::pair<std::uint64_t, Vector>;
    while (accepted < n) {
        std::vector<std::future<std::vector<Hit>>> futures;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = next_counter + w * kBlock;
            futures.push_back(std::async(std::launch::async, [&, begin] {
                std::vector<Hit> hits;
                Eigen::Matrix3d r;
                Eigen::Vector3d p;
                Vector y(box.size());
                for (std::uint64_t t = begin; t < begin + kBlock; ++t) {
                    CounterRng rng(seed, t);
                    for (Eigen::Index j = 0; j < box.size(); ++j)
                        y[j] = rng.next_in(box.lower[j], box.upper[j]);
                    nominal.forward_frame(y, r, p);
                    if (!region.accepts_position(p)) continue;
                    if (!region.accepts_yaw(wrap_two_pi(std::atan2(r(1, 0), r(0, 0))))) continue;
                    hits.emplace_back(t, y);
                }
                return hits;
            }));
        }
        std::vector<Hit> hits;
        for (auto& f : futures) {
            auto part = f.get();
            hits.insert(hits.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
        }
        std::sort(hits.begin(), hits.end(),
                  [](const Hit& a, const Hit& b) { return a.first < b.first; });
        for (const auto& [counter, y] : hits) {
            if (accepted >= n) break;
            const Pose p = nominal.forward(y);
            ds.joints.row(accepted) = y;
            ds.positions.row(accepted) = p.position;
            ds.orientations.row(accepted) = p.orientation;
            ++accepted;
        }
        next_counter += static_cast<std::uint64_t>(workers) * kBlock;
        if (next_counter >= kMinTrialsBeforeCheck &&
            static_cast<double>(accepted) / static_cast<double>(next_counter) < kMinAcceptance) {
            throw DataError("sample_dataset: torus acceptance rate below 1e-6 after " +
                            std::to_string(next_counter) + " trials; region looks unreachable");
        }
    }
    return ds;
}

inline std::string Dataset::to_csv() const {
    const Eigen::Index j = config_dim(), d = position_dim(), c = orientation_dim();
    std::ostringstream out;
    out << "# crisp-dataset v1\n";
    out << "# seed: " << seed << '\n';
    out << "# region: " << region.to_text() << '\n';
    out << "# chain-hash: " << hash_hex(fnv1a(chain_text)) << '\n';
    out << "# chain-begin\n";
    {
        std::istringstream lines(chain_text);
        std::string line;
        while (std::getline(lines, line)) out << "# " << line << '\n';
    }
    out << "# chain-end\n";
    for (Eigen::Index k = 0; k < j; ++k) out << 'y' << (k + 1) << ',';
    out << "px,py";
    if (d == 3) out << ",pz";
    for (Eigen::Index k = 0; k < c; ++k) out << ",o" << (k + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < size(); ++i) {
        for (Eigen::Index k = 0; k < j; ++k) out << format_double_17(joints(i, k)) << ',';
        for (Eigen::Index k = 0; k < d; ++k) out << format_double_17(positions(i, k)) << ',';
        for (Eigen::Index k = 0; k < c; ++k) {
            out << format_double_17(orientations(i, k));
            if (k + 1 < c) out << ',';
        }
        out << '\n';
    }
    return out.str();
}

inline void write_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << ds.to_csv();
    if (!out) throw DataError("write failed: " + path);
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path);

    Dataset ds;
    std::string line;
    std::vector<std::string> chain_lines;
    bool in_chain = false;
    bool have_header = false;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    int line_no = 0;

    const auto strip_preamble = [](const std::string& l) -> std::string {
        if (l.rfind("# ", 0) == 0) return l.substr(2);
        if (l == "#") return "";
        return l.substr(1);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header && !line.empty() && line[0] == '#') {
            const std::string body = strip_preamble(line);
            if (body == "chain-begin") {
                in_chain = true;
            } else if (body == "chain-end") {
                in_chain = false;
            } else if (in_chain) {
                chain_lines.push_back(body);
            } else if (body.rfind("seed: ", 0) == 0) {
                ds.seed = std::strtoull(body.c_str() + 6, nullptr, 10);
            } else if (body.rfind("region: ", 0) == 0) {
                ds.region = Region::from_text(body.substr(8));
            }
            continue;
        }
        if (!have_header) {
            std::istringstream hs(line);
            std::string col;
            while (std::getline(hs, col, ',')) columns.push_back(col);
            if (columns.empty())
                throw DataError(path + ": missing header row at line " + std::to_string(line_no));
            have_header = true;
            continue;
        }
        if (line.empty()) continue;
        std::vector<double> vals;
        std::istringstream rs(line);
        std::string cell;
        std::size_t col_idx = 0;
        while (std::getline(rs, cell, ',')) {
            vals.push_back(parse_double(cell, path + " row " + std::to_string(rows.size() + 1) +
                                                  " column " + std::to_string(col_idx + 1)));
            ++col_idx;
        }
        if (vals.size() != columns.size())
            throw DataError(path + " row " + std::to_string(rows.size() + 1) + ": expected " +
                            std::to_string(columns.size()) + " cells, got " +
                            std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }

    if (chain_lines.empty()) throw DataError(path + ": missing embedded chain definition");
    std::ostringstream chain_text;
    for (const auto& l : chain_lines) chain_text << l << '\n';
    ds.chain_text = chain_text.str();

    const KinematicChain chain = KinematicChain::from_text(ds.chain_text);
    const Eigen::Index j = chain.joint_count(), d = chain.position_dim(),
                       c = chain.orientation_dim();

    std::vector<std::string> expected;
    for (Eigen::Index k = 0; k < j; ++k) expected.push_back("y" + std::to_string(k + 1));
    expected.push_back("px");
    expected.push_back("py");
    if (d == 3) expected.push_back("pz");
    for (Eigen::Index k = 0; k < c; ++k) expected.push_back("o" + std::to_string(k + 1));
    for (const auto& name : expected)
        if (std::find(columns.begin(), columns.end(), name) == columns.end())
            throw DataError(path + ": missing column '" + name + "'");
    if (columns.size() != expected.size() ||
        !std::equal(columns.begin(), columns.end(), expected.begin()))
        throw DataError(path + ": column order must be " +
                        [&] {
                            std::string s;
                            for (const auto& e : expected) s += e + ",";
                            s.pop_back();
                            return s;
                        }());

    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0) throw DataError(path + ": no data rows");
    ds.joints.resize(n, j);
    ds.positions.resize(n, d);
    ds.orientations.resize(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < j; ++k) ds.joints(i, k) = r[static_cast<std::size_t>(k)];
        for (Eigen::Index k = 0; k < d; ++k)
            ds.positions(i, k) = r[static_cast<std::size_t>(j + k)];
        for (Eigen::Index k = 0; k < c; ++k)
            ds.orientations(i, k) = r[static_cast<std::size_t>(j + d + k)];
    }
    return ds;
}

} // namespace crisp
