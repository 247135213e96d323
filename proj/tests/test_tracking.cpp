#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "crisp/tracking.hpp"
#include "helpers.hpp"

using namespace crisp;
using namespace crisp::testing;

namespace {

TrainedModel planar_model(Eigen::Index n, double sigma, LossSpec loss, std::uint64_t seed = 5) {
    const KinematicChain chain = make_planar5();
    const Dataset ds = sample_dataset(chain, n, Region::box(), seed);
    return train(ds, {KernelFamily::gaussian, sigma}, default_lambda(n), std::move(loss),
                 chain.limits());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TrackingRow row_with_errors(double pos, double orn) {
    TrackingRow r;
    r.position_error = pos;
    r.orientation_error = orn;
    return r;
}

} // namespace

TEST_CASE("rmse anchors", "[tracking]") {
    CHECK_THROWS_AS(rmse({}), DataError);

    const RmseSummary zero = rmse({row_with_errors(0, 0), row_with_errors(0, 0)});
    CHECK(zero.pos_rmse == 0.0);
    CHECK(zero.orn_rmse == 0.0);
    CHECK(zero.pos_std == 0.0);
    CHECK(zero.orn_std == 0.0);

    const RmseSummary single = rmse({row_with_errors(0.003, 0.0)});
    CHECK(single.pos_rmse == Catch::Approx(0.003).epsilon(1e-15));
    CHECK(single.pos_std == 0.0);

    const RmseSummary pair = rmse({row_with_errors(0.0, 0.0), row_with_errors(2.0, 0.0)});
    CHECK(pair.pos_rmse == Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("single-point trajectory produces a single-row report", "[tracking]") {
    const KinematicChain chain = make_planar5();
    const TrainedModel model =
        planar_model(80, 0.8, LossSpec::forward_kinematics(chain));
    Trajectory traj;
    traj.name = "one";
    traj.points.push_back(model.train_pose(7));

    const TrackingReport report = track(model, traj, {}, chain);
    CHECK(report.rows.size() == 1);
    CHECK(report.summary.pos_rmse == report.rows[0].position_error);
    CHECK(report.summary.pos_std == 0.0);
}

TEST_CASE("tracking is deterministic", "[tracking]") {
    const KinematicChain chain = make_planar5();
    const TrainedModel model = planar_model(150, 0.8, LossSpec::forward_kinematics(chain));
    TrajectoryParams params = default_params(TrajectoryKind::eight);
    params.count = 8;
    const Trajectory traj = make_trajectory(TrajectoryKind::eight, params);

    const TrackingReport a = track(model, traj, {}, chain);
    const TrackingReport b = track(model, traj, {}, chain);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t t = 0; t < a.rows.size(); ++t) {
        CHECK(a.rows[t].joints == b.rows[t].joints);
        CHECK(a.rows[t].position_error == b.rows[t].position_error);
    }
}

TEST_CASE("errors are always measured with the nominal chain", "[tracking]") {
    const KinematicChain nominal = make_planar5();
    BiasSpec bias = BiasSpec::zero(5);
    bias.joint_bias = Vector::Constant(5, 0.05);
    const KinematicChain biased = nominal.with_bias(bias);

    const Dataset ds = sample_dataset(nominal, 120, Region::box(), 13);
    const TrainedModel model = train(ds, {KernelFamily::gaussian, 0.8}, default_lambda(120),
                                     LossSpec::forward_kinematics(biased), nominal.limits());

    TrajectoryParams params = default_params(TrajectoryKind::eight);
    params.count = 6;
    const Trajectory traj = make_trajectory(TrajectoryKind::eight, params);
    const TrackingReport report = track(model, traj, {}, nominal);

    for (const auto& row : report.rows) {
        const Pose from_nominal = nominal.forward(row.joints);
        const Pose from_biased = biased.forward(row.joints);
        CHECK(row.realized.position == from_nominal.position);
        CHECK(row.realized.position != from_biased.position);
    }
    CHECK(report.bias_text.find("0.05") != std::string::npos);
}

TEST_CASE("report files carry the documented layout", "[tracking]") {
    const KinematicChain chain = make_planar5();
    const TrainedModel model = planar_model(100, 0.8, LossSpec::forward_kinematics(chain));
    TrajectoryParams params = default_params(TrajectoryKind::eight);
    params.count = 5;
    const Trajectory traj = make_trajectory(TrajectoryKind::eight, params);
    const TrackingReport report = track(model, traj, {}, chain);

    SECTION("per-point csv has one row per trajectory point") {
        const std::string path = "/tmp/crisp_report.csv";
        write_report_csv(report, path);
        const std::string text = slurp(path);
        CHECK(std::count(text.begin(), text.end(), '\n') == 6); // header + 5 rows
        CHECK(text.rfind("t,y1,y2,y3,y4,y5,tx,ty,to1,rx,ry,ro1,pos_err_m,orn_err_rad\n", 0) ==
              0);
    }

    SECTION("plot csv carries target and realized positions") {
        const std::string path = "/tmp/crisp_plot.csv";
        write_plot_csv(report, path);
        const std::string text = slurp(path);
        CHECK(text.rfind("t,tx,ty,rx,ry\n", 0) == 0);
    }

    SECTION("json summary exposes the rmse keys and config echo") {
        const std::string path = "/tmp/crisp_summary.json";
        write_report_json(report, path);
        const auto j = nlohmann::json::parse(slurp(path));
        CHECK(j.contains("pos_rmse_m"));
        CHECK(j.contains("orn_rmse_rad"));
        CHECK(j.contains("pos_std_m"));
        CHECK(j.contains("orn_std_rad"));
        CHECK(j.contains("model_hash"));
        CHECK(j["points"] == 5);
    }
}

TEST_CASE("tracking rejects dimension mismatches", "[tracking]") {
    const KinematicChain chain = make_planar5();
    const TrainedModel model = planar_model(30, 0.8, LossSpec::forward_kinematics(chain));
    const Trajectory spatial = make_trajectory(TrajectoryKind::circle3d);
    CHECK_THROWS_AS(track(model, spatial, {}, chain), DataError);
}
