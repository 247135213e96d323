#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = CRISP_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args) {
    const std::string out_file = "/tmp/crisp_cli_stdout.txt";
    const std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
    std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& path) {
    const std::string text = slurp(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
};

} // namespace

TEST_CASE("gen writes a seeded dataset and is reproducible", "[cli]") {
    TempDir a("crisp_cli_gen_a"), b("crisp_cli_gen_b");
    REQUIRE(run("gen --chain planar5 --n 100 --seed 7 --out-dir " + a.path.string()) == 0);
    REQUIRE(run("gen --chain planar5 --n 100 --seed 7 --out-dir " + b.path.string()) == 0);

    // 12 preamble lines for planar5 + header + 100 rows
    CHECK(line_count(a.path / "dataset.csv") == 12 + 1 + 100);
    CHECK(slurp(a.path / "dataset.csv") == slurp(b.path / "dataset.csv"));
    CHECK(fs::exists(a.path / "run.json"));
}

TEST_CASE("gen rejects a zero sample count as a usage error", "[cli]") {
    CHECK(run("gen --chain planar5 --n 0") == 1);
}

TEST_CASE("train writes a model; grids emit a selection table", "[cli]") {
    TempDir dir("crisp_cli_train");
    REQUIRE(run("gen --chain planar5 --n 120 --seed 3 --out-dir " + dir.path.string()) == 0);
    REQUIRE(run("gen --chain planar5 --n 15 --seed 4 --out-dir " + dir.path.string() +
                " --out val.csv") == 0);

    SECTION("singleton grid trains directly, no table") {
        REQUIRE(run("train --data " + (dir.path / "dataset.csv").string() +
                    " --sigma 1.0 --lambda auto --out-dir " + dir.path.string()) == 0);
        CHECK(fs::exists(dir.path / "model.bin"));
        CHECK_FALSE(fs::exists(dir.path / "selection.csv"));
    }

    SECTION("2x2 grid emits a 4-row selection table") {
        REQUIRE(run("train --data " + (dir.path / "dataset.csv").string() + " --val-data " +
                    (dir.path / "val.csv").string() +
                    " --sigma 0.5,1.0 --lambda auto,0.5 --out-dir " + dir.path.string()) == 0);
        CHECK(line_count(dir.path / "selection.csv") == 1 + 4);
    }

    SECTION("grid without validation data is a usage error") {
        CHECK(run("train --data " + (dir.path / "dataset.csv").string() +
                  " --sigma 0.5,1.0 --out-dir " + dir.path.string()) == 1);
    }

    SECTION("missing dataset file is a data error") {
        CHECK(run("train --data /tmp/no_such_dataset.csv") == 2);
    }
}

TEST_CASE("track emits per-point, summary and plot files", "[cli]") {
    TempDir dir("crisp_cli_track");
    REQUIRE(run("gen --chain planar5 --n 200 --seed 5 --out-dir " + dir.path.string()) == 0);
    REQUIRE(run("train --data " + (dir.path / "dataset.csv").string() +
                " --sigma 0.8 --out-dir " + dir.path.string()) == 0);
    REQUIRE(run("track --model " + (dir.path / "model.bin").string() +
                " --traj eight --traj-points 16 --out-dir " + dir.path.string()) == 0);

    CHECK(line_count(dir.path / "track_points.csv") == 1 + 16);
    const auto summary = nlohmann::json::parse(slurp(dir.path / "track_summary.json"));
    CHECK(summary.contains("pos_rmse_m"));
    CHECK(summary.contains("orn_rmse_rad"));
    const std::string plot_header = slurp(dir.path / "track_plot.csv").substr(0, 14);
    CHECK(plot_header == "t,tx,ty,rx,ry\n");
    CHECK(fs::exists(dir.path / "run.json"));
}

TEST_CASE("predict prints joints and alpha diagnostics", "[cli]") {
    TempDir dir("crisp_cli_predict");
    REQUIRE(run("gen --chain planar5 --n 150 --seed 11 --out-dir " + dir.path.string()) == 0);
    REQUIRE(run("train --data " + (dir.path / "dataset.csv").string() +
                " --sigma 0.8 --out-dir " + dir.path.string()) == 0);

    const std::string out = run_capture("predict --model " +
                                        (dir.path / "model.bin").string() + " --pose 4.0,3.0,1.0");
    CHECK(out.find("joints:") != std::string::npos);
    CHECK(out.find("alpha_length: 150") != std::string::npos);
    CHECK(out.find("top_alpha:") != std::string::npos);

    SECTION("malformed pose is a usage error") {
        CHECK(run("predict --model " + (dir.path / "model.bin").string() + " --pose banana") ==
              1);
        CHECK(run("predict --model " + (dir.path / "model.bin").string() + " --pose 1.0,2.0") ==
              1);
    }
}

TEST_CASE("bias sweep emits the long-format table", "[cli]") {
    TempDir dir("crisp_cli_sweep");
    REQUIRE(run("gen --chain planar5 --n 150 --seed 13 --out-dir " + dir.path.string()) == 0);
    REQUIRE(run("bias-sweep --data " + (dir.path / "dataset.csv").string() +
                " --traj eight --traj-points 8 --bias-kind joint --bias-values 0,3" +
                " --sigma 0.8 --reuse-gram --wide --out-dir " + dir.path.string()) == 0);

    const std::string sweep = slurp(dir.path / "sweep.csv");
    CHECK(line_count(dir.path / "sweep.csv") == 1 + 4); // 2 methods x 2 biases
    CHECK(sweep.find("crisp-fk,joint,0,") != std::string::npos);
    CHECK(sweep.find("dls,joint,0,") != std::string::npos);
    CHECK(sweep.find("crisp-fk,joint,3,") != std::string::npos);
    CHECK(sweep.find("nan") == std::string::npos); // all cells finite
    CHECK(line_count(dir.path / "sweep_wide.csv") == 1 + 2);
}

TEST_CASE("unknown subcommand is a usage error", "[cli]") {
    CHECK(run("frobnicate") == 1);
}
