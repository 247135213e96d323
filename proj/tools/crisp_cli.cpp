// Command-line front end: dataset generation, training with grid search,
// trajectory tracking, one-shot prediction, and bias sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "crisp/crisp.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace crisp;

namespace {

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

KinematicChain resolve_chain(const std::string& spec) {
    if (spec == "planar5") return make_planar5();
    return KinematicChain::from_file(spec);
}

void write_run_json(const std::string& out_dir, const ordered_json& config) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "run.json");
    if (!out) throw DataError("cannot write run.json in " + out_dir);
    out << config.dump(2) << '\n';
}

// ---- shared option bundles --------------------------------------------------

struct TrajOptions {
    std::string kind = "eight";
    int points = 64;
    std::vector<double> center; // empty = kind default
    double radius = -1.0;
    double amplitude = -1.0;
    std::string heading = "tangent"; // "tangent" or a fixed angle in radians
    double yaw = M_PI / 4;
    double pitch = 0.0;
    double roll = 0.0;
    double height = 0.06;
    double turns = 2.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--traj", kind, "Trajectory kind: eight|circle2d|circle3d|spiral")
            ->capture_default_str();
        cmd->add_option("--traj-points", points, "Number of trajectory points")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--traj-center", center,
                        "Trajectory center (2 values planar, 3 spatial)")
            ->delimiter(',');
        cmd->add_option("--traj-radius", radius, "Circle/spiral radius (m)");
        cmd->add_option("--traj-amplitude", amplitude, "Eight half-width (m)");
        cmd->add_option("--traj-heading", heading,
                        "Planar heading target: 'tangent' or a fixed angle (rad)")
            ->capture_default_str();
        cmd->add_option("--traj-yaw", yaw, "Spatial end-effector yaw (rad)")
            ->capture_default_str();
        cmd->add_option("--traj-pitch", pitch, "Spatial end-effector pitch (rad)");
        cmd->add_option("--traj-roll", roll, "Spatial end-effector roll (rad)");
        cmd->add_option("--spiral-height", height, "Spiral height (m)");
        cmd->add_option("--spiral-turns", turns, "Spiral revolutions");
    }

    Trajectory build() const {
        const TrajectoryKind k = trajectory_kind_from_string(kind);
        TrajectoryParams p = default_params(k);
        p.count = points;
        if (!center.empty()) {
            if (center.size() == 2)
                p.center2 = Eigen::Vector2d(center[0], center[1]);
            else if (center.size() == 3)
                p.center3 = Eigen::Vector3d(center[0], center[1], center[2]);
            else
                throw UsageError("--traj-center needs 2 or 3 values");
        }
        if (radius > 0.0) {
            p.radius2 = radius;
            p.radius3 = radius;
        }
        if (amplitude > 0.0) p.amplitude = amplitude;
        if (heading == "tangent") {
            p.tangent_heading = true;
        } else {
            p.tangent_heading = false;
            p.heading = parse_double(heading, "--traj-heading");
        }
        p.yaw = yaw;
        p.pitch = pitch;
        p.roll = roll;
        p.height = height;
        p.turns = turns;
        return make_trajectory(k, p);
    }

    ordered_json echo() const {
        return {{"kind", kind},     {"points", points},       {"center", center},
                {"radius", radius}, {"amplitude", amplitude}, {"heading", heading},
                {"yaw", yaw},       {"pitch", pitch},         {"roll", roll},
                {"height", height}, {"turns", turns}};
    }
};

struct OptimizerOptions {
    OptimizerConfig cfg;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--opt-max-iters", cfg.max_iters)->capture_default_str();
        cmd->add_option("--opt-gradient-tol", cfg.gradient_tolerance)->capture_default_str();
        cmd->add_option("--opt-objective-tol", cfg.objective_tolerance)->capture_default_str();
        cmd->add_option("--opt-memory", cfg.memory)->capture_default_str();
    }

    ordered_json echo() const {
        return {{"max_iters", cfg.max_iters},
                {"gradient_tolerance", cfg.gradient_tolerance},
                {"objective_tolerance", cfg.objective_tolerance},
                {"memory", cfg.memory}};
    }
};

struct DlsOptions {
    DlsConfig cfg;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--dls-damping", cfg.damping)->capture_default_str();
        cmd->add_option("--dls-max-iters", cfg.max_iters)->capture_default_str();
        cmd->add_option("--dls-pos-tol", cfg.position_tolerance)->capture_default_str();
        cmd->add_option("--dls-orn-tol", cfg.orientation_tolerance)->capture_default_str();
        cmd->add_option("--dls-step-clamp", cfg.step_clamp)->capture_default_str();
        cmd->add_flag("--dls-selective", cfg.selective, "Per-singular-direction damping");
    }

    ordered_json echo() const {
        return {{"damping", cfg.damping},
                {"max_iters", cfg.max_iters},
                {"position_tolerance", cfg.position_tolerance},
                {"orientation_tolerance", cfg.orientation_tolerance},
                {"step_clamp", cfg.step_clamp},
                {"selective", cfg.selective}};
    }
};

// Uniform joint bias (deg) and random-sign link bias (mm). Signs are drawn once
// per invocation from the seed, matching one experiment repetition.
BiasSpec build_bias(Eigen::Index joints, double joint_bias_deg, double link_bias_mm,
                    std::uint64_t seed) {
    BiasSpec bias = BiasSpec::zero(joints);
    bias.joint_bias.array() += joint_bias_deg * M_PI / 180.0;
    if (link_bias_mm != 0.0) {
        CounterRng rng(seed, 0xb1a5);
        for (Eigen::Index i = 0; i < joints; ++i)
            bias.link_bias[i] = (rng.next_unit() < 0.5 ? -1.0 : 1.0) * link_bias_mm / 1000.0;
    }
    return bias;
}

void emit_tracking_outputs(const TrackingReport& report, const std::string& out_dir,
                           const std::string& stem) {
    write_report_csv(report, (fs::path(out_dir) / (stem + "_points.csv")).string());
    write_report_json(report, (fs::path(out_dir) / (stem + "_summary.json")).string());
    write_plot_csv(report, (fs::path(out_dir) / (stem + "_plot.csv")).string());
}

// ---- subcommands --------------------------------------------------------------

int cmd_gen(const std::string& chain_spec, Eigen::Index n, std::uint64_t seed,
            const std::string& region_kind, const std::vector<double>& torus_center,
            double torus_ring, double torus_tube, const std::vector<double>& torus_yaws,
            double torus_yaw_tol, const std::string& out_dir, const std::string& out_name) {
    const KinematicChain chain = resolve_chain(chain_spec);
    Region region = Region::box();
    if (region_kind == "torus") {
        if (torus_center.size() != 3) throw UsageError("--torus-center needs 3 values");
        region = Region::torus({torus_center[0], torus_center[1], torus_center[2]}, torus_ring,
                               torus_tube, torus_yaws, torus_yaw_tol);
    } else if (region_kind != "box") {
        throw UsageError("--region must be box or torus");
    }

    ordered_json config{{"command", "gen"}, {"chain", chain_spec},          {"n", n},
                        {"seed", seed},     {"region", region.to_text()},   {"out", out_name}};
    write_run_json(out_dir, config);

    const Dataset ds = sample_dataset(chain, n, region, seed);
    const std::string path = (fs::path(out_dir) / out_name).string();
    write_dataset(ds, path);
    std::cout << "wrote " << path << ": n=" << ds.size() << " region=" << region.to_text()
              << " seed=" << seed << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& val_path,
              const std::string& kernel_name, std::vector<double> sigmas,
              std::vector<std::string> lambdas, const std::string& loss_name, double w_pos,
              double w_orn, double joint_bias_deg, double link_bias_mm, std::uint64_t seed,
              const std::string& out_dir) {
    const Dataset data = read_dataset(data_path);
    const KinematicChain chain = data.chain();
    const JointBox box = chain.limits();

    const KernelFamily family = kernel_family_from_string(kernel_name);
    if (sigmas.empty()) sigmas.push_back(1.0);
    std::vector<double> lambda_values;
    for (const auto& l : lambdas)
        lambda_values.push_back(l == "auto" ? default_lambda(data.size())
                                            : parse_double(l, "--lambda"));
    if (lambda_values.empty()) lambda_values.push_back(default_lambda(data.size()));

    const BiasSpec bias = build_bias(chain.joint_count(), joint_bias_deg, link_bias_mm, seed);
    const LossSpec loss = loss_kind_from_string(loss_name) == LossKind::fk
                              ? LossSpec::forward_kinematics(chain.with_bias(bias), w_pos, w_orn)
                              : LossSpec::radians();

    std::vector<GridPoint> grid;
    for (double sigma : sigmas)
        for (double lambda : lambda_values) grid.push_back({{family, sigma}, lambda});

    ordered_json config{{"command", "train"},
                        {"data", data_path},
                        {"val_data", val_path},
                        {"kernel", kernel_name},
                        {"sigma_grid", sigmas},
                        {"lambda_grid", lambda_values},
                        {"loss", loss_name},
                        {"position_weight", w_pos},
                        {"orientation_weight", w_orn},
                        {"joint_bias_deg", joint_bias_deg},
                        {"link_bias_mm", link_bias_mm},
                        {"seed", seed},
                        {"dataset_hash", hash_hex(data.content_hash())}};
    write_run_json(out_dir, config);

    GridPoint chosen = grid.front();
    if (grid.size() > 1) {
        if (val_path.empty())
            throw UsageError("--val-data is required when the grid has more than one point");
        const Dataset validation = read_dataset(val_path);
        const KinematicChain nominal = chain.nominal();
        const SelectionResult sel =
            select_hyperparameters(data, validation, grid, loss, box, &nominal);
        chosen = sel.best;

        std::ofstream table(fs::path(out_dir) / "selection.csv");
        table << "family,sigma,lambda,score,status\n";
        for (const auto& row : sel.table) {
            table << to_string(row.point.kernel.family) << ','
                  << format_double(row.point.kernel.sigma) << ','
                  << format_double(row.point.lambda) << ','
                  << (row.ok ? format_double_17(row.score) : "nan") << ','
                  << (row.ok ? "ok" : "error: " + row.message) << '\n';
        }
        std::cout << "selection: " << sel.table.size() << " grid points, best sigma="
                  << chosen.kernel.sigma << " lambda=" << chosen.lambda << "\n";
    }

    const TrainedModel model = train(data, chosen.kernel, chosen.lambda, loss, box);
    const std::string model_path = (fs::path(out_dir) / "model.bin").string();
    save_model(model, model_path);
    std::cout << "wrote " << model_path << ": n=" << model.size() << " kernel="
              << to_string(chosen.kernel.family) << " sigma=" << chosen.kernel.sigma
              << " lambda=" << chosen.lambda << " loss=" << loss_name << "\n";
    return 0;
}

int cmd_track(const std::string& model_path, const TrajOptions& traj_opts,
              const OptimizerOptions& opt, const std::string& out_dir) {
    const TrainedModel model = load_model(model_path);
    const Trajectory traj = traj_opts.build();
    const KinematicChain eval_chain = KinematicChain::from_text(model.chain_text());

    ordered_json config{{"command", "track"},
                        {"model", model_path},
                        {"model_hash", hash_hex(model.hash())},
                        {"trajectory", traj_opts.echo()},
                        {"optimizer", opt.echo()}};
    write_run_json(out_dir, config);

    const TrackingReport report = track(model, traj, opt.cfg, eval_chain);
    emit_tracking_outputs(report, out_dir, "track");
    std::cout << "tracked " << traj.name << " (" << report.rows.size()
              << " points): pos_rmse_m=" << report.summary.pos_rmse
              << " orn_rmse_rad=" << report.summary.orn_rmse << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& pose_text, int multi_start,
                const OptimizerOptions& opt, const std::string& out_dir) {
    const TrainedModel model = load_model(model_path);

    std::vector<double> vals;
    {
        std::istringstream in(pose_text);
        std::string cell;
        while (std::getline(in, cell, ',')) {
            try {
                vals.push_back(parse_double(cell, "--pose"));
            } catch (const DataError& e) {
                throw UsageError(e.what());
            }
        }
    }
    const Eigen::Index d = model.position_dim(), c = model.orientation_dim();
    if (static_cast<Eigen::Index>(vals.size()) != d + c)
        throw UsageError("--pose needs " + std::to_string(d + c) + " comma-separated values");
    Pose x;
    x.position = Eigen::Map<Vector>(vals.data(), d);
    x.orientation.resize(c);
    for (Eigen::Index k = 0; k < c; ++k) x.orientation[k] = wrap_two_pi(vals[d + k]);

    if (!out_dir.empty()) {
        write_run_json(out_dir, ordered_json{{"command", "predict"},
                                             {"model", model_path},
                                             {"pose", pose_text},
                                             {"multi_start", multi_start},
                                             {"optimizer", opt.echo()}});
    }

    PredictOptions opts;
    opts.multi_start = multi_start;
    opts.optimizer = opt.cfg;
    const Prediction pred = predict(model, x, opts);

    std::cout << "joints:";
    for (Eigen::Index k = 0; k < pred.joints.size(); ++k)
        std::cout << ' ' << format_double_17(pred.joints[k]);
    std::cout << "\nobjective: " << format_double_17(pred.diagnostics.value)
              << "\niterations: " << pred.diagnostics.iterations
              << "\ntermination: " << to_string(pred.diagnostics.termination)
              << "\nalpha_length: " << pred.alpha.size() << "\n";

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pred.alpha.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    const auto k = std::min<std::size_t>(10, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (std::abs(pred.alpha[a]) != std::abs(pred.alpha[b]))
                              return std::abs(pred.alpha[a]) > std::abs(pred.alpha[b]);
                          return a < b;
                      });
    std::cout << "top_alpha:";
    for (std::size_t i = 0; i < k; ++i)
        std::cout << ' ' << idx[i] << ':' << format_double(pred.alpha[idx[i]]);
    std::cout << "\n";
    return 0;
}

int cmd_bias_sweep(const std::string& data_path, const TrajOptions& traj_opts,
                   const std::string& bias_kind, const std::vector<double>& bias_values,
                   const std::string& kernel_name, double sigma, const std::string& lambda_text,
                   double w_pos, double w_orn, const std::vector<std::string>& methods,
                   bool reuse_gram, bool wide, std::uint64_t seed, const OptimizerOptions& opt,
                   const DlsOptions& dls, const std::string& out_dir) {
    if (bias_values.empty()) throw UsageError("--bias-values must not be empty");
    if (bias_kind != "joint" && bias_kind != "link")
        throw UsageError("--bias-kind must be joint or link");
    for (const auto& m : methods)
        if (m != "crisp-fk" && m != "dls") throw UsageError("unknown method: " + m);

    const Dataset data = read_dataset(data_path);
    const KinematicChain nominal = data.chain();
    const JointBox box = nominal.limits();
    const Trajectory traj = traj_opts.build();
    const KernelSpec kernel{kernel_family_from_string(kernel_name), sigma};
    const double lambda = lambda_text == "auto" ? default_lambda(data.size())
                                                : parse_double(lambda_text, "--lambda");

    // one sign pattern per sweep invocation, scaled by each magnitude
    Vector link_signs(nominal.joint_count());
    {
        CounterRng rng(seed, 0xb1a5);
        for (Eigen::Index i = 0; i < link_signs.size(); ++i)
            link_signs[i] = rng.next_unit() < 0.5 ? -1.0 : 1.0;
    }

    ordered_json config{
        {"command", "bias-sweep"},
        {"data", data_path},
        {"trajectory", traj_opts.echo()},
        {"bias_kind", bias_kind},
        {"bias_values", bias_values},
        {"kernel", kernel_name},
        {"sigma", sigma},
        {"lambda", lambda},
        {"position_weight", w_pos},
        {"orientation_weight", w_orn},
        {"methods", methods},
        {"reuse_gram", reuse_gram},
        {"seed", seed},
        {"link_signs",
         std::vector<double>(link_signs.data(), link_signs.data() + link_signs.size())},
        {"optimizer", opt.echo()},
        {"dls", dls.echo()}};
    write_run_json(out_dir, config);

    std::optional<TrainedModel> base; // shared Gram factor for --reuse-gram

    struct Cell {
        std::string method;
        double bias_value;
        bool ok = false;
        RmseSummary summary;
        std::string message;
    };
    std::vector<Cell> cells;

    for (double value : bias_values) {
        BiasSpec bias = BiasSpec::zero(nominal.joint_count());
        if (bias_kind == "joint")
            bias.joint_bias.array() += value * M_PI / 180.0;
        else
            bias.link_bias = link_signs * (value / 1000.0);
        const KinematicChain biased = nominal.with_bias(bias);

        for (const auto& method : methods) {
            Cell cell;
            cell.method = method;
            cell.bias_value = value;
            try {
                if (method == "crisp-fk") {
                    const LossSpec loss = LossSpec::forward_kinematics(biased, w_pos, w_orn);
                    const TrainedModel model = [&] {
                        if (reuse_gram) {
                            if (!base.has_value()) base = train(data, kernel, lambda, loss, box);
                            return base->with_loss(loss);
                        }
                        return train(data, kernel, lambda, loss, box);
                    }();
                    cell.summary = track(model, traj, opt.cfg, nominal).summary;
                } else {
                    const Vector start = nearest_config(data, traj.points.front());
                    cell.summary = track_dls(biased, traj, start, dls.cfg, nominal).summary;
                }
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.message = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }

    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "sweep.csv");
        out << "method,bias_kind,bias_value,pos_rmse,orn_rmse,pos_std,orn_std,status\n";
        for (const auto& c : cells) {
            out << c.method << ',' << bias_kind << ',' << format_double(c.bias_value) << ',';
            if (c.ok)
                out << format_double_17(c.summary.pos_rmse) << ','
                    << format_double_17(c.summary.orn_rmse) << ','
                    << format_double_17(c.summary.pos_std) << ','
                    << format_double_17(c.summary.orn_std) << ",ok\n";
            else
                out << "nan,nan,nan,nan,error: " << c.message << '\n';
        }
    }
    if (wide) {
        std::ofstream out(fs::path(out_dir) / "sweep_wide.csv");
        out << "bias_value";
        for (const auto& m : methods) out << ',' << m << "_pos_rmse," << m << "_orn_rmse";
        out << '\n';
        for (double value : bias_values) {
            out << format_double(value);
            for (const auto& m : methods) {
                const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
                    return c.method == m && c.bias_value == value;
                });
                if (it != cells.end() && it->ok)
                    out << ',' << format_double_17(it->summary.pos_rmse) << ','
                        << format_double_17(it->summary.orn_rmse);
                else
                    out << ",nan,nan";
            }
            out << '\n';
        }
    }

    for (const auto& c : cells) {
        std::cout << c.method << " bias=" << c.bias_value << " ";
        if (c.ok)
            std::cout << "pos_rmse=" << c.summary.pos_rmse << " orn_rmse=" << c.summary.orn_rmse
                      << "\n";
        else
            std::cout << "error: " << c.message << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured-prediction inverse kinematics toolkit"};
    app.require_subcommand(1);
    app.set_config("--config"); // sectioned file at the top level, e.g. [gen]

    // gen
    std::string gen_chain = "planar5";
    Eigen::Index gen_n = 1000;
    std::uint64_t gen_seed = 0;
    std::string gen_region = "box";
    std::vector<double> torus_center, torus_yaws;
    double torus_ring = 0.03, torus_tube = 0.01, torus_yaw_tol = 0.05;
    std::string gen_out_dir = ".", gen_out_name = "dataset.csv";
    auto* gen = app.add_subcommand("gen", "Generate a dataset by joint-space sampling");
    gen->add_option("--chain", gen_chain, "Chain: planar5 or a chain file path")
        ->capture_default_str();
    gen->add_option("--n", gen_n, "Number of samples")->check(CLI::PositiveNumber)->required();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--region", gen_region, "Sampling region: box|torus")->capture_default_str();
    gen->add_option("--torus-center", torus_center, "Torus center (m)")->delimiter(',');
    gen->add_option("--torus-ring-radius", torus_ring, "Torus ring radius (m)")
        ->capture_default_str();
    gen->add_option("--torus-tube-radius", torus_tube, "Torus tube radius (m)")
        ->capture_default_str();
    gen->add_option("--torus-yaws", torus_yaws, "Allowed end-effector yaws (rad)")
        ->delimiter(',');
    gen->add_option("--torus-yaw-tol", torus_yaw_tol, "Yaw acceptance band (rad)")
        ->capture_default_str();
    gen->add_option("--out-dir", gen_out_dir, "Output directory")->capture_default_str();
    gen->add_option("--out", gen_out_name, "Dataset file name")->capture_default_str();

    // train
    std::string train_data, train_val, train_kernel = "gaussian", train_loss = "fk";
    std::vector<double> train_sigmas;
    std::vector<std::string> train_lambdas;
    double train_wpos = 1.0, train_worn = 1.0, train_jbias = 0.0, train_lbias = 0.0;
    std::uint64_t train_seed = 0;
    std::string train_out_dir = ".";
    auto* tr = app.add_subcommand("train", "Train a model, optionally with grid search");
    tr->add_option("--data", train_data, "Training dataset CSV")->required();
    tr->add_option("--val-data", train_val, "Validation dataset CSV (for grid search)");
    tr->add_option("--kernel", train_kernel, "gaussian|laplacian|linear")->capture_default_str();
    tr->add_option("--sigma", train_sigmas, "Kernel bandwidth grid")->delimiter(',');
    tr->add_option("--lambda", train_lambdas, "Regularization grid; 'auto' = n^(-1/2)")
        ->delimiter(',');
    tr->add_option("--loss", train_loss, "fk|radians")->capture_default_str();
    tr->add_option("--pos-weight", train_wpos, "FK loss position weight")->capture_default_str();
    tr->add_option("--orn-weight", train_worn, "FK loss orientation weight")
        ->capture_default_str();
    tr->add_option("--joint-bias-deg", train_jbias, "Uniform joint bias for the loss chain")
        ->capture_default_str();
    tr->add_option("--link-bias-mm", train_lbias, "Link bias magnitude, random signs")
        ->capture_default_str();
    tr->add_option("--seed", train_seed, "Seed for link bias signs")->capture_default_str();
    tr->add_option("--out-dir", train_out_dir, "Output directory")->capture_default_str();

    // track
    std::string track_model, track_out_dir = ".";
    TrajOptions track_traj;
    OptimizerOptions track_opt;
    auto* tk = app.add_subcommand("track", "Track a trajectory with a trained model");
    tk->add_option("--model", track_model, "Model file")->required();
    track_traj.add_to(tk);
    track_opt.add_to(tk);
    tk->add_option("--out-dir", track_out_dir, "Output directory")->capture_default_str();

    // predict
    std::string pred_model, pred_pose, pred_out_dir;
    int pred_multi = 5;
    OptimizerOptions pred_opt;
    auto* pr = app.add_subcommand("predict", "One-shot prediction for a pose");
    pr->add_option("--model", pred_model, "Model file")->required();
    pr->add_option("--pose", pred_pose, "Comma-separated pose: position then orientation")
        ->required();
    pr->add_option("--multi-start", pred_multi, "Multi-start count")->capture_default_str();
    pred_opt.add_to(pr);
    pr->add_option("--out-dir", pred_out_dir, "Optional output directory for run.json");

    // bias-sweep
    std::string sweep_data, sweep_kind = "joint", sweep_kernel = "gaussian",
                sweep_lambda = "auto", sweep_out_dir = ".";
    std::vector<double> sweep_values;
    std::vector<std::string> sweep_methods{"crisp-fk", "dls"};
    double sweep_sigma = 1.0, sweep_wpos = 1.0, sweep_worn = 1.0;
    bool sweep_reuse = false, sweep_wide = false;
    std::uint64_t sweep_seed = 0;
    TrajOptions sweep_traj;
    OptimizerOptions sweep_opt;
    DlsOptions sweep_dls;
    auto* sw =
        app.add_subcommand("bias-sweep", "Sweep model bias and compare crisp-fk against dls");
    sw->add_option("--data", sweep_data, "Training dataset CSV")->required();
    sweep_traj.add_to(sw);
    sw->add_option("--bias-kind", sweep_kind, "joint|link")->capture_default_str();
    sw->add_option("--bias-values", sweep_values, "Bias magnitudes (deg for joint, mm for link)")
        ->delimiter(',')
        ->required();
    sw->add_option("--kernel", sweep_kernel, "gaussian|laplacian|linear")->capture_default_str();
    sw->add_option("--sigma", sweep_sigma, "Kernel bandwidth")->capture_default_str();
    sw->add_option("--lambda", sweep_lambda, "Regularization; 'auto' = n^(-1/2)")
        ->capture_default_str();
    sw->add_option("--pos-weight", sweep_wpos)->capture_default_str();
    sw->add_option("--orn-weight", sweep_worn)->capture_default_str();
    sw->add_option("--methods", sweep_methods, "Subset of crisp-fk,dls")->delimiter(',');
    sw->add_flag("--reuse-gram", sweep_reuse,
                 "Train once and reuse the Gram factor across bias values");
    sw->add_flag("--wide", sweep_wide, "Also emit the wide-format table");
    sw->add_option("--seed", sweep_seed, "Seed for link bias signs")->capture_default_str();
    sweep_opt.add_to(sw);
    sweep_dls.add_to(sw);
    sw->add_option("--out-dir", sweep_out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors exit 1; --help exits 0
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_chain, gen_n, gen_seed, gen_region, torus_center, torus_ring,
                           torus_tube, torus_yaws, torus_yaw_tol, gen_out_dir, gen_out_name);
        if (tr->parsed())
            return cmd_train(train_data, train_val, train_kernel, train_sigmas, train_lambdas,
                             train_loss, train_wpos, train_worn, train_jbias, train_lbias,
                             train_seed, train_out_dir);
        if (tk->parsed()) return cmd_track(track_model, track_traj, track_opt, track_out_dir);
        if (pr->parsed())
            return cmd_predict(pred_model, pred_pose, pred_multi, pred_opt, pred_out_dir);
        if (sw->parsed())
            return cmd_bias_sweep(sweep_data, sweep_traj, sweep_kind, sweep_values, sweep_kernel,
                                  sweep_sigma, sweep_lambda, sweep_wpos, sweep_worn,
                                  sweep_methods, sweep_reuse, sweep_wide, sweep_seed, sweep_opt,
                                  sweep_dls, sweep_out_dir);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
