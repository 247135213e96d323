#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crisp/boxopt.hpp"
#include "crisp/dataset.hpp"
#include "crisp/errors.hpp"
#include "crisp/kernel.hpp"
#include "crisp/kinematics.hpp"
#include "crisp/loss.hpp"

namespace crisp {

// Default regularization schedule, lambda = n^(-1/2).
inline double default_lambda(Eigen::Index n) {
    return 1.0 / std::sqrt(static_cast<double>(n));
}

struct PredictOptions {
    std::optional<Vector> warm_start; // when absent, multi-start from the top-alpha configs
    int multi_start = 5;
    OptimizerConfig optimizer;

    void validate() const {
        if (multi_start < 1) throw DataError("predict: multi_start must be >= 1");
        optimizer.validate();
    }
};

struct Prediction {
    Vector joints;
    OptResult diagnostics;
    Vector alpha;
};

// Immutable CRiSP state: training poses/configs, kernel spec, regularized Gram
// factor, structured loss and the constraint box. Shareable across threads.
class TrainedModel {
public:
    Eigen::Index size() const { return ys_.rows(); }
    Eigen::Index config_dim() const { return ys_.cols(); }
    Eigen::Index position_dim() const { return xpos_.cols(); }
    Eigen::Index orientation_dim() const { return xorn_.cols(); }

    const KernelSpec& kernel() const { return kernel_; }
    double lambda() const { return lambda_; }
    const LossSpec& loss() const { return loss_; }
    const JointBox& box() const { return box_; }
    const Matrix& train_configs() const { return ys_; }
    const Matrix& train_positions() const { return xpos_; }
    const Matrix& train_orientations() const { return xorn_; }
    const Matrix& embedded() const { return embedded_; }
    const GramFactor& factor() const { return *factor_; }
    const std::string& chain_text() const { return chain_text_; }
    std::uint64_t dataset_hash() const { return dataset_hash_; }
    std::uint64_t dataset_seed() const { return dataset_seed_; }
    const std::string& region_text() const { return region_text_; }

    Pose train_pose(Eigen::Index i) const {
        return Pose{xpos_.row(i).transpose(), xorn_.row(i).transpose()};
    }

    // Same training data and Gram factor, different structured loss. The alpha
    // weights depend only on the kernel, so no refactorization is needed.
    TrainedModel with_loss(LossSpec loss) const {
        TrainedModel m = *this;
        loss.validate();
        m.loss_ = std::move(loss);
        m.refresh_loss_cache();
        return m;
    }

    std::string serialize() const;
    std::uint64_t hash() const { return fnv1a(serialize()); }

    friend TrainedModel train(const Dataset& data, const KernelSpec& kernel, double lambda,
                              LossSpec loss, JointBox box);
    friend TrainedModel load_model(const std::string& path);
    friend Prediction predict(const TrainedModel& model, const Pose& x,
                              const PredictOptions& opts);

private:
    TrainedModel() = default;

    void finalize() {
        kernel_.validate();
        loss_.validate();
        box_.validate();
        if (!(lambda_ > 0.0)) throw DataError("train: lambda must be positive");
        if (ys_.rows() < 1) throw DataError("train: empty dataset");
        if (box_.size() != ys_.cols()) throw DataError("train: box size != config dimension");
        for (Eigen::Index i = 0; i < ys_.rows(); ++i) {
            if (!box_.contains(ys_.row(i).transpose(), 1e-12))
                throw DataError("train: training config " + std::to_string(i) +
                                " outside the joint box");
            ys_.row(i) = clamp_to_box(ys_.row(i).transpose(), box_);
        }
        std::vector<Pose> poses;
        poses.reserve(static_cast<std::size_t>(ys_.rows()));
        for (Eigen::Index i = 0; i < ys_.rows(); ++i) poses.push_back(train_pose(i));
        embedded_ = embed_poses(poses);
        factor_ = std::make_shared<GramFactor>(factorize(gram(kernel_, embedded_), lambda_));
        refresh_loss_cache();
    }

    void refresh_loss_cache() {
        loss_pos_.resize(0, 0);
        loss_orn_.resize(0, 0);
        if (loss_.kind != LossKind::fk) return;
        const auto& chain = *loss_.chain;
        if (chain.joint_count() != ys_.cols())
            throw DataError("train: loss chain joint count != config dimension");
        loss_pos_.resize(ys_.rows(), chain.position_dim());
        loss_orn_.resize(ys_.rows(), chain.orientation_dim());
        for (Eigen::Index i = 0; i < ys_.rows(); ++i) {
            const Pose p = chain.forward(ys_.row(i).transpose());
            loss_pos_.row(i) = p.position;
            loss_orn_.row(i) = p.orientation;
        }
    }

    KernelSpec kernel_;
    double lambda_ = 0.0;
    LossSpec loss_;
    JointBox box_;
    Matrix ys_, xpos_, xorn_;
    std::string chain_text_;
    std::uint64_t dataset_hash_ = 0;
    std::uint64_t dataset_seed_ = 0;
    std::string region_text_;

    // derived state, reproducible from the fields above
    Matrix embedded_;
    std::shared_ptr<const GramFactor> factor_;
    Matrix loss_pos_, loss_orn_;
};

inline TrainedModel train(const Dataset& data, const KernelSpec& kernel, double lambda,
                          LossSpec loss, JointBox box) {
    if (data.size() < 1) throw DataError("train: dataset is empty");
    TrainedModel m;
    m.kernel_ = kernel;
    m.lambda_ = lambda;
    m.loss_ = std::move(loss);
    m.box_ = std::move(box);
    m.ys_ = data.joints;
    m.xpos_ = data.positions;
    m.xorn_ = data.orientations;
    m.chain_text_ = data.chain_text;
    m.dataset_hash_ = data.content_hash();
    m.dataset_seed_ = data.seed;
    m.region_text_ = data.region.to_text();
    m.finalize();
    return m;
}

inline Prediction predict(const TrainedModel& model, const Pose& x,
                          const PredictOptions& opts = {}) {
    opts.validate();
    if (x.position_dim() != model.position_dim() ||
        x.orientation_dim() != model.orientation_dim())
        throw DataError("predict: query pose dimension mismatch");

    Prediction out;
    const Vector kx = kernel_vector(model.kernel(), model.embedded(), embed_pose(x));
    out.alpha = model.factor().solve(kx);

    const WeightedObjective objective(model.loss(), out.alpha, model.ys_, model.loss_pos_,
                                      model.loss_orn_);

    std::vector<Vector> starts;
    if (opts.warm_start.has_value()) {
        if (opts.warm_start->size() != model.config_dim())
            throw DataError("predict: warm start has wrong length");
        starts.push_back(clamp_to_box(*opts.warm_start, model.box()));
    } else {
        const auto k =
            static_cast<Eigen::Index>(std::min<Eigen::Index>(opts.multi_start, model.size()));
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(model.size()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              if (out.alpha[a] != out.alpha[b]) return out.alpha[a] > out.alpha[b];
                              return a < b;
                          });
        for (Eigen::Index i = 0; i < k; ++i)
            starts.push_back(model.train_configs().row(idx[static_cast<std::size_t>(i)]).transpose());
    }

    bool have_best = false;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        OptResult r;
        try {
            r = minimize(objective, model.box(), starts[s], opts.optimizer);
        } catch (const NumericError& e) {
            throw NumericError("predict: start " + std::to_string(s) + ": " + e.what());
        }
        if (!have_best || r.value < out.diagnostics.value) {
            out.diagnostics = std::move(r);
            have_best = true;
        }
    }
    out.joints = out.diagnostics.minimizer;
    return out;
}

// ---- hyperparameter selection ---------------------------------------------

struct GridPoint {
    KernelSpec kernel;
    double lambda = 0.0;
};

struct SelectionRow {
    GridPoint point;
    double score = std::numeric_limits<double>::quiet_NaN(); // pos RMSE + orn RMSE
    bool ok = false;
    std::string message;
};

struct SelectionResult {
    GridPoint best;
    std::size_t best_index = 0;
    std::vector<SelectionRow> table;
};

// Trains one model per grid point and scores mean realized-pose error on the
// validation poses. Realized poses are evaluated with eval_chain when supplied,
// otherwise with the loss chain. Per-point failures are recorded, not fatal.
inline SelectionResult select_hyperparameters(const Dataset& train_data, const Dataset& validation,
                                              const std::vector<GridPoint>& grid,
                                              const LossSpec& loss, const JointBox& box,
                                              const KinematicChain* eval_chain = nullptr) {
    if (grid.empty()) throw DataError("select_hyperparameters: empty grid");
    if (validation.size() < 1) throw DataError("select_hyperparameters: empty validation set");
    const KinematicChain chain = [&] {
        if (eval_chain) return *eval_chain;
        if (loss.chain.has_value()) return *loss.chain;
        throw DataError("select_hyperparameters: need an eval chain for the radians loss");
    }();

    SelectionResult result;
    result.table.reserve(grid.size());
    for (const auto& point : grid) {
        SelectionRow row;
        row.point = point;
        try {
            const TrainedModel model = train(train_data, point.kernel, point.lambda, loss, box);
            double pos_sq = 0.0, orn_sq = 0.0;
            for (Eigen::Index i = 0; i < validation.size(); ++i) {
                const Pose target = validation.pose(i);
                const Prediction pred = predict(model, target);
                const Pose realized = chain.forward(pred.joints);
                pos_sq += (realized.position - target.position).squaredNorm();
                orn_sq += circle_dist_sq(realized.orientation, target.orientation);
            }
            const auto nv = static_cast<double>(validation.size());
            row.score = std::sqrt(pos_sq / nv) + std::sqrt(orn_sq / nv);
            row.ok = true;
        } catch (const std::exception& e) {
            row.message = e.what();
        }
        result.table.push_back(std::move(row));
    }

    // argmin with ties broken toward the strongest regularization
    bool found = false;
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const auto& row = result.table[i];
        if (!row.ok) continue;
        if (!found) {
            result.best = row.point;
            result.best_index = i;
            found = true;
            continue;
        }
        const auto& best = result.table[result.best_index];
        const bool better = row.score < best.score ||
                            (row.score == best.score &&
                             (row.point.lambda > best.point.lambda ||
                              (row.point.lambda == best.point.lambda &&
                               row.point.kernel.sigma > best.point.kernel.sigma)));
        if (better) {
            result.best = row.point;
            result.best_index = i;
        }
    }
    if (!found) throw NumericError("select_hyperparameters: every grid point failed");
    return result;
}

// ---- model persistence ------------------------------------------------------

namespace detail {

constexpr char kModelMagic[8] = {'C', 'R', 'S', 'P', 'I', 'K', '0', '1'};
constexpr std::uint8_t kEmbeddingCircle = 1;

struct ByteWriter {
    std::string buf;

    void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }
    void str(const std::string& s) {
        u64(s.size());
        buf.append(s);
    }
    void vec(const Vector& v) {
        u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
    }
    void mat(const Matrix& m) {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
};

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t bytes) const {
        if (pos + bytes > buf.size()) throw DataError("model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const auto len = static_cast<std::size_t>(u64());
        need(len);
        std::string s = buf.substr(pos, len);
        pos += len;
        return s;
    }
    Vector vec() {
        const auto len = static_cast<Eigen::Index>(u64());
        Vector v(len);
        for (Eigen::Index i = 0; i < len; ++i) v[i] = f64();
        return v;
    }
    Matrix mat() {
        const auto rows = static_cast<Eigen::Index>(u64());
        const auto cols = static_cast<Eigen::Index>(u64());
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }
};

} // namespace detail

inline std::string TrainedModel::serialize() const {
    detail::ByteWriter w;
    w.buf.append(detail::kModelMagic, sizeof(detail::kModelMagic));
    w.u8(static_cast<std::uint8_t>(kernel_.family));
    w.f64(kernel_.sigma);
    w.f64(lambda_);
    w.u8(static_cast<std::uint8_t>(loss_.kind));
    w.f64(loss_.position_weight);
    w.f64(loss_.orientation_weight);
    w.u8(detail::kEmbeddingCircle);
    w.str(chain_text_);
    w.u8(loss_.chain.has_value() ? 1 : 0);
    if (loss_.chain.has_value()) {
        w.str(loss_.chain->text());
        w.vec(loss_.chain->bias().joint_bias);
        w.vec(loss_.chain->bias().link_bias);
    }
    w.vec(box_.lower);
    w.vec(box_.upper);
    w.mat(ys_);
    w.mat(xpos_);
    w.mat(xorn_);
    w.u64(dataset_hash_);
    w.u64(dataset_seed_);
    w.str(region_text_);
    w.u64(fnv1a(w.buf.data(), w.buf.size()));
    return std::move(w.buf);
}

inline void save_model(const TrainedModel& model, const std::string& path) {
    const std::string bytes = model.serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path);
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();

    if (bytes.size() < sizeof(detail::kModelMagic) + 8 ||
        std::memcmp(bytes.data(), detail::kModelMagic, sizeof(detail::kModelMagic)) != 0)
        throw DataError(path + ": not a model file (bad magic or version)");
    const std::string payload = bytes.substr(0, bytes.size() - 8);
    detail::ByteReader tail{bytes, bytes.size() - 8};
    if (tail.u64() != fnv1a(payload.data(), payload.size()))
        throw DataError(path + ": checksum mismatch (corrupted file)");

    detail::ByteReader r{payload, sizeof(detail::kModelMagic)};
    TrainedModel m;
    const std::uint8_t family = r.u8();
    if (family > static_cast<std::uint8_t>(KernelFamily::linear))
        throw DataError(path + ": unknown kernel family tag");
    m.kernel_.family = static_cast<KernelFamily>(family);
    m.kernel_.sigma = r.f64();
    m.lambda_ = r.f64();
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(LossKind::radians))
        throw DataError(path + ": unknown loss kind tag");
    m.loss_.kind = static_cast<LossKind>(kind);
    m.loss_.position_weight = r.f64();
    m.loss_.orientation_weight = r.f64();
    if (r.u8() != detail::kEmbeddingCircle)
        throw DataError(path + ": unsupported kernel embedding tag");
    m.chain_text_ = r.str();
    if (r.u8() == 1) {
        const std::string loss_chain_text = r.str();
        BiasSpec bias;
        bias.joint_bias = r.vec();
        bias.link_bias = r.vec();
        m.loss_.chain = KinematicChain::from_text(loss_chain_text).with_bias(std::move(bias));
    }
    m.box_.lower = r.vec();
    m.box_.upper = r.vec();
    m.ys_ = r.mat();
    m.xpos_ = r.mat();
    m.xorn_ = r.mat();
    m.dataset_hash_ = r.u64();
    m.dataset_seed_ = r.u64();
    m.region_text_ = r.str();
    if (r.pos != payload.size()) throw DataError(path + ": trailing bytes in model file");

    m.finalize(); // recomputes the Gram factor and loss caches deterministically
    return m;
}

} // namespace crisp
