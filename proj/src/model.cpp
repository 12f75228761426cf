#include "affect/model.hpp"

#include "affect/error.hpp"
#include "affect/metrics.hpp"

#include <cmath>
#include <fstream>
#include <random>

namespace affect::model {

void ModelConfig::validate() const {
    if (hidden_sizes.empty()) fail(Errc::InvalidConfig, "at least one hidden layer required");
    for (int h : hidden_sizes) {
        if (h < 1) fail(Errc::InvalidConfig, "hidden sizes must be positive");
    }
    if (input_dim < 1) fail(Errc::InvalidConfig, "input_dim must be at least 1");
    if (output_dim != 1) fail(Errc::InvalidConfig, "only single-output regression is supported");
    if (!(learning_rate > 0.0)) fail(Errc::InvalidConfig, "learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) fail(Errc::InvalidConfig, "momentum must be in [0, 1)");
    if (!(noise_std >= 0.0)) fail(Errc::InvalidConfig, "noise_std must be non-negative");
    if (max_epochs < 1) fail(Errc::InvalidConfig, "max_epochs must be at least 1");
    if (patience < 1 || patience > max_epochs) fail(Errc::InvalidConfig, "patience must be in [1, max_epochs]");
    if (!(init_range >= 0.0)) fail(Errc::InvalidConfig, "init_range must be non-negative");
    if (!(clip_norm >= 0.0)) fail(Errc::InvalidConfig, "clip_norm must be non-negative");
    if (truncate_frames < 0) fail(Errc::InvalidConfig, "truncate_frames must be non-negative");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"hidden_sizes", c.hidden_sizes}, {"learning_rate", c.learning_rate},
                       {"momentum", c.momentum},         {"noise_std", c.noise_std},
                       {"max_epochs", c.max_epochs},     {"patience", c.patience},
                       {"seed", c.seed},                 {"input_dim", c.input_dim},
                       {"output_dim", c.output_dim},     {"init_range", c.init_range},
                       {"clip_norm", c.clip_norm},       {"truncate_frames", c.truncate_frames}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    const ModelConfig defaults;
    c.hidden_sizes = j.value("hidden_sizes", defaults.hidden_sizes);
    c.learning_rate = j.value("learning_rate", defaults.learning_rate);
    c.momentum = j.value("momentum", defaults.momentum);
    c.noise_std = j.value("noise_std", defaults.noise_std);
    c.max_epochs = j.value("max_epochs", defaults.max_epochs);
    c.patience = j.value("patience", defaults.patience);
    c.seed = j.value("seed", defaults.seed);
    c.input_dim = j.value("input_dim", defaults.input_dim);
    c.output_dim = j.value("output_dim", defaults.output_dim);
    c.init_range = j.value("init_range", defaults.init_range);
    c.clip_norm = j.value("clip_norm", defaults.clip_norm);
    c.truncate_frames = j.value("truncate_frames", defaults.truncate_frames);
}

Layout::Layout(const ModelConfig& config) : hidden_(config.hidden_sizes) {
    std::size_t offset = 0;
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        const int in = l == 0 ? config.input_dim : 2 * hidden_[l - 1];
        inputs_.push_back(in);
        const auto h = static_cast<std::size_t>(hidden_[l]);
        const std::size_t block = 4 * h * static_cast<std::size_t>(in) + 4 * h * h + 4 * h;
        for (int dir = 0; dir < 2; ++dir) {
            blocks_.push_back(offset);
            offset += block;
        }
    }
    output_ = offset;
    total_ = offset + static_cast<std::size_t>(config.output_dim) * static_cast<std::size_t>(top_width() + 1);
}

LstmBlock Layout::block(Eigen::VectorXd& flat, std::size_t layer, Direction dir) const {
    const Eigen::Index h = hidden_[layer];
    const Eigen::Index in = inputs_[layer];
    double* base = flat.data() + block_offset(layer, dir);
    return {Eigen::Map<Eigen::MatrixXd>(base, 4 * h, in), Eigen::Map<Eigen::MatrixXd>(base + 4 * h * in, 4 * h, h),
            Eigen::Map<Eigen::VectorXd>(base + 4 * h * in + 4 * h * h, 4 * h)};
}

ConstLstmBlock Layout::block(const Eigen::VectorXd& flat, std::size_t layer, Direction dir) const {
    const Eigen::Index h = hidden_[layer];
    const Eigen::Index in = inputs_[layer];
    const double* base = flat.data() + block_offset(layer, dir);
    return {Eigen::Map<const Eigen::MatrixXd>(base, 4 * h, in),
            Eigen::Map<const Eigen::MatrixXd>(base + 4 * h * in, 4 * h, h),
            Eigen::Map<const Eigen::VectorXd>(base + 4 * h * in + 4 * h * h, 4 * h)};
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t bits = splitmix64(seed ^ splitmix64(index));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stream for input noise; independent of the initialization counter.
constexpr std::uint64_t kNoiseStream = 0x6A09E667F3BCC909ULL;

}  // namespace

ModelParameters init(const ModelConfig& config) {
    config.validate();
    ModelParameters p;
    p.config = config;
    const Layout layout(config);
    p.weights.resize(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const double u = counter_uniform(config.seed, i);
        p.weights(static_cast<Eigen::Index>(i)) = (2.0 * u - 1.0) * config.init_range;
    }
    return p;
}

namespace {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DirectionCache {
    MatrixXd gates;  // 4H x T, activated: i, f, o, g
    MatrixXd cells;  // H x T
    MatrixXd cell_tanh;
    MatrixXd hidden;  // H x T
};

struct LayerCache {
    MatrixXd input;  // In x T
    DirectionCache dirs[2];
    MatrixXd output;  // 2H x T
};

inline ArrayXd sigmoid(const ArrayXd& z) { return 1.0 / (1.0 + (-z).exp()); }

MatrixXd reversed(const MatrixXd& m) { return m.rowwise().reverse(); }

// Runs one direction over `x`, whose columns are already in processing order.
void run_direction(const ConstLstmBlock& block, const MatrixXd& x, DirectionCache& cache) {
    const Index h = block.recurrent_weights.cols();
    const Index steps = x.cols();
    MatrixXd z = block.input_weights * x;
    z.colwise() += block.bias;
    cache.gates.resize(4 * h, steps);
    cache.cells.resize(h, steps);
    cache.cell_tanh.resize(h, steps);
    cache.hidden.resize(h, steps);
    VectorXd hp = VectorXd::Zero(h);
    VectorXd cp = VectorXd::Zero(h);
    VectorXd pre(4 * h);
    for (Index t = 0; t < steps; ++t) {
        pre.noalias() = z.col(t) + block.recurrent_weights * hp;
        const ArrayXd i = sigmoid(pre.segment(0, h).array());
        const ArrayXd f = sigmoid(pre.segment(h, h).array());
        const ArrayXd o = sigmoid(pre.segment(2 * h, h).array());
        const ArrayXd g = pre.segment(3 * h, h).array().tanh();
        cp = (f * cp.array() + i * g).matrix();
        const ArrayXd tc = cp.array().tanh();
        hp = (o * tc).matrix();
        cache.gates.col(t) << i.matrix(), f.matrix(), o.matrix(), g.matrix();
        cache.cells.col(t) = cp;
        cache.cell_tanh.col(t) = tc.matrix();
        cache.hidden.col(t) = hp;
    }
}

// Accumulates parameter gradients for one direction and returns the
// gradient with respect to its (processing-order) input.
MatrixXd backprop_direction(const ConstLstmBlock& block, LstmBlock& grad, const MatrixXd& x,
                            const DirectionCache& cache, const MatrixXd& d_hidden) {
    const Index h = block.recurrent_weights.cols();
    const Index steps = x.cols();
    MatrixXd dz(4 * h, steps);
    VectorXd dh_next = VectorXd::Zero(h);
    ArrayXd dc_next = ArrayXd::Zero(h);
    for (Index t = steps - 1; t >= 0; --t) {
        const ArrayXd dh = (d_hidden.col(t) + dh_next).array();
        const ArrayXd i = cache.gates.col(t).segment(0, h).array();
        const ArrayXd f = cache.gates.col(t).segment(h, h).array();
        const ArrayXd o = cache.gates.col(t).segment(2 * h, h).array();
        const ArrayXd g = cache.gates.col(t).segment(3 * h, h).array();
        const ArrayXd tc = cache.cell_tanh.col(t).array();
        const ArrayXd dc = dc_next + dh * o * (1.0 - tc * tc);
        const ArrayXd c_prev = t > 0 ? ArrayXd(cache.cells.col(t - 1).array()) : ArrayXd::Zero(h);
        dz.col(t).segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
        dz.col(t).segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();
        dz.col(t).segment(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
        dz.col(t).segment(3 * h, h) = (dc * i * (1.0 - g * g)).matrix();
        dc_next = dc * f;
        dh_next.noalias() = block.recurrent_weights.transpose() * dz.col(t);
    }
    grad.input_weights.noalias() += dz * x.transpose();
    if (steps > 1) {
        grad.recurrent_weights.noalias() += dz.rightCols(steps - 1) * cache.hidden.leftCols(steps - 1).transpose();
    }
    grad.bias += dz.rowwise().sum();
    return block.input_weights.transpose() * dz;
}

struct ForwardPass {
    std::vector<LayerCache> layers;
    Eigen::RowVectorXd output;
};

ForwardPass run_forward(const ModelParameters& params, const MatrixXd& inputs) {
    const auto& config = params.config;
    if (inputs.cols() != config.input_dim) {
        fail(Errc::ShapeMismatch, "input has " + std::to_string(inputs.cols()) + " columns, model expects " +
                                      std::to_string(config.input_dim));
    }
    if (inputs.rows() < 1) fail(Errc::ShapeMismatch, "empty sequence");
    const Layout layout(config);
    if (static_cast<std::size_t>(params.weights.size()) != layout.size()) {
        fail(Errc::ShapeMismatch, "weight vector does not match the configured architecture");
    }

    ForwardPass pass;
    pass.layers.resize(layout.layers());
    MatrixXd x = inputs.transpose();
    for (std::size_t l = 0; l < layout.layers(); ++l) {
        auto& cache = pass.layers[l];
        cache.input = std::move(x);
        run_direction(layout.block(params.weights, l, Direction::Forward), cache.input, cache.dirs[0]);
        run_direction(layout.block(params.weights, l, Direction::Backward), reversed(cache.input), cache.dirs[1]);
        const Index h = layout.hidden(l);
        cache.output.resize(2 * h, cache.input.cols());
        cache.output.topRows(h) = cache.dirs[0].hidden;
        cache.output.bottomRows(h) = reversed(cache.dirs[1].hidden);
        x = cache.output;
    }
    const Index width = layout.top_width();
    const double* out = params.weights.data() + layout.output_offset();
    const Eigen::Map<const Eigen::RowVectorXd> w(out, width);
    pass.output = w * pass.layers.back().output;
    pass.output.array() += out[width];
    return pass;
}

}  // namespace

std::vector<double> forward(const ModelParameters& params, const Eigen::MatrixXd& inputs) {
    const auto pass = run_forward(params, inputs);
    return std::vector<double>(pass.output.data(), pass.output.data() + pass.output.size());
}

LossGradient gradient(const ModelParameters& params, const Eigen::MatrixXd& inputs, std::span<const double> target) {
    if (target.size() != static_cast<std::size_t>(inputs.rows())) {
        fail(Errc::ShapeMismatch, "target length differs from sequence length");
    }
    const auto pass = run_forward(params, inputs);
    const Layout layout(params.config);
    const Index steps = inputs.rows();

    Eigen::RowVectorXd residual(steps);
    for (Index t = 0; t < steps; ++t) residual(t) = pass.output(t) - target[static_cast<std::size_t>(t)];

    LossGradient result;
    result.loss = residual.squaredNorm();
    result.gradient = VectorXd::Zero(static_cast<Index>(layout.size()));

    const Eigen::RowVectorXd d_out = 2.0 * residual;
    const Index width = layout.top_width();
    double* g_out = result.gradient.data() + layout.output_offset();
    Eigen::Map<Eigen::RowVectorXd>(g_out, width) = d_out * pass.layers.back().output.transpose();
    g_out[width] = d_out.sum();

    const Eigen::Map<const Eigen::RowVectorXd> w(params.weights.data() + layout.output_offset(), width);
    MatrixXd d_layer = w.transpose() * d_out;  // 2H x T
    for (std::size_t l = layout.layers(); l-- > 0;) {
        const auto& cache = pass.layers[l];
        const Index h = layout.hidden(l);
        auto g_fwd = layout.block(result.gradient, l, Direction::Forward);
        auto g_bwd = layout.block(result.gradient, l, Direction::Backward);
        MatrixXd dx = backprop_direction(layout.block(params.weights, l, Direction::Forward), g_fwd, cache.input,
                                         cache.dirs[0], d_layer.topRows(h));
        dx += reversed(backprop_direction(layout.block(params.weights, l, Direction::Backward), g_bwd,
                                          reversed(cache.input), cache.dirs[1], reversed(d_layer.bottomRows(h))));
        d_layer = std::move(dx);
    }
    return result;
}

std::string_view to_string(StopReason reason) {
    return reason == StopReason::EarlyStop ? "early_stop" : "max_epochs";
}

EarlyStopping::EarlyStopping(int max_epochs, int patience) : max_epochs_(max_epochs), patience_(patience) {}

bool EarlyStopping::update(int epoch, double validation_loss) {
    improved_ = best_epoch_ == 0 || validation_loss < best_loss_;
    if (improved_) {
        best_loss_ = validation_loss;
        best_epoch_ = epoch;
    }
    if (epoch - best_epoch_ >= patience_) {
        reason_ = StopReason::EarlyStop;
        return true;
    }
    if (epoch >= max_epochs_) {
        reason_ = StopReason::MaxEpochs;
        return true;
    }
    return false;
}

namespace {

struct Fragment {
    std::size_t sequence;
    Index start;
    Index length;
};

std::vector<Fragment> fragments(std::span<const Sequence> set, int truncate) {
    std::vector<Fragment> out;
    for (std::size_t s = 0; s < set.size(); ++s) {
        const Index steps = set[s].inputs.rows();
        const Index len = truncate > 0 ? truncate : steps;
        for (Index start = 0; start < steps; start += len) out.push_back({s, start, std::min(len, steps - start)});
    }
    return out;
}

void check_set(std::span<const Sequence> set, int input_dim, const char* what) {
    if (set.empty()) fail(Errc::InvalidArgument, std::string(what) + " set is empty");
    for (const auto& s : set) {
        if (s.inputs.cols() != input_dim) fail(Errc::ShapeMismatch, std::string(what) + " input width differs");
        if (s.inputs.rows() < 1 || static_cast<std::size_t>(s.inputs.rows()) != s.targets.size()) {
            fail(Errc::ShapeMismatch, std::string(what) + " sequence and target lengths differ");
        }
    }
}

}  // namespace

TrainResult train(const ModelConfig& config, std::span<const Sequence> train_set,
                  std::span<const Sequence> validation_set) {
    config.validate();
    check_set(train_set, config.input_dim, "training");
    check_set(validation_set, config.input_dim, "validation");

    TrainResult result{init(config), {}};
    auto& params = result.params;
    VectorXd velocity = VectorXd::Zero(params.weights.size());
    VectorXd best = params.weights;

    std::mt19937_64 noise_rng(config.seed ^ kNoiseStream);
    std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);
    const auto pieces = fragments(train_set, config.truncate_frames);
    EarlyStopping stopping(config.max_epochs, config.patience);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double train_sse = 0.0;
        for (const auto& piece : pieces) {
            const auto& seq = train_set[piece.sequence];
            MatrixXd x = seq.inputs.middleRows(piece.start, piece.length);
            if (config.noise_std > 0.0) {
                for (Index r = 0; r < x.rows(); ++r) {
                    for (Index c = 0; c < x.cols(); ++c) x(r, c) += noise(noise_rng);
                }
            }
            const std::span<const double> target(seq.targets.data() + piece.start,
                                                 static_cast<std::size_t>(piece.length));
            LossGradient lg = gradient(params, x, target);
            if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
                fail(Errc::DivergedToNonFinite, "training loss became non-finite at epoch " + std::to_string(epoch));
            }
            train_sse += lg.loss;
            if (config.clip_norm > 0.0) {
                const double norm = lg.gradient.norm();
                if (norm > config.clip_norm) lg.gradient *= config.clip_norm / norm;
            }
            velocity = config.momentum * velocity - config.learning_rate * lg.gradient;
            params.weights += velocity;
        }

        double validation_sse = 0.0;
        for (const auto& seq : validation_set) validation_sse += metrics::sse(forward(params, seq.inputs), seq.targets);
        if (!std::isfinite(validation_sse)) {
            fail(Errc::DivergedToNonFinite, "validation loss became non-finite at epoch " + std::to_string(epoch));
        }
        result.log.train_sse.push_back(train_sse);
        result.log.validation_sse.push_back(validation_sse);
        const bool stop = stopping.update(epoch, validation_sse);
        if (stopping.improved()) best = params.weights;
        if (stop) break;
    }
    params.weights = best;
    result.log.best_epoch = stopping.best_epoch();
    result.log.stop_reason = stopping.reason();
    return result;
}

std::vector<double> predict(const ModelParameters& params, const Eigen::MatrixXd& raw_features) {
    if (!params.standardizer) fail(Errc::InvalidArgument, "model has no attached standardizer");
    const auto z = params.standardizer->apply(raw_features);
    return params.standardizer->invert_target(forward(params, z));
}

nlohmann::json to_json(const ModelParameters& params) {
    nlohmann::json j;
    j["format"] = "affect-blstm";
    j["version"] = 1;
    j["config"] = params.config;
    j["weights"] = std::vector<double>(params.weights.data(), params.weights.data() + params.weights.size());
    if (params.standardizer) j["standardizer"] = *params.standardizer;
    j["feature_names"] = params.feature_names;
    return j;
}

ModelParameters parameters_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "affect-blstm") fail(Errc::ParseError, "not a model artifact");
    ModelParameters p;
    p.config = j.at("config").get<ModelConfig>();
    const auto w = j.at("weights").get<std::vector<double>>();
    p.weights = Eigen::Map<const VectorXd>(w.data(), static_cast<Index>(w.size()));
    if (j.contains("standardizer")) p.standardizer = j.at("standardizer").get<Standardizer>();
    p.feature_names = j.value("feature_names", std::vector<std::string>{});
    if (static_cast<std::size_t>(p.weights.size()) != Layout(p.config).size()) {
        fail(Errc::ShapeMismatch, "stored weights do not match the stored architecture");
    }
    return p;
}

void save(const std::filesystem::path& path, const ModelParameters& params) {
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << to_json(params).dump() << '\n';
}

ModelParameters load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, path.string());
    try {
        return parameters_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace affect::model
