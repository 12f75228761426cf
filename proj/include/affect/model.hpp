#pragma once

#include "affect/alignment.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affect::model {

struct ModelConfig {
    std::vector<int> hidden_sizes{40, 30};
    double learning_rate = 1e-5;
    double momentum = 0.9;
    double noise_std = 0.1;
    int max_epochs = 100;
    int patience = 10;
    std::uint64_t seed = 1787452436;
    int input_dim = 0;
    int output_dim = 1;
    /// Weights start uniform in (-init_range, init_range).
    double init_range = 0.1;
    /// Per-sequence gradient L2 clip; 0 disables.
    double clip_norm = 5.0;
    /// Training sequences are cut into consecutive fragments of this many
    /// frames; 0 trains on whole sequences.
    int truncate_frames = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Views into the flat weight vector for one direction of one layer.
/// Gate rows are ordered input, forget, output, cell candidate.
struct LstmBlock {
    Eigen::Map<Eigen::MatrixXd> input_weights;      // 4H x In
    Eigen::Map<Eigen::MatrixXd> recurrent_weights;  // 4H x H
    Eigen::Map<Eigen::VectorXd> bias;               // 4H
};

struct ConstLstmBlock {
    Eigen::Map<const Eigen::MatrixXd> input_weights;
    Eigen::Map<const Eigen::MatrixXd> recurrent_weights;
    Eigen::Map<const Eigen::VectorXd> bias;
};

enum class Direction { Forward = 0, Backward = 1 };

/// Offsets of every block inside the flat parameter vector.
class Layout {
public:
    explicit Layout(const ModelConfig& config);

    std::size_t size() const { return total_; }
    std::size_t layers() const { return hidden_.size(); }
    int hidden(std::size_t layer) const { return hidden_[layer]; }
    int layer_input(std::size_t layer) const { return inputs_[layer]; }
    std::size_t block_offset(std::size_t layer, Direction dir) const { return blocks_[2 * layer + static_cast<std::size_t>(dir)]; }
    std::size_t output_offset() const { return output_; }
    int top_width() const { return 2 * hidden_.back(); }

    LstmBlock block(Eigen::VectorXd& flat, std::size_t layer, Direction dir) const;
    ConstLstmBlock block(const Eigen::VectorXd& flat, std::size_t layer, Direction dir) const;

private:
    std::vector<int> hidden_;
    std::vector<int> inputs_;
    std::vector<std::size_t> blocks_;
    std::size_t output_ = 0;
    std::size_t total_ = 0;
};

struct ModelParameters {
    ModelConfig config;
    Eigen::VectorXd weights;
    std::optional<Standardizer> standardizer;
    /// Names of the input columns, in order, when known.
    std::vector<std::string> feature_names;

    Layout layout() const { return Layout(config); }
};

/// Deterministic uniform(-init_range, init_range) draw per weight from a
/// counter-based generator keyed on config.seed.
ModelParameters init(const ModelConfig& config);

/// One training or evaluation sequence in model space (standardized).
struct Sequence {
    Eigen::MatrixXd inputs;  // T x input_dim
    std::vector<double> targets;
};

/// Network output per time step (T x 1 flattened).
std::vector<double> forward(const ModelParameters& params, const Eigen::MatrixXd& inputs);

struct LossGradient {
    double loss = 0.0;  // SSE
    Eigen::VectorXd gradient;
};

/// Exact backpropagation-through-time gradient of SSE = sum_t (y_t - target_t)^2.
LossGradient gradient(const ModelParameters& params, const Eigen::MatrixXd& inputs, std::span<const double> target);

enum class StopReason { MaxEpochs, EarlyStop };

std::string_view to_string(StopReason reason);

struct TrainLog {
    std::vector<double> train_sse;
    std::vector<double> validation_sse;
    int best_epoch = 0;  // 1-based
    StopReason stop_reason = StopReason::MaxEpochs;
};

/// Validation-loss bookkeeping: remembers the epoch with the lowest loss and
/// signals a stop after `patience` epochs without a strictly lower one.
class EarlyStopping {
public:
    EarlyStopping(int max_epochs, int patience);

    /// Records the loss for `epoch` (1-based, consecutive).  Returns true
    /// when training should stop after this epoch.
    bool update(int epoch, double validation_loss);

    bool improved() const { return improved_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }
    StopReason reason() const { return reason_; }

private:
    int max_epochs_;
    int patience_;
    int best_epoch_ = 0;
    double best_loss_ = 0.0;
    bool improved_ = false;
    StopReason reason_ = StopReason::MaxEpochs;
};

struct TrainResult {
    ModelParameters params;
    TrainLog log;
};

/// SGD with momentum, one update per (fragment of a) training sequence in
/// the given order.  Inputs receive fresh Gaussian noise every epoch;
/// validation SSE is noise-free.  Returns the best-validation parameters.
TrainResult train(const ModelConfig& config, std::span<const Sequence> train_set,
                  std::span<const Sequence> validation_set);

/// Forward pass on raw features with the attached standardizer; the output
/// is mapped back to label units.
std::vector<double> predict(const ModelParameters& params, const Eigen::MatrixXd& raw_features);

void save(const std::filesystem::path& path, const ModelParameters& params);
ModelParameters load(const std::filesystem::path& path);

nlohmann::json to_json(const ModelParameters& params);
ModelParameters parameters_from_json(const nlohmann::json& j);

}  // namespace affect::model
