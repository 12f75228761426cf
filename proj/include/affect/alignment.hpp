#pragma once

#include "affect/functionals.hpp"
#include "affect/ingest.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace affect {

struct ShiftGrid {
    std::vector<double> delays;

    /// 0.0, 0.2, ..., 4.4 seconds.
    static ShiftGrid standard();
    static ShiftGrid range(double last_seconds, double step_seconds);

    /// Non-negative, strictly increasing and frame-aligned at `frame_rate`.
    void validate(int frame_rate) const;
};

/// delay_seconds * frame_rate as a frame count; throws DelayNotFrameAligned
/// when it is not an integer.
std::size_t delay_frames(double delay_seconds, int frame_rate);

struct PairedSequence {
    WindowedFeatureMatrix features;
    std::vector<double> labels;
};

/// Pairs the feature row ending at frame t with the label at t + k, where
/// k = delay * frame_rate.  Rows that would pair past the end of the
/// annotation are dropped.
PairedSequence shift_labels(const WindowedFeatureMatrix& features, const AnnotationTrack& labels,
                            double delay_seconds);

/// z-score parameters fitted on the training partition.
struct Standardizer {
    Eigen::VectorXd feature_mean;
    Eigen::VectorXd feature_std;
    std::vector<bool> degenerate;
    double target_mean = 0.0;
    double target_std = 1.0;

    static constexpr double kDegenerateStd = 1e-12;

    std::size_t cols() const { return static_cast<std::size_t>(feature_mean.size()); }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
    std::vector<double> transform_target(std::span<const double> target) const;
    std::vector<double> invert_target(std::span<const double> standardized) const;
};

/// Population mean / std per column.  Columns with std below
/// kDegenerateStd are flagged and map to 0.
Standardizer fit_standardizer(const Eigen::MatrixXd& train_features, std::span<const double> train_labels);

void to_json(nlohmann::json& j, const Standardizer& s);
void from_json(const nlohmann::json& j, Standardizer& s);

}  // namespace affect
