#include "affect/alignment.hpp"

#include "affect/csv.hpp"
#include "affect/error.hpp"

#include <cmath>

namespace affect {

ShiftGrid ShiftGrid::standard() { return range(4.4, 0.2); }

ShiftGrid ShiftGrid::range(double last_seconds, double step_seconds) {
    if (!(step_seconds > 0.0) || last_seconds < 0.0) fail(Errc::InvalidArgument, "bad delay range");
    ShiftGrid grid;
    const auto steps = static_cast<int>(std::round(last_seconds / step_seconds));
    for (int i = 0; i <= steps; ++i) {
        // Rounded to 1e-9 s so that 0.2 * 3 reads back as 0.6.
        grid.delays.push_back(std::round(i * step_seconds * 1e9) / 1e9);
    }
    return grid;
}

void ShiftGrid::validate(int frame_rate) const {
    if (delays.empty()) fail(Errc::InvalidConfig, "empty delay grid");
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (delays[i] < 0.0) fail(Errc::InvalidConfig, "negative delay");
        if (i > 0 && !(delays[i] > delays[i - 1])) fail(Errc::InvalidConfig, "delays must be strictly increasing");
        delay_frames(delays[i], frame_rate);
    }
}

std::size_t delay_frames(double delay_seconds, int frame_rate) {
    if (delay_seconds < 0.0) fail(Errc::InvalidArgument, "delay must be non-negative");
    const double frames = delay_seconds * frame_rate;
    const double rounded = std::round(frames);
    if (std::abs(frames - rounded) > 1e-6) {
        fail(Errc::DelayNotFrameAligned, csv::format_double(delay_seconds) + " s is " + csv::format_double(frames) +
                                             " frames at " + std::to_string(frame_rate) + " fps");
    }
    return static_cast<std::size_t>(rounded);
}

PairedSequence shift_labels(const WindowedFeatureMatrix& features, const AnnotationTrack& labels,
                            double delay_seconds) {
    const std::size_t k = delay_frames(delay_seconds, features.plan.frame_rate);
    const std::size_t rows = features.rows();
    if (rows == 0) fail(Errc::TooFewRows, "no feature rows");
    if (labels.values.size() < features.end_frame(rows - 1) + 1) {
        fail(Errc::LengthMismatch, features.subject_id + ": annotation shorter than the feature span");
    }
    std::size_t kept = 0;
    while (kept < rows && features.end_frame(kept) + k < labels.values.size()) ++kept;

    PairedSequence out;
    out.features.subject_id = features.subject_id;
    out.features.plan = features.plan;
    out.features.columns = features.columns;
    out.features.values = features.values.topRows(static_cast<Eigen::Index>(kept));
    out.labels.resize(kept);
    for (std::size_t r = 0; r < kept; ++r) out.labels[r] = labels.values[features.end_frame(r) + k];
    return out;
}

Standardizer fit_standardizer(const Eigen::MatrixXd& train_features, std::span<const double> train_labels) {
    const auto rows = train_features.rows();
    if (rows < 2) fail(Errc::TooFewRows, "standardizer needs at least 2 training rows");
    if (static_cast<std::size_t>(rows) != train_labels.size()) {
        fail(Errc::LengthMismatch, "feature rows and labels differ in count");
    }
    Standardizer s;
    s.feature_mean = train_features.colwise().mean().transpose();
    s.feature_std.resize(train_features.cols());
    s.degenerate.assign(static_cast<std::size_t>(train_features.cols()), false);
    for (Eigen::Index j = 0; j < train_features.cols(); ++j) {
        const double var = (train_features.col(j).array() - s.feature_mean(j)).square().mean();
        const double sd = std::sqrt(var);
        if (sd < Standardizer::kDegenerateStd) {
            s.degenerate[static_cast<std::size_t>(j)] = true;
            s.feature_std(j) = 1.0;
        } else {
            s.feature_std(j) = sd;
        }
    }
    double sum = 0.0;
    for (double v : train_labels) sum += v;
    s.target_mean = sum / static_cast<double>(train_labels.size());
    double var = 0.0;
    for (double v : train_labels) var += (v - s.target_mean) * (v - s.target_mean);
    const double sd = std::sqrt(var / static_cast<double>(train_labels.size()));
    s.target_std = sd < Standardizer::kDegenerateStd ? 1.0 : sd;
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& features) const {
    if (static_cast<std::size_t>(features.cols()) != cols()) {
        fail(Errc::ColumnCountMismatch, std::to_string(features.cols()) + " columns, standardizer has " +
                                            std::to_string(cols()));
    }
    Eigen::MatrixXd z(features.rows(), features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        if (degenerate[static_cast<std::size_t>(j)]) {
            z.col(j).setZero();
        } else {
            z.col(j) = (features.col(j).array() - feature_mean(j)) / feature_std(j);
        }
    }
    return z;
}

std::vector<double> Standardizer::transform_target(std::span<const double> target) const {
    std::vector<double> out(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) out[i] = (target[i] - target_mean) / target_std;
    return out;
}

std::vector<double> Standardizer::invert_target(std::span<const double> standardized) const {
    std::vector<double> out(standardized.size());
    for (std::size_t i = 0; i < standardized.size(); ++i) out[i] = standardized[i] * target_std + target_mean;
    return out;
}

void to_json(nlohmann::json& j, const Standardizer& s) {
    j = nlohmann::json{
        {"feature_mean", std::vector<double>(s.feature_mean.data(), s.feature_mean.data() + s.feature_mean.size())},
        {"feature_std", std::vector<double>(s.feature_std.data(), s.feature_std.data() + s.feature_std.size())},
        {"degenerate", s.degenerate},
        {"target_mean", s.target_mean},
        {"target_std", s.target_std},
    };
}

void from_json(const nlohmann::json& j, Standardizer& s) {
    const auto mean = j.at("feature_mean").get<std::vector<double>>();
    const auto sd = j.at("feature_std").get<std::vector<double>>();
    if (mean.size() != sd.size()) fail(Errc::ParseError, "standardizer vectors differ in length");
    s.feature_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    s.feature_std = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    s.degenerate = j.at("degenerate").get<std::vector<bool>>();
    s.target_mean = j.at("target_mean").get<double>();
    s.target_std = j.at("target_std").get<double>();
}

}  // namespace affect
