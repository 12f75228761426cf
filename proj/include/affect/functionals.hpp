#pragma once

#include "affect/ingest.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affect {

constexpr std::size_t kContinuousFunctionals = 16;
constexpr std::size_t kBinaryFunctionals = 5;

/// min, max, mean, median, q1, q3, skewness, kurtosis, std, iqr, iqr_lower,
/// iqr_upper, slope, intercept, rms, zcr
const std::array<std::string_view, kContinuousFunctionals>& continuous_functional_names();

/// ratio, time_min, time_mean, time_max, time_total
const std::array<std::string_view, kBinaryFunctionals>& binary_functional_names();

/// Statistics of a window of a continuous descriptor.
///
/// Moments are population moments; skewness is Fisher-Pearson g1 and
/// kurtosis is excess kurtosis g2, both 0 for a zero-variance window.
/// Quartiles interpolate linearly between order statistics.  The slope is
/// in units per second against time from the window start, and the
/// zero-crossing rate counts strict sign changes of the mean-centred
/// samples divided by (W - 1).
std::array<double, kContinuousFunctionals> continuous_functionals(std::span<const double> window, int frame_rate);

/// Ratio of ones and duration statistics (seconds) over maximal runs of ones.
std::array<double, kBinaryFunctionals> binary_functionals(std::span<const double> window, int frame_rate);

struct WindowPlan {
    double window_seconds = 4.0;
    int frame_rate = 25;
    int hop_frames = 1;

    /// window_seconds * frame_rate; throws unless it is an integer >= 2.
    std::size_t window_frames() const;
};

struct WaveletOptions {
    bool enabled = true;
    int order = 10;
};

enum class View { Static, Dynamic, Wavelet };

std::string_view to_string(View view);
View view_from_string(std::string_view text);

struct ColumnInfo {
    std::string name;
    std::string channel;
    View view = View::Static;
    std::string functional;
};

/// One row per window, end-aligned: row r covers frames
/// [r * hop, r * hop + window_frames).
struct WindowedFeatureMatrix {
    std::string subject_id;
    WindowPlan plan;
    std::vector<ColumnInfo> columns;
    Eigen::MatrixXd values;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return columns.size(); }
    std::size_t end_frame(std::size_t row) const {
        return row * static_cast<std::size_t>(plan.hop_frames) + plan.window_frames() - 1;
    }

    /// Keeps the listed columns, in the given order.
    WindowedFeatureMatrix select(std::span<const std::size_t> keep) const;
    std::ptrdiff_t find(std::string_view column) const;
};

std::string column_name(std::string_view channel, View view, std::string_view functional);

/// Column layout extract_features will produce for a channel.
std::vector<ColumnInfo> feature_columns(const ChannelSpec& channel, const WindowPlan& plan,
                                        const WaveletOptions& wavelet);

/// Slides the window over each requested channel (all when `channels` is
/// empty).  Continuous channels get static and lagged-difference functionals
/// plus wavelet band statistics of the static view; binary channels get the
/// binary functionals.
WindowedFeatureMatrix extract_features(const RecordingSeries& series, const WindowPlan& plan,
                                       const WaveletOptions& wavelet = {},
                                       std::span<const std::string> channels = {});

/// Horizontal concatenation of matrices with equal row counts.
WindowedFeatureMatrix concat_columns(std::span<const WindowedFeatureMatrix> parts);

void write_feature_csv(const std::filesystem::path& path, const WindowedFeatureMatrix& matrix);
WindowedFeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace affect
