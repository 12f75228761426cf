#pragma once

#include "affect/functionals.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace affect {

struct MiOptions {
    int k = 3;
    /// Seeds the tie-breaking jitter (1e-10 x column std).
    std::uint64_t seed = 1787452436;
    /// Training rows are thinned with a uniform stride to at most this many
    /// samples before estimation; 0 keeps every row.
    std::size_t max_samples = 5000;
};

/// Mutual information in nats, clamped at 0.  Continuous features use the
/// Kraskov-Stoegbauer-Grassberger k-nearest-neighbour estimator (first
/// variant, max-norm); features whose values are all 0/1 use the
/// discrete-continuous nearest-neighbour estimator of Ross.
double estimate_mi(std::span<const double> feature, std::span<const double> target, const MiOptions& options = {});

struct MiReport {
    std::vector<std::string> features;
    std::vector<double> mi;
    double threshold = 0.0;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;
};

/// MI of every column against the target, on training rows only.
std::vector<double> mi_scores(const Eigen::MatrixXd& features, std::span<const double> target,
                              const MiOptions& options = {});

/// Keeps columns with MI >= threshold, preserving order.
MiReport threshold_report(std::span<const std::string> names, std::span<const double> mi, double threshold);

struct FilterResult {
    WindowedFeatureMatrix matrix;
    MiReport report;
};

/// Estimates MI on the given (training) pairs and drops weak columns.
/// Throws AllFeaturesDropped when nothing survives.
FilterResult filter_features(const WindowedFeatureMatrix& matrix, std::span<const double> target, double threshold,
                             const MiOptions& options = {});

/// CSV with columns feature, mi, kept.
void write_mi_report(const std::filesystem::path& path, const MiReport& report);

}  // namespace affect
