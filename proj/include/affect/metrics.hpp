#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace affect::metrics {

/// Concordance correlation coefficient with population moments:
///   2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2)
/// Two identical constants score 1; zero covariance with a positive
/// denominator scores 0.
double ccc(std::span<const double> pred, std::span<const double> truth);

/// Sum of squared errors.
double sse(std::span<const double> pred, std::span<const double> truth);

/// Population Pearson correlation; throws ConstantInput on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct EvalResult {
    double ccc = 0.0;
    double sse = 0.0;
    double pearson_r = 0.0;
    std::size_t n = 0;
};

/// pearson_r is reported as 0 when either side is constant.
EvalResult evaluate(std::span<const double> pred, std::span<const double> truth);

enum class Pooling { Concatenate, MeanOfSubjects };

/// Partition-level score over several subject sequences.  Concatenation
/// scores the joined sequences; MeanOfSubjects averages per-subject CCC.
double partition_ccc(std::span<const std::vector<double>> preds, std::span<const std::vector<double>> truths,
                     Pooling pooling = Pooling::Concatenate);

}  // namespace affect::metrics
