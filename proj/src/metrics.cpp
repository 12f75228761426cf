#include "affect/metrics.hpp"

#include "affect/error.hpp"

#include <cmath>

namespace affect::metrics {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, std::size_t min_size) {
    if (x.size() != y.size()) {
        fail(Errc::LengthMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()) + " samples");
    }
    if (x.size() < min_size) fail(Errc::TooFewSamples, "need at least " + std::to_string(min_size) + " samples");
}

struct Moments {
    double mean_x = 0.0, mean_y = 0.0, var_x = 0.0, var_y = 0.0, cov = 0.0;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    Moments m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.mean_x += x[i];
        m.mean_y += y[i];
    }
    m.mean_x /= n;
    m.mean_y /= n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - m.mean_x;
        const double dy = y[i] - m.mean_y;
        m.var_x += dx * dx;
        m.var_y += dy * dy;
        m.cov += dx * dy;
    }
    m.var_x /= n;
    m.var_y /= n;
    m.cov /= n;
    return m;
}

}  // namespace

double ccc(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth, 2);
    const Moments m = moments(pred, truth);
    const double shift = m.mean_x - m.mean_y;
    const double denom = m.var_x + m.var_y + shift * shift;
    if (denom == 0.0) return 1.0;
    return 2.0 * m.cov / denom;
}

double sse(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        total += e * e;
    }
    return total;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 2);
    const Moments m = moments(x, y);
    if (m.var_x == 0.0 || m.var_y == 0.0) fail(Errc::ConstantInput, "pearson correlation of a constant sequence");
    return m.cov / std::sqrt(m.var_x * m.var_y);
}

EvalResult evaluate(std::span<const double> pred, std::span<const double> truth) {
    EvalResult r;
    r.ccc = ccc(pred, truth);
    r.sse = sse(pred, truth);
    const Moments m = moments(pred, truth);
    r.pearson_r = (m.var_x == 0.0 || m.var_y == 0.0) ? 0.0 : m.cov / std::sqrt(m.var_x * m.var_y);
    r.n = pred.size();
    return r;
}

double partition_ccc(std::span<const std::vector<double>> preds, std::span<const std::vector<double>> truths,
                     Pooling pooling) {
    if (preds.size() != truths.size()) fail(Errc::LengthMismatch, "subject counts differ");
    if (preds.empty()) fail(Errc::TooFewSamples, "no subjects");
    if (pooling == Pooling::MeanOfSubjects) {
        double total = 0.0;
        for (std::size_t s = 0; s < preds.size(); ++s) total += ccc(preds[s], truths[s]);
        return total / static_cast<double>(preds.size());
    }
    std::vector<double> p, t;
    for (std::size_t s = 0; s < preds.size(); ++s) {
        p.insert(p.end(), preds[s].begin(), preds[s].end());
        t.insert(t.end(), truths[s].begin(), truths[s].end());
    }
    return ccc(p, t);
}

}  // namespace affect::metrics
