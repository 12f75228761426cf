#include "affect/selection.hpp"

#include "affect/csv.hpp"
#include "affect/error.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>

namespace affect {

namespace {

using boost::math::digamma;

constexpr std::size_t kMinSamples = 50;

bool is_binary(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || x == 1.0; });
}

double stddev(std::span<const double> v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

// Unit-variance copy with deterministic tie-breaking jitter.
std::vector<double> prepare(std::span<const double> v, std::mt19937_64& rng) {
    const double sd = stddev(v);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> out(v.size());
    const double scale = sd > 0.0 ? 1.0 / sd : 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale + 1e-10 * unit(rng);
    return out;
}

// Points strictly closer than `radius` to `centre` in a sorted array,
// the centre point itself included when present.
std::size_t count_within(const std::vector<double>& sorted, double centre, double radius) {
    const auto lo = std::upper_bound(sorted.begin(), sorted.end(), centre - radius);
    const auto hi = std::lower_bound(sorted.begin(), sorted.end(), centre + radius);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

double ksg(const std::vector<double>& x, const std::vector<double>& y, int k) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs(n), ys(y);
    for (std::size_t p = 0; p < n; ++p) xs[p] = x[order[p]];
    std::sort(ys.begin(), ys.end());

    double acc = 0.0;
    std::priority_queue<double> nearest;  // k smallest max-norm distances so far
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t i = order[p];
        nearest = {};
        auto offer = [&](std::size_t q) {
            const std::size_t j = order[q];
            const double d = std::max(std::abs(x[j] - x[i]), std::abs(y[j] - y[i]));
            if (nearest.size() < static_cast<std::size_t>(k)) {
                nearest.push(d);
            } else if (d < nearest.top()) {
                nearest.pop();
                nearest.push(d);
            }
        };
        std::size_t left = p;
        std::size_t right = p + 1;
        while (true) {
            const bool full = nearest.size() == static_cast<std::size_t>(k);
            const double bound = full ? nearest.top() : std::numeric_limits<double>::infinity();
            const double dl = left > 0 ? x[i] - xs[left - 1] : std::numeric_limits<double>::infinity();
            const double dr = right < n ? xs[right] - x[i] : std::numeric_limits<double>::infinity();
            if (std::min(dl, dr) >= bound || (left == 0 && right == n)) break;
            if (dl <= dr) {
                offer(--left);
            } else {
                offer(right++);
            }
        }
        const double eps = nearest.top();
        const std::size_t nx = count_within(xs, x[i], eps) - 1;
        const std::size_t ny = count_within(ys, y[i], eps) - 1;
        acc += digamma(static_cast<double>(nx + 1)) + digamma(static_cast<double>(ny + 1));
    }
    return digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) - acc / static_cast<double>(n);
}

double discrete_continuous(std::span<const double> labels, const std::vector<double>& y, int k) {
    const std::size_t n = y.size();
    std::vector<double> all_sorted(y);
    std::sort(all_sorted.begin(), all_sorted.end());

    double acc_label = 0.0, acc_k = 0.0, acc_m = 0.0;
    std::size_t used = 0;
    for (double cls : {0.0, 1.0}) {
        std::vector<double> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == cls) members.push_back(y[i]);
        }
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        const int kc = std::min<int>(k, static_cast<int>(members.size()) - 1);
        for (std::size_t p = 0; p < members.size(); ++p) {
            // k-th nearest same-class neighbour by merging outward in sorted order.
            std::size_t left = p, right = p + 1;
            double radius = 0.0;
            for (int step = 0; step < kc; ++step) {
                const double dl = left > 0 ? members[p] - members[left - 1] : std::numeric_limits<double>::infinity();
                const double dr = right < members.size() ? members[right] - members[p]
                                                         : std::numeric_limits<double>::infinity();
                if (dl <= dr) {
                    radius = dl;
                    --left;
                } else {
                    radius = dr;
                    ++right;
                }
            }
            const std::size_t m = count_within(all_sorted, members[p], radius);
            acc_label += digamma(static_cast<double>(members.size()));
            acc_k += digamma(static_cast<double>(kc));
            acc_m += digamma(static_cast<double>(std::max<std::size_t>(m, 1)));
            ++used;
        }
    }
    if (used == 0) return 0.0;
    const auto u = static_cast<double>(used);
    return digamma(static_cast<double>(used)) + acc_k / u - acc_label / u - acc_m / u;
}

}  // namespace

double estimate_mi(std::span<const double> feature, std::span<const double> target, const MiOptions& options) {
    if (feature.size() != target.size()) {
        fail(Errc::LengthMismatch, std::to_string(feature.size()) + " vs " + std::to_string(target.size()));
    }
    if (feature.size() < kMinSamples) fail(Errc::TooFewSamples, "MI estimation needs at least 50 samples");
    if (options.k < 1) fail(Errc::InvalidArgument, "k must be positive");
    if (static_cast<std::size_t>(options.k) >= feature.size()) fail(Errc::TooFewSamples, "k exceeds sample count");
    if (stddev(feature) == 0.0 || stddev(target) == 0.0) return 0.0;

    std::mt19937_64 rng(options.seed);
    double mi = 0.0;
    if (is_binary(feature)) {
        mi = discrete_continuous(feature, prepare(target, rng), options.k);
    } else {
        const auto x = prepare(feature, rng);
        const auto y = prepare(target, rng);
        mi = ksg(x, y, options.k);
    }
    return std::max(0.0, mi);
}

std::vector<double> mi_scores(const Eigen::MatrixXd& features, std::span<const double> target,
                              const MiOptions& options) {
    const auto rows = static_cast<std::size_t>(features.rows());
    if (rows != target.size()) fail(Errc::LengthMismatch, "feature rows and target differ in count");

    std::vector<std::size_t> picks;
    const std::size_t limit = options.max_samples == 0 ? rows : std::min(rows, options.max_samples);
    for (std::size_t s = 0; s < limit; ++s) picks.push_back(s * rows / limit);

    std::vector<double> y(picks.size());
    for (std::size_t s = 0; s < picks.size(); ++s) y[s] = target[picks[s]];
    std::vector<double> scores(static_cast<std::size_t>(features.cols()));
    std::vector<double> x(picks.size());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        for (std::size_t s = 0; s < picks.size(); ++s) x[s] = features(static_cast<Eigen::Index>(picks[s]), j);
        scores[static_cast<std::size_t>(j)] = estimate_mi(x, y, options);
    }
    return scores;
}

MiReport threshold_report(std::span<const std::string> names, std::span<const double> mi, double threshold) {
    if (!(threshold > 0.0)) fail(Errc::InvalidArgument, "MI threshold must be positive");
    if (names.size() != mi.size()) fail(Errc::LengthMismatch, "feature names and MI values differ in count");
    MiReport report;
    report.features.assign(names.begin(), names.end());
    report.mi.assign(mi.begin(), mi.end());
    report.threshold = threshold;
    for (std::size_t j = 0; j < mi.size(); ++j) {
        (mi[j] >= threshold ? report.kept : report.dropped).push_back(j);
    }
    return report;
}

FilterResult filter_features(const WindowedFeatureMatrix& matrix, std::span<const double> target, double threshold,
                             const MiOptions& options) {
    if (!(threshold > 0.0)) fail(Errc::InvalidArgument, "MI threshold must be positive");
    std::vector<std::string> names;
    for (const auto& c : matrix.columns) names.push_back(c.name);
    const auto scores = mi_scores(matrix.values, target, options);
    FilterResult result{{}, threshold_report(names, scores, threshold)};
    if (result.report.kept.empty()) {
        fail(Errc::AllFeaturesDropped, "no feature reaches MI " + csv::format_double(threshold) + " nats");
    }
    result.matrix = matrix.select(result.report.kept);
    return result;
}

void write_mi_report(const std::filesystem::path& path, const MiReport& report) {
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << "# threshold=" << csv::format_double(report.threshold) << '\n';
    out << "feature,mi,kept\n";
    std::vector<bool> kept(report.features.size(), false);
    for (std::size_t j : report.kept) kept[j] = true;
    for (std::size_t j = 0; j < report.features.size(); ++j) {
        out << report.features[j] << ',' << csv::format_double(report.mi[j]) << ',' << (kept[j] ? 1 : 0) << '\n';
    }
}

}  // namespace affect
