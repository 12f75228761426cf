#include "affect/wavelet.hpp"

#include "affect/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace affect::wavelet {

namespace {

#include "daubechies_coefficients.inc"

std::span<const double> scaling_filter(int order) {
    switch (order) {
        case 1: return kDb1;
        case 2: return kDb2;
        case 3: return kDb3;
        case 4: return kDb4;
        case 5: return kDb5;
        case 6: return kDb6;
        case 7: return kDb7;
        case 8: return kDb8;
        case 9: return kDb9;
        case 10: return kDb10;
        default: fail(Errc::InvalidArgument, "Daubechies order must be in 1..10, got " + std::to_string(order));
    }
}

// Half-sample symmetric reflection of an arbitrary index into [0, n).
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t k = i % period;
    if (k < 0) k += period;
    return static_cast<std::size_t>(k < static_cast<std::ptrdiff_t>(n) ? k : period - 1 - k);
}

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto len = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t k = i % len;
    if (k < 0) k += len;
    return static_cast<std::size_t>(k);
}

// One analysis step.  With h = rec_lo and g = rec_hi the coefficients are
//   a[o] = sum_m h[m] x[2o + m - (F - 2)],  d[o] = sum_m g[m] x[2o + m - (F - 2)]
// which equals the decimated convolution with dec_lo / dec_hi.
void analyze(std::span<const double> x, const Wavelet& w, Extension ext, std::vector<double>& approx,
             std::vector<double>& detail) {
    const std::size_t n = x.size();
    const std::size_t f = w.filter_length();
    const auto shift = static_cast<std::ptrdiff_t>(f) - 2;
    const std::size_t out = ext == Extension::Symmetric ? (n + f - 1) / 2 : n / 2;
    approx.assign(out, 0.0);
    detail.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        double a = 0.0;
        double d = 0.0;
        const std::ptrdiff_t base = 2 * static_cast<std::ptrdiff_t>(o) - shift;
        for (std::size_t m = 0; m < f; ++m) {
            const std::ptrdiff_t i = base + static_cast<std::ptrdiff_t>(m);
            const double v = ext == Extension::Symmetric ? x[reflect(i, n)] : x[wrap(i, n)];
            a += w.rec_lo[m] * v;
            d += w.rec_hi[m] * v;
        }
        approx[o] = a;
        detail[o] = d;
    }
}

std::vector<double> synthesize(std::span<const double> approx, std::span<const double> detail, const Wavelet& w,
                               Extension ext, std::size_t n) {
    const std::size_t f = w.filter_length();
    const auto shift = static_cast<std::ptrdiff_t>(f) - 2;
    std::vector<double> x(n, 0.0);
    for (std::size_t o = 0; o < approx.size(); ++o) {
        const std::ptrdiff_t base = 2 * static_cast<std::ptrdiff_t>(o) - shift;
        for (std::size_t m = 0; m < f; ++m) {
            std::ptrdiff_t i = base + static_cast<std::ptrdiff_t>(m);
            if (ext == Extension::Symmetric) {
                if (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) continue;
            } else {
                i = static_cast<std::ptrdiff_t>(wrap(i, n));
            }
            x[static_cast<std::size_t>(i)] += w.rec_lo[m] * approx[o] + w.rec_hi[m] * detail[o];
        }
    }
    return x;
}

}  // namespace

Wavelet Wavelet::daubechies(int order) {
    const auto h = scaling_filter(order);
    Wavelet w;
    w.order = order;
    const std::size_t f = h.size();
    w.dec_lo.assign(h.begin(), h.end());
    w.rec_lo.assign(h.rbegin(), h.rend());
    w.rec_hi.resize(f);
    for (std::size_t k = 0; k < f; ++k) {
        w.rec_hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * w.rec_lo[f - 1 - k];
    }
    w.dec_hi.assign(w.rec_hi.rbegin(), w.rec_hi.rend());
    return w;
}

int max_levels(std::size_t window_frames, std::size_t filter_length) {
    if (filter_length < 2) fail(Errc::InvalidArgument, "filter length must be at least 2");
    if (window_frames < filter_length) {
        fail(Errc::WindowShorterThanFilter, std::to_string(window_frames) + " frames < filter length " +
                                                std::to_string(filter_length));
    }
    // Integer form of floor(log2(n / (F - 1))): the largest L with (F - 1) * 2^L <= n.
    int levels = 0;
    while ((filter_length - 1) << (levels + 1) <= window_frames) ++levels;
    return levels;
}

Decomposition dwt(std::span<const double> signal, int levels, const Wavelet& wavelet, Extension extension) {
    if (levels < 1) fail(Errc::InvalidArgument, "at least one decomposition level required");
    if (extension == Extension::Symmetric) {
        if (levels > max_levels(signal.size(), wavelet.filter_length())) {
            fail(Errc::TooManyLevels, std::to_string(levels) + " levels requested for " +
                                          std::to_string(signal.size()) + " samples");
        }
    } else if (signal.size() % (std::size_t{1} << levels) != 0) {
        fail(Errc::TooManyLevels, "periodization needs the length divisible by 2^levels");
    }

    Decomposition out;
    out.levels = levels;
    out.extension = extension;
    std::vector<double> current(signal.begin(), signal.end());
    for (int level = 0; level < levels; ++level) {
        std::vector<double> approx, detail;
        analyze(current, wavelet, extension, approx, detail);
        out.input_lengths.push_back(current.size());
        out.details.push_back(std::move(detail));
        current = std::move(approx);
    }
    out.approximation = std::move(current);
    return out;
}

std::vector<double> idwt(const Decomposition& decomposition, const Wavelet& wavelet) {
    std::vector<double> current = decomposition.approximation;
    for (int level = decomposition.levels - 1; level >= 0; --level) {
        const auto& detail = decomposition.details[static_cast<std::size_t>(level)];
        if (detail.size() != current.size()) fail(Errc::ShapeMismatch, "band lengths disagree");
        current = synthesize(current, detail, wavelet, decomposition.extension,
                             decomposition.input_lengths[static_cast<std::size_t>(level)]);
    }
    return current;
}

namespace {

void append_stats(std::span<const double> band, std::vector<double>& out) {
    if (band.empty()) {
        out.insert(out.end(), kStatsPerBand, 0.0);
        return;
    }
    double lo = band[0];
    double hi = band[0];
    double sum = 0.0;
    double sq = 0.0;
    for (double v : band) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        sq += v * v;
    }
    const auto n = static_cast<double>(band.size());
    const double mean = sum / n;
    double var = 0.0;
    for (double v : band) var += (v - mean) * (v - mean);
    var /= n;
    out.push_back(lo);
    out.push_back(hi);
    out.push_back(mean);
    out.push_back(std::sqrt(var));
    out.push_back(std::sqrt(sq / n));
}

}  // namespace

std::vector<double> band_features(const Decomposition& decomposition) {
    std::vector<double> out;
    out.reserve((decomposition.details.size() + 1) * kStatsPerBand);
    for (const auto& d : decomposition.details) append_stats(d, out);
    append_stats(decomposition.approximation, out);
    return out;
}

std::vector<std::string> band_feature_names(int levels) {
    static constexpr const char* kStats[] = {"min", "max", "mean", "std", "rms"};
    std::vector<std::string> names;
    auto add_band = [&](const std::string& band) {
        for (const char* s : kStats) names.push_back(band + "_" + s);
    };
    for (int l = 1; l <= levels; ++l) add_band("d" + std::to_string(l));
    add_band("a" + std::to_string(levels));
    return names;
}

}  // namespace affect::wavelet
