#pragma once

// Single-level analysis by direct summation, out-of-range samples reflected
// about the half-sample boundary: x[-1] = x[0], x[n] = x[n-1].

#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

inline double reflect(const std::vector<double>& x, long i) {
    const long n = static_cast<long>(x.size());
    while (i < 0 || i >= n) i = i < 0 ? -1 - i : 2 * n - 1 - i;
    return x[static_cast<std::size_t>(i)];
}

// lo is the analysis low-pass filter; the high-pass is its alternating flip.
inline std::pair<std::vector<double>, std::vector<double>> dwt_level(const std::vector<double>& x,
                                                                     const std::vector<double>& lo) {
    const long f = static_cast<long>(lo.size());
    std::vector<double> hi(lo.size());
    for (long j = 0; j < f; ++j) hi[j] = ((j % 2) ? 1.0 : -1.0) * lo[f - 1 - j];
    const std::size_t len = (x.size() + lo.size() - 1) / 2;
    std::vector<double> a(len, 0.0), d(len, 0.0);
    for (std::size_t o = 0; o < len; ++o) {
        for (long j = 0; j < f; ++j) {
            const double v = reflect(x, 2 * static_cast<long>(o) + 1 - j);
            a[o] += lo[j] * v;
            d[o] += hi[j] * v;
        }
    }
    return {a, d};
}

}  // namespace oracle
