#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace affect::wavelet {

/// Orthonormal two-channel filter bank.  Filters follow the usual
/// dec_lo / dec_hi / rec_lo / rec_hi convention.
struct Wavelet {
    int order = 0;
    std::vector<double> dec_lo;
    std::vector<double> dec_hi;
    std::vector<double> rec_lo;
    std::vector<double> rec_hi;

    std::size_t filter_length() const { return dec_lo.size(); }

    /// Daubechies wavelet with `order` vanishing moments (db1 .. db10);
    /// filter length is 2 * order.
    static Wavelet daubechies(int order);
};

enum class Extension {
    Symmetric,      ///< half-sample symmetric; output length floor((n + F - 1) / 2)
    Periodization,  ///< circular, n / 2 coefficients; requires even lengths
};

struct Decomposition {
    int levels = 0;
    /// d1 (finest) .. dL
    std::vector<std::vector<double>> details;
    /// aL
    std::vector<double> approximation;
    /// Length of the signal entering each level; needed to undo the
    /// boundary growth on reconstruction.
    std::vector<std::size_t> input_lengths;
    Extension extension = Extension::Symmetric;
};

/// floor(log2(window_frames / (filter_length - 1)))
int max_levels(std::size_t window_frames, std::size_t filter_length);

Decomposition dwt(std::span<const double> signal, int levels, const Wavelet& wavelet,
                  Extension extension = Extension::Symmetric);

std::vector<double> idwt(const Decomposition& decomposition, const Wavelet& wavelet);

constexpr std::size_t kStatsPerBand = 5;

/// Per band d1..dL then aL: min, max, mean, std (population), rms.
std::vector<double> band_features(const Decomposition& decomposition);

std::vector<std::string> band_feature_names(int levels);

}  // namespace affect::wavelet
