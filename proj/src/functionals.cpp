#include "affect/functionals.hpp"

#include "affect/csv.hpp"
#include "affect/error.hpp"
#include "affect/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace affect {

const std::array<std::string_view, kContinuousFunctionals>& continuous_functional_names() {
    static constexpr std::array<std::string_view, kContinuousFunctionals> names = {
        "min",      "max",      "mean", "median",    "q1",        "q3",    "skewness", "kurtosis",
        "std",      "iqr",      "iqr_lower", "iqr_upper", "slope", "intercept", "rms", "zcr"};
    return names;
}

const std::array<std::string_view, kBinaryFunctionals>& binary_functional_names() {
    static constexpr std::array<std::string_view, kBinaryFunctionals> names = {"ratio", "time_min", "time_mean",
                                                                                "time_max", "time_total"};
    return names;
}

namespace {

double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Shared by the static and dynamic views; `scratch` avoids a per-window
// allocation during extraction.
std::array<double, kContinuousFunctionals> compute_continuous(std::span<const double> x, int frame_rate,
                                                              std::vector<double>& scratch) {
    const std::size_t w = x.size();
    const auto n = static_cast<double>(w);

    scratch.assign(x.begin(), x.end());
    std::sort(scratch.begin(), scratch.end());
    const double lo = scratch.front();
    const double hi = scratch.back();
    const double q1 = quantile_sorted(scratch, 0.25);
    const double median = quantile_sorted(scratch, 0.5);
    const double q3 = quantile_sorted(scratch, 0.75);

    double sum = 0.0;
    double sq = 0.0;
    for (double v : x) {
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;

    // Time axis in seconds from the window start.
    const double dt = 1.0 / frame_rate;
    const double t_mean = 0.5 * (n - 1.0) * dt;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, s_tx = 0.0, s_tt = 0.0;
    for (std::size_t i = 0; i < w; ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        const double tc = static_cast<double>(i) * dt - t_mean;
        s_tx += tc * d;
        s_tt += tc * tc;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    const double scale = std::max(std::abs(lo), std::abs(hi));
    const bool degenerate = m2 <= (1e-12 * scale) * (1e-12 * scale);
    const double skewness = degenerate ? 0.0 : m3 / std::pow(m2, 1.5);
    const double kurtosis = degenerate ? 0.0 : m4 / (m2 * m2) - 3.0;
    const double slope = degenerate ? 0.0 : s_tx / s_tt;
    const double intercept = mean - slope * t_mean;

    std::size_t crossings = 0;
    if (!degenerate) {
        for (std::size_t i = 1; i < w; ++i) {
            if ((x[i] - mean) * (x[i - 1] - mean) < 0.0) ++crossings;
        }
    }

    return {lo,
            hi,
            mean,
            median,
            q1,
            q3,
            skewness,
            kurtosis,
            std::sqrt(m2),
            q3 - q1,
            median - q1,
            q3 - median,
            slope,
            intercept,
            std::sqrt(sq / n),
            static_cast<double>(crossings) / (n - 1.0)};
}

}  // namespace

std::array<double, kContinuousFunctionals> continuous_functionals(std::span<const double> window, int frame_rate) {
    if (window.size() < 2) fail(Errc::WindowTooShort, "continuous functionals need at least 2 samples");
    if (frame_rate <= 0) fail(Errc::InvalidArgument, "frame_rate must be positive");
    for (double v : window) {
        if (!std::isfinite(v)) fail(Errc::InvalidArgument, "non-finite value in window");
    }
    std::vector<double> scratch;
    return compute_continuous(window, frame_rate, scratch);
}

std::array<double, kBinaryFunctionals> binary_functionals(std::span<const double> window, int frame_rate) {
    if (window.size() < 2) fail(Errc::WindowTooShort, "binary functionals need at least 2 samples");
    if (frame_rate <= 0) fail(Errc::InvalidArgument, "frame_rate must be positive");
    std::size_t ones = 0;
    std::size_t runs = 0;
    std::size_t run_min = 0;
    std::size_t run_max = 0;
    std::size_t run = 0;
    auto close_run = [&] {
        if (run == 0) return;
        run_min = runs == 0 ? run : std::min(run_min, run);
        run_max = std::max(run_max, run);
        ++runs;
        run = 0;
    };
    for (double v : window) {
        if (v == 1.0) {
            ++ones;
            ++run;
        } else if (v == 0.0) {
            close_run();
        } else {
            fail(Errc::NonBinaryValue, "binary window holds " + csv::format_double(v));
        }
    }
    close_run();
    const double dt = 1.0 / frame_rate;
    const double total = static_cast<double>(ones) * dt;
    return {static_cast<double>(ones) / static_cast<double>(window.size()), static_cast<double>(run_min) * dt,
            runs == 0 ? 0.0 : total / static_cast<double>(runs), static_cast<double>(run_max) * dt, total};
}

std::size_t WindowPlan::window_frames() const {
    const double frames = window_seconds * frame_rate;
    const double rounded = std::round(frames);
    if (frame_rate <= 0 || std::abs(frames - rounded) > 1e-9 || rounded < 2.0) {
        fail(Errc::InvalidArgument, "window of " + csv::format_double(window_seconds) + " s at " +
                                        std::to_string(frame_rate) + " fps is not an integer frame count >= 2");
    }
    if (hop_frames < 1) fail(Errc::InvalidArgument, "hop must be at least one frame");
    return static_cast<std::size_t>(rounded);
}

std::string_view to_string(View view) {
    switch (view) {
        case View::Static: return "static";
        case View::Dynamic: return "dynamic";
        case View::Wavelet: return "wavelet";
    }
    return "?";
}

View view_from_string(std::string_view text) {
    if (text == "static") return View::Static;
    if (text == "dynamic") return View::Dynamic;
    if (text == "wavelet") return View::Wavelet;
    fail(Errc::ParseError, "unknown view '" + std::string(text) + "'");
}

std::string column_name(std::string_view channel, View view, std::string_view functional) {
    std::string name(channel);
    name += '.';
    name += to_string(view);
    name += '.';
    name += functional;
    return name;
}

WindowedFeatureMatrix WindowedFeatureMatrix::select(std::span<const std::size_t> keep) const {
    WindowedFeatureMatrix out;
    out.subject_id = subject_id;
    out.plan = plan;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        if (keep[j] >= columns.size()) fail(Errc::ColumnCountMismatch, "column index out of range");
        out.columns.push_back(columns[keep[j]]);
        out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(keep[j]));
    }
    return out;
}

std::ptrdiff_t WindowedFeatureMatrix::find(std::string_view column) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name == column) return static_cast<std::ptrdiff_t>(j);
    }
    return -1;
}

namespace {

int wavelet_levels(std::size_t window_frames, const WaveletOptions& options) {
    if (!options.enabled) return 0;
    const auto wavelet = wavelet::Wavelet::daubechies(options.order);
    return wavelet::max_levels(window_frames, wavelet.filter_length());
}

}  // namespace

std::vector<ColumnInfo> feature_columns(const ChannelSpec& channel, const WindowPlan& plan,
                                        const WaveletOptions& wavelet) {
    std::vector<ColumnInfo> cols;
    auto add = [&](View view, std::string_view functional) {
        cols.push_back({column_name(channel.name, view, functional), channel.name, view, std::string(functional)});
    };
    if (channel.kind == ChannelKind::Binary) {
        for (auto f : binary_functional_names()) add(View::Static, f);
        return cols;
    }
    for (auto f : continuous_functional_names()) add(View::Static, f);
    for (auto f : continuous_functional_names()) add(View::Dynamic, f);
    const int levels = wavelet_levels(plan.window_frames(), wavelet);
    if (levels > 0) {
        for (const auto& f : wavelet::band_feature_names(levels)) add(View::Wavelet, f);
    }
    return cols;
}

WindowedFeatureMatrix extract_features(const RecordingSeries& series, const WindowPlan& plan,
                                       const WaveletOptions& wavelet_options, std::span<const std::string> channels) {
    const std::size_t wf = plan.window_frames();
    const std::size_t n = series.frames();
    if (n < wf) {
        fail(Errc::SeriesTooShort, series.subject_id + ": " + std::to_string(n) + " frames < window of " +
                                       std::to_string(wf));
    }
    if (plan.frame_rate != series.frame_rate) {
        fail(Errc::InvalidArgument, "window plan frame rate differs from the series");
    }
    const std::size_t hop = static_cast<std::size_t>(plan.hop_frames);
    const std::size_t rows = (n - wf) / hop + 1;

    std::vector<std::size_t> indices;
    if (channels.empty()) {
        for (std::size_t c = 0; c < series.channels.size(); ++c) indices.push_back(c);
    } else {
        for (const auto& name : channels) indices.push_back(series.channel_index(name));
    }

    const int levels = wavelet_levels(wf, wavelet_options);
    const auto wavelet = wavelet_options.enabled ? wavelet::Wavelet::daubechies(wavelet_options.order)
                                                 : wavelet::Wavelet{};

    WindowedFeatureMatrix out;
    out.subject_id = series.subject_id;
    out.plan = plan;
    for (std::size_t c : indices) {
        auto cols = feature_columns(series.channels[c], plan, wavelet_options);
        out.columns.insert(out.columns.end(), cols.begin(), cols.end());
    }
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(out.columns.size()));

    std::vector<double> scratch;
    std::vector<double> diff(wf - 1);
    Eigen::Index col = 0;
    for (std::size_t c : indices) {
        const auto& values = series.data[c];
        const bool binary = series.channels[c].kind == ChannelKind::Binary;
        const Eigen::Index width = static_cast<Eigen::Index>(feature_columns(series.channels[c], plan,
                                                                             wavelet_options).size());
        for (std::size_t r = 0; r < rows; ++r) {
            const std::span<const double> window(values.data() + r * hop, wf);
            const auto row = static_cast<Eigen::Index>(r);
            Eigen::Index k = col;
            if (binary) {
                for (double v : binary_functionals(window, plan.frame_rate)) out.values(row, k++) = v;
                continue;
            }
            for (double v : compute_continuous(window, plan.frame_rate, scratch)) out.values(row, k++) = v;
            for (std::size_t i = 1; i < wf; ++i) diff[i - 1] = window[i] - window[i - 1];
            for (double v : compute_continuous(diff, plan.frame_rate, scratch)) out.values(row, k++) = v;
            if (levels > 0) {
                const auto decomposition = wavelet::dwt(window, levels, wavelet);
                for (double v : wavelet::band_features(decomposition)) out.values(row, k++) = v;
            }
        }
        col += width;
    }
    if (!out.values.allFinite()) fail(Errc::InvalidArgument, series.subject_id + ": non-finite feature value");
    return out;
}

WindowedFeatureMatrix concat_columns(std::span<const WindowedFeatureMatrix> parts) {
    if (parts.empty()) fail(Errc::InvalidArgument, "nothing to concatenate");
    WindowedFeatureMatrix out;
    out.subject_id = parts.front().subject_id;
    out.plan = parts.front().plan;
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.values.rows() != parts.front().values.rows()) fail(Errc::ShapeMismatch, "row counts differ");
        total += p.values.cols();
    }
    out.values.resize(parts.front().values.rows(), total);
    Eigen::Index col = 0;
    for (const auto& p : parts) {
        out.values.middleCols(col, p.values.cols()) = p.values;
        out.columns.insert(out.columns.end(), p.columns.begin(), p.columns.end());
        col += p.values.cols();
    }
    return out;
}

void write_feature_csv(const std::filesystem::path& path, const WindowedFeatureMatrix& matrix) {
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << "# subject=" << matrix.subject_id << '\n';
    out << "# window_seconds=" << csv::format_double(matrix.plan.window_seconds) << '\n';
    out << "# frame_rate=" << matrix.plan.frame_rate << '\n';
    out << "# hop_frames=" << matrix.plan.hop_frames << '\n';
    for (const auto& c : matrix.columns) {
        out << "# column=" << c.name << ',' << c.channel << ',' << to_string(c.view) << ',' << c.functional << '\n';
    }
    out << "end_frame";
    for (const auto& c : matrix.columns) out << ',' << c.name;
    out << '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out << matrix.end_frame(r);
        for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) {
            out << ',' << csv::format_double(matrix.values(static_cast<Eigen::Index>(r), j));
        }
        out << '\n';
    }
}

WindowedFeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    WindowedFeatureMatrix m;
    for (const auto& line : table.comments) {
        const auto body = std::string_view(line).substr(line.find_first_not_of("# "));
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) continue;
        const auto key = body.substr(0, eq);
        const auto value = std::string(body.substr(eq + 1));
        if (key == "subject") {
            m.subject_id = value;
        } else if (key == "window_seconds") {
            m.plan.window_seconds = csv::parse_double(value).value_or(0.0);
        } else if (key == "frame_rate") {
            m.plan.frame_rate = std::stoi(value);
        } else if (key == "hop_frames") {
            m.plan.hop_frames = std::stoi(value);
        } else if (key == "column") {
            const auto parts = csv::split_line(value);
            if (parts.size() != 4) fail(Errc::ParseError, "bad provenance line: " + line);
            m.columns.push_back({parts[0], parts[1], view_from_string(parts[2]), parts[3]});
        }
    }
    if (table.header.size() != m.columns.size() + 1) {
        fail(Errc::ColumnCountMismatch, "provenance block does not match the header of " + path.string());
    }
    m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(m.columns.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size()) fail(Errc::RowLengthMismatch, "row " + std::to_string(r + 1));
        for (std::size_t j = 0; j < m.columns.size(); ++j) {
            const auto v = csv::parse_double(table.rows[r][j + 1]);
            if (!v) fail(Errc::NonNumericCell, "row " + std::to_string(r + 1));
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
        }
    }
    return m;
}

}  // namespace affect
