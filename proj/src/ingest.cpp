#include "affect/ingest.hpp"

#include "affect/csv.hpp"
#include "affect/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace affect {

std::string_view to_string(ChannelKind kind) {
    return kind == ChannelKind::Binary ? "binary" : "continuous";
}

ChannelKind channel_kind_from_string(std::string_view text) {
    if (text == "continuous") return ChannelKind::Continuous;
    if (text == "binary") return ChannelKind::Binary;
    fail(Errc::InvalidArgument, "unknown channel kind '" + std::string(text) + "'");
}

std::string_view to_string(Dimension dimension) {
    return dimension == Dimension::Arousal ? "arousal" : "valence";
}

Dimension dimension_from_string(std::string_view text) {
    if (text == "arousal") return Dimension::Arousal;
    if (text == "valence") return Dimension::Valence;
    fail(Errc::InvalidArgument, "unknown affect dimension '" + std::string(text) + "'");
}

std::string_view to_string(Partition partition) {
    switch (partition) {
        case Partition::Train: return "train";
        case Partition::Validation: return "validation";
        case Partition::Test: return "test";
    }
    return "?";
}

bool RecordingSeries::has_channel(std::string_view name) const {
    return std::any_of(channels.begin(), channels.end(),
                       [&](const ChannelSpec& c) { return c.name == name; });
}

std::size_t RecordingSeries::channel_index(std::string_view name) const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i].name == name) return i;
    }
    fail(Errc::UnknownChannel, std::string(name) + " (subject " + subject_id + ")");
}

const ChannelSpec& RecordingSeries::spec(std::string_view name) const {
    return channels[channel_index(name)];
}

std::span<const double> RecordingSeries::channel(std::string_view name) const {
    return data[channel_index(name)];
}

void RecordingSeries::add_channel(ChannelSpec spec, std::vector<double> values) {
    if (has_channel(spec.name)) {
        fail(Errc::InvalidArgument, "duplicate channel '" + spec.name + "'");
    }
    if (!data.empty() && values.size() != frames()) {
        fail(Errc::LengthMismatch, "channel '" + spec.name + "' has " + std::to_string(values.size()) +
                                       " frames, series has " + std::to_string(frames()));
    }
    channels.push_back(std::move(spec));
    data.push_back(std::move(values));
}

PartitionSpec PartitionSpec::recola() {
    PartitionSpec spec;
    spec.train = {"P16", "P17", "P19", "P21", "P23", "P26", "P30", "P65"};
    spec.validation = {"P25", "P28", "P34", "P37", "P41", "P48", "P56", "P58"};
    spec.test = {"P39", "P42", "P43", "P45", "P46", "P62", "P64"};
    return spec;
}

void PartitionSpec::validate() const {
    if (train.empty() || validation.empty() || test.empty()) {
        fail(Errc::InvalidPartition, "every partition needs at least one subject");
    }
    std::set<std::string> seen;
    for (const auto* list : {&train, &validation, &test}) {
        for (const auto& id : *list) {
            if (!seen.insert(id).second) {
                fail(Errc::InvalidPartition, "subject '" + id + "' listed more than once");
            }
        }
    }
}

const std::vector<std::string>& PartitionSpec::subjects(Partition partition) const {
    switch (partition) {
        case Partition::Train: return train;
        case Partition::Validation: return validation;
        case Partition::Test: return test;
    }
    return train;
}

Partition assign_partition(std::string_view subject_id, const PartitionSpec& spec) {
    for (Partition p : {Partition::Train, Partition::Validation, Partition::Test}) {
        const auto& list = spec.subjects(p);
        if (std::find(list.begin(), list.end(), subject_id) != list.end()) return p;
    }
    fail(Errc::UnknownSubject, std::string(subject_id));
}

TrackerMapping TrackerMapping::openface() {
    TrackerMapping m;
    auto add = [&](std::string channel, std::vector<std::string> columns, ChannelKind kind, std::string units) {
        m.channels.push_back({std::move(channel), std::move(columns), kind, std::move(units)});
    };
    add("head_loc_x", {"pose_Tx"}, ChannelKind::Continuous, "millimeters");
    add("head_loc_y", {"pose_Ty"}, ChannelKind::Continuous, "millimeters");
    add("head_loc_z", {"pose_Tz"}, ChannelKind::Continuous, "millimeters");
    add("head_pitch", {"pose_Rx"}, ChannelKind::Continuous, "radians");
    add("head_yaw", {"pose_Ry"}, ChannelKind::Continuous, "radians");
    add("head_roll", {"pose_Rz"}, ChannelKind::Continuous, "radians");
    add("gaze_x", {"gaze_angle_x"}, ChannelKind::Continuous, "radians");
    add("gaze_y", {"gaze_angle_y"}, ChannelKind::Continuous, "radians");
    add("gaze_distance", {"gaze_distance_0", "gaze_distance_1"}, ChannelKind::Continuous, "millimeters");
    add("pupil_diameter", {"pupil_diameter_0", "pupil_diameter_1"}, ChannelKind::Continuous, "millimeters");
    add("blink", {"AU45_c"}, ChannelKind::Binary, "logical");
    add("blink_intensity", {"AU45_r"}, ChannelKind::Continuous, "intensity");
    m.confidence_column = "confidence";
    return m;
}

TrackerMapping TrackerMapping::identity(const RecordingSeries& series) {
    TrackerMapping m;
    for (const auto& c : series.channels) m.channels.push_back({c.name, {c.name}, c.kind, c.units});
    if (!series.confidence.empty()) m.confidence_column = "confidence";
    return m;
}

namespace {

std::size_t require_column(const csv::Table& table, const std::string& name) {
    const auto index = table.find(name);
    if (!index) fail(Errc::MissingColumn, name);
    return *index;
}

double numeric_cell(const csv::Table& table, std::size_t row, std::size_t col) {
    const auto value = csv::parse_double(table.rows[row][col]);
    if (!value) {
        fail(Errc::NonNumericCell,
             "row " + std::to_string(row + 1) + ", column '" + table.header[col] + "'");
    }
    return *value;
}

void check_row_lengths(const csv::Table& table) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size()) {
            fail(Errc::RowLengthMismatch, "row " + std::to_string(r + 1) + " has " +
                                              std::to_string(table.rows[r].size()) + " cells, header has " +
                                              std::to_string(table.header.size()));
        }
    }
}

}  // namespace

RecordingSeries parse_tracker_csv(const std::filesystem::path& path, const TrackerMapping& mapping,
                                  std::string subject_id, int frame_rate) {
    if (frame_rate <= 0) fail(Errc::InvalidArgument, "frame_rate must be positive");
    const csv::Table table = csv::read(path);

    // Resolve every column up front so a missing column is reported before
    // any cell-level problem.
    std::vector<std::vector<std::size_t>> sources;
    for (const auto& m : mapping.channels) {
        if (m.columns.empty()) fail(Errc::InvalidArgument, "channel '" + m.channel + "' maps no columns");
        std::vector<std::size_t> cols;
        for (const auto& c : m.columns) cols.push_back(require_column(table, c));
        sources.push_back(std::move(cols));
    }
    std::optional<std::size_t> confidence_col;
    if (!mapping.confidence_column.empty()) {
        confidence_col = table.find(mapping.confidence_column);
    }

    if (table.rows.empty()) fail(Errc::EmptyFile, path.string() + " has no data rows");
    check_row_lengths(table);

    RecordingSeries series;
    series.subject_id = subject_id.empty() ? path.stem().string() : std::move(subject_id);
    series.frame_rate = frame_rate;
    const std::size_t n = table.rows.size();

    for (std::size_t ch = 0; ch < mapping.channels.size(); ++ch) {
        const auto& m = mapping.channels[ch];
        std::vector<double> values(n);
        for (std::size_t r = 0; r < n; ++r) {
            double sum = 0.0;
            for (std::size_t col : sources[ch]) sum += numeric_cell(table, r, col);
            values[r] = sum / static_cast<double>(sources[ch].size());
        }
        series.add_channel({m.channel, m.kind, m.units}, std::move(values));
    }
    if (confidence_col) {
        series.confidence.resize(n);
        for (std::size_t r = 0; r < n; ++r) series.confidence[r] = numeric_cell(table, r, *confidence_col);
    }
    return series;
}

void write_tracker_csv(const std::filesystem::path& path, const RecordingSeries& series) {
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << "frame";
    if (!series.confidence.empty()) out << ",confidence";
    for (const auto& c : series.channels) out << ',' << c.name;
    out << '\n';
    for (std::size_t t = 0; t < series.frames(); ++t) {
        out << t;
        if (!series.confidence.empty()) out << ',' << csv::format_double(series.confidence[t]);
        for (const auto& values : series.data) out << ',' << csv::format_double(values[t]);
        out << '\n';
    }
}

AnnotationTrack parse_annotation_csv(const std::filesystem::path& path, Dimension dimension,
                                     std::string subject_id) {
    const csv::Table table = csv::read(path);
    const std::size_t col = require_column(table, std::string(to_string(dimension)));
    if (table.rows.empty()) fail(Errc::EmptyFile, path.string() + " has no data rows");
    check_row_lengths(table);

    AnnotationTrack track;
    track.subject_id = subject_id.empty() ? path.stem().string() : std::move(subject_id);
    track.dimension = dimension;
    track.values.resize(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double v = numeric_cell(table, r, col);
        if (!(v >= -1.0 && v <= 1.0)) {
            fail(Errc::OutOfRange, "annotation value " + table.rows[r][col] + " at row " + std::to_string(r + 1) +
                                       " outside [-1, 1]");
        }
        track.values[r] = v;
    }
    return track;
}

void write_annotation_csv(const std::filesystem::path& path, std::span<const AnnotationTrack> tracks) {
    if (tracks.empty()) fail(Errc::InvalidArgument, "no annotation tracks to write");
    const std::size_t n = tracks.front().values.size();
    for (const auto& t : tracks) {
        if (t.values.size() != n) fail(Errc::LengthMismatch, "annotation tracks differ in length");
    }
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << "frame";
    for (const auto& t : tracks) out << ',' << to_string(t.dimension);
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << i;
        for (const auto& t : tracks) out << ',' << csv::format_double(t.values[i]);
        out << '\n';
    }
}

std::vector<double> parse_binary_column(const std::filesystem::path& path, const std::string& column) {
    const csv::Table table = csv::read(path);
    const std::size_t col = require_column(table, column);
    if (table.rows.empty()) fail(Errc::EmptyFile, path.string() + " has no data rows");
    check_row_lengths(table);
    std::vector<double> values(table.rows.size());
    for (std::size_t r = 0; r < values.size(); ++r) values[r] = numeric_cell(table, r, col);
    return values;
}

namespace {

void repair_channel(std::vector<double>& values, const std::vector<bool>& frame_invalid, ChannelKind kind,
                    std::size_t max_gap_frames, const std::string& name) {
    const std::size_t n = values.size();
    std::vector<bool> bad(n);
    for (std::size_t t = 0; t < n; ++t) bad[t] = frame_invalid[t] || !std::isfinite(values[t]);

    const auto first_valid = std::find(bad.begin(), bad.end(), false);
    if (first_valid == bad.end()) fail(Errc::AllFramesInvalid, name);
    const auto first = static_cast<std::size_t>(first_valid - bad.begin());
    for (std::size_t t = 0; t < first; ++t) values[t] = values[first];

    std::size_t t = first + 1;
    while (t < n) {
        if (!bad[t]) {
            ++t;
            continue;
        }
        const std::size_t start = t;
        while (t < n && bad[t]) ++t;
        const std::size_t run = t - start;
        const double before = values[start - 1];
        const bool interpolate = kind == ChannelKind::Continuous && t < n && run <= max_gap_frames;
        for (std::size_t i = start; i < t; ++i) {
            if (interpolate) {
                const double frac = static_cast<double>(i - start + 1) / static_cast<double>(run + 1);
                values[i] = before + (values[t] - before) * frac;
            } else {
                values[i] = before;
            }
        }
    }
}

}  // namespace

RecordingSeries repair_missing(const RecordingSeries& series, const RepairOptions& options) {
    if (!(options.max_gap_seconds >= 0.0)) fail(Errc::InvalidArgument, "max_gap must be non-negative");
    RecordingSeries out = series;
    const std::size_t n = series.frames();
    std::vector<bool> frame_invalid(n, false);
    if (!series.confidence.empty()) {
        if (series.confidence.size() != n) fail(Errc::LengthMismatch, "confidence length differs from series");
        for (std::size_t t = 0; t < n; ++t) {
            frame_invalid[t] = !(series.confidence[t] >= options.confidence_threshold);
        }
    }
    const auto max_gap_frames =
        static_cast<std::size_t>(std::floor(options.max_gap_seconds * series.frame_rate + 1e-9));
    for (std::size_t c = 0; c < out.channels.size(); ++c) {
        repair_channel(out.data[c], frame_invalid, out.channels[c].kind, max_gap_frames, out.channels[c].name);
    }
    validate_series(out);
    return out;
}

void validate_series(const RecordingSeries& series) {
    if (series.frame_rate <= 0) fail(Errc::InvalidArgument, "frame_rate must be positive");
    const std::size_t n = series.frames();
    if (n == 0) fail(Errc::EmptyFile, "series '" + series.subject_id + "' has no frames");
    for (std::size_t c = 0; c < series.channels.size(); ++c) {
        const auto& values = series.data[c];
        if (values.size() != n) fail(Errc::LengthMismatch, "channel '" + series.channels[c].name + "'");
        for (std::size_t t = 0; t < n; ++t) {
            if (!std::isfinite(values[t])) {
                fail(Errc::InvalidArgument,
                     "non-finite value in '" + series.channels[c].name + "' at frame " + std::to_string(t));
            }
            if (series.channels[c].kind == ChannelKind::Binary && values[t] != 0.0 && values[t] != 1.0) {
                fail(Errc::NonBinaryValue,
                     "channel '" + series.channels[c].name + "' frame " + std::to_string(t));
            }
        }
    }
}

}  // namespace affect
