#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affect {

enum class ChannelKind { Continuous, Binary };

std::string_view to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view text);

struct ChannelSpec {
    std::string name;
    ChannelKind kind = ChannelKind::Continuous;
    std::string units;
};

/// One subject recording: equally long, uniformly sampled channels.
struct RecordingSeries {
    std::string subject_id;
    int frame_rate = 25;
    std::vector<ChannelSpec> channels;
    std::vector<std::vector<double>> data;
    /// Per-frame tracker confidence in [0, 1]; empty when the source has none.
    std::vector<double> confidence;

    std::size_t frames() const { return data.empty() ? 0 : data.front().size(); }
    bool has_channel(std::string_view name) const;
    std::size_t channel_index(std::string_view name) const;
    const ChannelSpec& spec(std::string_view name) const;
    std::span<const double> channel(std::string_view name) const;

    /// Appends a channel; the name must be new and the length must match.
    void add_channel(ChannelSpec spec, std::vector<double> values);
};

enum class Dimension { Arousal, Valence };

std::string_view to_string(Dimension dimension);
Dimension dimension_from_string(std::string_view text);

struct AnnotationTrack {
    std::string subject_id;
    Dimension dimension = Dimension::Arousal;
    std::vector<double> values;
};

enum class Partition { Train, Validation, Test };

std::string_view to_string(Partition partition);

struct PartitionSpec {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;

    /// 23-subject RECOLA split: 8 train, 8 validation, 7 test.
    static PartitionSpec recola();

    /// Throws InvalidPartition when a list is empty or two lists overlap.
    void validate() const;

    const std::vector<std::string>& subjects(Partition partition) const;
};

Partition assign_partition(std::string_view subject_id, const PartitionSpec& spec);

/// Maps one or more source columns onto a channel.  Several source columns
/// (e.g. left/right eye) are reduced to their per-frame mean.
struct ColumnMapping {
    std::string channel;
    std::vector<std::string> columns;
    ChannelKind kind = ChannelKind::Continuous;
    std::string units;
};

struct TrackerMapping {
    std::vector<ColumnMapping> channels;
    /// Source column holding tracker confidence; empty for none.
    std::string confidence_column;

    /// OpenFace 2.0 style column names (pose_T*, pose_R*, gaze_angle_*,
    /// per-eye pupil and gaze-distance columns, AU45_c / AU45_r).
    static TrackerMapping openface();
    /// Maps every channel of a series onto the same-named column, which is
    /// what write_tracker_csv emits.
    static TrackerMapping identity(const RecordingSeries& series);
};

RecordingSeries parse_tracker_csv(const std::filesystem::path& path, const TrackerMapping& mapping,
                                  std::string subject_id = {}, int frame_rate = 25);

/// Writes `frame[,confidence],<channels...>` at round-trip precision.
void write_tracker_csv(const std::filesystem::path& path, const RecordingSeries& series);

/// Reads the column named after the dimension ("arousal" / "valence").
AnnotationTrack parse_annotation_csv(const std::filesystem::path& path, Dimension dimension,
                                     std::string subject_id = {});

void write_annotation_csv(const std::filesystem::path& path, std::span<const AnnotationTrack> tracks);

/// Reads a single named binary column, e.g. a human direct-gaze annotation.
std::vector<double> parse_binary_column(const std::filesystem::path& path, const std::string& column);

struct RepairOptions {
    double max_gap_seconds = 0.5;
    double confidence_threshold = 0.5;
};

/// Fills non-finite and low-confidence frames.  Short runs are linearly
/// interpolated (continuous) or held (binary); long runs are held from the
/// last valid value; leading runs are back-filled.  Idempotent.
RecordingSeries repair_missing(const RecordingSeries& series, const RepairOptions& options = {});

/// Throws when a binary channel has values outside {0, 1} or any value is
/// non-finite.
void validate_series(const RecordingSeries& series);

}  // namespace affect
