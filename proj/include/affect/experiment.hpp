#pragma once

#include "affect/functionals.hpp"
#include "affect/ingest.hpp"
#include "affect/lld.hpp"
#include "affect/model.hpp"
#include "affect/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affect {

struct DerivedSpec {
    std::vector<std::string> deltas;
    /// Source channel for pupil dilation / constriction events.
    std::string pupil_channel;
    /// gaze_x, gaze_y, gaze_distance sources for fixation / approach events.
    std::string gaze_x_channel;
    std::string gaze_y_channel;
    std::string gaze_distance_channel;
    double fixation_threshold = kDefaultFixationThreshold;
};

struct System {
    std::string name;
    std::vector<std::string> channels;
};

/// Everything `run`, `extract` and `explore` need.  Paths are resolved
/// against the directory of the config file.
struct ExperimentConfig {
    std::string name = "experiment";

    std::filesystem::path data_dir;
    std::string recording_pattern = "{subject}.csv";
    std::string annotation_pattern = "{subject}.labels.csv";
    /// Optional per-subject CSV with a binary `direct_gaze` column.
    std::string direct_gaze_pattern;
    int frame_rate = 25;
    TrackerMapping mapping = TrackerMapping::openface();
    RepairOptions repair;

    PartitionSpec partitions = PartitionSpec::recola();
    DerivedSpec derived;
    std::map<std::string, std::vector<std::string>> modalities;
    std::vector<System> systems;
    std::vector<Dimension> dimensions{Dimension::Arousal, Dimension::Valence};
    std::vector<double> window_seconds{4.0, 6.0, 8.0};
    std::vector<double> delays;
    std::vector<double> mi_thresholds{0.1, 0.15, 0.2};
    MiOptions mi;
    WaveletOptions wavelet;
    model::ModelConfig model;

    double explore_window_seconds = 8.0;
    double explore_delay_seconds = 0.0;

    std::filesystem::path output_dir = "results";

    /// Checks the cross-field invariants (non-empty sweep, frame-aligned
    /// delays, systems referencing known modalities).
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct RunOptions {
    int jobs = 1;
    std::filesystem::path output_dir;  // overrides the config when set
    /// Progress messages; nullptr for silence.
    std::ostream* log = nullptr;
};

/// One subject, fully prepared: repaired tracker series with derived
/// channels plus its annotation tracks.
struct SubjectData {
    RecordingSeries series;
    std::map<Dimension, AnnotationTrack> labels;
};

/// Loads, repairs and derives every subject named in the partitions and
/// checks that every system channel exists before anything is trained.
std::map<std::string, SubjectData> load_subjects(const ExperimentConfig& config);

struct ReportRow {
    std::string system;
    Dimension dimension = Dimension::Arousal;
    Partition partition = Partition::Validation;
    double window_s = 0.0;
    double delay_s = 0.0;
    double mi_threshold = 0.0;
    std::size_t n_features = 0;
    double sse = 0.0;
    double ccc = 0.0;
};

constexpr const char* kReportHeader = "system,dimension,partition,window_s,delay_s,mi_threshold,n_features,sse,ccc";

std::string format_report_row(const ReportRow& row);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

/// Full sweep: for every system, window, dimension, delay and threshold the
/// features are shifted, MI-filtered on training pairs, standardized and a
/// BLSTM is trained and scored on validation.  The best validation CCC per
/// (system, dimension) is then scored once on test.  Writes report.csv,
/// model artifacts and MI reports under the output directory.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct CorrelationRow {
    std::string feature;
    Dimension dimension = Dimension::Arousal;
    double r = 0.0;
    std::size_t n = 0;
};

/// Pearson r between each channel's windowed mean (ratio for binary
/// channels) and each shifted target on the training partition, ranked by
/// |r| descending.  Writes explore.csv when an output directory is given.
std::vector<CorrelationRow> explore_lld(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes per-subject feature matrices for every configured window.
void extract_all(const ExperimentConfig& config, const RunOptions& options = {});

/// Human-readable summary of a report: best validation tuple and test score
/// per (system, dimension).
void summarize_report(const std::vector<ReportRow>& rows, std::ostream& out);

}  // namespace affect
