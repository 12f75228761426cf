#pragma once

#include "affect/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affect::synth {

/// Parameters of the synthetic corpus.  Each target is a squashed mix of the
/// causal box means of two tracker channels, delayed by `lag_seconds`.
struct SynthSpec {
    std::uint64_t seed = 1787452436;
    std::size_t frames = 7500;
    int frame_rate = 25;
    double lag_seconds = 1.0;
    double integration_seconds = 4.0;
    PartitionSpec partitions = PartitionSpec::recola();
    std::vector<std::string> arousal_channels{"head_loc_x", "gaze_x"};
    std::vector<std::string> valence_channels{"head_yaw", "pupil_diameter"};
    /// Second driving channel enters with this weight relative to the first.
    double mix = -0.6;
    double gain = 0.9;
    double amplitude = 0.8;
    double annotation_noise = 0.01;
    /// Expected number of tracker dropouts per recording.
    double dropouts = 3.0;
};

/// Writes `{subject}.csv` (OpenFace-style tracker columns),
/// `{subject}.labels.csv`, `{subject}.direct_gaze.csv`, `metadata.json` and
/// an `experiment.json` template into `dir`.  Output depends only on `spec`.
void generate(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace affect::synth
