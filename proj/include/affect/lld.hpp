#pragma once

#include "affect/ingest.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace affect {

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

/// Derived low-level descriptors.  Every series has the source length and
/// is 0 at frame 0.
struct DerivedChannelSet {
    std::vector<NamedSeries> deltas;
    std::vector<NamedSeries> events;
};

/// Frame-wise displacement `x[t] - x[t-1]` per named continuous channel,
/// emitted as `<name>_delta`.
DerivedChannelSet compute_deltas(const RecordingSeries& series, std::span<const std::string> channels);

struct PupilEvents {
    std::vector<double> dilation;
    std::vector<double> constriction;
};

/// Dilation when the diameter is strictly larger than the preceding frame,
/// constriction when strictly smaller.
PupilEvents pupil_events(std::span<const double> pupil_diameter);

struct GazeEvents {
    std::vector<double> fixation;
    std::vector<double> approach;
};

constexpr double kDefaultFixationThreshold = 0.02;  // radians per frame

/// Fixation: angular gaze displacement below `fixation_threshold`.
/// Approach: strictly decreasing gaze distance.
GazeEvents gaze_events(std::span<const double> gaze_x, std::span<const double> gaze_y,
                       std::span<const double> gaze_distance,
                       double fixation_threshold = kDefaultFixationThreshold);

/// Adds a binary `direct_gaze` channel from an externally annotated column.
RecordingSeries attach_direct_gaze(const RecordingSeries& series, std::span<const double> annotation);

/// Appends derived channels to a series: deltas as continuous, events as binary.
RecordingSeries with_derived(const RecordingSeries& series, const DerivedChannelSet& derived);

}  // namespace affect
