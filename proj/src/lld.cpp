#include "affect/lld.hpp"

#include "affect/error.hpp"

#include <cmath>

namespace affect {

DerivedChannelSet compute_deltas(const RecordingSeries& series, std::span<const std::string> channels) {
    DerivedChannelSet out;
    for (const auto& name : channels) {
        const auto& spec = series.spec(name);
        if (spec.kind == ChannelKind::Binary) fail(Errc::BinaryChannelNotAllowed, name);
        const auto values = series.channel(name);
        std::vector<double> delta(values.size(), 0.0);
        for (std::size_t t = 1; t < values.size(); ++t) delta[t] = values[t] - values[t - 1];
        out.deltas.push_back({name + "_delta", std::move(delta)});
    }
    return out;
}

PupilEvents pupil_events(std::span<const double> pupil_diameter) {
    if (pupil_diameter.empty()) fail(Errc::SeriesTooShort, "pupil diameter series is empty");
    PupilEvents out;
    out.dilation.assign(pupil_diameter.size(), 0.0);
    out.constriction.assign(pupil_diameter.size(), 0.0);
    for (std::size_t t = 1; t < pupil_diameter.size(); ++t) {
        if (pupil_diameter[t] > pupil_diameter[t - 1]) out.dilation[t] = 1.0;
        if (pupil_diameter[t] < pupil_diameter[t - 1]) out.constriction[t] = 1.0;
    }
    return out;
}

GazeEvents gaze_events(std::span<const double> gaze_x, std::span<const double> gaze_y,
                       std::span<const double> gaze_distance, double fixation_threshold) {
    if (gaze_x.size() != gaze_y.size() || gaze_x.size() != gaze_distance.size()) {
        fail(Errc::LengthMismatch, "gaze_x, gaze_y and gaze_distance must have equal length");
    }
    if (!(fixation_threshold > 0.0)) fail(Errc::InvalidArgument, "fixation threshold must be positive");
    const std::size_t n = gaze_x.size();
    GazeEvents out;
    out.fixation.assign(n, 0.0);
    out.approach.assign(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        const double motion = std::hypot(gaze_x[t] - gaze_x[t - 1], gaze_y[t] - gaze_y[t - 1]);
        if (motion < fixation_threshold) out.fixation[t] = 1.0;
        if (gaze_distance[t] < gaze_distance[t - 1]) out.approach[t] = 1.0;
    }
    return out;
}

RecordingSeries attach_direct_gaze(const RecordingSeries& series, std::span<const double> annotation) {
    if (annotation.size() != series.frames()) {
        fail(Errc::LengthMismatch, "direct gaze annotation has " + std::to_string(annotation.size()) +
                                       " frames, series has " + std::to_string(series.frames()));
    }
    for (std::size_t t = 0; t < annotation.size(); ++t) {
        if (annotation[t] != 0.0 && annotation[t] != 1.0) {
            fail(Errc::NonBinaryValue, "direct gaze annotation at frame " + std::to_string(t));
        }
    }
    RecordingSeries out = series;
    out.add_channel({"direct_gaze", ChannelKind::Binary, "logical"},
                    std::vector<double>(annotation.begin(), annotation.end()));
    return out;
}

RecordingSeries with_derived(const RecordingSeries& series, const DerivedChannelSet& derived) {
    RecordingSeries out = series;
    for (const auto& d : derived.deltas) {
        out.add_channel({d.name, ChannelKind::Continuous, out.spec(d.name.substr(0, d.name.size() - 6)).units},
                        d.values);
    }
    for (const auto& e : derived.events) out.add_channel({e.name, ChannelKind::Binary, "logical"}, e.values);
    return out;
}

}  // namespace affect
