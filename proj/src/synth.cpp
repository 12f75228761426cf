#include "affect/synth.hpp"

#include "affect/csv.hpp"
#include "affect/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

namespace affect::synth {

namespace {

struct ChannelModel {
    std::string channel;
    double offset;
    double scale;
    double tau_seconds;
};

// Physical units follow the tracker presets: millimetres and radians.
const std::vector<ChannelModel>& channel_models() {
    static const std::vector<ChannelModel> models = {
        {"head_loc_x", 20.0, 40.0, 0.4},     {"head_loc_y", 10.0, 30.0, 1.5},
        {"head_loc_z", 600.0, 50.0, 3.0},    {"head_pitch", 0.1, 0.1, 0.8},
        {"head_yaw", 0.0, 0.15, 0.4},        {"head_roll", 0.0, 0.05, 0.6},
        {"gaze_x", 0.05, 0.2, 0.4},          {"gaze_y", 0.2, 0.1, 0.3},
        {"gaze_distance", 700.0, 60.0, 2.0}, {"pupil_diameter", 4.0, 0.5, 0.4},
        {"blink_intensity", 0.0, 0.0, 0.0},
    };
    return models;
}

std::vector<double> ou_process(std::mt19937_64& rng, std::size_t n, double rho) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> u(n);
    const double innovation = std::sqrt(1.0 - rho * rho);
    u[0] = normal(rng);
    for (std::size_t t = 1; t < n; ++t) u[t] = rho * u[t - 1] + innovation * normal(rng);
    return u;
}

// Standard deviation of the mean of w consecutive samples of a unit-variance
// AR(1) process with coefficient rho.
double box_mean_std(double rho, std::size_t w) {
    double s = static_cast<double>(w);
    double p = 1.0;
    for (std::size_t j = 1; j < w; ++j) {
        p *= rho;
        s += 2.0 * static_cast<double>(w - j) * p;
    }
    return std::sqrt(s) / static_cast<double>(w);
}

std::vector<double> causal_box_mean(const std::vector<double>& u, std::size_t w) {
    std::vector<double> m(u.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) {
        sum += u[t];
        if (t >= w) sum -= u[t - w];
        m[t] = sum / static_cast<double>(std::min(t + 1, w));
    }
    return m;
}

double rho_for(double tau_seconds, int frame_rate) { return std::exp(-1.0 / (tau_seconds * frame_rate)); }

std::uint64_t subject_seed(std::uint64_t seed, std::size_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> target(const std::map<std::string, std::vector<double>>& latent,
                           const std::vector<std::string>& drivers, const SynthSpec& spec, std::mt19937_64& rng) {
    const std::size_t w = static_cast<std::size_t>(std::lround(spec.integration_seconds * spec.frame_rate));
    const std::size_t lag = static_cast<std::size_t>(std::lround(spec.lag_seconds * spec.frame_rate));
    std::vector<double> z(spec.frames, 0.0);
    const double weights[2] = {1.0, spec.mix};
    for (std::size_t d = 0; d < drivers.size() && d < 2; ++d) {
        const auto& model = *std::find_if(channel_models().begin(), channel_models().end(),
                                          [&](const ChannelModel& m) { return m.channel == drivers[d]; });
        const double norm = box_mean_std(rho_for(model.tau_seconds, spec.frame_rate), w);
        const auto m = causal_box_mean(latent.at(drivers[d]), w);
        for (std::size_t t = 0; t < spec.frames; ++t) z[t] += weights[d] * m[t] / norm;
    }
    const double z_norm = std::sqrt(1.0 + spec.mix * spec.mix);
    std::normal_distribution<double> noise(0.0, spec.annotation_noise);
    std::vector<double> y(spec.frames);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        const double zl = z[t >= lag ? t - lag : 0] / z_norm;
        y[t] = std::clamp(spec.amplitude * std::tanh(spec.gain * zl) + noise(rng), -1.0, 1.0);
    }
    return y;
}

void check_drivers(const std::vector<std::string>& drivers) {
    if (drivers.size() != 2) fail(Errc::InvalidArgument, "each target needs exactly two driving channels");
    for (const auto& d : drivers) {
        const bool known = std::any_of(channel_models().begin(), channel_models().end(),
                                       [&](const ChannelModel& m) { return m.channel == d && m.tau_seconds > 0.0; });
        if (!known) fail(Errc::UnknownChannel, "'" + d + "' cannot drive a synthetic target");
    }
}

}  // namespace

void generate(const SynthSpec& spec, const std::filesystem::path& dir) {
    spec.partitions.validate();
    check_drivers(spec.arousal_channels);
    check_drivers(spec.valence_channels);
    if (spec.frames < 2 || spec.frame_rate <= 0) fail(Errc::InvalidArgument, "bad synthetic recording size");
    std::filesystem::create_directories(dir);

    std::vector<std::string> subjects;
    for (Partition p : {Partition::Train, Partition::Validation, Partition::Test}) {
        for (const auto& id : spec.partitions.subjects(p)) subjects.push_back(id);
    }

    const std::size_t n = spec.frames;
    const double fps = spec.frame_rate;
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        std::mt19937_64 rng(subject_seed(spec.seed, s));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);

        std::map<std::string, std::vector<double>> latent;
        std::map<std::string, std::vector<double>> physical;
        for (const auto& m : channel_models()) {
            if (m.tau_seconds <= 0.0) continue;
            latent[m.channel] = ou_process(rng, n, rho_for(m.tau_seconds, spec.frame_rate));
            const bool driver =
                std::count(spec.arousal_channels.begin(), spec.arousal_channels.end(), m.channel) +
                    std::count(spec.valence_channels.begin(), spec.valence_channels.end(), m.channel) >
                0;
            // Non-driving channels get a per-subject offset.
            const double offset = m.offset + (driver ? 0.0 : 0.3 * m.scale * normal(rng));
            auto& out = physical[m.channel];
            out.resize(n);
            for (std::size_t t = 0; t < n; ++t) out[t] = offset + m.scale * latent[m.channel][t];
        }

        // Blinks: onset hazard of one per four seconds, geometric durations.
        std::vector<double> blink(n, 0.0), blink_intensity(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const bool prev = t > 0 && blink[t - 1] == 1.0;
            blink[t] = prev ? (uniform(rng) < 0.8 ? 1.0 : 0.0) : (uniform(rng) < 1.0 / (4.0 * fps) ? 1.0 : 0.0);
            blink_intensity[t] = std::max(0.0, blink[t] * (2.5 + 0.3 * normal(rng)) + 0.1 * std::abs(normal(rng)));
        }

        std::vector<double> confidence(n, 0.97);
        std::poisson_distribution<int> events(spec.dropouts);
        const int dropouts = events(rng);
        for (int e = 0; e < dropouts; ++e) {
            const auto start = static_cast<std::size_t>(uniform(rng) * static_cast<double>(n));
            const std::size_t length = 2 + static_cast<std::size_t>(uniform(rng) * 7.0);
            for (std::size_t t = start; t < std::min(n, start + length); ++t) confidence[t] = 0.1;
        }

        const auto id = subjects[s];
        {
            std::ofstream out(dir / (id + ".csv"));
            if (!out) fail(Errc::FileNotFound, "cannot write into " + dir.string());
            out << "frame,timestamp,confidence,success,pose_Tx,pose_Ty,pose_Tz,pose_Rx,pose_Ry,pose_Rz,"
                   "gaze_angle_x,gaze_angle_y,gaze_distance_0,gaze_distance_1,pupil_diameter_0,pupil_diameter_1,"
                   "AU45_r,AU45_c\n";
            const char* order[] = {"head_loc_x", "head_loc_y", "head_loc_z", "head_pitch",
                                   "head_yaw",   "head_roll",  "gaze_x",     "gaze_y"};
            for (std::size_t t = 0; t < n; ++t) {
                const bool lost = confidence[t] < 0.5;
                const double eye_d = 3.0 * normal(rng);
                const double eye_p = 0.02 * normal(rng);
                out << t + 1 << ',' << csv::format_double(static_cast<double>(t) / fps) << ','
                    << csv::format_double(confidence[t]) << ',' << (lost ? 0 : 1);
                for (const char* ch : order) out << ',' << csv::format_double(lost ? 0.0 : physical[ch][t]);
                const double gd = physical["gaze_distance"][t];
                const double pd = physical["pupil_diameter"][t];
                out << ',' << csv::format_double(lost ? 0.0 : gd + eye_d) << ','
                    << csv::format_double(lost ? 0.0 : gd - eye_d) << ','
                    << csv::format_double(lost ? 0.0 : pd + eye_p) << ','
                    << csv::format_double(lost ? 0.0 : pd - eye_p) << ','
                    << csv::format_double(lost ? 0.0 : blink_intensity[t]) << ',' << (lost ? 0 : blink[t]) << '\n';
            }
        }

        std::vector<AnnotationTrack> tracks;
        tracks.push_back({id, Dimension::Arousal, target(latent, spec.arousal_channels, spec, rng)});
        tracks.push_back({id, Dimension::Valence, target(latent, spec.valence_channels, spec, rng)});
        write_annotation_csv(dir / (id + ".labels.csv"), tracks);

        // Direct gaze: looking roughly straight ahead, with annotator noise.
        std::ofstream gaze(dir / (id + ".direct_gaze.csv"));
        gaze << "frame,direct_gaze\n";
        for (std::size_t t = 0; t < n; ++t) {
            const bool ahead = std::abs(latent["gaze_x"][t]) < 0.5 && std::abs(latent["gaze_y"][t]) < 0.8;
            const bool flip = uniform(rng) < 0.02;
            gaze << t << ',' << ((ahead != flip) ? 1 : 0) << '\n';
        }
    }

    nlohmann::json meta = {{"seed", spec.seed},
                           {"frames", spec.frames},
                           {"frame_rate", spec.frame_rate},
                           {"lag_seconds", spec.lag_seconds},
                           {"integration_seconds", spec.integration_seconds},
                           {"arousal_channels", spec.arousal_channels},
                           {"valence_channels", spec.valence_channels},
                           {"partitions",
                            {{"train", spec.partitions.train},
                             {"validation", spec.partitions.validation},
                             {"test", spec.partitions.test}}}};
    std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';

    auto experiment = nlohmann::json::parse(R"({
        "name": "synthetic",
        "data": {"directory": ".", "mapping": "openface", "direct_gaze_pattern": "{subject}.direct_gaze.csv"},
        "derived": {
            "deltas": ["head_loc_x", "head_yaw", "gaze_x"],
            "pupil_events": "pupil_diameter",
            "gaze_events": {"gaze_x": "gaze_x", "gaze_y": "gaze_y", "gaze_distance": "gaze_distance"}
        },
        "modalities": {
            "head": ["head_loc_x", "head_loc_y", "head_loc_z", "head_pitch", "head_yaw", "head_roll",
                     "head_loc_x_delta", "head_yaw_delta"],
            "eye": ["gaze_x", "gaze_y", "gaze_distance", "pupil_diameter", "blink", "blink_intensity",
                    "gaze_x_delta", "pupil_dilation", "pupil_constriction", "eye_fixation", "gaze_approach",
                    "direct_gaze"]
        },
        "systems": [["head"], ["eye"], ["head", "eye"]],
        "dimensions": ["arousal", "valence"],
        "window_seconds": [4, 6, 8],
        "delays": {"max": 2.0, "step": 0.2},
        "mi_thresholds": [0.1, 0.15, 0.2],
        "output": "results"
    })");
    experiment["data"]["frame_rate"] = spec.frame_rate;
    experiment["partitions"] = meta["partitions"];
    std::ofstream(dir / "experiment.json") << experiment.dump(2) << '\n';
}

}  // namespace affect::synth
