#include "affect/experiment.hpp"

#include "affect/alignment.hpp"
#include "affect/csv.hpp"
#include "affect/error.hpp"
#include "affect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace affect {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

TrackerMapping mapping_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "openface") return TrackerMapping::openface();
        fail(Errc::InvalidConfig, "unknown mapping preset '" + j.get<std::string>() + "'");
    }
    TrackerMapping m;
    for (const auto& entry : j) {
        ColumnMapping c;
        c.channel = entry.at("channel").get<std::string>();
        if (entry.contains("columns")) {
            c.columns = entry.at("columns").get<std::vector<std::string>>();
        } else {
            c.columns = {entry.at("column").get<std::string>()};
        }
        c.kind = channel_kind_from_string(get_or<std::string>(entry, "kind", "continuous"));
        c.units = get_or<std::string>(entry, "units", "");
        m.channels.push_back(std::move(c));
    }
    return m;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::filesystem::path subject_path(const std::filesystem::path& dir, const std::string& pattern,
                                   const std::string& subject) {
    std::string name = pattern;
    const std::string token = "{subject}";
    for (auto pos = name.find(token); pos != std::string::npos; pos = name.find(token)) {
        name.replace(pos, token.size(), subject);
    }
    return dir / name;
}

std::string tag(double value) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << value;
    return s.str();
}

}  // namespace

void ExperimentConfig::validate() const {
    partitions.validate();
    if (systems.empty()) fail(Errc::InvalidConfig, "no systems (modality sets) configured");
    for (const auto& s : systems) {
        if (s.channels.empty()) fail(Errc::InvalidConfig, "system '" + s.name + "' has no channels");
    }
    if (dimensions.empty()) fail(Errc::InvalidConfig, "no affect dimensions configured");
    if (window_seconds.empty()) fail(Errc::InvalidConfig, "no window sizes configured");
    for (double w : window_seconds) WindowPlan{w, frame_rate, 1}.window_frames();
    WindowPlan{explore_window_seconds, frame_rate, 1}.window_frames();
    ShiftGrid{delays}.validate(frame_rate);
    delay_frames(explore_delay_seconds, frame_rate);
    if (mi_thresholds.empty()) fail(Errc::InvalidConfig, "no MI thresholds configured");
    for (double t : mi_thresholds) {
        if (!(t > 0.0)) fail(Errc::InvalidConfig, "MI thresholds must be positive");
    }
    model::ModelConfig probe = model;
    probe.input_dim = 1;
    probe.validate();
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    try {
        c.name = get_or<std::string>(j, "name", c.name);

        const json data = j.value("data", json::object());
        c.data_dir = base_dir / get_or<std::string>(data, "directory", ".");
        c.recording_pattern = get_or<std::string>(data, "recording_pattern", c.recording_pattern);
        c.annotation_pattern = get_or<std::string>(data, "annotation_pattern", c.annotation_pattern);
        c.direct_gaze_pattern = get_or<std::string>(data, "direct_gaze_pattern", "");
        c.frame_rate = get_or<int>(data, "frame_rate", c.frame_rate);
        if (data.contains("mapping")) c.mapping = mapping_from_json(data.at("mapping"));
        if (data.contains("confidence_column")) {
            c.mapping.confidence_column = data.at("confidence_column").get<std::string>();
        }
        if (data.contains("repair")) {
            const auto& r = data.at("repair");
            c.repair.max_gap_seconds = get_or<double>(r, "max_gap_seconds", c.repair.max_gap_seconds);
            c.repair.confidence_threshold = get_or<double>(r, "confidence_threshold", c.repair.confidence_threshold);
        }

        if (j.contains("partitions")) {
            const auto& p = j.at("partitions");
            if (p.is_string()) {
                if (p.get<std::string>() != "recola") fail(Errc::InvalidConfig, "unknown partition preset");
            } else {
                c.partitions.train = p.at("train").get<std::vector<std::string>>();
                c.partitions.validation = p.at("validation").get<std::vector<std::string>>();
                c.partitions.test = p.at("test").get<std::vector<std::string>>();
            }
        }

        if (j.contains("derived")) {
            const auto& d = j.at("derived");
            c.derived.deltas = get_or<std::vector<std::string>>(d, "deltas", {});
            c.derived.pupil_channel = get_or<std::string>(d, "pupil_events", "");
            if (d.contains("gaze_events")) {
                const auto& g = d.at("gaze_events");
                c.derived.gaze_x_channel = get_or<std::string>(g, "gaze_x", "gaze_x");
                c.derived.gaze_y_channel = get_or<std::string>(g, "gaze_y", "gaze_y");
                c.derived.gaze_distance_channel = get_or<std::string>(g, "gaze_distance", "gaze_distance");
                c.derived.fixation_threshold = get_or<double>(g, "fixation_threshold", kDefaultFixationThreshold);
            }
        }

        c.modalities = j.at("modalities").get<std::map<std::string, std::vector<std::string>>>();
        if (j.contains("systems")) {
            for (const auto& s : j.at("systems")) {
                const auto names = s.is_array() ? s.get<std::vector<std::string>>()
                                                : s.at("modalities").get<std::vector<std::string>>();
                System sys;
                sys.name = s.is_object() && s.contains("name") ? s.at("name").get<std::string>() : join(names, "+");
                for (const auto& m : names) {
                    const auto it = c.modalities.find(m);
                    if (it == c.modalities.end()) fail(Errc::InvalidConfig, "unknown modality '" + m + "'");
                    for (const auto& ch : it->second) {
                        if (std::find(sys.channels.begin(), sys.channels.end(), ch) == sys.channels.end()) {
                            sys.channels.push_back(ch);
                        }
                    }
                }
                c.systems.push_back(std::move(sys));
            }
        } else {
            for (const auto& [name, channels] : c.modalities) c.systems.push_back({name, channels});
        }

        if (j.contains("dimensions")) {
            c.dimensions.clear();
            for (const auto& d : j.at("dimensions")) c.dimensions.push_back(dimension_from_string(d.get<std::string>()));
        }
        c.window_seconds = get_or<std::vector<double>>(j, "window_seconds", c.window_seconds);
        if (j.contains("delays")) {
            const auto& d = j.at("delays");
            if (d.is_array()) {
                c.delays = d.get<std::vector<double>>();
            } else {
                c.delays = ShiftGrid::range(d.at("max").get<double>(), get_or<double>(d, "step", 0.2)).delays;
            }
        } else {
            c.delays = ShiftGrid::standard().delays;
        }
        c.mi_thresholds = get_or<std::vector<double>>(j, "mi_thresholds", c.mi_thresholds);
        if (j.contains("mi")) {
            const auto& m = j.at("mi");
            c.mi.k = get_or<int>(m, "k", c.mi.k);
            c.mi.max_samples = get_or<std::size_t>(m, "max_samples", c.mi.max_samples);
        }
        if (j.contains("wavelet")) {
            const auto& w = j.at("wavelet");
            c.wavelet.enabled = get_or<bool>(w, "enabled", c.wavelet.enabled);
            c.wavelet.order = get_or<int>(w, "order", c.wavelet.order);
        }
        if (j.contains("model")) c.model = j.at("model").get<model::ModelConfig>();
        c.mi.seed = c.model.seed;
        if (j.contains("explore")) {
            const auto& e = j.at("explore");
            c.explore_window_seconds = get_or<double>(e, "window_seconds", c.explore_window_seconds);
            c.explore_delay_seconds = get_or<double>(e, "delay_seconds", c.explore_delay_seconds);
        }
        c.output_dir = base_dir / get_or<std::string>(j, "output", "results");
    } catch (const json::exception& e) {
        fail(Errc::InvalidConfig, e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        fail(Errc::InvalidConfig, path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

std::map<std::string, SubjectData> load_subjects(const ExperimentConfig& config) {
    std::vector<std::string> ids;
    for (Partition p : {Partition::Train, Partition::Validation, Partition::Test}) {
        for (const auto& id : config.partitions.subjects(p)) ids.push_back(id);
    }
    std::map<std::string, SubjectData> out;
    for (const auto& id : ids) {
        SubjectData subject;
        auto series = parse_tracker_csv(subject_path(config.data_dir, config.recording_pattern, id), config.mapping,
                                        id, config.frame_rate);
        series = repair_missing(series, config.repair);

        DerivedChannelSet derived = compute_deltas(series, config.derived.deltas);
        if (!config.derived.pupil_channel.empty()) {
            auto events = pupil_events(series.channel(config.derived.pupil_channel));
            derived.events.push_back({"pupil_dilation", std::move(events.dilation)});
            derived.events.push_back({"pupil_constriction", std::move(events.constriction)});
        }
        if (!config.derived.gaze_x_channel.empty()) {
            auto events = gaze_events(series.channel(config.derived.gaze_x_channel),
                                      series.channel(config.derived.gaze_y_channel),
                                      series.channel(config.derived.gaze_distance_channel),
                                      config.derived.fixation_threshold);
            derived.events.push_back({"eye_fixation", std::move(events.fixation)});
            derived.events.push_back({"gaze_approach", std::move(events.approach)});
        }
        series = with_derived(series, derived);
        if (!config.direct_gaze_pattern.empty()) {
            const auto column =
                parse_binary_column(subject_path(config.data_dir, config.direct_gaze_pattern, id), "direct_gaze");
            series = attach_direct_gaze(series, column);
        }

        for (Dimension d : config.dimensions) {
            auto track =
                parse_annotation_csv(subject_path(config.data_dir, config.annotation_pattern, id), d, id);
            if (track.values.size() != series.frames()) {
                fail(Errc::LengthMismatch, id + ": " + std::string(to_string(d)) + " annotation has " +
                                               std::to_string(track.values.size()) + " frames, recording has " +
                                               std::to_string(series.frames()));
            }
            subject.labels.emplace(d, std::move(track));
        }
        subject.series = std::move(series);
        for (const auto& system : config.systems) {
            for (const auto& ch : system.channels) {
                if (!subject.series.has_channel(ch)) {
                    fail(Errc::InvalidConfig,
                         "system '" + system.name + "' references missing channel '" + ch + "' (subject " + id + ")");
                }
            }
        }
        out.emplace(id, std::move(subject));
    }
    return out;
}

std::string format_report_row(const ReportRow& row) {
    std::ostringstream s;
    s << row.system << ',' << to_string(row.dimension) << ',' << to_string(row.partition) << ','
      << csv::format_double(row.window_s) << ',' << csv::format_double(row.delay_s) << ','
      << csv::format_double(row.mi_threshold) << ',' << row.n_features << ',' << csv::format_double(row.sse) << ','
      << csv::format_double(row.ccc);
    return s.str();
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    if (join(table.header, ",") != kReportHeader) fail(Errc::ParseError, path.string() + " is not a report CSV");
    std::vector<ReportRow> rows;
    for (const auto& cells : table.rows) {
        if (cells.size() != 9) fail(Errc::RowLengthMismatch, path.string());
        ReportRow r;
        r.system = cells[0];
        r.dimension = dimension_from_string(cells[1]);
        r.partition = cells[2] == "test" ? Partition::Test
                      : cells[2] == "train" ? Partition::Train
                                            : Partition::Validation;
        r.window_s = csv::parse_double(cells[3]).value_or(NAN);
        r.delay_s = csv::parse_double(cells[4]).value_or(NAN);
        r.mi_threshold = csv::parse_double(cells[5]).value_or(NAN);
        r.n_features = static_cast<std::size_t>(std::stoul(cells[6]));
        r.sse = csv::parse_double(cells[7]).value_or(NAN);
        r.ccc = csv::parse_double(cells[8]).value_or(NAN);
        rows.push_back(r);
    }
    return rows;
}

namespace {

using FeatureMap = std::map<std::string, WindowedFeatureMatrix>;

FeatureMap extract_for(const std::map<std::string, SubjectData>& subjects, const std::vector<std::string>& ids,
                       const System& system, const WindowPlan& plan, const WaveletOptions& wavelet) {
    FeatureMap out;
    for (const auto& id : ids) {
        out.emplace(id, extract_features(subjects.at(id).series, plan, wavelet, system.channels));
    }
    return out;
}

struct Paired {
    std::vector<PairedSequence> sequences;
};

Paired pair_partition(const FeatureMap& features, const std::map<std::string, SubjectData>& subjects,
                      const std::vector<std::string>& ids, Dimension dim, double delay,
                      std::span<const std::size_t> columns) {
    Paired out;
    for (const auto& id : ids) {
        const auto selected = features.at(id).select(columns);
        out.sequences.push_back(shift_labels(selected, subjects.at(id).labels.at(dim), delay));
    }
    return out;
}

// Thinned training pairs for MI, using the same stride rule as mi_scores
// over the concatenation of all training subjects.
std::pair<Eigen::MatrixXd, std::vector<double>> mi_sample(const FeatureMap& features,
                                                          const std::map<std::string, SubjectData>& subjects,
                                                          const std::vector<std::string>& ids, Dimension dim,
                                                          double delay, std::size_t max_samples) {
    struct Span {
        const WindowedFeatureMatrix* matrix;
        const AnnotationTrack* labels;
        std::size_t rows;
        std::size_t k;
    };
    std::vector<Span> spans;
    std::size_t total = 0;
    for (const auto& id : ids) {
        const auto& m = features.at(id);
        const auto& labels = subjects.at(id).labels.at(dim);
        const std::size_t k = delay_frames(delay, m.plan.frame_rate);
        std::size_t kept = 0;
        while (kept < m.rows() && m.end_frame(kept) + k < labels.values.size()) ++kept;
        spans.push_back({&m, &labels, kept, k});
        total += kept;
    }
    const std::size_t limit = max_samples == 0 ? total : std::min(total, max_samples);
    const auto cols = static_cast<Eigen::Index>(features.at(ids.front()).cols());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(limit), cols);
    std::vector<double> y(limit);
    std::size_t span = 0, offset = 0;
    for (std::size_t s = 0; s < limit; ++s) {
        const std::size_t global = s * total / limit;
        while (global >= offset + spans[span].rows) offset += spans[span++].rows;
        const std::size_t row = global - offset;
        x.row(static_cast<Eigen::Index>(s)) = spans[span].matrix->values.row(static_cast<Eigen::Index>(row));
        y[s] = spans[span].labels->values[spans[span].matrix->end_frame(row) + spans[span].k];
    }
    return {std::move(x), std::move(y)};
}

Eigen::MatrixXd stack_rows(const std::vector<PairedSequence>& seqs, std::vector<double>& labels) {
    Eigen::Index rows = 0;
    for (const auto& s : seqs) rows += s.features.values.rows();
    Eigen::MatrixXd out(rows, seqs.front().features.values.cols());
    Eigen::Index at = 0;
    labels.clear();
    for (const auto& s : seqs) {
        out.middleRows(at, s.features.values.rows()) = s.features.values;
        at += s.features.values.rows();
        labels.insert(labels.end(), s.labels.begin(), s.labels.end());
    }
    return out;
}

struct Evaluation {
    double sse = 0.0;
    double ccc = 0.0;
};

Evaluation evaluate_partition(const model::ModelParameters& params, const std::vector<PairedSequence>& seqs) {
    std::vector<std::vector<double>> preds, truths;
    Evaluation e;
    for (const auto& s : seqs) {
        preds.push_back(model::predict(params, s.features.values));
        truths.push_back(s.labels);
        e.sse += metrics::sse(preds.back(), truths.back());
    }
    e.ccc = metrics::partition_ccc(preds, truths, metrics::Pooling::Concatenate);
    return e;
}

struct TaskResult {
    ReportRow row;
    std::optional<model::ModelParameters> params;
    model::TrainLog log;
    MiReport mi;
};

struct Winner {
    bool set = false;
    double ccc = -std::numeric_limits<double>::infinity();
    double window_s = 0.0;
    double delay_s = 0.0;
    double threshold = 0.0;
    model::ModelParameters params;
};

std::string artifact_stem(const std::string& system, Dimension dim, double w, double d, double thr) {
    return system + "_" + std::string(to_string(dim)) + "_W" + tag(w) + "_D" + tag(d) + "_T" + tag(thr);
}

void save_artifact(const std::filesystem::path& path, const model::ModelParameters& params,
                   const model::TrainLog& log, const ReportRow& row) {
    json j = model::to_json(params);
    j["train_log"] = {{"train_sse", log.train_sse},
                      {"validation_sse", log.validation_sse},
                      {"best_epoch", log.best_epoch},
                      {"stop_reason", std::string(model::to_string(log.stop_reason))}};
    j["tuple"] = {{"system", row.system},       {"dimension", std::string(to_string(row.dimension))},
                  {"window_s", row.window_s},   {"delay_s", row.delay_s},
                  {"mi_threshold", row.mi_threshold}};
    std::ofstream out(path);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path.string());
    out << j.dump() << '\n';
}

}  // namespace

std::vector<ReportRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const auto out_dir = options.output_dir.empty() ? config.output_dir : options.output_dir;
    std::filesystem::create_directories(out_dir / "models");
    std::filesystem::create_directories(out_dir / "mi");
    std::ostream* log = options.log;

    const auto subjects = load_subjects(config);
    const auto& train_ids = config.partitions.train;
    const auto& val_ids = config.partitions.validation;
    std::vector<std::string> fit_ids = train_ids;
    fit_ids.insert(fit_ids.end(), val_ids.begin(), val_ids.end());

    std::ofstream report(out_dir / "report.csv");
    if (!report) fail(Errc::FileNotFound, "cannot write " + (out_dir / "report.csv").string());
    report << kReportHeader << '\n' << std::flush;
    std::vector<ReportRow> rows;
    auto emit = [&](const ReportRow& row) {
        report << format_report_row(row) << '\n' << std::flush;
        rows.push_back(row);
        if (log) *log << "  " << format_report_row(row) << '\n' << std::flush;
    };

    for (const auto& system : config.systems) {
        std::map<Dimension, Winner> winners;
        for (double window_s : config.window_seconds) {
            const WindowPlan plan{window_s, config.frame_rate, 1};
            if (log) *log << "[" << system.name << "] extracting W=" << window_s << " s\n" << std::flush;
            const FeatureMap features = extract_for(subjects, fit_ids, system, plan, config.wavelet);
            std::vector<std::string> names;
            for (const auto& c : features.at(train_ids.front()).columns) names.push_back(c.name);

            for (Dimension dim : config.dimensions) {
                struct Task {
                    double delay;
                    double threshold;
                    MiReport mi;
                };
                std::vector<Task> tasks;
                for (double delay : config.delays) {
                    auto [x, y] = mi_sample(features, subjects, train_ids, dim, delay, config.mi.max_samples);
                    MiOptions mi_options = config.mi;
                    mi_options.max_samples = 0;
                    const auto scores = mi_scores(x, y, mi_options);
                    for (double thr : config.mi_thresholds) {
                        tasks.push_back({delay, thr, threshold_report(names, scores, thr)});
                    }
                }

                auto run_task = [&](const Task& task) -> TaskResult {
                    const std::string context = "system=" + system.name + " dimension=" +
                                                std::string(to_string(dim)) + " W=" + tag(window_s) +
                                                " D=" + tag(task.delay) + " T=" + tag(task.threshold) + ": ";
                    try {
                        TaskResult result;
                        result.mi = task.mi;
                        ReportRow& row = result.row;
                        row.system = system.name;
                        row.dimension = dim;
                        row.partition = Partition::Validation;
                        row.window_s = window_s;
                        row.delay_s = task.delay;
                        row.mi_threshold = task.threshold;
                        row.n_features = task.mi.kept.size();
                        if (task.mi.kept.empty()) {
                            row.sse = std::numeric_limits<double>::quiet_NaN();
                            row.ccc = std::numeric_limits<double>::quiet_NaN();
                            return result;
                        }
                        const auto train_pairs =
                            pair_partition(features, subjects, train_ids, dim, task.delay, task.mi.kept);
                        const auto val_pairs = pair_partition(features, subjects, val_ids, dim, task.delay, task.mi.kept);
                        std::vector<double> train_labels;
                        const Eigen::MatrixXd train_stack = stack_rows(train_pairs.sequences, train_labels);
                        const Standardizer standardizer = fit_standardizer(train_stack, train_labels);

                        auto to_model_space = [&](const std::vector<PairedSequence>& seqs) {
                            std::vector<model::Sequence> out;
                            for (const auto& s : seqs) {
                                out.push_back({standardizer.apply(s.features.values),
                                               standardizer.transform_target(s.labels)});
                            }
                            return out;
                        };
                        model::ModelConfig mc = config.model;
                        mc.input_dim = static_cast<int>(task.mi.kept.size());
                        auto trained = model::train(mc, to_model_space(train_pairs.sequences),
                                                    to_model_space(val_pairs.sequences));
                        trained.params.standardizer = standardizer;
                        for (std::size_t j : task.mi.kept) trained.params.feature_names.push_back(names[j]);

                        const auto eval = evaluate_partition(trained.params, val_pairs.sequences);
                        row.sse = eval.sse;
                        row.ccc = eval.ccc;
                        result.params = std::move(trained.params);
                        result.log = std::move(trained.log);
                        return result;
                    } catch (const Error& e) {
                        throw Error(e.code(), context + e.what());
                    }
                };

                auto consume = [&](TaskResult& r) {
                    write_mi_report(out_dir / "mi" /
                                        (artifact_stem(system.name, dim, window_s, r.row.delay_s, r.row.mi_threshold) +
                                         ".csv"),
                                    r.mi);
                    emit(r.row);
                    if (!r.params) return;
                    save_artifact(out_dir / "models" /
                                      (artifact_stem(system.name, dim, window_s, r.row.delay_s, r.row.mi_threshold) +
                                       ".json"),
                                  *r.params, r.log, r.row);
                    auto& w = winners[dim];
                    if (r.row.ccc > w.ccc) {
                        w = {true, r.row.ccc, window_s, r.row.delay_s, r.row.mi_threshold, std::move(*r.params)};
                    }
                };

                const std::size_t jobs = static_cast<std::size_t>(std::max(1, options.jobs));
                for (std::size_t start = 0; start < tasks.size(); start += jobs) {
                    const std::size_t end = std::min(tasks.size(), start + jobs);
                    if (jobs == 1) {
                        auto r = run_task(tasks[start]);
                        consume(r);
                        continue;
                    }
                    std::vector<std::future<TaskResult>> batch;
                    for (std::size_t t = start; t < end; ++t) {
                        batch.push_back(std::async(std::launch::async, run_task, std::cref(tasks[t])));
                    }
                    for (auto& f : batch) {
                        auto r = f.get();
                        consume(r);
                    }
                }
            }
        }

        // Single test pass per (system, dimension) with the validation winner.
        for (Dimension dim : config.dimensions) {
            ReportRow row;
            row.system = system.name;
            row.dimension = dim;
            row.partition = Partition::Test;
            const auto it = winners.find(dim);
            if (it == winners.end() || !it->second.set) {
                row.window_s = row.delay_s = row.mi_threshold = row.sse = row.ccc =
                    std::numeric_limits<double>::quiet_NaN();
                emit(row);
                continue;
            }
            const Winner& w = it->second;
            const WindowPlan plan{w.window_s, config.frame_rate, 1};
            const FeatureMap test_features =
                extract_for(subjects, config.partitions.test, system, plan, config.wavelet);
            const auto& reference = test_features.at(config.partitions.test.front());
            std::vector<std::size_t> columns;
            for (const auto& name : w.params.feature_names) {
                const auto j = reference.find(name);
                if (j < 0) fail(Errc::UnknownChannel, "test features lack column " + name);
                columns.push_back(static_cast<std::size_t>(j));
            }
            const auto pairs = pair_partition(test_features, subjects, config.partitions.test, dim, w.delay_s, columns);
            const auto eval = evaluate_partition(w.params, pairs.sequences);
            row.window_s = w.window_s;
            row.delay_s = w.delay_s;
            row.mi_threshold = w.threshold;
            row.n_features = columns.size();
            row.sse = eval.sse;
            row.ccc = eval.ccc;
            emit(row);
        }
    }
    return rows;
}

std::vector<CorrelationRow> explore_lld(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const auto subjects = load_subjects(config);
    std::vector<std::string> channels;
    for (const auto& s : config.systems) {
        for (const auto& ch : s.channels) {
            if (std::find(channels.begin(), channels.end(), ch) == channels.end()) channels.push_back(ch);
        }
    }
    const WindowPlan plan{config.explore_window_seconds, config.frame_rate, 1};
    const std::size_t wf = plan.window_frames();
    const std::size_t k = delay_frames(config.explore_delay_seconds, config.frame_rate);

    std::vector<CorrelationRow> rows;
    for (const auto& ch : channels) {
        const bool binary = subjects.begin()->second.series.spec(ch).kind == ChannelKind::Binary;
        const std::string feature = column_name(ch, View::Static, binary ? "ratio" : "mean");
        for (Dimension dim : config.dimensions) {
            std::vector<double> x, y;
            for (const auto& id : config.partitions.train) {
                const auto& subject = subjects.at(id);
                const auto values = subject.series.channel(ch);
                const auto& labels = subject.labels.at(dim).values;
                if (values.size() < wf) fail(Errc::SeriesTooShort, id);
                double sum = 0.0;
                for (std::size_t t = 0; t < wf; ++t) sum += values[t];
                for (std::size_t end = wf - 1; end + k < labels.size(); ++end) {
                    if (end >= wf) sum += values[end] - values[end - wf];
                    x.push_back(sum / static_cast<double>(wf));
                    y.push_back(labels[end + k]);
                }
            }
            CorrelationRow row{feature, dim, std::numeric_limits<double>::quiet_NaN(), x.size()};
            try {
                row.r = metrics::pearson(x, y);
            } catch (const Error& e) {
                if (e.code() != Errc::ConstantInput) throw;
            }
            rows.push_back(row);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CorrelationRow& a, const CorrelationRow& b) {
        const double ra = std::isnan(a.r) ? -1.0 : std::abs(a.r);
        const double rb = std::isnan(b.r) ? -1.0 : std::abs(b.r);
        return ra > rb;
    });

    const auto out_dir = options.output_dir.empty() ? config.output_dir : options.output_dir;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir / "explore.csv");
        if (!out) fail(Errc::FileNotFound, "cannot write explore.csv");
        out << "rank,feature,dimension,window_s,delay_s,r,n\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out << i + 1 << ',' << rows[i].feature << ',' << to_string(rows[i].dimension) << ','
                << csv::format_double(config.explore_window_seconds) << ','
                << csv::format_double(config.explore_delay_seconds) << ',' << csv::format_double(rows[i].r) << ','
                << rows[i].n << '\n';
        }
    }
    return rows;
}

void extract_all(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const auto subjects = load_subjects(config);
    System all{"all", {}};
    for (const auto& s : config.systems) {
        for (const auto& ch : s.channels) {
            if (std::find(all.channels.begin(), all.channels.end(), ch) == all.channels.end()) all.channels.push_back(ch);
        }
    }
    const auto out_dir = (options.output_dir.empty() ? config.output_dir : options.output_dir) / "features";
    std::filesystem::create_directories(out_dir);
    for (double w : config.window_seconds) {
        const WindowPlan plan{w, config.frame_rate, 1};
        for (const auto& [id, subject] : subjects) {
            const auto matrix = extract_features(subject.series, plan, config.wavelet, all.channels);
            write_feature_csv(out_dir / (id + "_W" + tag(w) + ".csv"), matrix);
            if (options.log) *options.log << id << " W=" << w << " s: " << matrix.rows() << " x " << matrix.cols() << '\n';
        }
    }
}

void summarize_report(const std::vector<ReportRow>& rows, std::ostream& out) {
    std::vector<std::pair<std::string, Dimension>> keys;
    for (const auto& r : rows) {
        const auto key = std::make_pair(r.system, r.dimension);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    out << std::left << std::setw(24) << "system" << std::setw(10) << "dimension" << std::setw(8) << "W_s"
        << std::setw(8) << "D_s" << std::setw(8) << "MI" << std::setw(8) << "feats" << std::setw(12) << "val_CCC"
        << std::setw(12) << "test_CCC" << '\n';
    for (const auto& [system, dim] : keys) {
        const ReportRow* best = nullptr;
        const ReportRow* test = nullptr;
        for (const auto& r : rows) {
            if (r.system != system || r.dimension != dim) continue;
            if (r.partition == Partition::Test) test = &r;
            if (r.partition == Partition::Validation && !std::isnan(r.ccc) && (!best || r.ccc > best->ccc)) best = &r;
        }
        out << std::left << std::setw(24) << system << std::setw(10) << to_string(dim);
        if (best) {
            out << std::setw(8) << best->window_s << std::setw(8) << best->delay_s << std::setw(8) << best->mi_threshold
                << std::setw(8) << best->n_features << std::setw(12) << std::fixed << std::setprecision(4) << best->ccc;
        } else {
            out << std::setw(44) << "(no valid tuple)";
        }
        out << std::setw(12) << (test ? csv::format_double(test->ccc) : std::string("-")) << '\n';
        out.unsetf(std::ios::fixed);
        out << std::setprecision(6);
    }
}

}  // namespace affect
