#include "affect/csv.hpp"
#include "affect/error.hpp"
#include "affect/experiment.hpp"
#include "affect/synth.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <cstdlib>
#include <random>

using namespace affect;
using nlohmann::json;

namespace {

synth::SynthSpec small_spec() {
    synth::SynthSpec spec;
    spec.frames = 600;
    spec.partitions.train = {"A1", "A2"};
    spec.partitions.validation = {"B1", "B2"};
    spec.partitions.test = {"C1"};
    return spec;
}

json small_config() {
    return json::parse(R"({
        "data": {"directory": ".", "mapping": "openface"},
        "partitions": {"train": ["A1", "A2"], "validation": ["B1", "B2"], "test": ["C1"]},
        "modalities": {"head": ["head_loc_x", "head_yaw", "head_pitch"], "eye": ["gaze_x", "blink"]},
        "systems": [["head", "eye"]],
        "dimensions": ["arousal", "valence"],
        "window_seconds": [4],
        "delays": [0.0, 0.2],
        "mi_thresholds": [0.05],
        "mi": {"max_samples": 800},
        "model": {"hidden_sizes": [4, 3], "learning_rate": 1e-3, "max_epochs": 3, "patience": 2,
                  "truncate_frames": 100},
        "output": "out"
    })");
}

std::size_t data_rows(const std::filesystem::path& p) { return csv::read(p).rows.size(); }

}  // namespace

TEST_CASE("synthetic corpus layout") {
    TempDir dir;
    auto spec = small_spec();
    spec.frames = 7500;
    spec.partitions.train = {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"};
    synth::generate(spec, dir.path());
    for (const auto& id : spec.partitions.train) {
        CHECK(data_rows(dir / (id + ".csv")) == 7500);
        CHECK(data_rows(dir / (id + ".labels.csv")) == 7500);
    }
    const auto meta = json::parse(slurp(dir / "metadata.json"));
    CHECK(meta["lag_seconds"].get<double>() == 1.0);
    CHECK(meta["arousal_channels"].size() == 2);

    const auto series = parse_tracker_csv(dir / "A1.csv", TrackerMapping::openface(), "A1");
    CHECK(series.channels.size() == 12);
}

TEST_CASE("synthetic corpus is reproducible") {
    TempDir a, b, c;
    synth::generate(small_spec(), a.path());
    synth::generate(small_spec(), b.path());
    auto other = small_spec();
    other.seed = 7;
    synth::generate(other, c.path());
    for (const char* f : {"A1.csv", "B2.labels.csv", "C1.direct_gaze.csv", "metadata.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "A1.csv") != slurp(c / "A1.csv"));
}

TEST_CASE("config parsing") {
    const auto c = config_from_json(small_config(), "/data/run");
    CHECK(c.data_dir == std::filesystem::path("/data/run/."));
    CHECK(c.systems.size() == 1);
    CHECK(c.systems[0].name == "head+eye");
    CHECK(c.systems[0].channels.size() == 5);
    CHECK(c.delays == std::vector<double>{0.0, 0.2});
    CHECK(c.model.hidden_sizes == std::vector<int>{4, 3});

    auto defaults = small_config();
    defaults.erase("delays");
    defaults.erase("systems");
    const auto d = config_from_json(defaults);
    CHECK(d.delays.size() == 23);
    CHECK(d.systems.size() == 2);

    auto bad = small_config();
    bad["delays"] = json::parse("[0.0, 0.3]");
    CHECK_THROWS_AS(config_from_json(bad), Error);
    bad = small_config();
    bad["systems"] = json::parse(R"([["head", "ears"]])");
    CHECK_THROWS_AS(config_from_json(bad), Error);
}

TEST_CASE("sweep enumeration, report and determinism") {
    TempDir dir;
    synth::generate(small_spec(), dir.path());
    std::ofstream(dir / "exp.json") << small_config().dump();
    const auto config = load_config(dir / "exp.json");

    RunOptions first;
    first.output_dir = dir / "run1";
    const auto rows = run_experiment(config, first);
    // 2 delays x 1 threshold per dimension on validation, then one test row each.
    REQUIRE(rows.size() == 6);
    std::size_t validation = 0, test = 0;
    for (const auto& r : rows) {
        (r.partition == Partition::Test ? test : validation)++;
        CHECK(r.window_s == 4.0);
    }
    CHECK(validation == 4);
    CHECK(test == 2);
    CHECK(std::filesystem::exists(dir / "run1" / "models" / "head+eye_arousal_W4.00_D0.20_T0.05.json"));
    CHECK(std::filesystem::exists(dir / "run1" / "mi" / "head+eye_valence_W4.00_D0.00_T0.05.csv"));

    const auto parsed = read_report(dir / "run1" / "report.csv");
    REQUIRE(parsed.size() == rows.size());
    CHECK(format_report_row(parsed[3]) == format_report_row(rows[3]));

    RunOptions second;
    second.output_dir = dir / "run2";
    run_experiment(config, second);
    CHECK(slurp(dir / "run1" / "report.csv") == slurp(dir / "run2" / "report.csv"));

    std::ostringstream summary;
    summarize_report(parsed, summary);
    CHECK(summary.str().find("head+eye") != std::string::npos);
}

TEST_CASE("missing channel fails before training") {
    TempDir dir;
    synth::generate(small_spec(), dir.path());
    auto j = small_config();
    j["modalities"]["eye"] = json::parse(R"(["gaze_x", "direct_gaze"])");
    const auto config = config_from_json(j, dir.path());
    RunOptions o;
    o.output_dir = dir / "run";
    try {
        run_experiment(config, o);
        FAIL("expected a configuration error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidConfig);
        CHECK(std::string(e.what()).find("direct_gaze") != std::string::npos);
    }
    CHECK_FALSE(std::filesystem::exists(dir / "run" / "report.csv"));

    j["data"]["direct_gaze_pattern"] = "{subject}.direct_gaze.csv";
    CHECK_NOTHROW(load_subjects(config_from_json(j, dir.path())));
}

TEST_CASE("exploration ranks the generating channel first") {
    TempDir dir;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    const std::size_t n = 2600;
    const std::size_t w = 5;
    for (const char* id : {"T1", "T2", "V1", "E1"}) {
        std::vector<double> a(n), noise(n);
        for (std::size_t t = 0; t < n; ++t) {
            a[t] = 0.3 * g(rng);
            noise[t] = g(rng);
        }
        std::ofstream rec(dir / (std::string(id) + ".csv"));
        rec << "frame,A,N\n";
        std::ofstream lab(dir / (std::string(id) + ".labels.csv"));
        lab << "frame,arousal\n";
        double sum = 0;
        for (std::size_t t = 0; t < n; ++t) {
            rec << t << ',' << csv::format_double(a[t]) << ',' << csv::format_double(noise[t]) << '\n';
            sum += a[t];
            if (t >= w) sum -= a[t - w];
            lab << t << ',' << csv::format_double(sum / static_cast<double>(std::min(t + 1, w))) << '\n';
        }
    }
    const auto j = json::parse(R"({
        "data": {"directory": ".",
                 "mapping": [{"channel": "a", "column": "A"}, {"channel": "noise", "column": "N"}]},
        "partitions": {"train": ["T1", "T2"], "validation": ["V1"], "test": ["E1"]},
        "modalities": {"m": ["noise", "a"]},
        "dimensions": ["arousal"],
        "window_seconds": [4],
        "explore": {"window_seconds": 0.2, "delay_seconds": 0.0}
    })");
    const auto config = config_from_json(j, dir.path());
    RunOptions o;
    o.output_dir = dir / "explore";
    const auto rows = explore_lld(config, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].feature == "a.static.mean");
    CHECK(rows[0].r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows[1].n >= 5000);
    CHECK(std::abs(rows[1].r) <= 0.05);
    CHECK(std::filesystem::exists(dir / "explore" / "explore.csv"));
}

TEST_CASE("command line front end") {
    TempDir dir;
    const std::string cli = AFFECT_CLI_PATH;
    const auto corpus = dir / "corpus";
    CHECK(std::system((cli + " synth --out " + corpus.string() + " --frames 600 > /dev/null").c_str()) == 0);
    CHECK(std::filesystem::exists(corpus / "experiment.json"));
    const auto subjects = load_subjects(load_config(corpus / "experiment.json"));
    CHECK(subjects.size() == 23);
    CHECK(subjects.at("P16").series.has_channel("direct_gaze"));
    CHECK(std::system((cli + " run --config " + (dir / "missing.json").string() + " 2> /dev/null").c_str()) != 0);
    CHECK(std::system((cli + " frobnicate 2> /dev/null").c_str()) != 0);
}
