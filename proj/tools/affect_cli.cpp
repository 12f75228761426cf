#include "affect/error.hpp"
#include "affect/experiment.hpp"
#include "affect/synth.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Continuous affect prediction from head pose and eye tracking"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    bool deterministic = false;
    bool quiet = false;

    auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with a known annotation lag");
    affect::synth::SynthSpec spec;
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--seed", spec.seed, "Random seed");
    synth->add_option("--frames", spec.frames, "Frames per recording");
    synth->add_option("--lag", spec.lag_seconds, "True annotation lag in seconds");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
        cmd->add_flag("--quiet", quiet, "No progress output");
    };
    auto* extract = app.add_subcommand("extract", "Write windowed feature matrices");
    add_common(extract);
    auto* explore = app.add_subcommand("explore", "Rank LLDs by correlation with the targets");
    add_common(explore);
    auto* run = app.add_subcommand("run", "Run the full window/delay/threshold sweep");
    add_common(run);
    run->add_option("--jobs", jobs, "Parallel training jobs")->check(CLI::PositiveNumber);
    run->add_flag("--deterministic", deterministic, "Single-threaded, reproducible run");

    std::string report_path;
    auto* report = app.add_subcommand("report", "Summarize a report CSV");
    report->add_option("report", report_path, "report.csv")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            affect::synth::generate(spec, out_dir);
            std::cout << "wrote synthetic corpus to " << out_dir << '\n';
            return 0;
        }
        if (report->parsed()) {
            affect::summarize_report(affect::read_report(report_path), std::cout);
            return 0;
        }
        const auto config = affect::load_config(config_path);
        affect::RunOptions options;
        options.jobs = deterministic ? 1 : jobs;
        options.output_dir = out_dir;
        options.log = quiet ? nullptr : &std::cerr;
        if (extract->parsed()) {
            affect::extract_all(config, options);
        } else if (explore->parsed()) {
            for (const auto& row : affect::explore_lld(config, options)) {
                std::cout << row.feature << '\t' << affect::to_string(row.dimension) << '\t' << row.r << '\n';
            }
        } else if (run->parsed()) {
            const auto rows = affect::run_experiment(config, options);
            affect::summarize_report(rows, std::cout);
        }
    } catch (const affect::Error& e) {
        std::cerr << "error [" << affect::to_string(e.code()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
