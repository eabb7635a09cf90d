#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hta/commands.hpp"
#include "hta/config.hpp"
#include "hta/error.hpp"

namespace {

using namespace hta;
namespace fs = std::filesystem;

// Tracker flags shared by track and compare. Values stay as strings so they go
// through the same parser as the config file.
struct TrackerFlags {
    std::optional<fs::path> config;
    std::map<std::string, std::string> values;

    void attach(CLI::App& app, bool with_strategy) {
        app.add_option("--config", config, "key=value config file (flags override it)")->check(CLI::ExistingFile);
        if (with_strategy) add(app, "--strategy", "strategy", "cms, knn, ema or hta");
        add(app, "--lambda", "lambda", "HTA mixing weight");
        add(app, "--min-track-length", "min-track-length", "records required before the mixture term applies");
        add(app, "--upsilon", "upsilon", "inlier weight portion");
        add(app, "--k", "k", "kNN neighbours");
        add(app, "--eta", "eta", "EMA smoothing coefficient");
        add(app, "--dmax", "dmax", "appearance gate");
        add(app, "--score-threshold", "score-threshold", "minimum detection confidence");
        add(app, "--seed", "seed", "run seed");
    }

    RunConfig resolve() const {
        RunConfig base;
        if (config) base = load_run_config(*config);
        return apply_key_values(base, values, "command line");
    }

private:
    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-object tracker with hybrid appearance association"};
    app.require_subcommand(1);
    int verbose = 0;
    app.add_flag("-v,--verbose", verbose, "progress messages (repeat for per-frame timing)");
    app.fallthrough();

    // track
    auto* track = app.add_subcommand("track", "run the tracker on sequence directories");
    std::vector<fs::path> track_dirs;
    fs::path track_out = "out";
    TrackerFlags track_flags;
    track->add_option("sequences", track_dirs, "sequence directories")->required();
    track->add_option("--out", track_out, "output directory");
    track_flags.attach(*track, true);

    // eval
    auto* eval = app.add_subcommand("eval", "score result files against ground truth");
    fs::path eval_gt;
    std::vector<fs::path> eval_results;
    fs::path eval_out;
    eval->add_option("--gt", eval_gt, "gt.txt or a sequence directory")->required();
    eval->add_option("results", eval_results, "result files")->required();
    eval->add_option("--out", eval_out, "directory for eval.json");

    // compare
    auto* compare = app.add_subcommand("compare", "run several strategies on one sequence");
    fs::path compare_dir;
    std::vector<std::string> compare_strategies{"cms", "knn", "ema", "hta"};
    fs::path compare_out;
    TrackerFlags compare_flags;
    compare->add_option("sequence", compare_dir, "sequence directory with ground truth")->required();
    compare->add_option("--strategies", compare_strategies, "strategies to compare")->delimiter(',');
    compare->add_option("--out", compare_out, "directory for compare.json and results");
    compare_flags.attach(*compare, false);

    // generate
    auto* generate = app.add_subcommand("generate", "write a synthetic sequence bundle");
    fs::path generate_out;
    std::string preset = "ambiguity";
    std::uint64_t generate_seed = 0;
    std::optional<std::size_t> generate_frames;
    generate->add_option("--out", generate_out, "bundle directory")->required();
    generate->add_option("--preset", preset, "ambiguity or separable");
    generate->add_option("--seed", generate_seed, "scenario seed");
    generate->add_option("--frames", generate_frames, "frame count");

    // inspect-track
    auto* inspect = app.add_subcommand("inspect-track", "export one track's distance histogram and mixture");
    fs::path manifest;
    TrackId track_id = 0;
    fs::path inspect_out = ".";
    std::string sequence;
    std::size_t bins = 30;
    inspect->add_option("manifest", manifest, "manifest.json written by track")->required();
    inspect->add_option("--id", track_id, "track id")->required();
    inspect->add_option("--out", inspect_out, "directory for the CSV files");
    inspect->add_option("--sequence", sequence, "sequence name when the run covers several");
    inspect->add_option("--bins", bins, "histogram bins");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const cli::Logger logger{verbose, &std::cerr};
    try {
        if (*track) {
            const auto run = cli::cmd_track(track_dirs, track_flags.resolve(), track_out, logger);
            for (const auto& s : run.sequences)
                std::cout << s.name << ": " << s.frames << " frames, " << s.fps() << " FPS -> " << s.results.string()
                          << '\n';
        } else if (*eval) {
            cli::cmd_eval(eval_gt, eval_results, eval_out, std::cout);
        } else if (*compare) {
            cli::cmd_compare(compare_dir, compare_strategies, compare_flags.resolve(), compare_out, std::cout, logger);
        } else if (*generate) {
            cli::cmd_generate(generate_out, preset, generate_seed, generate_frames);
        } else if (*inspect) {
            const auto r = cli::cmd_inspect(manifest, track_id, inspect_out, sequence, bins);
            std::cout << r.records << " records -> " << r.histogram.string() << '\n';
            if (r.density) std::cout << "mixture -> " << r.density->string() << ", " << r.components->string() << '\n';
            else std::cout << "no mixture yet\n";
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
