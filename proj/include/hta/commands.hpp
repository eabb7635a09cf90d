#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hta/config.hpp"
#include "hta/metrics.hpp"
#include "hta/tracker.hpp"

namespace hta::cli {

namespace fs = std::filesystem;

// Progress messages go to `sink` when their level is at most `verbosity`.
struct Logger {
    int verbosity = 0;
    std::ostream* sink = nullptr;

    void log(int level, const std::string& message) const;
};

struct SequenceRun {
    std::string name;
    fs::path dir;
    std::size_t frames = 0;
    double load_seconds = 0;
    double track_seconds = 0;
    fs::path results;
    fs::path tracks;  // per-track distance streams and models (JSON)
    std::vector<ResultRow> rows;
    std::map<TrackId, TrackHistory> history;

    // Frames per second over ingestion plus tracking.
    [[nodiscard]] double fps() const;
};

struct TrackRun {
    RunConfig config;
    std::vector<SequenceRun> sequences;
    fs::path manifest;
};

// Runs the tracker over every sequence directory and writes <out>/<name>.txt,
// <out>/<name>.tracks.json and <out>/manifest.json.
TrackRun cmd_track(const std::vector<fs::path>& sequences, const RunConfig& config, const fs::path& out,
                   const Logger& logger = {});

struct EvalRow {
    std::string name;
    MetricsReport report;
    std::optional<double> fps;
};

std::string format_table(const std::vector<EvalRow>& rows);
nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const std::vector<EvalRow>& rows);

// `gt` is a gt.txt file or a sequence directory. Rows follow the order of `results`.
// Writes <out>/eval.json when `out` is not empty.
std::vector<EvalRow> cmd_eval(const fs::path& gt, const std::vector<fs::path>& results, const fs::path& out,
                              std::ostream& table);

// Runs each listed strategy (cms, knn, ema, hta) with the shared config on one
// sequence with ground truth. Writes <out>/compare.json and per-strategy results when
// `out` is not empty.
std::vector<EvalRow> cmd_compare(const fs::path& sequence, const std::vector<std::string>& strategies,
                                 const RunConfig& config, const fs::path& out, std::ostream& table,
                                 const Logger& logger = {});

// Presets: "ambiguity" (lookalike pairs, the strategy-comparison suite) and
// "separable" (noise-free orthogonal identities).
void cmd_generate(const fs::path& out, const std::string& preset, std::uint64_t seed,
                  std::optional<std::size_t> frames = std::nullopt);

struct InspectOutput {
    fs::path histogram;
    std::optional<fs::path> density;     // absent while the track has no model
    std::optional<fs::path> components;
    std::size_t records = 0;
};

// Reads the run manifest, finds track `id` (in `sequence`, or the only sequence) and
// writes histogram.csv, density.csv and components.csv into `out`.
InspectOutput cmd_inspect(const fs::path& manifest, TrackId id, const fs::path& out,
                          const std::string& sequence = "", std::size_t bins = 30);

}  // namespace hta::cli
