#include "hta/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hta/error.hpp"
#include "hta/igmm_json.hpp"
#include "hta/io.hpp"
#include "hta/synthetic.hpp"

namespace hta::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_json(const json& j, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failed: '" + path.string() + "'");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("'" + path.string() + "': " + e.what());
    }
}

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

SequenceRun run_one(const fs::path& dir, const RunConfig& config, const fs::path& out, const Logger& logger) {
    SequenceRun run;
    run.dir = fs::absolute(dir);
    const auto start = Clock::now();
    const io::SequenceBundle bundle = io::load_bundle(dir, config.tracker.score_threshold);
    run.load_seconds = seconds_since(start);
    run.name = bundle.info.name;
    run.frames = bundle.detections.size();
    logger.log(1, "loaded " + run.name + ": " + std::to_string(run.frames) + " frames");

    const auto track_start = Clock::now();
    Tracker tracker(config.tracker);
    for (std::size_t t = 0; t < bundle.detections.size(); ++t) {
        const auto frame_start = Clock::now();
        auto rows = tracker.step(static_cast<FrameIndex>(t + 1), bundle.detections[t]);
        run.rows.insert(run.rows.end(), rows.begin(), rows.end());
        logger.log(2, "frame " + std::to_string(t + 1) + ": " + std::to_string(bundle.detections[t].size()) +
                          " detections, " + std::to_string(rows.size()) + " tracks, " +
                          fixed(1e3 * seconds_since(frame_start), 3) + " ms");
    }
    run.track_seconds = seconds_since(track_start);
    run.history = tracker.history();

    if (!out.empty()) {
        run.results = fs::absolute(out / (run.name + ".txt"));
        run.tracks = fs::absolute(out / (run.name + ".tracks.json"));
        io::write_results(run.rows, run.results);
        json tracks = json::array();
        for (const auto& [id, h] : run.history) tracks.push_back(to_json(h));
        write_json(tracks, run.tracks);
    }
    logger.log(1, run.name + ": " + fixed(run.fps(), 1) + " FPS");
    return run;
}

EvalRow evaluate_run(const std::string& name, const AnnotatedSequence& gt, const std::vector<ResultRow>& rows) {
    return {name, evaluate(gt, io::to_annotations(rows, gt.size())), std::nullopt};
}

}  // namespace

void Logger::log(int level, const std::string& message) const {
    if (sink && level <= verbosity) *sink << message << '\n';
}

double SequenceRun::fps() const {
    const double total = load_seconds + track_seconds;
    return total > 0 ? static_cast<double>(frames) / total : 0.0;
}

TrackRun cmd_track(const std::vector<fs::path>& sequences, const RunConfig& config, const fs::path& out,
                   const Logger& logger) {
    if (sequences.empty()) throw InputError("track: no sequence given");
    TrackRun run;
    run.config = config;
    for (const auto& dir : sequences) run.sequences.push_back(run_one(dir, config, out, logger));

    if (!out.empty()) {
        json seqs = json::array();
        for (const auto& s : run.sequences)
            seqs.push_back({{"name", s.name},
                            {"dir", s.dir.string()},
                            {"frames", s.frames},
                            {"load_seconds", s.load_seconds},
                            {"track_seconds", s.track_seconds},
                            {"fps", s.fps()},
                            {"results", s.results.string()},
                            {"tracks", s.tracks.string()}});
        json manifest = {{"config", to_key_values(config)}, {"sequences", seqs}};
        run.manifest = fs::absolute(out / "manifest.json");
        write_json(manifest, run.manifest);
    }
    return run;
}

std::string format_table(const std::vector<EvalRow>& rows) {
    const bool with_fps = std::any_of(rows.begin(), rows.end(), [](const EvalRow& r) { return r.fps.has_value(); });
    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    std::ostringstream s;
    const auto cell = [&](const std::string& text, std::size_t w) { s << std::setw(static_cast<int>(w)) << text; };
    s << std::left << std::setw(static_cast<int>(width)) << "Tracker" << std::right;
    for (const char* h : {"IDF1", "MOTA", "MOTP", "MT", "ML", "FP", "FN", "IDS", "Frag"}) cell(h, 8);
    if (with_fps) cell("FPS", 8);
    s << '\n';
    for (const auto& r : rows) {
        const MetricsReport& m = r.report;
        s << std::left << std::setw(static_cast<int>(width)) << r.name << std::right;
        cell(fixed(100 * m.idf1, 1), 8);
        cell(fixed(100 * m.mota, 1), 8);
        cell(fixed(100 * m.motp, 1), 8);
        cell(fixed(m.mt, 1), 8);
        cell(fixed(m.ml, 1), 8);
        cell(std::to_string(m.fp), 8);
        cell(std::to_string(m.fn), 8);
        cell(std::to_string(m.ids), 8);
        cell(std::to_string(m.frag), 8);
        if (with_fps) cell(r.fps ? fixed(*r.fps, 1) : "-", 8);
        s << '\n';
    }
    return s.str();
}

json to_json(const MetricsReport& m) {
    return {{"idf1", m.idf1},     {"idp", m.idp},           {"idr", m.idr},
            {"mota", m.mota},     {"motp", m.motp},         {"mt", m.mt},
            {"ml", m.ml},         {"mostly_tracked", m.mostly_tracked}, {"mostly_lost", m.mostly_lost},
            {"fp", m.fp},         {"fn", m.fn},             {"ids", m.ids},
            {"frag", m.frag},     {"matches", m.matches},   {"gt_boxes", m.gt_boxes},
            {"hyp_boxes", m.hyp_boxes}, {"gt_targets", m.gt_targets}, {"idtp", m.idtp},
            {"idfp", m.idfp},     {"idfn", m.idfn}};
}

json to_json(const std::vector<EvalRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json row = {{"name", r.name}, {"metrics", to_json(r.report)}};
        if (r.fps) row["fps"] = *r.fps;
        out.push_back(row);
    }
    return out;
}

std::vector<EvalRow> cmd_eval(const fs::path& gt, const std::vector<fs::path>& results, const fs::path& out,
                              std::ostream& table) {
    if (results.empty()) throw InputError("eval: no result file given");
    AnnotatedSequence truth;
    if (fs::is_directory(gt)) {
        const auto paths = io::BundlePaths::in(gt);
        if (!fs::exists(paths.ground_truth)) throw InputError("missing ground truth '" + paths.ground_truth.string() + "'");
        truth = io::read_ground_truth(paths.ground_truth);
        if (fs::exists(paths.info)) {
            const auto info = io::read_sequence_info(paths.info);
            if (info.frame_count < truth.size())
                throw InputError("ground truth references frame " + std::to_string(truth.size()) +
                                 " beyond seqLength " + std::to_string(info.frame_count));
            truth.resize(info.frame_count);
        }
    } else {
        if (!fs::exists(gt)) throw InputError("missing ground truth '" + gt.string() + "'");
        truth = io::read_ground_truth(gt);
    }

    std::vector<EvalRow> rows;
    for (const auto& path : results) {
        if (!fs::exists(path)) throw InputError("missing result file '" + path.string() + "'");
        const auto hyp = io::read_results(path);
        for (const auto& r : hyp)
            if (r.frame < 1 || static_cast<std::size_t>(r.frame) > truth.size())
                throw InputError("'" + path.string() + "' has frame " + std::to_string(r.frame) +
                                 " outside the ground-truth range 1.." + std::to_string(truth.size()));
        rows.push_back(evaluate_run(path.stem().string(), truth, hyp));
    }
    table << format_table(rows);
    if (!out.empty()) write_json({{"ground_truth", fs::absolute(gt).string()}, {"rows", to_json(rows)}}, out / "eval.json");
    return rows;
}

std::vector<EvalRow> cmd_compare(const fs::path& sequence, const std::vector<std::string>& strategies,
                                 const RunConfig& config, const fs::path& out, std::ostream& table,
                                 const Logger& logger) {
    if (strategies.empty()) throw InputError("compare: no strategy given");
    std::vector<RunConfig> configs;
    for (const auto& name : strategies) {
        RunConfig c = config;
        c.tracker.strategy.kind = parse_strategy_kind(name);
        configs.push_back(c);
    }

    const auto start = Clock::now();
    const io::SequenceBundle bundle = io::load_bundle(sequence, config.tracker.score_threshold);
    const double load_seconds = seconds_since(start);
    if (!bundle.ground_truth) throw InputError("compare: sequence '" + sequence.string() + "' has no ground truth");

    std::vector<EvalRow> rows;
    json runs = json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto track_start = Clock::now();
        const auto result = run_sequence(bundle.detections, configs[i].tracker);
        const double seconds = load_seconds + seconds_since(track_start);
        EvalRow row = evaluate_run(configs[i].tracker.strategy.name(), *bundle.ground_truth, result);
        row.fps = seconds > 0 ? static_cast<double>(bundle.detections.size()) / seconds : 0.0;
        logger.log(1, row.name + ": IDF1 " + fixed(100 * row.report.idf1, 1));
        if (!out.empty()) {
            const fs::path path = fs::absolute(out / (std::to_string(i + 1) + "-" + strategies[i] + ".txt"));
            io::write_results(result, path);
            runs.push_back({{"strategy", strategies[i]}, {"config", to_key_values(configs[i])}, {"results", path.string()}});
        }
        rows.push_back(std::move(row));
    }
    table << format_table(rows);
    if (!out.empty())
        write_json({{"sequence", fs::absolute(sequence).string()}, {"runs", runs}, {"rows", to_json(rows)}},
                   out / "compare.json");
    return rows;
}

void cmd_generate(const fs::path& out, const std::string& preset, std::uint64_t seed,
                  std::optional<std::size_t> frames) {
    synthetic::SyntheticSpec spec;
    if (preset == "ambiguity") {
        synthetic::AmbiguitySuiteParams params;
        if (frames) params.frame_count = *frames;
        spec = synthetic::ambiguity_suite(seed, params);
    } else if (preset == "separable") {
        spec.name = "separable-" + std::to_string(seed);
        spec.frame_count = frames.value_or(100);
        spec.seed = seed;
        spec.feature_dim = 16;
        const std::size_t targets = 4;
        for (std::size_t i = 0; i < targets; ++i) {
            synthetic::TargetPath p;
            const double x = 200 + 400 * static_cast<double>(i), y = 300 + 100 * static_cast<double>(i % 2);
            const auto last = static_cast<FrameIndex>(spec.frame_count);
            p.waypoints = {{1, x, y}, {last, x + 2.0 * static_cast<double>(last), y + 0.5 * static_cast<double>(last)}};
            spec.paths.push_back(p);
        }
    } else {
        throw InputError("generate: unknown preset '" + preset + "' (expected ambiguity or separable)");
    }
    try {
        io::write_bundle(synthetic::generate(spec), out);
    } catch (const DomainError& e) {
        throw InputError(std::string("generate: ") + e.what());
    }
}

InspectOutput cmd_inspect(const fs::path& manifest_path, TrackId id, const fs::path& out,
                          const std::string& sequence, std::size_t bins) {
    if (bins < 1) throw InputError("inspect: bin count must be >= 1");
    const json manifest = read_json(manifest_path);
    const json* entry = nullptr;
    try {
        const auto& seqs = manifest.at("sequences");
        if (sequence.empty()) {
            if (seqs.size() != 1)
                throw InputError("inspect: manifest lists " + std::to_string(seqs.size()) +
                                 " sequences, choose one with --sequence");
            entry = &seqs.front();
        } else {
            for (const auto& s : seqs)
                if (s.at("name").get<std::string>() == sequence) entry = &s;
            if (!entry) throw InputError("inspect: sequence '" + sequence + "' not in manifest");
        }
    } catch (const json::exception& e) {
        throw InputError("'" + manifest_path.string() + "': " + e.what());
    }

    fs::path tracks_path = entry->value("tracks", std::string());
    if (tracks_path.is_relative()) tracks_path = manifest_path.parent_path() / tracks_path;
    std::optional<TrackHistory> found;
    for (const auto& t : read_json(tracks_path))
        if (t.at("id").get<TrackId>() == id) found = track_history_from_json(t);
    if (!found) throw InputError("inspect: unknown track id " + std::to_string(id));
    const TrackHistory& h = *found;

    InspectOutput result;
    result.records = h.records.size();
    result.histogram = out / "histogram.csv";
    {
        auto csv = open_csv(result.histogram);
        csv << "bin_left,bin_right,count,density\n";
        if (!h.records.empty()) {
            double lo = *std::min_element(h.records.begin(), h.records.end());
            double hi = *std::max_element(h.records.begin(), h.records.end());
            if (!(hi > lo)) {
                lo -= 0.5e-3;
                hi += 0.5e-3;
            }
            const double width = (hi - lo) / static_cast<double>(bins);
            std::vector<std::size_t> counts(bins, 0);
            for (double r : h.records) {
                auto b = static_cast<std::size_t>((r - lo) / width);
                counts[std::min(b, bins - 1)] += 1;
            }
            const double n = static_cast<double>(h.records.size());
            for (std::size_t b = 0; b < bins; ++b)
                csv << lo + width * static_cast<double>(b) << ',' << lo + width * static_cast<double>(b + 1) << ','
                    << counts[b] << ',' << static_cast<double>(counts[b]) / (n * width) << '\n';
        }
    }
    if (h.model.empty()) return result;

    const auto& comps = h.model.components();
    const auto upsilon = [&] {
        auto it = manifest.find("config");
        if (it != manifest.end() && it->contains("upsilon")) return std::stod(it->at("upsilon").get<std::string>());
        return Strategy{}.upsilon;
    }();
    const auto inliers = h.model.select_inliers(upsilon);
    std::vector<char> is_inlier(comps.size(), 0);
    double inlier_weight = 0, total_weight = 0;
    for (std::size_t k : inliers) {
        is_inlier[k] = 1;
        inlier_weight += comps[k].weight;
    }
    for (const auto& c : comps) total_weight += c.weight;

    result.components = out / "components.csv";
    {
        auto csv = open_csv(*result.components);
        csv << "component,weight,mean,variance,mass,age,inlier\n";
        for (std::size_t k = 0; k < comps.size(); ++k)
            csv << k << ',' << comps[k].weight << ',' << comps[k].mean << ',' << comps[k].variance << ','
                << comps[k].mass << ',' << comps[k].age << ',' << int(is_inlier[k]) << '\n';
    }

    // Grid over +-8 standard deviations of every component.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& c : comps) {
        const double s = std::sqrt(c.variance);
        lo = std::min(lo, c.mean - 8 * s);
        hi = std::max(hi, c.mean + 8 * s);
    }
    constexpr std::size_t kPoints = 4001;
    result.density = out / "density.csv";
    auto csv = open_csv(*result.density);
    csv << "x,density,inlier_density\n";
    for (std::size_t i = 0; i < kPoints; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kPoints - 1);
        double all = 0, in = 0;
        for (std::size_t k = 0; k < comps.size(); ++k) {
            const double p = comps[k].weight * stats::gaussian_pdf(x, comps[k].mean, comps[k].variance);
            all += p;
            if (is_inlier[k]) in += p;
        }
        csv << x << ',' << all / total_weight << ',' << in / inlier_weight << '\n';
    }
    return result;
}

}  // namespace hta::cli
