#include "hta/config.hpp"

#include <charconv>
#include <fstream>

#include "hta/error.hpp"
#include "hta/io.hpp"

namespace hta {
namespace {

double parse_double(const std::string& key, const std::string& value, const std::string& origin) {
    double v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end || value.empty())
        throw InputError(origin + ": " + key + " expects a number, got '" + value + "'");
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value, const std::string& origin) {
    std::uint64_t v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end || value.empty())
        throw InputError(origin + ": " + key + " expects a nonnegative integer, got '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value, const std::string& origin) {
    if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "off" || value == "no") return false;
    throw InputError(origin + ": " + key + " expects a boolean, got '" + value + "'");
}

}  // namespace

RunConfig apply_key_values(RunConfig base, const KeyValues& values, const std::string& origin) {
    RunConfig& c = base;
    TrackerConfig& t = c.tracker;
    Strategy& s = t.strategy;
    for (const auto& [key, value] : values) {
        const auto num = [&] { return parse_double(key, value, origin); };
        const auto count = [&] { return static_cast<std::size_t>(parse_count(key, value, origin)); };
        if (key == "strategy") {
            // Switching strategy keeps the tuned parameters of every family.
            s.kind = parse_strategy_kind(value);
        } else if (key == "k") {
            s.k = count();
        } else if (key == "eta") {
            s.eta = num();
        } else if (key == "lambda") {
            s.lambda = num();
        } else if (key == "min-track-length") {
            s.min_track_length = count();
        } else if (key == "upsilon") {
            s.upsilon = num();
        } else if (key == "hta-base") {
            s.hta_base = parse_strategy_kind(value);
        } else if (key == "hta-matching") {
            if (value == "single-shot") s.hta_matching = MatchingScheme::SingleShot;
            else if (value == "cascade") s.hta_matching = MatchingScheme::Cascade;
            else throw InputError(origin + ": hta-matching expects single-shot or cascade, got '" + value + "'");
        } else if (key == "dmax") {
            t.gating.d_max = num();
        } else if (key == "motion-gating") {
            t.gating.motion_gating = parse_bool(key, value, origin);
        } else if (key == "score-threshold") {
            t.score_threshold = num();
        } else if (key == "n-init") {
            t.n_init = count();
        } else if (key == "max-age") {
            t.max_age = count();
        } else if (key == "gallery-budget") {
            t.gallery_budget = count();
        } else if (key == "sigma2-ini") {
            t.igmm.initial_variance = num();
        } else if (key == "kmax") {
            t.igmm.max_components = count();
        } else if (key == "vmin") {
            t.igmm.min_age = parse_count(key, value, origin);
        } else if (key == "nmin") {
            t.igmm.min_mass = num();
        } else if (key == "tau") {
            t.igmm.tail_probability = num();
        } else if (key == "variance-floor") {
            t.igmm.variance_floor = num();
        } else if (key == "inlier-order") {
            if (value == "ascending") t.igmm.inlier_order = InlierOrder::Ascending;
            else if (value == "descending") t.igmm.inlier_order = InlierOrder::Descending;
            else throw InputError(origin + ": inlier-order expects ascending or descending, got '" + value + "'");
        } else if (key == "seed") {
            c.seed = parse_count(key, value, origin);
        } else {
            throw InputError(origin + ": unknown key '" + key + "'");
        }
    }
    try {
        t.validate();
    } catch (const DomainError& e) {
        throw InputError(origin + ": " + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    return apply_key_values(std::move(base), io::read_key_values(path), path.string());
}

KeyValues to_key_values(const RunConfig& c) {
    const TrackerConfig& t = c.tracker;
    const Strategy& s = t.strategy;
    const auto num = [](double v) { return io::format_number(v); };
    return {
        {"strategy", to_string(s.kind)},
        {"k", std::to_string(s.k)},
        {"eta", num(s.eta)},
        {"lambda", num(s.lambda)},
        {"min-track-length", std::to_string(s.min_track_length)},
        {"upsilon", num(s.upsilon)},
        {"hta-base", to_string(s.hta_base)},
        {"hta-matching", s.hta_matching == MatchingScheme::Cascade ? "cascade" : "single-shot"},
        {"dmax", num(t.gating.d_max)},
        {"motion-gating", t.gating.motion_gating ? "true" : "false"},
        {"score-threshold", num(t.score_threshold)},
        {"n-init", std::to_string(t.n_init)},
        {"max-age", std::to_string(t.max_age)},
        {"gallery-budget", std::to_string(t.gallery_budget)},
        {"sigma2-ini", num(t.igmm.initial_variance)},
        {"kmax", std::to_string(t.igmm.max_components)},
        {"vmin", std::to_string(t.igmm.min_age)},
        {"nmin", num(t.igmm.min_mass)},
        {"tau", num(t.igmm.tail_probability)},
        {"variance-floor", num(t.igmm.variance_floor)},
        {"inlier-order", t.igmm.inlier_order == InlierOrder::Descending ? "descending" : "ascending"},
        {"seed", std::to_string(c.seed)},
    };
}

void write_run_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    for (const auto& [key, value] : to_key_values(config)) out << key << '=' << value << '\n';
    if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace hta
