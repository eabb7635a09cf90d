#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "hta/tracker.hpp"

namespace hta {

// Tracker settings plus the run-level options that live next to them in a
// key=value config file.
struct RunConfig {
    TrackerConfig tracker;
    std::uint64_t seed = 0;
};

using KeyValues = std::map<std::string, std::string>;

// Applies recognised keys on top of `base`; unknown keys and unparsable values are input errors.
// Keys: strategy, k, eta, lambda, min-track-length, upsilon, dmax, score-threshold, n-init,
// max-age, gallery-budget, motion-gating, sigma2-ini, kmax, vmin, nmin, tau, variance-floor,
// inlier-order, hta-base, hta-matching, seed.
RunConfig apply_key_values(RunConfig base, const KeyValues& values, const std::string& origin = "config");

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Every key understood by apply_key_values, with the value held by `config`.
KeyValues to_key_values(const RunConfig& config);

void write_run_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace hta
