#pragma once

#include <json.hpp>

#include "hta/igmm.hpp"
#include "hta/tracker.hpp"

namespace hta {

nlohmann::json to_json(const IgmmConfig<double>& config);
IgmmConfig<double> igmm_config_from_json(const nlohmann::json& j);

// {"config": {...}, "observations": n, "components": [{weight, mean, variance, mass, age}, ...]}
nlohmann::json to_json(const IgmmModel& model);
IgmmModel igmm_from_json(const nlohmann::json& j);

// {"id", "created_at", "frames": [...], "records": [...], "model": {...}}
nlohmann::json to_json(const TrackHistory& history);
TrackHistory track_history_from_json(const nlohmann::json& j);

}  // namespace hta
