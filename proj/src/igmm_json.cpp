#include "hta/igmm_json.hpp"

#include "hta/error.hpp"

namespace hta {

using nlohmann::json;

json to_json(const IgmmConfig<double>& c) {
    return {
        {"initial_variance", c.initial_variance},
        {"max_components", c.max_components},
        {"min_age", c.min_age},
        {"min_mass", c.min_mass},
        {"tail_probability", c.tail_probability},
        {"variance_floor", c.variance_floor},
        {"inlier_order", c.inlier_order == InlierOrder::Descending ? "descending" : "ascending"},
    };
}

IgmmConfig<double> igmm_config_from_json(const json& j) {
    IgmmConfig<double> c;
    try {
        c.initial_variance = j.value("initial_variance", c.initial_variance);
        c.max_components = j.value("max_components", c.max_components);
        c.min_age = j.value("min_age", c.min_age);
        c.min_mass = j.value("min_mass", c.min_mass);
        c.tail_probability = j.value("tail_probability", c.tail_probability);
        c.variance_floor = j.value("variance_floor", c.variance_floor);
        const std::string order = j.value("inlier_order", std::string("ascending"));
        if (order == "descending") c.inlier_order = InlierOrder::Descending;
        else if (order != "ascending") throw InputError("igmm config: unknown inlier order '" + order + "'");
        c.validate();
    } catch (const json::exception& e) {
        throw InputError(std::string("igmm config: ") + e.what());
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
    return c;
}

json to_json(const IgmmModel& model) {
    json components = json::array();
    for (const auto& c : model.components())
        components.push_back(
            {{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}, {"mass", c.mass}, {"age", c.age}});
    return {{"config", to_json(model.config())}, {"observations", model.observations()}, {"components", components}};
}

IgmmModel igmm_from_json(const json& j) {
    try {
        const auto config = igmm_config_from_json(j.at("config"));
        std::vector<IgmmComponent<double>> components;
        for (const auto& c : j.at("components")) {
            IgmmComponent<double> k;
            k.weight = c.at("weight").get<double>();
            k.mean = c.at("mean").get<double>();
            k.variance = c.at("variance").get<double>();
            k.mass = c.at("mass").get<double>();
            k.age = c.at("age").get<std::uint64_t>();
            components.push_back(k);
        }
        return IgmmModel(config, std::move(components), j.at("observations").get<std::uint64_t>());
    } catch (const json::exception& e) {
        throw InputError(std::string("igmm model: ") + e.what());
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
}

json to_json(const TrackHistory& h) {
    return {{"id", h.id},           {"created_at", h.created_at}, {"frames", h.frames},
            {"records", h.records}, {"model", to_json(h.model)}};
}

TrackHistory track_history_from_json(const json& j) {
    try {
        TrackHistory h;
        h.id = j.at("id").get<TrackId>();
        h.created_at = j.at("created_at").get<FrameIndex>();
        h.frames = j.at("frames").get<std::vector<FrameIndex>>();
        h.records = j.at("records").get<std::vector<double>>();
        if (h.frames.size() != h.records.size())
            throw InputError("track history " + std::to_string(h.id) + ": frames and records differ in length");
        h.model = igmm_from_json(j.at("model"));
        return h;
    } catch (const json::exception& e) {
        throw InputError(std::string("track history: ") + e.what());
    }
}

}  // namespace hta
