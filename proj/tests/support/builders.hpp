#pragma once

// Scenario construction helpers shared by the reach/incremental/acceptance
// tests.

#include <string>
#include <vector>

#include "support/helpers.hpp"
#include "versekit/scenario.hpp"

namespace versekit::testing {

inline AgentDef make_agent(const std::string& id, const std::string& type_name,
                           const std::string& logic_rel, const MapDef& map,
                           std::vector<double> lo, std::vector<double> hi,
                           const std::string& tactical, const std::string& track,
                           std::map<std::string, double> params = {}) {
    AgentDef a;
    a.id = id;
    a.type_name = type_name;
    a.type = &AgentTypeRegistry::instance().get(type_name);
    a.logic = dsl::check(dsl::parse(read_file(scenario_path(logic_rel))), map.track_modes(),
                         a.type->fields);
    a.initial_set = HyperRect::from_bounds(lo, hi);
    a.initial_mode = ModePair{tactical, track};
    a.params.values = std::move(params);
    return a;
}

// The figure-eight two-drone encounter: a fast craft closing on a slow one
// on the middle layer.
inline Scenario fig8_two_drones(const MapPtr& map) {
    Scenario sc(map, SensorDef::transparent());
    const auto& lane = map->lane("T1");
    const double arc_red = 5.0;
    const double arc_blue = arc_red + 14.9;
    const Vec3 red_p = lane.curve->point(arc_red);
    const Vec3 red_t = lane.curve->tangent(arc_red);
    const Vec3 blue_p = lane.curve->point(arc_blue);
    const Vec3 blue_t = lane.curve->tangent(arc_blue);
    const double red_v = 2.25;
    const double blue_v = 0.5;
    sc.add_agent(make_agent(
        "red", "drone", "logic/drone_ca.vdl", *map,
        {red_p.x - 0.8, red_p.y - 0.05, red_p.z - 0.05, red_t.x * red_v - 0.05,
         red_t.y * red_v - 0.05, -0.05},
        {red_p.x + 0.8, red_p.y + 0.05, red_p.z + 0.05, red_t.x * red_v + 0.05,
         red_t.y * red_v + 0.05, 0.05},
        "Normal", "T1", {{"speed", red_v}}));
    sc.add_agent(make_agent(
        "blue", "drone", "logic/drone_ca.vdl", *map,
        {blue_p.x - 0.8, blue_p.y - 0.05, blue_p.z - 0.05, blue_t.x * blue_v - 0.05,
         blue_t.y * blue_v - 0.05, -0.05},
        {blue_p.x + 0.8, blue_p.y + 0.05, blue_p.z + 0.05, blue_t.x * blue_v + 0.05,
         blue_t.y * blue_v + 0.05, 0.05},
        "Normal", "T1", {{"speed", blue_v}}));
    return sc;
}

}  // namespace versekit::testing
