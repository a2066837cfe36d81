#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "rescuesim/config.hpp"
#include "rescuesim/trace.hpp"

using namespace rescuesim;
using nlohmann::json;

namespace {

json valid_scenario() {
    return json::parse(R"({
        "graph": {"grid": {"width": 3, "height": 3, "edge_len": 2}},
        "fire_target": 8,
        "engine_starts": [0],
        "lights": {"nodes": [4], "min_green": 3},
        "ordinary_vehicles": 2,
        "noise_placements": [{"edge": {"from": 1, "to": 4}, "count": 1}],
        "rewards": {"goal_bonus": 100, "collision_penalty": 50,
                     "step_penalty": 0.1, "approach_cap": 3, "alpha": 1.0},
        "max_steps": 50,
        "sense_range": 5,
        "seeds": [7]
    })");
}

}  // namespace

TEST_CASE("scenario round-trip preserves every field") {
    ScenarioConfig sc = ScenarioConfig::from_json(valid_scenario());
    ScenarioConfig again = ScenarioConfig::from_json(sc.to_json());
    CHECK(sc.to_json() == again.to_json());
    CHECK(again.grid.has_value());
    CHECK(again.grid->width == 3);
    CHECK(again.fire_target == 8);
    CHECK(again.light_nodes == std::vector<NodeId>{4});
    CHECK(again.min_green == 3);
    CHECK(again.noise_placements.size() == 1);
    CHECK(again.rewards.alpha == 1.0);
    CHECK(again.seeds == std::vector<uint64_t>{7});
}

TEST_CASE("explicit graph scenario round-trips") {
    json j = valid_scenario();
    j["graph"] = {{"nodes", json::array({{{"id", 0}, {"x", 0}, {"y", 0}},
                                         {{"id", 1}, {"x", 1}, {"y", 0}}})},
                  {"edges", json::array({{{"from", 0}, {"to", 1}, {"len", 1}},
                                         {{"from", 1}, {"to", 0}, {"len", 1}}})}};
    j["fire_target"] = 1;
    j["lights"] = {{"nodes", json::array()}};
    j["noise_placements"] = json::array();
    j["ordinary_vehicles"] = 0;
    ScenarioConfig sc = ScenarioConfig::from_json(j);
    CHECK_FALSE(sc.grid.has_value());
    CHECK(sc.nodes.size() == 2);
    ScenarioConfig again = ScenarioConfig::from_json(sc.to_json());
    CHECK(sc.to_json() == again.to_json());
}

TEST_CASE("referential validation reports the offending field") {
    json j = valid_scenario();
    j["fire_target"] = 99;
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("fire_target"), ValidationError);

    j = valid_scenario();
    j["engine_starts"] = {8};
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("engine_starts[0]"), ValidationError);

    j = valid_scenario();
    j["lights"]["nodes"] = {4, 4};
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("lights.nodes[1]"), ValidationError);

    j = valid_scenario();
    j["noise_placements"][0]["edge"]["to"] = 8;  // not adjacent to node 1
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("noise_placements[0].edge"), ValidationError);

    j = valid_scenario();
    j["noise_placements"][0]["count"] = 50;
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("noise_placements[0].count"),
                         ValidationError);
}

TEST_CASE("unknown fields are rejected") {
    json j = valid_scenario();
    j["typo_field"] = 1;
    CHECK_THROWS_WITH_AS(ScenarioConfig::from_json(j),
                         doctest::Contains("typo_field"), ValidationError);

    json t = {{"strategy", "qmix"}, {"episodes", 5}, {"nope", 1}};
    CHECK_THROWS_WITH_AS(TrainConfig::from_json(t), doctest::Contains("nope"),
                         ValidationError);
}

TEST_CASE("train config defaults, round-trip and validation") {
    TrainConfig tc = TrainConfig::from_json({{"strategy", "iql"}, {"episodes", 10}});
    CHECK(tc.gamma == 0.99);
    CHECK(tc.lr == 5e-4);
    CHECK(tc.batch_size == 32);
    CHECK(tc.buffer_capacity == 5000);
    CHECK(tc.warmup_transitions == 500);
    CHECK(tc.target_sync_interval == 200);
    CHECK(tc.hidden_width == 64);
    CHECK(tc.mixer_embed == 32);
    CHECK(tc.grad_clip == 10.0);
    TrainConfig again = TrainConfig::from_json(tc.to_json());
    CHECK(tc.to_json() == again.to_json());

    CHECK_THROWS_AS(TrainConfig::from_json({{"strategy", "sarsa"}, {"episodes", 1}}),
                    ValidationError);
    CHECK_THROWS_AS(TrainConfig::from_json({{"strategy", "qmix"}, {"episodes", -1}}),
                    ValidationError);
}

TEST_CASE("trace: write, parse and summarize a hand-built episode") {
    ScenarioConfig sc = ScenarioConfig::from_json(valid_scenario());
    TraceHeader header;
    header.scenario = sc;
    header.seed = 7;
    header.strategy = "qmix";

    // Hand-built 3-tick trace: engine rides edge (0,1) of length 2 toward
    // node 8, with one collision on tick 2.
    auto graph = sc.build_graph();
    std::vector<TraceTick> ticks;
    for (int tick = 1; tick <= 3; ++tick) {
        TraceTick t;
        t.tick = tick;
        VehicleSnapshot v;
        v.id = 0;
        v.kind = VehicleKind::Special;
        v.from = 0;
        v.to = 1;
        v.progress = tick == 3 ? 1 : tick - 1;
        v.active = true;
        t.vehicles.push_back(v);
        t.lights.push_back({4, tick >= 2 ? LightPhase::EWGreen : LightPhase::NSGreen, 0});
        if (tick == 2) t.events.collisions.push_back({0, 5});
        t.reward = tick == 2 ? -50.1 : 0.9;
        ticks.push_back(t);
    }

    std::ostringstream out;
    out << header_line(header) << "\n";
    for (const TraceTick& t : ticks) out << tick_line(t) << "\n";

    std::istringstream in(out.str());
    Trace trace = parse_trace(in);
    CHECK(trace.header.seed == 7);
    CHECK(trace.header.strategy == "qmix");
    REQUIRE(trace.ticks.size() == 3);
    CHECK(trace.ticks[1].events.collisions.size() == 1);

    auto rows = replay_summary(trace);
    REQUIRE(rows.size() == 3);
    // Distances: edge (0,1) len 2, dist(1 -> 8) = 6: progress 0 -> 8, 1 -> 7.
    CHECK(rows[0].engine_dist == std::vector<int>{8});
    CHECK(rows[1].engine_dist == std::vector<int>{7});
    CHECK(rows[2].engine_dist == std::vector<int>{7});
    CHECK(rows[0].phases == std::vector<std::string>{"NS"});
    CHECK(rows[1].phases == std::vector<std::string>{"EW"});
    CHECK(rows[0].collisions.empty());
    CHECK(rows[1].collisions == "0:5");
    CHECK(rows[2].cumulative_reward == doctest::Approx(0.9 - 50.1 + 0.9));
}

TEST_CASE("trace: empty input and malformed lines") {
    std::istringstream empty("");
    Trace t = parse_trace(empty);
    CHECK(t.ticks.empty());

    std::istringstream bad("not json at all\n");
    CHECK_THROWS_WITH_AS(parse_trace(bad), doctest::Contains("line 1"),
                         ValidationError);

    ScenarioConfig sc = ScenarioConfig::from_json(valid_scenario());
    TraceHeader header;
    header.scenario = sc;
    std::ostringstream out;
    out << header_line(header) << "\n";
    out << "{\"type\":\"tick\",\"broken\":true}\n";
    std::istringstream in(out.str());
    CHECK_THROWS_WITH_AS(parse_trace(in), doctest::Contains("line 2"),
                         ValidationError);
}
