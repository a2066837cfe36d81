#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "rescuesim/envserver.hpp"
#include "rescuesim/marl.hpp"

using namespace rescuesim;
using nlohmann::json;

namespace {

json scenario_json(int seed = 7) {
    return json::parse(R"({
        "graph": {"grid": {"width": 3, "height": 3, "edge_len": 2}},
        "fire_target": 8,
        "engine_starts": [0],
        "lights": {"nodes": [4], "min_green": 3},
        "ordinary_vehicles": 2,
        "noise_placements": [],
        "max_steps": 40,
        "sense_range": 5,
        "seeds": [)" + std::to_string(seed) + R"(]
    })");
}

struct TestServer {
    EnvServer server;
    httplib::Client client;

    explicit TestServer(int max_sessions = 64)
        : server(max_sessions), client("127.0.0.1", start(server)) {
        client.set_connection_timeout(5);
    }

    static int start(EnvServer& s) {
        int port = s.listen_on_any_port("127.0.0.1");
        REQUIRE(port > 0);
        return port;
    }

    json post(const std::string& path, const json& body, int expect_status) {
        auto res = client.Post(path, body.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == expect_status);
        return json::parse(res->body);
    }

    json get(const std::string& path, int expect_status) {
        auto res = client.Get(path);
        REQUIRE(res);
        CHECK(res->status == expect_status);
        return json::parse(res->body);
    }
};

}  // namespace

TEST_CASE("session creation returns the agent spec") {
    TestServer ts;
    json created = ts.post("/v1/session", scenario_json(), 200);
    CHECK(created["session_id"].is_string());
    REQUIRE(created["spec"]["agents"].size() == 2);
    CHECK(created["spec"]["agents"][0]["id"] == "engine_0");
    CHECK(created["spec"]["agents"][0]["kind"] == "fire_engine");
    CHECK(created["spec"]["agents"][0]["obs_dim"] == kEngineObsDim);
    CHECK(created["spec"]["agents"][1]["id"] == "light_4");
    CHECK(created["spec"]["agents"][1]["action_count"] == 2);
}

TEST_CASE("large-roster scenario reports 2 engines and 16 lights") {
    std::ifstream in(std::string(RESCUESIM_SCENARIO_DIR) + "/large.json");
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    TestServer ts;
    json created = ts.post("/v1/session", json::parse(ss.str()), 200);
    int engines = 0, lights = 0;
    for (const auto& a : created["spec"]["agents"]) {
        if (a["kind"] == "fire_engine") ++engines;
        if (a["kind"] == "traffic_light") ++lights;
    }
    CHECK(engines == 2);
    CHECK(lights == 16);
}

TEST_CASE("invalid scenarios bounce with 400 and the validation message") {
    TestServer ts;
    json bad = scenario_json();
    bad["noise_placements"] = json::array(
        {{{"edge", {{"from", 0}, {"to", 1}}}, {"count", 99}}});
    json res = ts.post("/v1/session", bad, 400);
    CHECK(res["error"].get<std::string>().find("noise_placements[0].count") !=
          std::string::npos);

    auto raw = ts.client.Post("/v1/session", "{not json", "application/json");
    REQUIRE(raw);
    CHECK(raw->status == 400);
}

TEST_CASE("session limit yields 409") {
    TestServer ts(1);
    ts.post("/v1/session", scenario_json(), 200);
    ts.post("/v1/session", scenario_json(), 409);
}

TEST_CASE("unknown session ids yield 404") {
    TestServer ts;
    ts.post("/v1/session/nope/reset", json::object(), 404);
    ts.post("/v1/session/nope/step", {{"actions", json::object()}}, 404);
    ts.get("/v1/session/nope/state", 404);
}

TEST_CASE("reset repeats the seed sequence deterministically") {
    TestServer ts;
    // Seed list [7, 7]: every reset rebuilds the same world.
    json scenario = scenario_json();
    scenario["seeds"] = {7, 7};
    std::string id = ts.post("/v1/session", scenario, 200)["session_id"];
    json a = ts.post("/v1/session/" + id + "/reset", json::object(), 200);
    json b = ts.post("/v1/session/" + id + "/reset", json::object(), 200);
    CHECK(a == b);
    CHECK(a["observations"].size() == 2);
    CHECK(a["global_state"].is_array());
}

TEST_CASE("step validation: missing agents, unknown agents, bad payloads") {
    TestServer ts;
    std::string id = ts.post("/v1/session", scenario_json(), 200)["session_id"];

    json res = ts.post("/v1/session/" + id + "/step",
                       {{"actions", {{"engine_0", 0}}}}, 422);
    CHECK(res["error"].get<std::string>().find("light_4") != std::string::npos);

    ts.post("/v1/session/" + id + "/step",
            {{"actions", {{"engine_0", 0}, {"light_4", 1}, {"ghost", 0}}}}, 422);
    ts.post("/v1/session/" + id + "/step",
            {{"actions", {{"engine_0", 99}, {"light_4", 0}}}}, 422);
    ts.post("/v1/session/" + id + "/step",
            {{"actions", {{"engine_0", 0.5}, {"light_4", 0}}}}, 422);
    ts.post("/v1/session/" + id + "/step",
            {{"actions", {{"engine_0", 0}, {"light_4", 0}}}, {"extra", 1}}, 422);
    // A well-formed step still works afterwards: no partial mutation.
    json ok = ts.post("/v1/session/" + id + "/step",
                      {{"actions", {{"engine_0", kEngineWait}, {"light_4", 0}}}}, 200);
    CHECK(ok["done"] == false);
    CHECK(ok["reward"].is_number());
}

TEST_CASE("protocol equivalence with the in-process environment") {
    TestServer ts;
    json scenario = scenario_json(11);
    std::string id = ts.post("/v1/session", scenario, 200)["session_id"];

    Env local(ScenarioConfig::from_json(scenario));
    json remote_reset = ts.post("/v1/session/" + id + "/reset", json::object(), 200);
    local.reset();  // server reset #2 == local reset #2? both use seeds[k % 1]
    // Session resets: create consumed seeds[0], this reset consumed seeds[0]
    // again (single-entry list). The local Env is at reset #2 as well.

    auto local_obs = local.observations();
    for (size_t i = 0; i < local.agents().size(); ++i) {
        auto remote = remote_reset["observations"][local.agents()[i].id]
                          .get<std::vector<double>>();
        CHECK(remote == local_obs[i]);
    }
    CHECK(remote_reset["global_state"].get<std::vector<double>>() ==
          local.global_state());

    // 50 scripted steps, element-wise identical streams.
    Rng script(99);
    for (int step = 0; step < 50 && !local.done(); ++step) {
        std::vector<int> actions;
        json wire_actions = json::object();
        for (const AgentSpec& spec : local.agents()) {
            int a = script.uniform_int(spec.action_count);
            actions.push_back(a);
            wire_actions[spec.id] = a;
        }
        json remote =
            ts.post("/v1/session/" + id + "/step", {{"actions", wire_actions}}, 200);
        Env::StepResult lr = local.step(actions);

        CHECK(remote["reward"].get<double>() == lr.reward);
        CHECK(remote["done"].get<bool>() == lr.done);
        auto obs_now = local.observations();
        for (size_t i = 0; i < local.agents().size(); ++i) {
            auto ro = remote["observations"][local.agents()[i].id]
                          .get<std::vector<double>>();
            CHECK(ro == obs_now[i]);
        }
        CHECK(remote["global_state"].get<std::vector<double>>() ==
              local.global_state());

        // State snapshot matches the in-process trace record.
        json snap = ts.get("/v1/session/" + id + "/state", 200);
        CHECK(snap == json::parse(tick_line(local.snapshot())));
    }
}

TEST_CASE("stepping a finished episode yields 409") {
    TestServer ts;
    json scenario = scenario_json();
    scenario["max_steps"] = 1;
    std::string id = ts.post("/v1/session", scenario, 200)["session_id"];
    json done = ts.post("/v1/session/" + id + "/step",
                        {{"actions", {{"engine_0", kEngineWait}, {"light_4", 0}}}}, 200);
    CHECK(done["done"] == true);
    ts.post("/v1/session/" + id + "/step",
            {{"actions", {{"engine_0", kEngineWait}, {"light_4", 0}}}}, 409);
    // Reset revives it.
    ts.post("/v1/session/" + id + "/reset", json::object(), 200);
}

TEST_CASE("interleaved sessions stay independent") {
    TestServer ts;
    std::string a = ts.post("/v1/session", scenario_json(3), 200)["session_id"];
    std::string b = ts.post("/v1/session", scenario_json(3), 200)["session_id"];
    CHECK(a != b);

    json actions = {{"actions", {{"engine_0", kEngineContinue}, {"light_4", 0}}}};
    // Interleave: a, b, a, b — identical configs must produce identical
    // streams regardless of interleaving.
    json ra1 = ts.post("/v1/session/" + a + "/step", actions, 200);
    json rb1 = ts.post("/v1/session/" + b + "/step", actions, 200);
    json ra2 = ts.post("/v1/session/" + a + "/step", actions, 200);
    json rb2 = ts.post("/v1/session/" + b + "/step", actions, 200);
    CHECK(ra1 == rb1);
    CHECK(ra2 == rb2);

    json sa = ts.get("/v1/session/" + a + "/state", 200);
    json sb = ts.get("/v1/session/" + b + "/state", 200);
    CHECK(sa == sb);
    CHECK(sa["tick"] == 2);
}
