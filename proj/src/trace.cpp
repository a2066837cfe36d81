#include "rescuesim/trace.hpp"

#include <istream>
#include <map>

namespace rescuesim {

namespace {

using nlohmann::json;

const char* kind_name(VehicleKind k) {
    switch (k) {
        case VehicleKind::Ordinary: return "ordinary";
        case VehicleKind::Noise: return "noise";
        case VehicleKind::Special: return "special";
    }
    return "ordinary";
}

VehicleKind kind_from_name(const std::string& s) {
    if (s == "ordinary") return VehicleKind::Ordinary;
    if (s == "noise") return VehicleKind::Noise;
    if (s == "special") return VehicleKind::Special;
    throw ValidationError("unknown vehicle kind '" + s + "'");
}

json events_to_json(const StepEvents& ev) {
    json collisions = json::array();
    for (auto [a, b] : ev.collisions) collisions.push_back({a, b});
    return {{"arrivals", ev.arrivals},
            {"collisions", std::move(collisions)},
            {"masked", ev.masked_engine_actions}};
}

StepEvents events_from_json(const json& j) {
    StepEvents ev;
    ev.arrivals = j.at("arrivals").get<std::vector<int>>();
    for (const auto& c : j.at("collisions"))
        ev.collisions.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    ev.masked_engine_actions = j.at("masked").get<std::vector<int>>();
    return ev;
}

}  // namespace

TraceTick snapshot_world(const World& world, const StepEvents& events,
                         double reward) {
    TraceTick t;
    t.tick = world.tick();
    for (const VehicleState& v : world.vehicles()) {
        const Edge& e = world.graph().edge(v.pos.edge);
        t.vehicles.push_back(
            {v.id, v.kind, e.from, e.to, v.pos.progress, v.active});
    }
    for (const LightState& l : world.lights())
        t.lights.push_back({l.node, l.phase, l.time_in_phase});
    t.events = events;
    t.reward = reward;
    return t;
}

std::string header_line(const TraceHeader& h) {
    json j{{"type", "header"},
           {"version", h.version},
           {"scenario", h.scenario.to_json()},
           {"seed", h.seed}};
    if (!h.strategy.empty()) j["strategy"] = h.strategy;
    return j.dump();
}

std::string tick_line(const TraceTick& t) {
    json vehicles = json::array();
    for (const VehicleSnapshot& v : t.vehicles)
        vehicles.push_back({{"id", v.id},
                            {"kind", kind_name(v.kind)},
                            {"from", v.from},
                            {"to", v.to},
                            {"progress", v.progress},
                            {"active", v.active}});
    json lights = json::array();
    for (const LightSnapshot& l : t.lights)
        lights.push_back({{"node", l.node},
                          {"phase", l.phase == LightPhase::NSGreen ? "NS" : "EW"},
                          {"time_in_phase", l.time_in_phase}});
    json j{{"type", "tick"},
           {"tick", t.tick},
           {"vehicles", std::move(vehicles)},
           {"lights", std::move(lights)},
           {"events", events_to_json(t.events)},
           {"reward", t.reward}};
    return j.dump();
}

Trace parse_trace(std::istream& in) {
    Trace trace;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("trace line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
        try {
            std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                if (have_header)
                    throw ValidationError("duplicate header");
                trace.header.version = j.at("version").get<int>();
                trace.header.scenario = ScenarioConfig::from_json(j.at("scenario"));
                trace.header.seed = j.at("seed").get<uint64_t>();
                if (j.contains("strategy"))
                    trace.header.strategy = j.at("strategy").get<std::string>();
                have_header = true;
            } else if (type == "tick") {
                if (!have_header)
                    throw ValidationError("tick record before header");
                TraceTick t;
                t.tick = j.at("tick").get<int>();
                for (const auto& vj : j.at("vehicles")) {
                    VehicleSnapshot v;
                    v.id = vj.at("id").get<int>();
                    v.kind = kind_from_name(vj.at("kind").get<std::string>());
                    v.from = vj.at("from").get<int>();
                    v.to = vj.at("to").get<int>();
                    v.progress = vj.at("progress").get<int>();
                    v.active = vj.at("active").get<bool>();
                    t.vehicles.push_back(v);
                }
                for (const auto& lj : j.at("lights")) {
                    LightSnapshot l;
                    l.node = lj.at("node").get<int>();
                    std::string phase = lj.at("phase").get<std::string>();
                    if (phase != "NS" && phase != "EW")
                        throw ValidationError("bad light phase '" + phase + "'");
                    l.phase = phase == "NS" ? LightPhase::NSGreen : LightPhase::EWGreen;
                    l.time_in_phase = lj.at("time_in_phase").get<int>();
                    t.lights.push_back(l);
                }
                t.events = events_from_json(j.at("events"));
                t.reward = j.at("reward").get<double>();
                trace.ticks.push_back(std::move(t));
            } else {
                throw ValidationError("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ValidationError("trace line " + std::to_string(line_no) + ": " +
                                  e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("trace line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    if (!have_header && !trace.ticks.empty())
        throw ValidationError("trace has records but no header");
    return trace;
}

std::vector<ReplayRow> replay_summary(const Trace& trace) {
    std::vector<ReplayRow> rows;
    auto graph = trace.header.scenario.build_graph();
    std::vector<int> dist = distances_to(*graph, trace.header.scenario.fire_target);
    double cumulative = 0.0;
    for (const TraceTick& t : trace.ticks) {
        ReplayRow row;
        row.tick = t.tick;
        cumulative += t.reward;
        row.cumulative_reward = cumulative;
        for (const VehicleSnapshot& v : t.vehicles) {
            if (v.kind != VehicleKind::Special) continue;
            if (!v.active) {
                row.engine_dist.push_back(0);
                continue;
            }
            auto eid = graph->find_edge(v.from, v.to);
            if (!eid)
                throw ValidationError("trace tick " + std::to_string(t.tick) +
                                      ": vehicle on unknown edge " +
                                      std::to_string(v.from) + "->" + std::to_string(v.to));
            row.engine_dist.push_back(
                graph_distance(*graph, EdgePos{*eid, v.progress}, dist));
        }
        for (const LightSnapshot& l : t.lights)
            row.phases.push_back(l.phase == LightPhase::NSGreen ? "NS" : "EW");
        std::string col;
        for (auto [a, b] : t.events.collisions) {
            if (!col.empty()) col += ";";
            col += std::to_string(a) + ":" + std::to_string(b);
        }
        row.collisions = col;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace rescuesim
