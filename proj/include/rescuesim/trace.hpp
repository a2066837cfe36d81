#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rescuesim/config.hpp"
#include "rescuesim/simcore.hpp"

namespace rescuesim {

// Line-delimited episode trace: a header line followed by one record per
// tick.

struct VehicleSnapshot {
    int id = 0;
    VehicleKind kind = VehicleKind::Ordinary;
    NodeId from = 0;  // current edge endpoints
    NodeId to = 0;
    int progress = 0;
    bool active = true;
};

struct LightSnapshot {
    NodeId node = 0;
    LightPhase phase = LightPhase::NSGreen;
    int time_in_phase = 0;
};

struct TraceTick {
    int tick = 0;
    std::vector<VehicleSnapshot> vehicles;
    std::vector<LightSnapshot> lights;
    StepEvents events;
    double reward = 0.0;
};

struct TraceHeader {
    int version = 1;
    ScenarioConfig scenario;
    uint64_t seed = 0;
    std::string strategy;  // optional label
};

TraceTick snapshot_world(const World& world, const StepEvents& events,
                         double reward);

std::string header_line(const TraceHeader& h);
std::string tick_line(const TraceTick& t);

struct Trace {
    TraceHeader header;
    std::vector<TraceTick> ticks;
};

// Parses a full trace; errors carry 1-based line numbers.
Trace parse_trace(std::istream& in);

// Per-tick summary used by the replay command: engine distances to target,
// light phases, collision flags and the cumulative reward.
struct ReplayRow {
    int tick = 0;
    std::vector<int> engine_dist;       // -1 once arrived? 0 once arrived
    std::vector<std::string> phases;    // "NS" / "EW" per light
    std::string collisions;             // "3:7;..." pairs, empty if none
    double cumulative_reward = 0.0;
};

std::vector<ReplayRow> replay_summary(const Trace& trace);

}  // namespace rescuesim
