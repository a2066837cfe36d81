#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "rescuesim/rng.hpp"
#include "rescuesim/roadnet.hpp"

namespace rescuesim {

enum class VehicleKind { Ordinary, Noise, Special };

// Axis headings on the grid plane (y grows "north").
enum class Heading { North, East, South, West };

Heading edge_heading(const RoadGraph& graph, const Edge& e);
Heading turn_left(Heading h);
Heading turn_right(Heading h);

struct VehicleState {
    int id = 0;
    VehicleKind kind = VehicleKind::Ordinary;
    EdgePos pos;
    // Planned node sequence. Fixed at spawn for Ordinary/Noise; grows one
    // node per committed edge for Special vehicles.
    Route route;
    int route_hop = 0;  // current edge = (route[hop], route[hop+1])
    NodeId destination = 0;
    bool active = true;
};

enum class LightPhase { NSGreen, EWGreen };

struct LightState {
    NodeId node = 0;
    LightPhase phase = LightPhase::NSGreen;
    int time_in_phase = 0;
    int min_green = 5;
};

enum class LightAction { Hold, Switch };

struct EngineAction {
    enum class Kind { Continue, Wait, Turn };
    Kind kind = Kind::Wait;
    int turn = 0;  // index into out_edges(node), ordered by target node id

    static EngineAction cont() { return {Kind::Continue, 0}; }
    static EngineAction wait() { return {Kind::Wait, 0}; }
    static EngineAction turn_to(int k) { return {Kind::Turn, k}; }
};

struct StepEvents {
    std::vector<int> arrivals;                      // vehicle ids
    std::vector<std::pair<int, int>> collisions;    // (special id, other id)
    std::vector<int> masked_engine_actions;         // engine vehicle ids
};

struct RaySense {
    int ahead = 0, behind = 0, left = 0, right = 0;  // cells, in [0, R]
    double own_x = 0, own_y = 0;                     // interpolated coords
    NodeId dest_node = 0;
    int dest_x = 0, dest_y = 0;
};

enum class TerminalReason { Running, AllArrived, Horizon };

struct WorldConfig {
    NodeId fire_target = 0;
    std::vector<NodeId> engine_starts;
    std::vector<NodeId> light_nodes;
    int min_green = 5;
    int max_steps = 200;
    int sense_range = 5;
};

// Cell-based world. One step advances every active vehicle by at most one
// cell; lights switch only after their minimum green time. All mutation goes
// through step/spawn (single writer).
class World {
public:
    World(std::shared_ptr<const RoadGraph> graph, const WorldConfig& cfg,
          uint64_t seed);

    // Uniformly sampled start/destination pairs, shortest-path routes.
    void spawn_ordinary(int count);

    // Congestion injection: `count` vehicles on cells 0..count-1 of an edge.
    void spawn_noise(const std::vector<std::pair<EdgeId, int>>& placements);

    StepEvents step(const std::vector<LightAction>& light_actions,
                    const std::vector<EngineAction>& engine_actions);

    RaySense sense(int vehicle_id) const;

    TerminalReason terminal() const;

    int tick() const { return tick_; }
    const RoadGraph& graph() const { return *graph_; }
    const WorldConfig& config() const { return cfg_; }
    const std::vector<VehicleState>& vehicles() const { return vehicles_; }
    const std::vector<LightState>& lights() const { return lights_; }
    // Vehicle ids of the special vehicles, in spawn order.
    const std::vector<int>& engines() const { return engine_ids_; }

    // Cells from an engine to the fire target (cached table).
    int engine_distance(int engine_index) const;

    // Occupant vehicle id at (edge, cell), or -1.
    int occupant(EdgeId edge, int cell) const;

    // Light covering a node, or -1.
    int light_at(NodeId node) const;

private:
    void place(VehicleState v, int cell);
    bool approach_is_green(const Edge& e) const;
    void move_vehicle(int vid, EdgeId to_edge, int to_cell);
    void arrive(int vid, StepEvents& ev);
    void step_routed_vehicle(int vid, StepEvents& ev);
    void step_engine(int vid, const EngineAction& action, StepEvents& ev);

    std::shared_ptr<const RoadGraph> graph_;
    WorldConfig cfg_;
    Rng rng_;
    int tick_ = 0;
    std::vector<VehicleState> vehicles_;
    std::vector<LightState> lights_;
    std::vector<int> engine_ids_;
    std::vector<int> light_of_node_;          // node -> light index or -1
    std::vector<std::vector<int>> occupancy_; // per edge, per cell: id or -1
    std::vector<int> dist_to_target_;         // per node
};

}  // namespace rescuesim
