#include "rescuesim/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rescuesim {

Heading edge_heading(const RoadGraph& graph, const Edge& e) {
    int dx = graph.node(e.to).x - graph.node(e.from).x;
    int dy = graph.node(e.to).y - graph.node(e.from).y;
    if (std::abs(dx) >= std::abs(dy))
        return dx >= 0 ? Heading::East : Heading::West;
    return dy >= 0 ? Heading::North : Heading::South;
}

Heading turn_left(Heading h) {
    switch (h) {
        case Heading::North: return Heading::West;
        case Heading::West: return Heading::South;
        case Heading::South: return Heading::East;
        case Heading::East: return Heading::North;
    }
    return Heading::North;
}

Heading turn_right(Heading h) {
    return turn_left(turn_left(turn_left(h)));
}

World::World(std::shared_ptr<const RoadGraph> graph, const WorldConfig& cfg,
             uint64_t seed)
    : graph_(std::move(graph)), cfg_(cfg), rng_(seed) {
    if (!graph_ || graph_->node_count() == 0)
        throw ValidationError("world needs a non-empty graph");
    if (!graph_->valid_node(cfg_.fire_target))
        throw ValidationError("fire_target is not a valid node");
    if (cfg_.max_steps < 0) throw ValidationError("max_steps must be >= 0");
    if (cfg_.sense_range < 0) throw ValidationError("sense_range must be >= 0");
    if (cfg_.min_green < 1) throw ValidationError("min_green must be >= 1");

    occupancy_.resize(graph_->edge_count());
    for (const Edge& e : graph_->edges())
        occupancy_[e.id].assign(e.length, -1);

    light_of_node_.assign(graph_->node_count(), -1);
    for (NodeId n : cfg_.light_nodes) {
        if (!graph_->valid_node(n))
            throw ValidationError("light node " + std::to_string(n) + " does not exist");
        if (light_of_node_[n] != -1)
            throw ValidationError("duplicate light at node " + std::to_string(n));
        light_of_node_[n] = static_cast<int>(lights_.size());
        // time_in_phase starts at min_green so the agent may switch at tick 0.
        lights_.push_back(LightState{n, LightPhase::NSGreen, cfg_.min_green,
                                     cfg_.min_green});
    }

    dist_to_target_ = distances_to(*graph_, cfg_.fire_target);

    for (NodeId start : cfg_.engine_starts) {
        if (!graph_->valid_node(start))
            throw ValidationError("engine start " + std::to_string(start) +
                                  " does not exist");
        if (start == cfg_.fire_target)
            throw ValidationError("engine start equals fire_target");
        // Spawn pointed along a shortest route to the target.
        Route plan = shortest_path(*graph_, start, cfg_.fire_target);
        EdgeId first = *graph_->find_edge(plan.nodes[0], plan.nodes[1]);
        VehicleState v;
        v.id = static_cast<int>(vehicles_.size());
        v.kind = VehicleKind::Special;
        v.pos = EdgePos{first, 0};
        v.route.nodes = {plan.nodes[0], plan.nodes[1]};
        v.route.total_length = graph_->edge(first).length;
        v.route_hop = 0;
        v.destination = cfg_.fire_target;
        engine_ids_.push_back(v.id);
        place(std::move(v), 0);
    }
}

void World::place(VehicleState v, int cell) {
    EdgeId e = v.pos.edge;
    if (occupancy_[e][cell] != -1)
        throw ValidationError("spawn cell " + std::to_string(cell) + " of edge " +
                              std::to_string(e) + " is occupied");
    occupancy_[e][cell] = v.id;
    vehicles_.push_back(std::move(v));
}

void World::spawn_ordinary(int count) {
    if (count < 0) throw ValidationError("spawn count must be >= 0");
    if (count > 0 && graph_->node_count() < 2)
        throw ValidationError("spawning needs a graph with >= 2 nodes");
    for (int i = 0; i < count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            NodeId start = rng_.uniform_int(graph_->node_count());
            NodeId dest = rng_.uniform_int(graph_->node_count());
            if (start == dest) continue;
            Route route;
            try {
                route = shortest_path(*graph_, start, dest);
            } catch (const NoRouteError&) {
                continue;
            }
            EdgeId first = *graph_->find_edge(route.nodes[0], route.nodes[1]);
            if (occupancy_[first][0] != -1) continue;
            VehicleState v;
            v.id = static_cast<int>(vehicles_.size());
            v.kind = VehicleKind::Ordinary;
            v.pos = EdgePos{first, 0};
            v.route = std::move(route);
            v.route_hop = 0;
            v.destination = v.route.nodes.back();
            place(std::move(v), 0);
            placed = true;
        }
        if (!placed)
            throw ValidationError("could not find a free spawn cell for ordinary vehicle " +
                                  std::to_string(i));
    }
}

void World::spawn_noise(const std::vector<std::pair<EdgeId, int>>& placements) {
    for (size_t p = 0; p < placements.size(); ++p) {
        auto [eid, count] = placements[p];
        if (eid < 0 || eid >= graph_->edge_count())
            throw ValidationError("noise placement " + std::to_string(p) +
                                  " references unknown edge");
        if (count < 0)
            throw ValidationError("noise placement count must be >= 0");
        const Edge& e = graph_->edge(eid);
        if (count > e.length)
            throw ValidationError("noise placement " + std::to_string(p) + " puts " +
                                  std::to_string(count) + " vehicles on an edge of " +
                                  std::to_string(e.length) + " cells");
        for (int cell = 0; cell < count; ++cell) {
            // Destination close past the edge head so the queue dissipates.
            const auto& out = graph_->out_edges(e.to);
            int pick = rng_.uniform_int(static_cast<int>(out.size()) + 1);
            NodeId dest = pick == 0 ? e.to : graph_->edge(out[pick - 1]).to;
            VehicleState v;
            v.id = static_cast<int>(vehicles_.size());
            v.kind = VehicleKind::Noise;
            v.pos = EdgePos{eid, cell};
            v.route.nodes = {e.from, e.to};
            v.route.total_length = e.length;
            if (dest != e.to) {
                v.route.nodes.push_back(dest);
                v.route.total_length += graph_->edge(*graph_->find_edge(e.to, dest)).length;
            }
            v.route_hop = 0;
            v.destination = dest;
            place(std::move(v), cell);
        }
    }
}

bool World::approach_is_green(const Edge& e) const {
    int li = light_of_node_[e.to];
    if (li < 0) return true;
    Heading h = edge_heading(*graph_, e);
    bool ns = h == Heading::North || h == Heading::South;
    return ns == (lights_[li].phase == LightPhase::NSGreen);
}

void World::move_vehicle(int vid, EdgeId to_edge, int to_cell) {
    VehicleState& v = vehicles_[vid];
    occupancy_[v.pos.edge][v.pos.progress] = -1;
    occupancy_[to_edge][to_cell] = vid;
    v.pos = EdgePos{to_edge, to_cell};
}

void World::arrive(int vid, StepEvents& ev) {
    VehicleState& v = vehicles_[vid];
    occupancy_[v.pos.edge][v.pos.progress] = -1;
    v.active = false;
    ev.arrivals.push_back(vid);
}

// Ordinary and noise vehicles: follow the fixed route, obey lights, wait
// silently when blocked.
void World::step_routed_vehicle(int vid, StepEvents& ev) {
    VehicleState& v = vehicles_[vid];
    const Edge& e = graph_->edge(v.pos.edge);
    if (v.pos.progress < e.length - 1) {
        if (occupancy_[e.id][v.pos.progress + 1] == -1)
            move_vehicle(vid, e.id, v.pos.progress + 1);
        return;
    }
    // At the stop line: crossing e.to needs a green approach.
    if (!approach_is_green(e)) return;
    bool last_hop = v.route_hop + 2 >= static_cast<int>(v.route.nodes.size());
    if (last_hop) {
        // e.to is the final route node; the vehicle leaves the road there.
        arrive(vid, ev);
        return;
    }
    NodeId next = v.route.nodes[v.route_hop + 2];
    EdgeId ne = *graph_->find_edge(e.to, next);
    if (occupancy_[ne][0] == -1) {
        move_vehicle(vid, ne, 0);
        v.route_hop += 1;
    }
}

StepEvents World::step(const std::vector<LightAction>& light_actions,
                       const std::vector<EngineAction>& engine_actions) {
    if (light_actions.size() != lights_.size())
        throw ValidationError("expected " + std::to_string(lights_.size()) +
                              " light actions, got " + std::to_string(light_actions.size()));
    if (engine_actions.size() != engine_ids_.size())
        throw ValidationError("expected " + std::to_string(engine_ids_.size()) +
                              " engine actions, got " + std::to_string(engine_actions.size()));

    StepEvents ev;

    // Lights first so vehicles see the new phase this tick. Switch requests
    // below min green are masked to Hold.
    for (size_t i = 0; i < lights_.size(); ++i) {
        LightState& l = lights_[i];
        if (light_actions[i] == LightAction::Switch && l.time_in_phase >= l.min_green) {
            l.phase = l.phase == LightPhase::NSGreen ? LightPhase::EWGreen
                                                     : LightPhase::NSGreen;
            l.time_in_phase = 0;
        } else {
            l.time_in_phase += 1;
        }
    }

    // Routed vehicles move before engines so engines can take freshly vacated
    // cells; collisions then mean genuinely blocked cells.
    for (size_t i = 0; i < vehicles_.size(); ++i) {
        if (!vehicles_[i].active || vehicles_[i].kind == VehicleKind::Special)
            continue;
        step_routed_vehicle(static_cast<int>(i), ev);
    }
    for (size_t i = 0; i < engine_ids_.size(); ++i) {
        int vid = engine_ids_[i];
        if (!vehicles_[vid].active) continue;
        step_engine(vid, engine_actions[i], ev);
    }

    tick_ += 1;
    return ev;
}

void World::step_engine(int vid, const EngineAction& action, StepEvents& ev) {
    VehicleState& v = vehicles_[vid];
    if (action.kind == EngineAction::Kind::Wait) return;

    const Edge& e = graph_->edge(v.pos.edge);
    if (v.pos.progress < e.length - 1) {
        // Mid-edge: both Continue and Turn advance one cell.
        int cell = v.pos.progress + 1;
        int other = occupancy_[e.id][cell];
        if (other == -1) {
            move_vehicle(vid, e.id, cell);
        } else {
            ev.collisions.push_back({vid, other});
        }
        return;
    }

    // At the stop line. Engines ignore the light but not occupancy.
    if (e.to == v.destination) {
        arrive(vid, ev);
        return;
    }
    EdgeId next = -1;
    if (action.kind == EngineAction::Kind::Turn) {
        const auto& out = graph_->out_edges(e.to);
        if (action.turn >= 0 && action.turn < static_cast<int>(out.size())) {
            next = out[action.turn];
        }
    } else {  // Continue: straight through the intersection.
        Heading h = edge_heading(*graph_, e);
        for (EdgeId cand : graph_->out_edges(e.to)) {
            if (edge_heading(*graph_, graph_->edge(cand)) == h) {
                next = cand;
                break;
            }
        }
    }
    if (next < 0) {
        // No such maneuver here; masked to Wait.
        ev.masked_engine_actions.push_back(vid);
        return;
    }
    int other = occupancy_[next][0];
    if (other == -1) {
        move_vehicle(vid, next, 0);
        v.route.nodes.push_back(graph_->edge(next).to);
        v.route.total_length += graph_->edge(next).length;
        v.route_hop += 1;
    } else {
        ev.collisions.push_back({vid, other});
    }
}

RaySense World::sense(int vehicle_id) const {
    if (vehicle_id < 0 || vehicle_id >= static_cast<int>(vehicles_.size()))
        throw ValidationError("unknown vehicle id " + std::to_string(vehicle_id));
    const VehicleState& v = vehicles_[vehicle_id];
    if (!v.active) throw ValidationError("cannot sense an inactive vehicle");

    const int R = cfg_.sense_range;
    const Edge& e = graph_->edge(v.pos.edge);
    Heading h = edge_heading(*graph_, e);

    // Straight continuation past the head node, if any.
    EdgeId straight = -1;
    for (EdgeId cand : graph_->out_edges(e.to))
        if (edge_heading(*graph_, graph_->edge(cand)) == h) { straight = cand; break; }
    auto perpendicular = [&](Heading dir) -> EdgeId {
        for (EdgeId cand : graph_->out_edges(e.to))
            if (edge_heading(*graph_, graph_->edge(cand)) == dir) return cand;
        return -1;
    };

    // Walk up to R positions; report the first occupied one. Positions off
    // the road network are treated as empty.
    auto scan = [&](auto cell_at) {
        for (int k = 1; k <= R; ++k) {
            auto pos = cell_at(k);  // pair<EdgeId, int> or {-1, 0}
            if (pos.first < 0) return R;
            if (occupancy_[pos.first][pos.second] != -1) return k;
        }
        return R;
    };

    RaySense out;
    out.ahead = scan([&](int k) -> std::pair<EdgeId, int> {
        int c = v.pos.progress + k;
        if (c <= e.length - 1) return {e.id, c};
        if (straight < 0) return {-1, 0};
        int c2 = c - e.length;
        if (c2 <= graph_->edge(straight).length - 1) return {straight, c2};
        return {-1, 0};
    });
    out.behind = scan([&](int k) -> std::pair<EdgeId, int> {
        int c = v.pos.progress - k;
        if (c >= 0) return {e.id, c};
        return {-1, 0};
    });
    EdgeId left_e = perpendicular(turn_left(h));
    EdgeId right_e = perpendicular(turn_right(h));
    out.left = scan([&](int k) -> std::pair<EdgeId, int> {
        if (left_e < 0 || k - 1 > graph_->edge(left_e).length - 1) return {-1, 0};
        return {left_e, k - 1};
    });
    out.right = scan([&](int k) -> std::pair<EdgeId, int> {
        if (right_e < 0 || k - 1 > graph_->edge(right_e).length - 1) return {-1, 0};
        return {right_e, k - 1};
    });

    const Node& a = graph_->node(e.from);
    const Node& b = graph_->node(e.to);
    double t = e.length > 0 ? static_cast<double>(v.pos.progress) / e.length : 0.0;
    out.own_x = a.x + (b.x - a.x) * t;
    out.own_y = a.y + (b.y - a.y) * t;
    out.dest_node = v.destination;
    out.dest_x = graph_->node(v.destination).x;
    out.dest_y = graph_->node(v.destination).y;
    return out;
}

TerminalReason World::terminal() const {
    bool all_arrived = true;
    for (int vid : engine_ids_)
        if (vehicles_[vid].active) { all_arrived = false; break; }
    if (all_arrived && !engine_ids_.empty()) return TerminalReason::AllArrived;
    if (tick_ >= cfg_.max_steps) return TerminalReason::Horizon;
    return TerminalReason::Running;
}

int World::engine_distance(int engine_index) const {
    if (engine_index < 0 || engine_index >= static_cast<int>(engine_ids_.size()))
        throw ValidationError("unknown engine index " + std::to_string(engine_index));
    const VehicleState& v = vehicles_[engine_ids_[engine_index]];
    if (!v.active) return 0;
    return graph_distance(*graph_, v.pos, dist_to_target_);
}

int World::occupant(EdgeId edge, int cell) const {
    const Edge& e = graph_->edge(edge);
    if (cell < 0 || cell >= e.length)
        throw ValidationError("cell outside edge");
    return occupancy_[edge][cell];
}

int World::light_at(NodeId node) const {
    if (!graph_->valid_node(node)) return -1;
    return light_of_node_[node];
}

}  // namespace rescuesim
