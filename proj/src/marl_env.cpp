#include "rescuesim/marl.hpp"

#include <algorithm>
#include <cmath>

namespace rescuesim {

int argmax_action(const std::vector<double>& q) {
    int best = 0;
    for (size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = static_cast<int>(i);
    return best;
}

int epsilon_greedy(const std::vector<double>& q, double epsilon, Rng& rng) {
    if (epsilon < 0 || epsilon > 1)
        throw ValidationError("epsilon must be in [0, 1]");
    if (rng.uniform_real() < epsilon)
        return rng.uniform_int(static_cast<int>(q.size()));
    return argmax_action(q);
}

Env::Env(ScenarioConfig scenario) : scenario_(std::move(scenario)) {
    graph_ = scenario_.build_graph();
    scenario_.validate(*graph_);

    int turn_slots = graph_->max_out_degree();
    for (int i = 0; i < engine_count(); ++i)
        agents_.push_back({"engine_" + std::to_string(i), AgentKind::FireEngine,
                           kEngineObsDim, kEngineTurnBase + turn_slots});
    for (NodeId n : scenario_.light_nodes)
        agents_.push_back({"light_" + std::to_string(n), AgentKind::TrafficLight,
                           kLightObsDim, 2});

    for (NodeId n : scenario_.light_nodes)
        dist_to_light_.push_back(distances_to(*graph_, n));

    // Distance normalizer: graph diameter plus slack for on-edge positions.
    int diameter = 0;
    for (const Node& n : graph_->nodes()) {
        std::vector<int> d = distances_to(*graph_, n.id);
        for (int v : d) diameter = std::max(diameter, v);
    }
    dist_norm_ = std::max(1, diameter + graph_->max_edge_length());
    for (const Node& n : graph_->nodes()) {
        coord_norm_x_ = std::max(coord_norm_x_, static_cast<double>(n.x));
        coord_norm_y_ = std::max(coord_norm_y_, static_cast<double>(n.y));
    }

    reset();
}

int Env::state_dim() const {
    int total = 1;  // progress-through-episode element
    for (const AgentSpec& a : agents_) total += a.obs_dim;
    return total;
}

void Env::reset() {
    last_seed_ = scenario_.seeds[reset_count_ % scenario_.seeds.size()];
    ++reset_count_;
    world_ = std::make_unique<World>(graph_, scenario_.world_config(), last_seed_);
    // Noise before ordinary: fixed placements cannot dodge occupied cells,
    // uniform spawns can.
    std::vector<std::pair<EdgeId, int>> placements;
    for (const NoisePlacement& p : scenario_.noise_placements)
        placements.push_back({*graph_->find_edge(p.from, p.to), p.count});
    world_->spawn_noise(placements);
    world_->spawn_ordinary(scenario_.ordinary_vehicles);
    last_events_ = StepEvents{};
    last_reward_ = 0.0;
}

std::vector<double> Env::encode_engine(int engine_index) const {
    std::vector<double> obs(kEngineObsDim, 0.0);
    const VehicleState& v = world_->vehicles()[world_->engines()[engine_index]];
    if (!v.active) return obs;  // terminal convention: all zeros

    const Edge& e = graph_->edge(v.pos.edge);
    RaySense s = world_->sense(v.id);
    double R = std::max(1, scenario_.sense_range);
    obs[0] = 1.0;  // alive flag
    obs[1] = s.own_x / coord_norm_x_;
    obs[2] = s.own_y / coord_norm_y_;
    obs[3] = s.dest_x / coord_norm_x_;
    obs[4] = s.dest_y / coord_norm_y_;
    obs[5] = std::min(1.0, world_->engine_distance(engine_index) / dist_norm_);
    obs[6] = s.ahead / R;
    obs[7] = s.behind / R;
    obs[8] = s.left / R;
    obs[9] = s.right / R;
    obs[10 + static_cast<int>(edge_heading(*graph_, e))] = 1.0;
    return obs;
}

std::vector<double> Env::encode_light(int light_index) const {
    std::vector<double> obs(kLightObsDim, 0.0);
    const LightState& l = world_->lights()[light_index];
    obs[l.phase == LightPhase::NSGreen ? 0 : 1] = 1.0;
    obs[2] = std::min(1.0, static_cast<double>(l.time_in_phase) / l.min_green);

    // Queue occupancy per approach direction, normalized by edge capacity.
    double count[4] = {0, 0, 0, 0};
    double cap[4] = {0, 0, 0, 0};
    for (const Edge& e : graph_->edges()) {
        if (e.to != l.node) continue;
        int d = static_cast<int>(edge_heading(*graph_, e));
        cap[d] += e.length;
        for (int c = 0; c < e.length; ++c)
            if (world_->occupant(e.id, c) != -1) count[d] += 1;
    }
    for (int d = 0; d < 4; ++d)
        obs[3 + d] = cap[d] > 0 ? count[d] / cap[d] : 0.0;

    // How close the nearest active engine is to this intersection.
    double nearest = 1.0;
    for (size_t i = 0; i < world_->engines().size(); ++i) {
        const VehicleState& v = world_->vehicles()[world_->engines()[i]];
        if (!v.active) continue;
        try {
            int d = graph_distance(*graph_, v.pos, dist_to_light_[light_index]);
            nearest = std::min(nearest, d / dist_norm_);
        } catch (const NoRouteError&) {
            // Engine cannot reach this light; treat as far away.
        }
    }
    obs[7] = nearest;
    return obs;
}

std::vector<std::vector<double>> Env::observations() const {
    std::vector<std::vector<double>> out;
    out.reserve(agents_.size());
    for (int i = 0; i < engine_count(); ++i) out.push_back(encode_engine(i));
    for (int i = 0; i < light_count(); ++i) out.push_back(encode_light(i));
    return out;
}

std::vector<double> Env::global_state() const {
    std::vector<double> state;
    state.reserve(state_dim());
    for (const auto& obs : observations())
        state.insert(state.end(), obs.begin(), obs.end());
    state.push_back(static_cast<double>(world_->tick()) /
                    std::max(1, scenario_.max_steps));
    return state;
}

std::vector<uint8_t> Env::active_mask() const {
    std::vector<uint8_t> mask;
    for (int i = 0; i < engine_count(); ++i)
        mask.push_back(world_->vehicles()[world_->engines()[i]].active ? 1 : 0);
    for (int i = 0; i < light_count(); ++i) mask.push_back(1);
    return mask;
}

bool Env::done() const { return world_->terminal() != TerminalReason::Running; }

Env::StepResult Env::step(const std::vector<int>& actions) {
    if (done()) throw ValidationError("episode is already done");
    if (actions.size() != agents_.size())
        throw ValidationError("expected " + std::to_string(agents_.size()) +
                              " actions, got " + std::to_string(actions.size()));

    std::vector<EngineAction> engine_actions;
    for (int i = 0; i < engine_count(); ++i) {
        int a = actions[i];
        if (a < 0 || a >= agents_[i].action_count)
            throw ValidationError("action for " + agents_[i].id + " out of range");
        if (a == kEngineContinue) engine_actions.push_back(EngineAction::cont());
        else if (a == kEngineWait) engine_actions.push_back(EngineAction::wait());
        else engine_actions.push_back(EngineAction::turn_to(a - kEngineTurnBase));
    }
    std::vector<LightAction> light_actions;
    for (int i = 0; i < light_count(); ++i) {
        int a = actions[engine_count() + i];
        if (a != kLightHold && a != kLightSwitch)
            throw ValidationError("action for " + agents_[engine_count() + i].id +
                                  " out of range");
        light_actions.push_back(a == kLightSwitch ? LightAction::Switch
                                                  : LightAction::Hold);
    }

    std::vector<int> engines_at_start;
    std::vector<int> prev_dist;
    for (int i = 0; i < engine_count(); ++i) {
        if (world_->vehicles()[world_->engines()[i]].active) {
            engines_at_start.push_back(i);
            prev_dist.push_back(world_->engine_distance(i));
        }
    }

    StepResult res;
    res.events = world_->step(light_actions, engine_actions);

    std::vector<EngineRewardInput> inputs;
    for (size_t k = 0; k < engines_at_start.size(); ++k) {
        int i = engines_at_start[k];
        int vid = world_->engines()[i];
        EngineRewardInput in;
        in.prev_dist = prev_dist[k];
        in.new_dist = world_->engine_distance(i);
        in.arrived = std::find(res.events.arrivals.begin(), res.events.arrivals.end(),
                               vid) != res.events.arrivals.end();
        for (auto [eng, other] : res.events.collisions)
            if (eng == vid) in.collided = true;
        inputs.push_back(in);
    }
    res.reward = global_reward(inputs, scenario_.rewards);
    res.reason = world_->terminal();
    res.done = res.reason != TerminalReason::Running;

    last_events_ = res.events;
    last_reward_ = res.reward;
    return res;
}

TraceTick Env::snapshot() const {
    return snapshot_world(*world_, last_events_, last_reward_);
}

}  // namespace rescuesim
