#pragma once

#include <deque>
#include <string>
#include <vector>

#include "rescuesim/config.hpp"
#include "rescuesim/rewards.hpp"
#include "rescuesim/simcore.hpp"
#include "rescuesim/trace.hpp"

namespace rescuesim {

enum class AgentKind { FireEngine, TrafficLight };

struct AgentSpec {
    std::string id;
    AgentKind kind = AgentKind::FireEngine;
    int obs_dim = 0;
    int action_count = 0;
};

// Engine action indices. 0 = Continue, 1 = Wait, 2+k = take the k-th
// outgoing edge. Lights: 0 = Hold, 1 = Switch.
constexpr int kEngineContinue = 0;
constexpr int kEngineWait = 1;
constexpr int kEngineTurnBase = 2;
constexpr int kLightHold = 0;
constexpr int kLightSwitch = 1;

constexpr int kEngineObsDim = 14;
constexpr int kLightObsDim = 8;

// One tick of joint experience.
struct JointTransition {
    std::vector<std::vector<double>> obs;
    std::vector<int> actions;
    double reward = 0.0;
    std::vector<std::vector<double>> next_obs;
    std::vector<double> state;
    std::vector<double> next_state;
    bool done = false;
    std::vector<uint8_t> active;       // at step start
    std::vector<uint8_t> next_active;  // after the step
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ValidationError("replay capacity must be > 0");
    }

    void push(JointTransition t) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(t));
    }

    size_t size() const { return items_.size(); }

    std::vector<const JointTransition*> sample(size_t batch, Rng& rng) const {
        if (items_.size() < batch)
            throw ValidationError("replay buffer smaller than batch size");
        std::vector<const JointTransition*> out;
        out.reserve(batch);
        for (size_t i = 0; i < batch; ++i)
            out.push_back(&items_[rng.uniform_int(static_cast<int>(items_.size()))]);
        return out;
    }

private:
    size_t capacity_;
    std::deque<JointTransition> items_;
};

// Scenario-bound environment: owns the graph and the current world, encodes
// observations and applies the team reward.
class Env {
public:
    explicit Env(ScenarioConfig scenario);

    const ScenarioConfig& scenario() const { return scenario_; }
    const std::vector<AgentSpec>& agents() const { return agents_; }
    int engine_count() const { return static_cast<int>(scenario_.engine_starts.size()); }
    int light_count() const { return static_cast<int>(scenario_.light_nodes.size()); }
    int state_dim() const;

    // Rebuilds the world with the next seed in the scenario's seed list.
    void reset();
    uint64_t last_seed() const { return last_seed_; }

    std::vector<std::vector<double>> observations() const;
    std::vector<double> global_state() const;
    std::vector<uint8_t> active_mask() const;

    struct StepResult {
        double reward = 0.0;
        bool done = false;
        TerminalReason reason = TerminalReason::Running;
        StepEvents events;
    };
    StepResult step(const std::vector<int>& actions);

    bool done() const;
    const World& world() const { return *world_; }
    World& world() { return *world_; }

    // Trace record for the current tick (events/reward of the last step).
    TraceTick snapshot() const;

private:
    std::vector<double> encode_engine(int engine_index) const;
    std::vector<double> encode_light(int light_index) const;

    ScenarioConfig scenario_;
    std::shared_ptr<const RoadGraph> graph_;
    std::unique_ptr<World> world_;
    std::vector<AgentSpec> agents_;
    std::vector<std::vector<int>> dist_to_light_;  // per light, per node
    double dist_norm_ = 1.0;
    double coord_norm_x_ = 1.0, coord_norm_y_ = 1.0;
    int reset_count_ = 0;
    uint64_t last_seed_ = 0;
    StepEvents last_events_;
    double last_reward_ = 0.0;
};

// Per-agent epsilon-greedy over a row of Q-values; ties go to the lowest
// index.
int argmax_action(const std::vector<double>& q);
int epsilon_greedy(const std::vector<double>& q, double epsilon, Rng& rng);

}  // namespace rescuesim
