#pragma once

#include <vector>

#include "rescuesim/errors.hpp"

namespace rescuesim {

struct RewardConfig {
    double goal_bonus = 100.0;
    double collision_penalty = 50.0;
    double step_penalty = 0.1;
    double approach_cap = 3.0;
    double alpha = 1.0;

    void validate() const;
};

// Per-engine facts collected across one tick.
struct EngineRewardInput {
    int prev_dist = 0;  // cells to target before the step
    int new_dist = 0;   // cells to target after the step
    bool arrived = false;
    bool collided = false;
};

// Single-engine reward: goal bonus on arrival, collision penalty, per-step
// penalty, and a capped approach term that only pays when the engine got
// closer to the target this tick.
double engine_reward(const EngineRewardInput& input, const RewardConfig& cfg);

// Team reward: sum of engine_reward over every engine active at step start.
double global_reward(const std::vector<EngineRewardInput>& inputs,
                     const RewardConfig& cfg);

}  // namespace rescuesim
