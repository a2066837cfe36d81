#include "rescuesim/rewards.hpp"

#include <algorithm>

namespace rescuesim {

void RewardConfig::validate() const {
    if (goal_bonus < 0 || collision_penalty < 0 || step_penalty < 0)
        throw ValidationError("reward magnitudes must be >= 0");
    if (alpha <= 0) throw ValidationError("reward alpha must be > 0");
    if (approach_cap <= 0) throw ValidationError("reward approach_cap must be > 0");
}

double engine_reward(const EngineRewardInput& input, const RewardConfig& cfg) {
    if (input.prev_dist < 0 || input.new_dist < 0)
        throw ValidationError("reward distances must be >= 0");
    if (input.arrived && input.new_dist != 0)
        throw ValidationError("arrived engine must have new_dist == 0");

    double r = -cfg.step_penalty;
    if (input.arrived) r += cfg.goal_bonus;
    if (input.collided) r -= cfg.collision_penalty;
    int delta = input.prev_dist - input.new_dist;
    if (delta > 0) r += std::min(cfg.alpha * delta, cfg.approach_cap);
    return r;
}

double global_reward(const std::vector<EngineRewardInput>& inputs,
                     const RewardConfig& cfg) {
    if (inputs.empty())
        throw ValidationError("global_reward needs at least one engine input");
    double sum = 0.0;
    for (const EngineRewardInput& in : inputs) sum += engine_reward(in, cfg);
    return sum;
}

}  // namespace rescuesim
