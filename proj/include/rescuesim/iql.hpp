#pragma once

#include <vector>

#include "rescuesim/marl.hpp"
#include "rescuesim/nnet.hpp"

namespace rescuesim {

struct IqlConfig {
    double gamma = 0.99;
    double lr = 5e-4;
    double grad_clip = 10.0;
    int hidden = 64;
    bool double_q = true;
};

// Independent Q-learning baseline: one Q-network per agent, each regressing
// on the shared team reward with its own TD loss. No mixer, no global state.
class IqlModel {
public:
    IqlModel(std::vector<AgentSpec> specs, IqlConfig cfg, Rng& rng);

    int agent_count() const { return static_cast<int>(specs_.size()); }
    const std::vector<AgentSpec>& specs() const { return specs_; }
    const IqlConfig& config() const { return cfg_; }

    std::vector<int> select_actions(const std::vector<std::vector<double>>& obs,
                                    const std::vector<uint8_t>& active,
                                    double epsilon, Rng& rng) const;

    std::vector<double> agent_q(int agent, const std::vector<double>& obs) const;

    // One optimizer step per agent; returns the mean per-agent loss.
    double train_step(const std::vector<const JointTransition*>& batch);

    void sync_targets();

    nlohmann::json to_json() const;
    static IqlModel from_json(const nlohmann::json& j);

    DenseNet& net(int agent) { return nets_[agent]; }
    int no_op_action(int agent) const;

private:
    std::vector<AgentSpec> specs_;
    IqlConfig cfg_;
    std::vector<DenseNet> nets_, targets_;
    std::vector<RmsProp> opts_;
};

}  // namespace rescuesim
