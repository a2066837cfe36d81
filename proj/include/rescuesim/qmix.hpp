#pragma once

#include <vector>

#include "rescuesim/marl.hpp"
#include "rescuesim/nnet.hpp"

namespace rescuesim {

struct QmixConfig {
    double gamma = 0.99;
    double lr = 5e-4;
    double grad_clip = 10.0;
    int hidden = 64;
    int embed = 32;
    bool double_q = true;  // online argmax, target evaluation
};

// Centralized-training / decentralized-execution value factorization.
// Per-kind Q-networks (agent-id one-hot appended to the observation) feed a
// state-conditioned mixer whose weights come from Abs-activated
// hypernetworks, making Q_tot monotone in every agent's Q-value.
class QmixModel {
public:
    QmixModel(std::vector<AgentSpec> specs, int state_dim, QmixConfig cfg,
              Rng& rng);

    int agent_count() const { return static_cast<int>(specs_.size()); }
    const std::vector<AgentSpec>& specs() const { return specs_; }
    const QmixConfig& config() const { return cfg_; }
    int state_dim() const { return state_dim_; }

    // Decentralized: each agent sees only its own observation. Inactive
    // agents are pinned to their no-op action.
    std::vector<int> select_actions(const std::vector<std::vector<double>>& obs,
                                    const std::vector<uint8_t>& active,
                                    double epsilon, Rng& rng) const;

    // Online Q-values of one agent.
    std::vector<double> agent_q(int agent, const std::vector<double>& obs) const;

    // Mixer: Q_tot = w2(s) . ELU(W1(s) q + b1(s)) + b2(s).
    double qtot(const std::vector<double>& chosen_q,
                const std::vector<double>& state) const;

    // TD targets for a batch (uses target networks; no gradients).
    std::vector<double> compute_targets(
        const std::vector<const JointTransition*>& batch) const;

    // Mean squared TD error against fixed targets (no gradients); the
    // function backpropagation differentiates.
    double loss_with_targets(const std::vector<const JointTransition*>& batch,
                             const std::vector<double>& targets) const;

    // Backward pass without an optimizer step. `grads` is filled in
    // online_nets() order; returns the loss.
    double compute_gradients(const std::vector<const JointTransition*>& batch,
                             const std::vector<double>& targets,
                             std::vector<Gradients>& grads) const;

    // One optimizer step on the batch; returns the loss.
    double train_step(const std::vector<const JointTransition*>& batch);

    void sync_targets();

    nlohmann::json to_json() const;
    static QmixModel from_json(const nlohmann::json& j);

    // Parameter access for tests and gradient checks.
    DenseNet& engine_net() { return engine_net_; }
    DenseNet& light_net() { return light_net_; }
    DenseNet& hyper_w1() { return hyper_w1_; }
    DenseNet& hyper_b1() { return hyper_b1_; }
    DenseNet& hyper_w2() { return hyper_w2_; }
    DenseNet& hyper_b2() { return hyper_b2_; }
    // Fixed order: engine, light, hyper_w1, hyper_b1, hyper_w2, hyper_b2
    // (kind nets may be empty when the roster has no agents of that kind).
    std::vector<DenseNet*> online_nets();

    int no_op_action(int agent) const;

private:
    struct Kind {
        int count = 0;
        int obs_dim = 0;
        int action_count = 0;
    };

    std::vector<double> agent_input(int agent, const std::vector<double>& obs) const;
    const DenseNet& net_for(int agent, bool target) const;
    double mixer_eval(const DenseNet& w1, const DenseNet& b1, const DenseNet& w2,
                      const DenseNet& b2, const std::vector<double>& q,
                      const std::vector<double>& state) const;

    std::vector<AgentSpec> specs_;
    QmixConfig cfg_;
    int state_dim_ = 0;
    Kind engines_, lights_;
    std::vector<int> kind_index_;  // agent -> index within its kind

    DenseNet engine_net_, light_net_;
    DenseNet hyper_w1_, hyper_b1_, hyper_w2_, hyper_b2_;
    DenseNet t_engine_net_, t_light_net_;
    DenseNet t_hyper_w1_, t_hyper_b1_, t_hyper_w2_, t_hyper_b2_;

    RmsProp opt_engine_, opt_light_, opt_w1_, opt_b1_, opt_w2_, opt_b2_;
};

}  // namespace rescuesim
