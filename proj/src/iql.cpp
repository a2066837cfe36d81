#include "rescuesim/iql.hpp"

#include <cmath>

namespace rescuesim {

IqlModel::IqlModel(std::vector<AgentSpec> specs, IqlConfig cfg, Rng& rng)
    : specs_(std::move(specs)), cfg_(cfg) {
    if (specs_.empty()) throw ValidationError("IQL needs at least one agent");
    for (const AgentSpec& a : specs_) {
        if (a.action_count < 2) throw ValidationError("action_count must be >= 2");
        nets_.push_back(DenseNet::make({a.obs_dim, cfg_.hidden, a.action_count},
                                       {Activation::ReLU, Activation::Identity},
                                       rng));
        opts_.emplace_back(cfg_.lr);
    }
    sync_targets();
}

void IqlModel::sync_targets() { targets_ = nets_; }

int IqlModel::no_op_action(int agent) const {
    return specs_[agent].kind == AgentKind::FireEngine ? kEngineWait : kLightHold;
}

std::vector<double> IqlModel::agent_q(int agent,
                                      const std::vector<double>& obs) const {
    return forward(nets_[agent], obs);
}

std::vector<int> IqlModel::select_actions(
    const std::vector<std::vector<double>>& obs, const std::vector<uint8_t>& active,
    double epsilon, Rng& rng) const {
    if (obs.size() != specs_.size() || active.size() != specs_.size())
        throw ValidationError("select_actions: one observation per agent required");
    std::vector<int> actions(specs_.size());
    for (size_t i = 0; i < specs_.size(); ++i) {
        if (!active[i]) {
            actions[i] = no_op_action(static_cast<int>(i));
            continue;
        }
        actions[i] = epsilon_greedy(agent_q(static_cast<int>(i), obs[i]), epsilon, rng);
    }
    return actions;
}

double IqlModel::train_step(const std::vector<const JointTransition*>& batch) {
    if (batch.empty()) throw ValidationError("train_step needs a non-empty batch");
    double total_loss = 0.0;
    int terms = 0;
    for (int i = 0; i < agent_count(); ++i) {
        Gradients grads = Gradients::zeros_like(nets_[i]);
        double loss = 0.0;
        int used = 0;
        for (const JointTransition* t : batch) {
            if (!t->active[i]) continue;
            // Per-agent termination: an engine that arrived stops
            // bootstrapping even if the episode continues.
            bool agent_done = t->done || !t->next_active[i];
            double boot = 0.0;
            if (!agent_done) {
                auto tq = forward(targets_[i], t->next_obs[i]);
                int a = cfg_.double_q ? argmax_action(forward(nets_[i], t->next_obs[i]))
                                      : argmax_action(tq);
                boot = tq[a];
            }
            double y = t->reward + cfg_.gamma * boot;
            ForwardCache cache = forward_cached(nets_[i], t->obs[i]);
            double err = cache.output[t->actions[i]] - y;
            loss += err * err;
            ++used;
            std::vector<double> up(nets_[i].output_dim(), 0.0);
            up[t->actions[i]] = 2.0 * err;
            backward(nets_[i], cache, up, grads);
        }
        if (used == 0) continue;
        grads.scale(1.0 / used);
        loss /= used;
        if (!std::isfinite(loss)) throw DivergenceError("IQL loss is non-finite");
        double norm = std::sqrt(grads.squared_norm());
        if (norm > cfg_.grad_clip) grads.scale(cfg_.grad_clip / norm);
        opts_[i].step(nets_[i], grads);
        total_loss += loss;
        ++terms;
    }
    return terms > 0 ? total_loss / terms : 0.0;
}

nlohmann::json IqlModel::to_json() const {
    nlohmann::json agents = nlohmann::json::array();
    nlohmann::json nets = nlohmann::json::array();
    for (int i = 0; i < agent_count(); ++i) {
        const AgentSpec& a = specs_[i];
        agents.push_back({{"id", a.id},
                          {"kind", a.kind == AgentKind::FireEngine ? "engine" : "light"},
                          {"obs_dim", a.obs_dim},
                          {"action_count", a.action_count}});
        nets.push_back(net_to_json(nets_[i]));
    }
    return {{"type", "iql"},
            {"agents", std::move(agents)},
            {"gamma", cfg_.gamma},
            {"lr", cfg_.lr},
            {"grad_clip", cfg_.grad_clip},
            {"hidden", cfg_.hidden},
            {"double_q", cfg_.double_q},
            {"nets", std::move(nets)}};
}

IqlModel IqlModel::from_json(const nlohmann::json& j) {
    std::vector<AgentSpec> specs;
    for (const auto& a : j.at("agents")) {
        AgentSpec spec;
        spec.id = a.at("id").get<std::string>();
        spec.kind = a.at("kind").get<std::string>() == "engine"
                        ? AgentKind::FireEngine
                        : AgentKind::TrafficLight;
        spec.obs_dim = a.at("obs_dim").get<int>();
        spec.action_count = a.at("action_count").get<int>();
        specs.push_back(std::move(spec));
    }
    IqlConfig cfg;
    cfg.gamma = j.at("gamma").get<double>();
    cfg.lr = j.at("lr").get<double>();
    cfg.grad_clip = j.at("grad_clip").get<double>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.double_q = j.at("double_q").get<bool>();
    Rng scratch(0);
    IqlModel model(std::move(specs), cfg, scratch);
    const auto& nets = j.at("nets");
    for (int i = 0; i < model.agent_count(); ++i)
        model.nets_[i] = net_from_json(nets.at(i));
    model.sync_targets();
    return model;
}

}  // namespace rescuesim
