#include "rescuesim/qmix.hpp"

#include <algorithm>
#include <cmath>

namespace rescuesim {

QmixModel::QmixModel(std::vector<AgentSpec> specs, int state_dim, QmixConfig cfg,
                     Rng& rng)
    : specs_(std::move(specs)),
      cfg_(cfg),
      state_dim_(state_dim),
      opt_engine_(cfg.lr),
      opt_light_(cfg.lr),
      opt_w1_(cfg.lr),
      opt_b1_(cfg.lr),
      opt_w2_(cfg.lr),
      opt_b2_(cfg.lr) {
    if (specs_.empty()) throw ValidationError("QMIX needs at least one agent");
    if (state_dim_ < 1) throw ValidationError("state_dim must be >= 1");

    for (const AgentSpec& a : specs_) {
        Kind& k = a.kind == AgentKind::FireEngine ? engines_ : lights_;
        if (k.count == 0) {
            k.obs_dim = a.obs_dim;
            k.action_count = a.action_count;
        } else if (k.obs_dim != a.obs_dim || k.action_count != a.action_count) {
            throw ValidationError("agents of one kind must share obs/action dims");
        }
        kind_index_.push_back(k.count);
        k.count += 1;
        if (a.action_count < 2) throw ValidationError("action_count must be >= 2");
    }
    // Engines must precede lights so agent -> network routing stays simple.
    bool seen_light = false;
    for (const AgentSpec& a : specs_) {
        if (a.kind == AgentKind::TrafficLight) seen_light = true;
        else if (seen_light)
            throw ValidationError("agent specs must list engines before lights");
    }

    auto make_q = [&](const Kind& k) {
        return DenseNet::make({k.obs_dim + k.count, cfg_.hidden, k.action_count},
                              {Activation::ReLU, Activation::Identity}, rng);
    };
    if (engines_.count > 0) engine_net_ = make_q(engines_);
    if (lights_.count > 0) light_net_ = make_q(lights_);

    int n = agent_count();
    hyper_w1_ = DenseNet::make({state_dim_, cfg_.embed * n}, {Activation::Abs}, rng);
    hyper_b1_ = DenseNet::make({state_dim_, cfg_.embed}, {Activation::Identity}, rng);
    hyper_w2_ = DenseNet::make({state_dim_, cfg_.embed}, {Activation::Abs}, rng);
    hyper_b2_ = DenseNet::make({state_dim_, cfg_.embed, 1},
                               {Activation::ReLU, Activation::Identity}, rng);
    sync_targets();
}

void QmixModel::sync_targets() {
    t_engine_net_ = engine_net_;
    t_light_net_ = light_net_;
    t_hyper_w1_ = hyper_w1_;
    t_hyper_b1_ = hyper_b1_;
    t_hyper_w2_ = hyper_w2_;
    t_hyper_b2_ = hyper_b2_;
}

std::vector<DenseNet*> QmixModel::online_nets() {
    return {&engine_net_, &light_net_, &hyper_w1_, &hyper_b1_, &hyper_w2_, &hyper_b2_};
}

int QmixModel::no_op_action(int agent) const {
    return specs_[agent].kind == AgentKind::FireEngine ? kEngineWait : kLightHold;
}

std::vector<double> QmixModel::agent_input(int agent,
                                           const std::vector<double>& obs) const {
    const AgentSpec& spec = specs_[agent];
    if (static_cast<int>(obs.size()) != spec.obs_dim)
        throw ValidationError("observation dim mismatch for " + spec.id);
    const Kind& k = spec.kind == AgentKind::FireEngine ? engines_ : lights_;
    std::vector<double> in(obs);
    in.resize(obs.size() + k.count, 0.0);
    in[obs.size() + kind_index_[agent]] = 1.0;
    return in;
}

const DenseNet& QmixModel::net_for(int agent, bool target) const {
    if (specs_[agent].kind == AgentKind::FireEngine)
        return target ? t_engine_net_ : engine_net_;
    return target ? t_light_net_ : light_net_;
}

std::vector<double> QmixModel::agent_q(int agent,
                                       const std::vector<double>& obs) const {
    return forward(net_for(agent, false), agent_input(agent, obs));
}

std::vector<int> QmixModel::select_actions(
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

double QmixModel::mixer_eval(const DenseNet& w1, const DenseNet& b1,
                             const DenseNet& w2, const DenseNet& b2,
                             const std::vector<double>& q,
                             const std::vector<double>& state) const {
    int n = agent_count();
    int embed = cfg_.embed;
    if (static_cast<int>(q.size()) != n)
        throw ValidationError("mixer expects one Q-value per agent");
    if (static_cast<int>(state.size()) != state_dim_)
        throw ValidationError("mixer state dim mismatch");
    std::vector<double> w1v = forward(w1, state);   // embed*n, non-negative
    std::vector<double> b1v = forward(b1, state);   // embed
    std::vector<double> w2v = forward(w2, state);   // embed, non-negative
    std::vector<double> b2v = forward(b2, state);   // 1
    double out = b2v[0];
    for (int e = 0; e < embed; ++e) {
        double z = b1v[e];
        for (int i = 0; i < n; ++i) z += w1v[static_cast<size_t>(e) * n + i] * q[i];
        out += w2v[e] * activate(Activation::ELU, z);
    }
    return out;
}

double QmixModel::qtot(const std::vector<double>& chosen_q,
                       const std::vector<double>& state) const {
    return mixer_eval(hyper_w1_, hyper_b1_, hyper_w2_, hyper_b2_, chosen_q, state);
}

std::vector<double> QmixModel::compute_targets(
    const std::vector<const JointTransition*>& batch) const {
    std::vector<double> targets;
    targets.reserve(batch.size());
    for (const JointTransition* t : batch) {
        double boot = 0.0;
        if (!t->done) {
            std::vector<double> next_q(agent_count());
            for (int i = 0; i < agent_count(); ++i) {
                if (!t->next_active[i]) {
                    // Finished agents contribute their no-op value.
                    auto tq = forward(net_for(i, true), agent_input(i, t->next_obs[i]));
                    next_q[i] = tq[no_op_action(i)];
                    continue;
                }
                std::vector<double> in = agent_input(i, t->next_obs[i]);
                auto tq = forward(net_for(i, true), in);
                int a;
                if (cfg_.double_q) {
                    a = argmax_action(forward(net_for(i, false), in));
                } else {
                    a = argmax_action(tq);
                }
                next_q[i] = tq[a];
            }
            boot = mixer_eval(t_hyper_w1_, t_hyper_b1_, t_hyper_w2_, t_hyper_b2_,
                              next_q, t->next_state);
        }
        targets.push_back(t->reward + cfg_.gamma * boot);
    }
    return targets;
}

double QmixModel::loss_with_targets(const std::vector<const JointTransition*>& batch,
                                    const std::vector<double>& targets) const {
    double loss = 0.0;
    for (size_t s = 0; s < batch.size(); ++s) {
        const JointTransition* t = batch[s];
        std::vector<double> q(agent_count());
        for (int i = 0; i < agent_count(); ++i)
            q[i] = agent_q(i, t->obs[i])[t->actions[i]];
        double err = qtot(q, t->state) - targets[s];
        loss += err * err;
    }
    return loss / batch.size();
}

double QmixModel::compute_gradients(const std::vector<const JointTransition*>& batch,
                                    const std::vector<double>& targets,
                                    std::vector<Gradients>& grads) const {
    if (batch.empty()) throw ValidationError("train_step needs a non-empty batch");
    if (targets.size() != batch.size())
        throw ValidationError("one target per batch item required");
    const int n = agent_count();
    const int embed = cfg_.embed;

    grads.clear();
    grads.push_back(Gradients::zeros_like(engine_net_));
    grads.push_back(Gradients::zeros_like(light_net_));
    grads.push_back(Gradients::zeros_like(hyper_w1_));
    grads.push_back(Gradients::zeros_like(hyper_b1_));
    grads.push_back(Gradients::zeros_like(hyper_w2_));
    grads.push_back(Gradients::zeros_like(hyper_b2_));
    Gradients& g_engine = grads[0];
    Gradients& g_light = grads[1];
    Gradients& g_w1 = grads[2];
    Gradients& g_b1 = grads[3];
    Gradients& g_w2 = grads[4];
    Gradients& g_b2 = grads[5];

    double loss = 0.0;
    for (size_t s = 0; s < batch.size(); ++s) {
        const JointTransition* t = batch[s];

        std::vector<ForwardCache> agent_caches(n);
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) {
            agent_caches[i] = forward_cached(net_for(i, false), agent_input(i, t->obs[i]));
            q[i] = agent_caches[i].output[t->actions[i]];
        }
        ForwardCache c_w1 = forward_cached(hyper_w1_, t->state);
        ForwardCache c_b1 = forward_cached(hyper_b1_, t->state);
        ForwardCache c_w2 = forward_cached(hyper_w2_, t->state);
        ForwardCache c_b2 = forward_cached(hyper_b2_, t->state);

        std::vector<double> z1(embed), h(embed);
        for (int e = 0; e < embed; ++e) {
            double z = c_b1.output[e];
            for (int i = 0; i < n; ++i)
                z += c_w1.output[static_cast<size_t>(e) * n + i] * q[i];
            z1[e] = z;
            h[e] = activate(Activation::ELU, z);
        }
        double out = c_b2.output[0];
        for (int e = 0; e < embed; ++e) out += c_w2.output[e] * h[e];

        double err = out - targets[s];
        loss += err * err;
        double g = 2.0 * err / batch.size();

        // Mixer backward.
        std::vector<double> d_w1(static_cast<size_t>(embed) * n);
        std::vector<double> d_b1(embed);
        std::vector<double> d_w2(embed);
        std::vector<double> d_b2{g};
        std::vector<double> dq(n, 0.0);
        for (int e = 0; e < embed; ++e) {
            d_w2[e] = g * h[e];
            double dz = g * c_w2.output[e] * activate_grad(Activation::ELU, z1[e]);
            d_b1[e] = dz;
            for (int i = 0; i < n; ++i) {
                d_w1[static_cast<size_t>(e) * n + i] = dz * q[i];
                dq[i] += c_w1.output[static_cast<size_t>(e) * n + i] * dz;
            }
        }
        backward(hyper_w1_, c_w1, d_w1, g_w1);
        backward(hyper_b1_, c_b1, d_b1, g_b1);
        backward(hyper_w2_, c_w2, d_w2, g_w2);
        backward(hyper_b2_, c_b2, d_b2, g_b2);

        // Agent networks: gradient lands on the chosen action slot. Finished
        // agents are excluded from the loss.
        for (int i = 0; i < n; ++i) {
            if (!t->active[i]) continue;
            const DenseNet& net = net_for(i, false);
            std::vector<double> up(net.output_dim(), 0.0);
            up[t->actions[i]] = dq[i];
            backward(net, agent_caches[i], up,
                     specs_[i].kind == AgentKind::FireEngine ? g_engine : g_light);
        }
    }
    loss /= batch.size();
    if (!std::isfinite(loss)) throw DivergenceError("QMIX loss is non-finite");
    return loss;
}

double QmixModel::train_step(const std::vector<const JointTransition*>& batch) {
    std::vector<double> targets = compute_targets(batch);
    std::vector<Gradients> grads;
    double loss = compute_gradients(batch, targets, grads);

    // Global gradient-norm clip across all online parameters.
    double sq = 0.0;
    for (const Gradients& g : grads) sq += g.squared_norm();
    double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) {
        double scale = cfg_.grad_clip / norm;
        for (Gradients& g : grads) g.scale(scale);
    }

    if (engines_.count > 0) opt_engine_.step(engine_net_, grads[0]);
    if (lights_.count > 0) opt_light_.step(light_net_, grads[1]);
    opt_w1_.step(hyper_w1_, grads[2]);
    opt_b1_.step(hyper_b1_, grads[3]);
    opt_w2_.step(hyper_w2_, grads[4]);
    opt_b2_.step(hyper_b2_, grads[5]);
    return loss;
}

nlohmann::json QmixModel::to_json() const {
    nlohmann::json agents = nlohmann::json::array();
    for (const AgentSpec& a : specs_)
        agents.push_back({{"id", a.id},
                          {"kind", a.kind == AgentKind::FireEngine ? "engine" : "light"},
                          {"obs_dim", a.obs_dim},
                          {"action_count", a.action_count}});
    nlohmann::json j{{"type", "qmix"},
                     {"state_dim", state_dim_},
                     {"agents", std::move(agents)},
                     {"gamma", cfg_.gamma},
                     {"lr", cfg_.lr},
                     {"grad_clip", cfg_.grad_clip},
                     {"hidden", cfg_.hidden},
                     {"embed", cfg_.embed},
                     {"double_q", cfg_.double_q},
                     {"hyper_w1", net_to_json(hyper_w1_)},
                     {"hyper_b1", net_to_json(hyper_b1_)},
                     {"hyper_w2", net_to_json(hyper_w2_)},
                     {"hyper_b2", net_to_json(hyper_b2_)}};
    if (engines_.count > 0) j["engine_net"] = net_to_json(engine_net_);
    if (lights_.count > 0) j["light_net"] = net_to_json(light_net_);
    return j;
}

QmixModel QmixModel::from_json(const nlohmann::json& j) {
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
    QmixConfig cfg;
    cfg.gamma = j.at("gamma").get<double>();
    cfg.lr = j.at("lr").get<double>();
    cfg.grad_clip = j.at("grad_clip").get<double>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.embed = j.at("embed").get<int>();
    cfg.double_q = j.at("double_q").get<bool>();
    Rng scratch(0);
    QmixModel model(std::move(specs), j.at("state_dim").get<int>(), cfg, scratch);
    if (j.contains("engine_net")) model.engine_net_ = net_from_json(j.at("engine_net"));
    if (j.contains("light_net")) model.light_net_ = net_from_json(j.at("light_net"));
    model.hyper_w1_ = net_from_json(j.at("hyper_w1"));
    model.hyper_b1_ = net_from_json(j.at("hyper_b1"));
    model.hyper_w2_ = net_from_json(j.at("hyper_w2"));
    model.hyper_b2_ = net_from_json(j.at("hyper_b2"));
    model.sync_targets();
    return model;
}

}  // namespace rescuesim
