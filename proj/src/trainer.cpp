#include "rescuesim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rescuesim {

namespace {

class QmixStrategy : public Strategy {
public:
    QmixStrategy(QmixModel model) : model_(std::move(model)) {}
    std::string name() const override { return "qmix"; }
    std::vector<int> select_actions(const std::vector<std::vector<double>>& obs,
                                    const std::vector<uint8_t>& active, double eps,
                                    Rng& rng) const override {
        return model_.select_actions(obs, active, eps, rng);
    }
    double train_step(const std::vector<const JointTransition*>& batch) override {
        return model_.train_step(batch);
    }
    void sync_targets() override { model_.sync_targets(); }
    nlohmann::json checkpoint() const override { return model_.to_json(); }
    QmixModel model_;
};

class IqlStrategy : public Strategy {
public:
    IqlStrategy(IqlModel model) : model_(std::move(model)) {}
    std::string name() const override { return "iql"; }
    std::vector<int> select_actions(const std::vector<std::vector<double>>& obs,
                                    const std::vector<uint8_t>& active, double eps,
                                    Rng& rng) const override {
        return model_.select_actions(obs, active, eps, rng);
    }
    double train_step(const std::vector<const JointTransition*>& batch) override {
        return model_.train_step(batch);
    }
    void sync_targets() override { model_.sync_targets(); }
    nlohmann::json checkpoint() const override { return model_.to_json(); }
    IqlModel model_;
};

void check_roster(const std::vector<AgentSpec>& a, const std::vector<AgentSpec>& b) {
    if (a.size() != b.size())
        throw ValidationError("checkpoint agent count does not match the scenario");
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].kind != b[i].kind || a[i].obs_dim != b[i].obs_dim ||
            a[i].action_count != b[i].action_count)
            throw ValidationError("checkpoint agent '" + a[i].id +
                                  "' does not match the scenario spec");
    }
}

}  // namespace

std::unique_ptr<Strategy> make_strategy(const TrainConfig& cfg, const Env& env,
                                        Rng& rng) {
    if (cfg.strategy == "qmix") {
        QmixConfig qc;
        qc.gamma = cfg.gamma;
        qc.lr = cfg.lr;
        qc.grad_clip = cfg.grad_clip;
        qc.hidden = cfg.hidden_width;
        qc.embed = cfg.mixer_embed;
        qc.double_q = cfg.double_q;
        return std::make_unique<QmixStrategy>(
            QmixModel(env.agents(), env.state_dim(), qc, rng));
    }
    if (cfg.strategy == "iql") {
        IqlConfig ic;
        ic.gamma = cfg.gamma;
        ic.lr = cfg.lr;
        ic.grad_clip = cfg.grad_clip;
        ic.hidden = cfg.hidden_width;
        ic.double_q = cfg.double_q;
        return std::make_unique<IqlStrategy>(IqlModel(env.agents(), ic, rng));
    }
    throw ValidationError("unknown strategy '" + cfg.strategy + "'");
}

std::unique_ptr<Strategy> load_strategy(const nlohmann::json& checkpoint,
                                        const Env& env) {
    std::string type;
    try {
        type = checkpoint.at("type").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("checkpoint is missing its type field");
    }
    if (type == "qmix") {
        QmixModel model = QmixModel::from_json(checkpoint);
        check_roster(model.specs(), env.agents());
        if (model.state_dim() != env.state_dim())
            throw ValidationError("checkpoint state_dim does not match the scenario");
        return std::make_unique<QmixStrategy>(std::move(model));
    }
    if (type == "iql") {
        IqlModel model = IqlModel::from_json(checkpoint);
        check_roster(model.specs(), env.agents());
        return std::make_unique<IqlStrategy>(std::move(model));
    }
    throw ValidationError("unknown checkpoint type '" + type + "'");
}

EpisodeResult run_episode(Env& env, const Strategy& strategy, double epsilon,
                          Rng& rng, std::ostream* trace_sink,
                          const std::string& strategy_label) {
    env.reset();
    EpisodeResult result;
    result.arrival_ticks.assign(env.engine_count(), -1);

    if (trace_sink) {
        TraceHeader header;
        header.scenario = env.scenario();
        header.seed = env.last_seed();
        header.strategy = strategy_label;
        *trace_sink << header_line(header) << "\n";
    }

    while (!env.done()) {
        auto obs = env.observations();
        auto active = env.active_mask();
        auto state = env.global_state();
        auto actions = strategy.select_actions(obs, active, epsilon, rng);
        Env::StepResult sr = env.step(actions);

        JointTransition t;
        t.obs = std::move(obs);
        t.actions = actions;
        t.reward = sr.reward;
        t.next_obs = env.observations();
        t.state = std::move(state);
        t.next_state = env.global_state();
        t.done = sr.done;
        t.active = std::move(active);
        t.next_active = env.active_mask();
        result.transitions.push_back(std::move(t));

        result.episode_return += sr.reward;
        result.steps += 1;
        result.collision_count += static_cast<int>(sr.events.collisions.size());
        for (int vid : sr.events.arrivals) {
            const auto& engines = env.world().engines();
            for (size_t i = 0; i < engines.size(); ++i)
                if (engines[i] == vid) result.arrival_ticks[i] = env.world().tick();
        }
        if (trace_sink) *trace_sink << tick_line(env.snapshot()) << "\n";
    }
    return result;
}

TrainResult train(const ScenarioConfig& scenario, const TrainConfig& cfg,
                  std::function<void(const EpisodeLog&)> on_episode) {
    cfg.validate();
    Env env(scenario);
    Rng rng(cfg.seed);
    auto strategy = make_strategy(cfg, env, rng);
    ReplayBuffer buffer(cfg.buffer_capacity);

    TrainResult result;
    int train_steps = 0;
    int anneal_span = std::max(1, static_cast<int>(cfg.episodes * cfg.anneal_fraction));
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        double frac = std::min(1.0, static_cast<double>(ep) / anneal_span);
        double epsilon = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;

        EpisodeResult er;
        try {
            er = run_episode(env, *strategy, epsilon, rng);
        } catch (const DivergenceError& e) {
            throw DivergenceError("episode " + std::to_string(ep) + ": " + e.what());
        }
        for (JointTransition& t : er.transitions) buffer.push(std::move(t));

        double loss_sum = 0.0;
        int losses = 0;
        if (buffer.size() >= static_cast<size_t>(cfg.warmup_transitions) &&
            buffer.size() >= static_cast<size_t>(cfg.batch_size)) {
            for (int u = 0; u < cfg.updates_per_episode; ++u) {
                auto batch = buffer.sample(cfg.batch_size, rng);
                try {
                    loss_sum += strategy->train_step(batch);
                } catch (const DivergenceError& e) {
                    throw DivergenceError("episode " + std::to_string(ep) + ": " +
                                          e.what());
                }
                ++losses;
                ++train_steps;
                if (train_steps % cfg.target_sync_interval == 0)
                    strategy->sync_targets();
            }
        }

        EpisodeLog log;
        log.episode = ep;
        log.strategy = cfg.strategy;
        log.episode_return = er.episode_return;
        log.mean_loss = losses > 0 ? loss_sum / losses : 0.0;
        log.epsilon = epsilon;
        if (on_episode) on_episode(log);
        result.log.push_back(std::move(log));
    }
    result.checkpoint = strategy->checkpoint();
    return result;
}

std::string rewards_csv_header() { return "episode,strategy,return,mean_loss,epsilon"; }

std::string rewards_csv_row(const EpisodeLog& log) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%s,%.10g,%.10g,%.10g", log.episode,
                  log.strategy.c_str(), log.episode_return, log.mean_loss, log.epsilon);
    return buf;
}

}  // namespace rescuesim
