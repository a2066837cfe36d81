#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "rescuesim/iql.hpp"
#include "rescuesim/marl.hpp"
#include "rescuesim/qmix.hpp"

namespace rescuesim {

// Uniform view over the two strategies.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual std::vector<int> select_actions(const std::vector<std::vector<double>>& obs,
                                            const std::vector<uint8_t>& active,
                                            double epsilon, Rng& rng) const = 0;
    virtual double train_step(const std::vector<const JointTransition*>& batch) = 0;
    virtual void sync_targets() = 0;
    virtual nlohmann::json checkpoint() const = 0;
};

std::unique_ptr<Strategy> make_strategy(const TrainConfig& cfg, const Env& env,
                                        Rng& rng);

// Loads either strategy from a checkpoint and verifies it matches the
// environment's agent roster.
std::unique_ptr<Strategy> load_strategy(const nlohmann::json& checkpoint,
                                        const Env& env);

struct EpisodeResult {
    double episode_return = 0.0;
    int steps = 0;
    std::vector<JointTransition> transitions;
    std::vector<int> arrival_ticks;  // per engine, -1 if never arrived
    int collision_count = 0;
};

// Reset + act/step/record loop until the episode terminates. When
// trace_sink is non-null, writes header + one line per tick.
EpisodeResult run_episode(Env& env, const Strategy& strategy, double epsilon,
                          Rng& rng, std::ostream* trace_sink = nullptr,
                          const std::string& strategy_label = "");

struct EpisodeLog {
    int episode = 0;
    std::string strategy;
    double episode_return = 0.0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
};

struct TrainResult {
    std::vector<EpisodeLog> log;
    nlohmann::json checkpoint;
};

// Full training loop: replay buffer, epsilon annealing, warm-up, periodic
// target sync.
TrainResult train(const ScenarioConfig& scenario, const TrainConfig& cfg,
                  std::function<void(const EpisodeLog&)> on_episode = nullptr);

// rewards-table helpers (header: episode,strategy,return,mean_loss,epsilon)
std::string rewards_csv_header();
std::string rewards_csv_row(const EpisodeLog& log);

}  // namespace rescuesim
