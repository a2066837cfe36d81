#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rescuesim/rewards.hpp"
#include "rescuesim/roadnet.hpp"
#include "rescuesim/simcore.hpp"

#include <json.hpp>

namespace rescuesim {

struct GridSpec {
    int width = 1;
    int height = 1;
    int edge_len = 1;
};

// Noise placement keyed by edge endpoints (edge ids are internal).
struct NoisePlacement {
    NodeId from = 0;
    NodeId to = 0;
    int count = 0;
};

struct ScenarioConfig {
    std::optional<GridSpec> grid;     // either grid ...
    std::vector<Node> nodes;          // ... or explicit lists
    std::vector<Edge> edges;

    NodeId fire_target = 0;
    std::vector<NodeId> engine_starts;
    std::vector<NodeId> light_nodes;
    int min_green = 5;
    int ordinary_vehicles = 0;
    std::vector<NoisePlacement> noise_placements;
    RewardConfig rewards;
    int max_steps = 200;
    int sense_range = 5;
    std::vector<uint64_t> seeds;

    std::shared_ptr<const RoadGraph> build_graph() const;
    // Referential checks against the built graph; reports the field path.
    void validate(const RoadGraph& graph) const;

    WorldConfig world_config() const;

    static ScenarioConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static ScenarioConfig load(const std::string& path);
};

struct TrainConfig {
    std::string strategy = "qmix";  // qmix | iql
    int episodes = 0;
    int updates_per_episode = 8;
    double gamma = 0.99;
    double lr = 5e-4;
    int batch_size = 32;
    int buffer_capacity = 5000;
    int warmup_transitions = 500;
    int target_sync_interval = 200;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double anneal_fraction = 0.8;
    int hidden_width = 64;
    int mixer_embed = 32;
    double grad_clip = 10.0;
    bool double_q = true;
    uint64_t seed = 1;

    void validate() const;
    static TrainConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static TrainConfig load(const std::string& path);
};

// Strict JSON object reader: every key must be consumed exactly once.
nlohmann::json parse_json_text(const std::string& text, const std::string& what);

}  // namespace rescuesim
