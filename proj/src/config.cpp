#include "rescuesim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace rescuesim {

namespace {

using nlohmann::json;

// Tracks consumed keys so unknown fields are rejected with a path.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ValidationError(path_ + ": expected a JSON object");
    }

    ~ObjectReader() = default;

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        if (!j_.contains(key))
            throw ValidationError(path_ + "." + key + ": missing required field");
        used_.insert(key);
        return j_.at(key);
    }

    const json* get_optional(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    template <typename T>
    T field(const std::string& key) {
        return convert<T>(get(key), path_ + "." + key);
    }

    template <typename T>
    T field_or(const std::string& key, T fallback) {
        const json* v = get_optional(key);
        return v ? convert<T>(*v, path_ + "." + key) : fallback;
    }

    void finish() {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ValidationError(path_ + "." + it.key() + ": unknown field");
    }

    const std::string& path() const { return path_; }

    template <typename T>
    static T convert(const json& v, const std::string& path) {
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ValidationError(path + ": wrong type");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

json grid_to_json(const GridSpec& g) {
    return {{"width", g.width}, {"height", g.height}, {"edge_len", g.edge_len}};
}

}  // namespace

nlohmann::json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

std::shared_ptr<const RoadGraph> ScenarioConfig::build_graph() const {
    if (grid) {
        return std::make_shared<RoadGraph>(
            RoadGraph::build_grid(grid->width, grid->height, grid->edge_len));
    }
    return std::make_shared<RoadGraph>(RoadGraph(nodes, edges));
}

void ScenarioConfig::validate(const RoadGraph& graph) const {
    rewards.validate();
    if (max_steps < 0) throw ValidationError("scenario.max_steps: must be >= 0");
    if (sense_range < 0) throw ValidationError("scenario.sense_range: must be >= 0");
    if (min_green < 1) throw ValidationError("scenario.min_green: must be >= 1");
    if (seeds.empty()) throw ValidationError("scenario.seeds: must list at least one seed");
    if (ordinary_vehicles < 0)
        throw ValidationError("scenario.ordinary_vehicles: must be >= 0");
    if (!graph.valid_node(fire_target))
        throw ValidationError("scenario.fire_target: node does not exist");
    if (engine_starts.empty())
        throw ValidationError("scenario.engine_starts: need at least one engine");
    for (size_t i = 0; i < engine_starts.size(); ++i) {
        std::string path = "scenario.engine_starts[" + std::to_string(i) + "]";
        if (!graph.valid_node(engine_starts[i]))
            throw ValidationError(path + ": node does not exist");
        if (engine_starts[i] == fire_target)
            throw ValidationError(path + ": engine start equals fire_target");
    }
    std::set<NodeId> light_seen;
    for (size_t i = 0; i < light_nodes.size(); ++i) {
        std::string path = "scenario.lights.nodes[" + std::to_string(i) + "]";
        if (!graph.valid_node(light_nodes[i]))
            throw ValidationError(path + ": node does not exist");
        if (!light_seen.insert(light_nodes[i]).second)
            throw ValidationError(path + ": duplicate light node");
    }
    for (size_t i = 0; i < noise_placements.size(); ++i) {
        std::string path = "scenario.noise_placements[" + std::to_string(i) + "]";
        const NoisePlacement& p = noise_placements[i];
        auto eid = graph.find_edge(p.from, p.to);
        if (!eid) throw ValidationError(path + ".edge: no such edge");
        if (p.count < 0) throw ValidationError(path + ".count: must be >= 0");
        if (p.count > graph.edge(*eid).length)
            throw ValidationError(path + ".count: exceeds edge capacity of " +
                                  std::to_string(graph.edge(*eid).length));
    }
}

WorldConfig ScenarioConfig::world_config() const {
    WorldConfig w;
    w.fire_target = fire_target;
    w.engine_starts = engine_starts;
    w.light_nodes = light_nodes;
    w.min_green = min_green;
    w.max_steps = max_steps;
    w.sense_range = sense_range;
    return w;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    ScenarioConfig sc;
    ObjectReader r(j, "scenario");

    {
        ObjectReader g(r.get("graph"), "scenario.graph");
        if (g.has("grid")) {
            ObjectReader gr(g.get("grid"), "scenario.graph.grid");
            GridSpec spec;
            spec.width = gr.field<int>("width");
            spec.height = gr.field<int>("height");
            spec.edge_len = gr.field<int>("edge_len");
            gr.finish();
            sc.grid = spec;
        } else {
            const json& nodes = g.get("nodes");
            if (!nodes.is_array())
                throw ValidationError("scenario.graph.nodes: expected an array");
            for (size_t i = 0; i < nodes.size(); ++i) {
                ObjectReader nr(nodes[i], "scenario.graph.nodes[" + std::to_string(i) + "]");
                Node n;
                n.id = nr.field<int>("id");
                n.x = nr.field<int>("x");
                n.y = nr.field<int>("y");
                nr.finish();
                sc.nodes.push_back(n);
            }
            const json& edges = g.get("edges");
            if (!edges.is_array())
                throw ValidationError("scenario.graph.edges: expected an array");
            for (size_t i = 0; i < edges.size(); ++i) {
                ObjectReader er(edges[i], "scenario.graph.edges[" + std::to_string(i) + "]");
                Edge e;
                e.from = er.field<int>("from");
                e.to = er.field<int>("to");
                e.length = er.field<int>("len");
                er.finish();
                sc.edges.push_back(e);
            }
        }
        g.finish();
    }

    sc.fire_target = r.field<int>("fire_target");
    sc.engine_starts = r.field<std::vector<int>>("engine_starts");
    {
        ObjectReader lr(r.get("lights"), "scenario.lights");
        sc.light_nodes = lr.field<std::vector<int>>("nodes");
        sc.min_green = lr.field_or<int>("min_green", 5);
        lr.finish();
    }
    sc.ordinary_vehicles = r.field_or<int>("ordinary_vehicles", 0);
    if (const json* np = r.get_optional("noise_placements")) {
        if (!np->is_array())
            throw ValidationError("scenario.noise_placements: expected an array");
        for (size_t i = 0; i < np->size(); ++i) {
            std::string path = "scenario.noise_placements[" + std::to_string(i) + "]";
            ObjectReader pr((*np)[i], path);
            NoisePlacement p;
            ObjectReader er(pr.get("edge"), path + ".edge");
            p.from = er.field<int>("from");
            p.to = er.field<int>("to");
            er.finish();
            p.count = pr.field<int>("count");
            pr.finish();
            sc.noise_placements.push_back(p);
        }
    }
    if (const json* rw = r.get_optional("rewards")) {
        ObjectReader rr(*rw, "scenario.rewards");
        sc.rewards.goal_bonus = rr.field_or<double>("goal_bonus", 100.0);
        sc.rewards.collision_penalty = rr.field_or<double>("collision_penalty", 50.0);
        sc.rewards.step_penalty = rr.field_or<double>("step_penalty", 0.1);
        sc.rewards.approach_cap = rr.field_or<double>("approach_cap", 3.0);
        sc.rewards.alpha = rr.field_or<double>("alpha", 1.0);
        rr.finish();
    }
    sc.max_steps = r.field<int>("max_steps");
    sc.sense_range = r.field_or<int>("sense_range", 5);
    sc.seeds = r.field<std::vector<uint64_t>>("seeds");
    r.finish();

    auto graph = sc.build_graph();
    sc.validate(*graph);
    return sc;
}

json ScenarioConfig::to_json() const {
    json graph;
    if (grid) {
        graph = {{"grid", grid_to_json(*grid)}};
    } else {
        json ns = json::array(), es = json::array();
        for (const Node& n : nodes) ns.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
        for (const Edge& e : edges)
            es.push_back({{"from", e.from}, {"to", e.to}, {"len", e.length}});
        graph = {{"nodes", std::move(ns)}, {"edges", std::move(es)}};
    }
    json np = json::array();
    for (const NoisePlacement& p : noise_placements)
        np.push_back({{"edge", {{"from", p.from}, {"to", p.to}}}, {"count", p.count}});
    return {{"graph", std::move(graph)},
            {"fire_target", fire_target},
            {"engine_starts", engine_starts},
            {"lights", {{"nodes", light_nodes}, {"min_green", min_green}}},
            {"ordinary_vehicles", ordinary_vehicles},
            {"noise_placements", std::move(np)},
            {"rewards",
             {{"goal_bonus", rewards.goal_bonus},
              {"collision_penalty", rewards.collision_penalty},
              {"step_penalty", rewards.step_penalty},
              {"approach_cap", rewards.approach_cap},
              {"alpha", rewards.alpha}}},
            {"max_steps", max_steps},
            {"sense_range", sense_range},
            {"seeds", seeds}};
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(parse_json_text(ss.str(), "scenario file " + path));
}

void TrainConfig::validate() const {
    if (strategy != "qmix" && strategy != "iql")
        throw ValidationError("train.strategy: must be 'qmix' or 'iql'");
    if (episodes < 0) throw ValidationError("train.episodes: must be >= 0");
    if (updates_per_episode < 0)
        throw ValidationError("train.updates_per_episode: must be >= 0");
    if (gamma < 0 || gamma >= 1)
        throw ValidationError("train.gamma: must be in [0, 1)");
    if (lr <= 0) throw ValidationError("train.lr: must be > 0");
    if (batch_size < 1) throw ValidationError("train.batch_size: must be >= 1");
    if (buffer_capacity < 1) throw ValidationError("train.buffer_capacity: must be >= 1");
    if (warmup_transitions < 0)
        throw ValidationError("train.warmup_transitions: must be >= 0");
    if (target_sync_interval < 1)
        throw ValidationError("train.target_sync_interval: must be >= 1");
    if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1)
        throw ValidationError("train.epsilon: must be in [0, 1]");
    if (anneal_fraction <= 0 || anneal_fraction > 1)
        throw ValidationError("train.anneal_fraction: must be in (0, 1]");
    if (hidden_width < 1) throw ValidationError("train.hidden_width: must be >= 1");
    if (mixer_embed < 1) throw ValidationError("train.mixer_embed: must be >= 1");
    if (grad_clip <= 0) throw ValidationError("train.grad_clip: must be > 0");
}

TrainConfig TrainConfig::from_json(const json& j) {
    TrainConfig tc;
    ObjectReader r(j, "train");
    tc.strategy = r.field<std::string>("strategy");
    tc.episodes = r.field<int>("episodes");
    tc.updates_per_episode = r.field_or<int>("updates_per_episode", tc.updates_per_episode);
    tc.gamma = r.field_or<double>("gamma", tc.gamma);
    tc.lr = r.field_or<double>("lr", tc.lr);
    tc.batch_size = r.field_or<int>("batch_size", tc.batch_size);
    tc.buffer_capacity = r.field_or<int>("buffer_capacity", tc.buffer_capacity);
    tc.warmup_transitions = r.field_or<int>("warmup_transitions", tc.warmup_transitions);
    tc.target_sync_interval =
        r.field_or<int>("target_sync_interval", tc.target_sync_interval);
    tc.epsilon_start = r.field_or<double>("epsilon_start", tc.epsilon_start);
    tc.epsilon_end = r.field_or<double>("epsilon_end", tc.epsilon_end);
    tc.anneal_fraction = r.field_or<double>("anneal_fraction", tc.anneal_fraction);
    tc.hidden_width = r.field_or<int>("hidden_width", tc.hidden_width);
    tc.mixer_embed = r.field_or<int>("mixer_embed", tc.mixer_embed);
    tc.grad_clip = r.field_or<double>("grad_clip", tc.grad_clip);
    tc.double_q = r.field_or<bool>("double_q", tc.double_q);
    tc.seed = r.field_or<uint64_t>("seed", tc.seed);
    r.finish();
    tc.validate();
    return tc;
}

json TrainConfig::to_json() const {
    return {{"strategy", strategy},
            {"episodes", episodes},
            {"updates_per_episode", updates_per_episode},
            {"gamma", gamma},
            {"lr", lr},
            {"batch_size", batch_size},
            {"buffer_capacity", buffer_capacity},
            {"warmup_transitions", warmup_transitions},
            {"target_sync_interval", target_sync_interval},
            {"epsilon_start", epsilon_start},
            {"epsilon_end", epsilon_end},
            {"anneal_fraction", anneal_fraction},
            {"hidden_width", hidden_width},
            {"mixer_embed", mixer_embed},
            {"grad_clip", grad_clip},
            {"double_q", double_q},
            {"seed", seed}};
}

TrainConfig TrainConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open train config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(parse_json_text(ss.str(), "train config file " + path));
}

}  // namespace rescuesim
