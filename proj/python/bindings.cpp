// rescuesim._core - python bindings for the simulator, rewards and training.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rescuesim/marl.hpp"
#include "rescuesim/rewards.hpp"
#include "rescuesim/roadnet.hpp"
#include "rescuesim/trainer.hpp"

namespace py = pybind11;
using namespace rescuesim;

namespace {

RewardConfig reward_config(double goal_bonus, double collision_penalty,
                           double step_penalty, double approach_cap, double alpha) {
    RewardConfig cfg;
    cfg.goal_bonus = goal_bonus;
    cfg.collision_penalty = collision_penalty;
    cfg.step_penalty = step_penalty;
    cfg.approach_cap = approach_cap;
    cfg.alpha = alpha;
    cfg.validate();
    return cfg;
}

py::dict step_result_to_dict(const Env& env, const Env::StepResult& sr) {
    py::dict events;
    events["arrivals"] = sr.events.arrivals;
    events["collisions"] = sr.events.collisions;
    events["masked_actions"] = sr.events.masked_engine_actions;
    py::dict obs;
    auto vectors = env.observations();
    for (size_t i = 0; i < vectors.size(); ++i)
        obs[py::str(env.agents()[i].id)] = vectors[i];
    py::dict out;
    out["reward"] = sr.reward;
    out["done"] = sr.done;
    out["events"] = events;
    out["observations"] = obs;
    out["global_state"] = env.global_state();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "urban emergency-rescue traffic simulator with QMIX/IQL training";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NoRouteError>(m, "NoRouteError", PyExc_RuntimeError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<RoadGraph, std::shared_ptr<RoadGraph>>(m, "RoadGraph")
        .def_static(
            "grid",
            [](int width, int height, int edge_len) {
                return std::make_shared<RoadGraph>(
                    RoadGraph::build_grid(width, height, edge_len));
            },
            py::arg("width"), py::arg("height"), py::arg("edge_len"))
        .def_property_readonly("node_count", &RoadGraph::node_count)
        .def_property_readonly("edge_count", &RoadGraph::edge_count)
        .def("find_edge",
             [](const RoadGraph& g, NodeId a, NodeId b) -> py::object {
                 auto e = g.find_edge(a, b);
                 return e ? py::cast(*e) : py::none();
             })
        .def("edge_length",
             [](const RoadGraph& g, EdgeId e) { return g.edge(e).length; });

    m.def(
        "shortest_path",
        [](const RoadGraph& g, NodeId src, NodeId dst) {
            Route r = shortest_path(g, src, dst);
            return py::make_tuple(r.nodes, r.total_length);
        },
        py::arg("graph"), py::arg("src"), py::arg("dst"),
        "Minimum-length route as (node list, total cells); lexicographic ties.");

    m.def(
        "graph_distance",
        [](const RoadGraph& g, EdgeId edge, int progress, NodeId dst) {
            return graph_distance(g, EdgePos{edge, progress}, dst);
        },
        py::arg("graph"), py::arg("edge"), py::arg("progress"), py::arg("dst"));

    m.def(
        "engine_reward",
        [](int prev_dist, int new_dist, bool arrived, bool collided,
           double goal_bonus, double collision_penalty, double step_penalty,
           double approach_cap, double alpha) {
            return engine_reward({prev_dist, new_dist, arrived, collided},
                                 reward_config(goal_bonus, collision_penalty,
                                               step_penalty, approach_cap, alpha));
        },
        py::arg("prev_dist"), py::arg("new_dist"), py::arg("arrived") = false,
        py::arg("collided") = false, py::arg("goal_bonus") = 100.0,
        py::arg("collision_penalty") = 50.0, py::arg("step_penalty") = 0.1,
        py::arg("approach_cap") = 3.0, py::arg("alpha") = 1.0);

    py::class_<Env>(m, "Env")
        .def(py::init([](const std::string& scenario_json) {
                 return new Env(ScenarioConfig::from_json(
                     parse_json_text(scenario_json, "scenario")));
             }),
             py::arg("scenario_json"))
        .def_static("from_file",
                    [](const std::string& path) {
                        return new Env(ScenarioConfig::load(path));
                    })
        .def("reset",
             [](Env& env) {
                 env.reset();
                 py::dict obs;
                 auto vectors = env.observations();
                 for (size_t i = 0; i < vectors.size(); ++i)
                     obs[py::str(env.agents()[i].id)] = vectors[i];
                 return obs;
             })
        .def("step",
             [](Env& env, const std::map<std::string, int>& actions) {
                 std::vector<int> indices;
                 for (const AgentSpec& spec : env.agents()) {
                     auto it = actions.find(spec.id);
                     if (it == actions.end())
                         throw ValidationError("missing action for agent '" +
                                               spec.id + "'");
                     indices.push_back(it->second);
                 }
                 if (actions.size() != env.agents().size())
                     throw ValidationError("unknown agent in action dict");
                 return step_result_to_dict(env, env.step(indices));
             },
             py::arg("actions"))
        .def("agents",
             [](const Env& env) {
                 py::list out;
                 for (const AgentSpec& a : env.agents()) {
                     py::dict d;
                     d["id"] = a.id;
                     d["kind"] = a.kind == AgentKind::FireEngine ? "fire_engine"
                                                                 : "traffic_light";
                     d["obs_dim"] = a.obs_dim;
                     d["action_count"] = a.action_count;
                     out.append(d);
                 }
                 return out;
             })
        .def("global_state", &Env::global_state)
        .def_property_readonly("done", &Env::done)
        .def_property_readonly("tick", [](const Env& env) { return env.world().tick(); });

    m.def(
        "train",
        [](const std::string& scenario_json, const std::string& train_json) {
            ScenarioConfig sc =
                ScenarioConfig::from_json(parse_json_text(scenario_json, "scenario"));
            TrainConfig tc =
                TrainConfig::from_json(parse_json_text(train_json, "train config"));
            TrainResult result = train(sc, tc);
            py::list log;
            for (const EpisodeLog& e : result.log) {
                py::dict d;
                d["episode"] = e.episode;
                d["strategy"] = e.strategy;
                d["return"] = e.episode_return;
                d["mean_loss"] = e.mean_loss;
                d["epsilon"] = e.epsilon;
                log.append(d);
            }
            py::dict out;
            out["log"] = log;
            out["checkpoint"] = result.checkpoint.dump();
            return out;
        },
        py::arg("scenario_json"), py::arg("train_json"),
        "Run a full training loop; returns the per-episode log and checkpoint.");
}
