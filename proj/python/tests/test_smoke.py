import json

import pytest

import rescuesim


ONE_CELL_SCENARIO = {
    "graph": {
        "nodes": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 0}],
        "edges": [
            {"from": 0, "to": 1, "len": 1},
            {"from": 1, "to": 0, "len": 1},
        ],
    },
    "fire_target": 1,
    "engine_starts": [0],
    "lights": {"nodes": []},
    "max_steps": 10,
    "seeds": [1],
}

GRID_SCENARIO = {
    "graph": {"grid": {"width": 3, "height": 3, "edge_len": 2}},
    "fire_target": 8,
    "engine_starts": [0],
    "lights": {"nodes": [4], "min_green": 3},
    "ordinary_vehicles": 2,
    "max_steps": 40,
    "seeds": [5],
}


def test_grid_and_shortest_path():
    g = rescuesim.RoadGraph.grid(2, 2, 3)
    assert g.node_count == 4
    assert g.edge_count == 8
    nodes, length = rescuesim.shortest_path(g, 0, 3)
    assert nodes == [0, 1, 3]
    assert length == 6


def test_graph_distance():
    g = rescuesim.RoadGraph.grid(3, 1, 3)
    e01 = g.find_edge(0, 1)
    assert g.edge_length(e01) == 3
    assert rescuesim.graph_distance(g, e01, 1, 1) == 2
    assert rescuesim.graph_distance(g, e01, 0, 2) == 6


def test_reward_values():
    assert rescuesim.engine_reward(10, 10) == pytest.approx(-0.1)
    assert rescuesim.engine_reward(5, 0, arrived=True) == pytest.approx(102.9)
    assert rescuesim.engine_reward(4, 4, collided=True) == pytest.approx(-50.1)
    assert rescuesim.engine_reward(6, 4) == pytest.approx(1.9)
    with pytest.raises(ValueError):
        rescuesim.engine_reward(-1, 0)


def test_env_episode_and_determinism():
    env = rescuesim.Env(json.dumps(ONE_CELL_SCENARIO))
    agents = env.agents()
    assert [a["id"] for a in agents] == ["engine_0"]

    obs = env.reset()
    assert obs["engine_0"][0] == 1.0  # alive flag
    result = env.step({"engine_0": 0})  # Continue: one cell to the fire
    assert result["done"]
    assert result["reward"] == pytest.approx(100.9)
    assert result["events"]["arrivals"] == [0]

    # Same seed, same stream.
    a = rescuesim.Env(json.dumps(GRID_SCENARIO))
    b = rescuesim.Env(json.dumps(GRID_SCENARIO))
    a.reset()
    b.reset()
    for _ in range(5):
        actions = {agent["id"]: 1 for agent in a.agents()}
        ra = a.step(actions)
        rb = b.step(actions)
        assert ra["reward"] == rb["reward"]
        assert ra["observations"] == rb["observations"]


def test_env_validates_inputs():
    with pytest.raises(ValueError):
        rescuesim.Env("{not json")
    bad = dict(GRID_SCENARIO)
    bad["fire_target"] = 99
    with pytest.raises(ValueError):
        rescuesim.Env(json.dumps(bad))
    env = rescuesim.Env(json.dumps(GRID_SCENARIO))
    env.reset()
    with pytest.raises(ValueError):
        env.step({"engine_0": 0})  # missing light_4


def test_tiny_training_run():
    train_cfg = {
        "strategy": "iql",
        "episodes": 3,
        "warmup_transitions": 20,
        "updates_per_episode": 1,
        "hidden_width": 8,
        "seed": 2,
    }
    out = rescuesim.train(json.dumps(GRID_SCENARIO), json.dumps(train_cfg))
    assert len(out["log"]) == 3
    assert out["log"][0]["strategy"] == "iql"
    checkpoint = json.loads(out["checkpoint"])
    assert checkpoint["type"] == "iql"
