"""Urban emergency-rescue traffic simulation with QMIX/IQL training."""

from ._core import (
    DivergenceError,
    Env,
    NoRouteError,
    RoadGraph,
    ValidationError,
    engine_reward,
    graph_distance,
    shortest_path,
    train,
)

__all__ = [
    "DivergenceError",
    "Env",
    "NoRouteError",
    "RoadGraph",
    "ValidationError",
    "engine_reward",
    "graph_distance",
    "shortest_path",
    "train",
]
