"""Problem instances: domain type, JSON file format, random generation.

An instance bundles a multigraph with three integer cost vectors — first
stage ``C``, nominal second stage ``c``, deviations ``d`` — plus the
recovery parameter ``k``, an uncertainty model and, for the budget models,
the adversary budget ``gamma``.  The on-disk format is a small JSON object:

    {
      "n": 4,
      "edges": [{"u": 0, "v": 1, "C": 3, "c": 1, "d": 2}, ...],
      "k": 1,
      "model": "interval" | "budget-discrete" | "budget-continuous",
      "gamma": 2
    }

Edge ids are list positions.  ``gamma`` is optional and defaults to 0.
Validation failures raise :class:`InstanceFormatError` with the JSON path
of the offending value.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

import numpy as np

from .errors import InstanceFormatError, InvalidParameterError
from .graph import Graph, as_cost_array, check_nonnegative

MODEL_INTERVAL = "interval"
MODEL_DISCRETE = "budget-discrete"
MODEL_CONTINUOUS = "budget-continuous"
MODELS = (MODEL_INTERVAL, MODEL_DISCRETE, MODEL_CONTINUOUS)


@dataclass(frozen=True)
class RobustInstance:
    """A validated two-stage instance; arrays are int64 and read-only."""

    graph: Graph
    first_cost: np.ndarray
    second_cost: np.ndarray
    deviation: np.ndarray
    k: int
    model: str
    gamma: int = 0

    def __post_init__(self):
        m = self.graph.edge_count
        object.__setattr__(
            self, "first_cost", as_cost_array(self.first_cost, m, "C")
        )
        object.__setattr__(
            self, "second_cost", as_cost_array(self.second_cost, m, "c")
        )
        object.__setattr__(
            self, "deviation", as_cost_array(self.deviation, m, "d")
        )
        check_nonnegative(self.first_cost, "C")
        check_nonnegative(self.second_cost, "c")
        check_nonnegative(self.deviation, "d")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "gamma", int(self.gamma))
        if self.model not in MODELS:
            raise InvalidParameterError(f"unknown model {self.model!r}")
        if not 0 <= self.k <= self.graph.node_count - 1:
            raise InvalidParameterError(
                f"k must be in [0, {self.graph.node_count - 1}], got {self.k}"
            )
        if self.gamma < 0:
            raise InvalidParameterError("gamma must be non-negative")
        if self.model == MODEL_DISCRETE and self.gamma > m:
            raise InvalidParameterError(
                f"gamma must be at most the edge count {m} for {MODEL_DISCRETE}"
            )

    @property
    def overlap_target(self) -> int:
        return self.graph.node_count - 1 - self.k

    @property
    def deviation_total(self) -> int:
        """Sum of all deviations (the adversary's maximum total increase)."""
        return int(sum(int(v) for v in self.deviation))

    def worst_second_cost(self) -> np.ndarray:
        return self.second_cost + self.deviation


def _expect_int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"{path}: must be an integer")
    if minimum is not None and value < minimum:
        raise InstanceFormatError(f"{path}: must be at least {minimum}")
    return value


def instance_from_dict(data) -> RobustInstance:
    """Validate a parsed JSON object; errors carry the offending path."""
    if not isinstance(data, dict):
        raise InstanceFormatError("top level: must be a JSON object")
    allowed = {"n", "edges", "k", "model", "gamma"}
    for key in data:
        if key not in allowed:
            raise InstanceFormatError(f"{key}: unknown field")
    for key in ("n", "edges", "k", "model"):
        if key not in data:
            raise InstanceFormatError(f"{key}: missing required field")
    n = _expect_int(data["n"], "n", minimum=1)
    edges_raw = data["edges"]
    if not isinstance(edges_raw, list):
        raise InstanceFormatError("edges: must be a list")
    endpoints: list[tuple[int, int]] = []
    first: list[int] = []
    second: list[int] = []
    deviation: list[int] = []
    for i, entry in enumerate(edges_raw):
        path = f"edges[{i}]"
        if not isinstance(entry, dict):
            raise InstanceFormatError(f"{path}: must be an object")
        for key in entry:
            if key not in ("u", "v", "C", "c", "d"):
                raise InstanceFormatError(f"{path}.{key}: unknown field")
        for key in ("u", "v", "C", "c", "d"):
            if key not in entry:
                raise InstanceFormatError(f"{path}.{key}: missing required field")
        u = _expect_int(entry["u"], f"{path}.u", minimum=0)
        v = _expect_int(entry["v"], f"{path}.v", minimum=0)
        if u >= n or v >= n:
            raise InstanceFormatError(f"{path}: endpoint out of range for n={n}")
        if u == v:
            raise InstanceFormatError(f"{path}: self-loops are not allowed")
        endpoints.append((u, v))
        first.append(_expect_int(entry["C"], f"{path}.C", minimum=0))
        second.append(_expect_int(entry["c"], f"{path}.c", minimum=0))
        deviation.append(_expect_int(entry["d"], f"{path}.d", minimum=0))
    k = _expect_int(data["k"], "k", minimum=0)
    if k > n - 1:
        raise InstanceFormatError(f"k: must be at most n-1 = {n - 1}")
    model = data["model"]
    if model not in MODELS:
        raise InstanceFormatError(
            f"model: must be one of {', '.join(MODELS)}"
        )
    gamma = _expect_int(data.get("gamma", 0), "gamma", minimum=0)
    if model == MODEL_DISCRETE and gamma > len(endpoints):
        raise InstanceFormatError(
            f"gamma: must be at most the edge count {len(endpoints)}"
        )
    try:
        graph = Graph(n, endpoints)
        return RobustInstance(
            graph=graph,
            first_cost=first,
            second_cost=second,
            deviation=deviation,
            k=k,
            model=model,
            gamma=gamma,
        )
    except InvalidParameterError as exc:
        raise InstanceFormatError(str(exc)) from exc


def parse_instance(text: str) -> RobustInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc}") from exc
    return instance_from_dict(data)


def load_instance(path) -> RobustInstance:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InstanceFormatError(f"cannot read instance file: {exc}") from exc
    return parse_instance(text)


def instance_to_dict(inst: RobustInstance) -> dict:
    return {
        "n": inst.graph.node_count,
        "edges": [
            {
                "u": u,
                "v": v,
                "C": int(inst.first_cost[i]),
                "c": int(inst.second_cost[i]),
                "d": int(inst.deviation[i]),
            }
            for i, (u, v) in enumerate(inst.graph.edges)
        ],
        "k": inst.k,
        "model": inst.model,
        "gamma": inst.gamma,
    }


def serialize_instance(inst: RobustInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n"


def save_instance(inst: RobustInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(serialize_instance(inst))


def instance_digest(inst: RobustInstance) -> str:
    """Stable SHA-256 of the canonical compact serialization."""
    canonical = json.dumps(
        instance_to_dict(inst), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def generate_instance(
    n: int,
    m: int,
    *,
    cost_max: int = 20,
    deviation_max: int | None = None,
    k: int | None = None,
    model: str = MODEL_INTERVAL,
    gamma: int = 0,
    seed: int = 0,
) -> RobustInstance:
    """Random connected instance, deterministic for a fixed seed.

    A random spanning tree guarantees connectivity; the remaining
    ``m - (n-1)`` edges join uniform random node pairs (parallel edges
    allowed).  Costs are uniform integers in ``[0, cost_max]`` and
    deviations in ``[0, deviation_max]`` (defaulting to ``cost_max``).
    ``k`` defaults to ``(n-1) // 2``.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    if m < n - 1:
        raise InvalidParameterError(f"m must be at least n-1 = {n - 1}")
    if n == 1 and m > 0:
        raise InvalidParameterError("a single-node graph admits no edges")
    rng = random.Random(seed)
    edges = [(rng.randrange(v), v) for v in range(1, n)]
    while len(edges) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v:
            edges.append((min(u, v), max(u, v)))
    rng.shuffle(edges)
    if deviation_max is None:
        deviation_max = cost_max
    if k is None:
        k = (n - 1) // 2
    return RobustInstance(
        graph=Graph(n, edges),
        first_cost=[rng.randint(0, cost_max) for _ in range(m)],
        second_cost=[rng.randint(0, cost_max) for _ in range(m)],
        deviation=[rng.randint(0, deviation_max) for _ in range(m)],
        k=k,
        model=model,
        gamma=gamma,
    )
