"""Instance model, JSON round-trips and the seeded generator."""

from __future__ import annotations

import json
import random

import pytest

from recotree import (
    InstanceFormatError,
    InvalidParameterError,
    generate_instance,
    instance_digest,
    instance_from_dict,
    parse_instance,
    serialize_instance,
)


def _minimal(n=3, model="interval", gamma=0):
    return {
        "n": n,
        "edges": [
            {"u": 0, "v": 1, "C": 2, "c": 3, "d": 1},
            {"u": 1, "v": 2, "C": 4, "c": 0, "d": 0},
        ],
        "k": 1,
        "model": model,
        "gamma": gamma,
    }


def test_round_trip_preserves_everything():
    rng = random.Random(5)
    for i in range(40):
        n = rng.randint(2, 8)
        m = rng.randint(n - 1, n + 5)
        inst = generate_instance(
            n,
            m,
            cost_max=9,
            model=rng.choice(["interval", "budget-discrete", "budget-continuous"]),
            gamma=rng.randint(0, min(3, m)),
            seed=i,
        )
        again = parse_instance(serialize_instance(inst))
        assert instance_digest(again) == instance_digest(inst)
        assert again.graph.edges == inst.graph.edges
        assert list(again.first_cost) == list(inst.first_cost)
        assert list(again.second_cost) == list(inst.second_cost)
        assert list(again.deviation) == list(inst.deviation)
        assert (again.k, again.model, again.gamma) == (
            inst.k,
            inst.model,
            inst.gamma,
        )


def test_digest_tracks_content():
    a = generate_instance(5, 7, seed=1)
    b = generate_instance(5, 7, seed=1)
    c = generate_instance(5, 7, seed=2)
    assert instance_digest(a) == instance_digest(b)
    assert instance_digest(a) != instance_digest(c)


def test_positioned_parse_errors():
    data = _minimal()
    data["edges"][1]["C"] = -1
    with pytest.raises(InstanceFormatError, match=r"edges\[1\]\.C"):
        instance_from_dict(data)

    data = _minimal()
    data["edges"][0]["v"] = 9
    with pytest.raises(InstanceFormatError, match=r"edges\[0\]"):
        instance_from_dict(data)

    data = _minimal()
    data["edges"][0]["u"] = data["edges"][0]["v"]
    with pytest.raises(InstanceFormatError, match="self-loops"):
        instance_from_dict(data)

    data = _minimal()
    del data["model"]
    with pytest.raises(InstanceFormatError, match="model"):
        instance_from_dict(data)

    data = _minimal()
    data["model"] = "fuzzy"
    with pytest.raises(InstanceFormatError, match="model"):
        instance_from_dict(data)

    data = _minimal()
    data["extra"] = 1
    with pytest.raises(InstanceFormatError, match="unknown field"):
        instance_from_dict(data)

    data = _minimal()
    data["k"] = 5
    with pytest.raises(InstanceFormatError, match="k"):
        instance_from_dict(data)

    data = _minimal()
    data["edges"][0]["C"] = 1.5
    with pytest.raises(InstanceFormatError, match=r"edges\[0\]\.C"):
        instance_from_dict(data)

    with pytest.raises(InstanceFormatError, match="JSON"):
        parse_instance("{not json")


def test_gamma_rules():
    data = _minimal(model="budget-discrete", gamma=3)
    with pytest.raises(InstanceFormatError, match="gamma"):
        instance_from_dict(data)  # gamma exceeds edge count for discrete
    data = _minimal(model="budget-continuous", gamma=100)
    inst = instance_from_dict(data)  # continuous budget is unrestricted
    assert inst.gamma == 100
    data = _minimal()
    del data["gamma"]
    assert instance_from_dict(data).gamma == 0


def test_generator_shape_and_determinism():
    a = generate_instance(7, 12, cost_max=6, seed=9)
    b = generate_instance(7, 12, cost_max=6, seed=9)
    assert serialize_instance(a) == serialize_instance(b)
    assert a.graph.node_count == 7
    assert a.graph.edge_count == 12
    assert a.graph.is_connected()
    assert int(a.first_cost.max()) <= 6
    assert int(a.second_cost.max()) <= 6
    assert a.k == 3  # (n-1)//2 default
    with pytest.raises(InvalidParameterError):
        generate_instance(5, 2)
    # Generated instances always re-validate cleanly.
    for seed in range(30):
        inst = generate_instance(5, 8, seed=seed)
        parse_instance(serialize_instance(inst))


def test_serialization_is_canonical():
    inst = generate_instance(4, 5, seed=3)
    text = serialize_instance(inst)
    assert text.endswith("\n")
    parsed = json.loads(text)
    assert list(parsed) == sorted(parsed)  # keys sorted
    assert parsed["gamma"] == 0  # always materialised
