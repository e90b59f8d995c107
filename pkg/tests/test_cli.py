"""Command-line interface: output files, determinism, overrides, and the
documented exit codes — all driven in-process through ``cli.main``."""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import pytest

from recotree import (
    Graph,
    RobustInstance,
    Tree,
    instance_digest,
    load_instance,
    minimum_spanning_tree,
    robust_value,
    save_instance,
    serialize_instance,
    solve_incremental,
    solve_recoverable,
)
from recotree import cli
from recotree.cli import (
    EXIT_BAD_INPUT,
    EXIT_DISCONNECTED,
    EXIT_MISMATCH,
    EXIT_NO_CERTIFICATE,
    EXIT_OK,
    main,
)


def _gen(tmp_path: Path, name: str, *extra: str, n: int = 6, m: int = 9,
         seed: int = 4) -> Path:
    path = tmp_path / name
    assert main([
        "gen", "--n", str(n), "--m", str(m), "--seed", str(seed),
        "--out", str(path), *extra,
    ]) == EXIT_OK
    return path


def _read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def test_gen_is_deterministic_and_valid(tmp_path, capsys):
    a = _gen(tmp_path, "a.json")
    b = _gen(tmp_path, "b.json")
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.graph.node_count == 6
    assert inst.graph.edge_count == 9
    assert main(["gen", "--n", "6", "--m", "9", "--seed", "4"]) == EXIT_OK
    assert capsys.readouterr().out == a.read_text(encoding="utf-8")


def test_solve_rec_canonical_bytes_and_content(tmp_path):
    inst_path = _gen(tmp_path, "inst.json")
    inst = load_instance(inst_path)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["solve-rec", "--instance", str(inst_path), "--out", str(out1)]) == EXIT_OK
    assert main(["solve-rec", "--instance", str(inst_path), "--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    text = out1.read_text(encoding="utf-8")
    payload = json.loads(text)
    # Canonical form: sorted keys, two-space indent, trailing newline.
    assert text == json.dumps(payload, indent=2, sort_keys=True) + "\n"
    assert payload["solver"] == "solve-rec"
    assert payload["instance_digest"] == instance_digest(inst)
    x = Tree(inst.graph, payload["first_stage_tree"])
    y = Tree(inst.graph, payload["recovery_tree"])
    assert payload["first_stage_tree"] == x.sorted_ids()
    assert len(x.edge_ids & y.edge_ids) >= inst.overlap_target
    assert payload["objective"] == x.cost(inst.first_cost) + y.cost(inst.second_cost)
    assert payload["objective"] == solve_recoverable(
        inst.graph, inst.first_cost, inst.second_cost, inst.k
    ).objective
    assert "trace" not in payload and "timing" not in payload


def test_solve_rec_trace_and_timing(tmp_path):
    # Opposed costs force at least one augmentation from the initial pair.
    inst_path = tmp_path / "opposed.json"
    inst = RobustInstance(
        graph=Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)]),
        first_cost=[1, 1, 1, 9, 9, 9],
        second_cost=[9, 9, 9, 1, 1, 1],
        deviation=[0] * 6,
        k=0,
        model="interval",
        gamma=0,
    )
    save_instance(inst, inst_path)
    out = tmp_path / "trace.json"
    assert main([
        "solve-rec", "--instance", str(inst_path), "--trace", "--timing",
        "--out", str(out),
    ]) == EXIT_OK
    payload = _read_json(out)
    events = [e["event"] for e in payload["trace"]]
    assert "augment" in events
    assert events[-1] == "done"
    assert payload["timing"]["wall_ns"] > 0
    # k = 0 pins both stages to the same tree.
    assert payload["first_stage_tree"] == payload["recovery_tree"]


def test_solve_inc_default_base_is_first_stage_mst(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", seed=8)
    inst = load_instance(inst_path)
    out = tmp_path / "inc.json"
    assert main(["solve-inc", "--instance", str(inst_path), "--out", str(out)]) == EXIT_OK
    payload = _read_json(out)
    base = minimum_spanning_tree(inst.graph, inst.first_cost)
    assert payload["solver"] == "solve-inc"
    assert payload["first_stage_tree"] == base.sorted_ids()
    best = solve_incremental(inst.graph, inst.second_cost, base, inst.k)
    assert payload["recovery_tree"] == best.tree.sorted_ids()
    assert payload["objective"] == best.cost


def test_solve_inc_explicit_base(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", seed=9)
    inst = load_instance(inst_path)
    base = minimum_spanning_tree(inst.graph, inst.second_cost)
    ids = ",".join(str(e) for e in base.sorted_ids())
    out = tmp_path / "inc.json"
    assert main([
        "solve-inc", "--instance", str(inst_path), "--base", ids,
        "--out", str(out),
    ]) == EXIT_OK
    payload = _read_json(out)
    assert payload["first_stage_tree"] == base.sorted_ids()
    # The base is already optimal for the second stage, so recovery is free.
    assert payload["objective"] == base.cost(inst.second_cost)


def test_solve_robust_interval_has_no_certificate(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", "--dev-max", "6", seed=10)
    out = tmp_path / "rob.json"
    assert main(["solve-robust", "--instance", str(inst_path), "--out", str(out)]) == EXIT_OK
    payload = _read_json(out)
    assert payload["solver"] == "solve-robust/interval"
    assert "certificate" not in payload
    inst = load_instance(inst_path)
    x = Tree(inst.graph, payload["first_stage_tree"])
    assert payload["objective"] == robust_value(x, inst).value


def test_solve_robust_budget_certificates(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", "--dev-max", "6", seed=11)
    for model, gamma in (("budget-discrete", "2"), ("budget-continuous", "3")):
        out = tmp_path / f"{model}.json"
        assert main([
            "solve-robust", "--instance", str(inst_path), "--model", model,
            "--gamma", gamma, "--out", str(out),
        ]) == EXIT_OK
        payload = _read_json(out)
        assert payload["solver"] == f"solve-robust/{model}"
        cert = payload["certificate"]
        ratio = cert["certified_ratio"]
        assert set(ratio) == {"num", "den"}
        assert int(ratio["num"]) >= int(ratio["den"])  # ratio >= 1
        assert cert["nominal_fraction_source"] in {"global", "recovery-tree"}
        # Digest covers the overridden model and budget.
        inst = load_instance(inst_path)
        assert payload["instance_digest"] == instance_digest(
            replace(inst, model=model, gamma=int(gamma))
        )


def test_solve_robust_without_finite_certificate_exits_4(tmp_path, capsys):
    inst = RobustInstance(
        graph=Graph(3, [(0, 1), (1, 2), (0, 2)]),
        first_cost=[2, 3, 1],
        second_cost=[0, 0, 0],
        deviation=[4, 1, 2],
        k=0,
        model="budget-discrete",
        gamma=1,
    )
    inst_path = tmp_path / "zero.json"
    save_instance(inst, inst_path)
    out = tmp_path / "rob.json"
    code = main(["solve-robust", "--instance", str(inst_path), "--out", str(out)])
    assert code == EXIT_NO_CERTIFICATE
    assert "certificate" in capsys.readouterr().err.lower()
    payload = _read_json(out)  # result is still written
    assert payload["certificate"]["certified_ratio"] is None


def test_evaluate_tree(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", seed=12)
    inst = load_instance(inst_path)
    tree = minimum_spanning_tree(inst.graph, inst.first_cost)
    ids = ",".join(str(e) for e in tree.sorted_ids())
    out = tmp_path / "eval.json"
    assert main([
        "evaluate", "--instance", str(inst_path), "--tree", ids,
        "--out", str(out),
    ]) == EXIT_OK
    payload = _read_json(out)
    assert payload["solver"] == "evaluate"
    assert payload["evaluation"]["exact"] is True
    assert payload["evaluation"]["method"] == "incremental"
    assert payload["evaluation"]["value"] == robust_value(tree, inst).value
    assert "objective_reproduced" not in payload


def test_evaluate_result_roundtrip_and_tamper(tmp_path, capsys):
    inst_path = _gen(tmp_path, "inst.json", seed=13)
    result = tmp_path / "rec.json"
    assert main(["solve-rec", "--instance", str(inst_path), "--out", str(result)]) == EXIT_OK
    out = tmp_path / "eval.json"
    assert main([
        "evaluate", "--instance", str(inst_path), "--result", str(result),
        "--out", str(out),
    ]) == EXIT_OK
    assert _read_json(out)["objective_reproduced"] is True

    tampered = _read_json(result)
    tampered["objective"] += 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(tampered), encoding="utf-8")
    code = main(["evaluate", "--instance", str(inst_path), "--result", str(bad)])
    assert code == EXIT_MISMATCH
    assert "mismatch" in capsys.readouterr().err


def test_evaluate_requires_exactly_one_source(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", seed=14)
    assert main(["evaluate", "--instance", str(inst_path)]) == EXIT_BAD_INPUT
    assert main([
        "evaluate", "--instance", str(inst_path), "--tree", "0,1",
        "--result", str(inst_path),
    ]) == EXIT_BAD_INPUT


def test_evaluate_zero_budget_matches_nominal(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", "--dev-max", "5", seed=15)
    inst = load_instance(inst_path)
    tree = minimum_spanning_tree(inst.graph, inst.first_cost)
    ids = ",".join(str(e) for e in tree.sorted_ids())
    out = tmp_path / "eval.json"
    assert main([
        "evaluate", "--instance", str(inst_path), "--model", "budget-continuous",
        "--gamma", "0", "--tree", ids, "--out", str(out),
    ]) == EXIT_OK
    nominal = tree.cost(inst.first_cost) + solve_incremental(
        inst.graph, inst.second_cost, tree, inst.k
    ).cost
    assert _read_json(out)["evaluation"]["value"] == nominal


def test_oracle_reports_matches(tmp_path, capsys):
    assert main([
        "oracle", "--count", "3", "--seed", "11", "--n", "5", "--m", "7",
    ]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert all(line.endswith(" MATCH") for line in lines)
    assert lines[0].startswith("seed=11 ")

    inst_path = _gen(tmp_path, "inst.json", seed=16)
    assert main(["oracle", "--instance", str(inst_path)]) == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line.endswith(" MATCH") and str(inst_path) in line


def test_oracle_reports_mismatch(tmp_path, capsys, monkeypatch):
    inst_path = _gen(tmp_path, "inst.json", seed=17)

    class _Lying:
        def __init__(self, real):
            self.objective = real.objective + 1

    real = cli.solve_recoverable

    def lying(*args, **kwargs):
        return _Lying(real(*args, **kwargs))

    monkeypatch.setattr(cli, "solve_recoverable", lying)
    assert main(["oracle", "--instance", str(inst_path)]) == EXIT_MISMATCH
    out = capsys.readouterr().out
    assert "MISMATCH" in out and "brute force" in out


def test_bench_writes_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert main([
        "bench", "--sizes", "8,12", "--repeats", "1", "--backends", "pure",
        "--out", str(out),
    ]) == EXIT_OK
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "n,m,k,L,solver,wall_ns,objective"
    assert len(lines) == 3  # header + one row per size
    for line, n in zip(lines[1:], (8, 12)):
        cols = line.split(",")
        assert cols[0] == str(n)
        assert cols[1] == str(3 * n)
        assert cols[4] == "solve-rec/pure"
        assert int(cols[5]) > 0


def test_exit_codes_for_bad_inputs(tmp_path, capsys):
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json", encoding="utf-8")
    assert main(["solve-rec", "--instance", str(garbled)]) == EXIT_BAD_INPUT

    unknown = tmp_path / "unknown.json"
    inst = load_instance(_gen(tmp_path, "ok.json", seed=18))
    blob = json.loads(serialize_instance(inst))
    blob["flavour"] = "sour"
    unknown.write_text(json.dumps(blob), encoding="utf-8")
    assert main(["solve-rec", "--instance", str(unknown)]) == EXIT_BAD_INPUT

    missing = tmp_path / "missing.json"
    assert main(["solve-rec", "--instance", str(missing)]) == EXIT_BAD_INPUT
    capsys.readouterr()  # drop accumulated stderr


def test_exit_code_disconnected(tmp_path, capsys):
    inst = RobustInstance(
        graph=Graph(4, [(0, 1), (0, 1), (2, 3)]),
        first_cost=[1, 2, 3],
        second_cost=[3, 2, 1],
        deviation=[0, 0, 0],
        k=1,
        model="interval",
        gamma=0,
    )
    path = tmp_path / "split.json"
    save_instance(inst, path)
    assert main(["solve-rec", "--instance", str(path)]) == EXIT_DISCONNECTED
    assert "connect" in capsys.readouterr().err.lower()


def test_k_override_changes_solution_and_digest(tmp_path):
    inst_path = _gen(tmp_path, "inst.json", seed=19)
    inst = load_instance(inst_path)
    assert inst.k > 0
    out = tmp_path / "locked.json"
    assert main([
        "solve-rec", "--instance", str(inst_path), "--k", "0", "--out", str(out),
    ]) == EXIT_OK
    payload = _read_json(out)
    assert payload["first_stage_tree"] == payload["recovery_tree"]
    assert payload["instance_digest"] != instance_digest(inst)
