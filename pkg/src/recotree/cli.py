"""Command-line interface.

Subcommands: ``solve-rec`` (recoverable pair under nominal costs),
``solve-inc`` (best recovery tree for a fixed base), ``solve-robust``
(model dispatch with certificates), ``evaluate`` (worst-case value of a
given first-stage tree, plus result re-evaluation), ``oracle``
(fast-solver versus brute-force cross-checks), ``gen`` (seeded random
instance files) and ``bench`` (scaling CSV).

Result files are canonical JSON (sorted keys, two-space indent, trailing
newline): solver id, instance digest, trees in ascending edge-id order,
integer objective, and — where applicable — a certificate block with
exact rationals serialized as ``{"num": "...", "den": "..."}``.  Optional
blocks appear only when requested: ``--trace`` (solver event list) and
``--timing`` (wall-clock nanoseconds; omitted by default so identical
inputs yield byte-identical outputs).

Exit codes are a stable contract: 0 success, 1 cross-check mismatch or
internal defect, 2 invalid input or instance file, 3 disconnected graph,
4 no finite approximation certificate, 5 oracle refusal (instance too
large for exact enumeration).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .bench import rows_to_csv, run_benchmark
from .errors import (
    GraphConnectivityError,
    InstanceFormatError,
    InvalidParameterError,
    InvalidTreeError,
    OracleCapExceeded,
    RecotreeError,
)
from .graph import Tree
from .incsolver import solve_incremental
from .instances import (
    MODELS,
    RobustInstance,
    generate_instance,
    instance_digest,
    load_instance,
    serialize_instance,
)
from .mst import minimum_spanning_tree
from .oracle import (
    brute_force_recoverable,
    brute_force_robust,
    brute_force_robust_value,
)
from .recsolver import solve_recoverable
from .robust import (
    ApproxCertificate,
    robust_value,
    solve_robust,
    worst_case_fixed_tree,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_BAD_INPUT = 2
EXIT_DISCONNECTED = 3
EXIT_NO_CERTIFICATE = 4
EXIT_ORACLE_REFUSED = 5


def _rational(value):
    """Exact JSON form: ints stay ints, fractions become num/den strings."""
    if value is None:
        return None
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return {"num": str(value.numerator), "den": str(value.denominator)}
    return int(value)


def _ratio(value: Fraction | None):
    """Certificate ratios are always serialized as num/den strings."""
    if value is None:
        return None
    return {"num": str(value.numerator), "den": str(value.denominator)}


def _parse_id_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise InstanceFormatError(
            f"{what}: expected comma-separated edge ids, got {text!r}"
        ) from exc


def _load_with_overrides(args) -> RobustInstance:
    inst = load_instance(args.instance)
    overrides = {}
    if getattr(args, "k", None) is not None:
        overrides["k"] = args.k
    if getattr(args, "model", None) is not None:
        overrides["model"] = args.model
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = args.gamma
    if overrides:
        try:
            inst = replace(inst, **overrides)
        except InvalidParameterError as exc:
            raise InstanceFormatError(str(exc)) from exc
    return inst


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _result_payload(
    args,
    inst: RobustInstance,
    solver: str,
    x_tree: Tree,
    y_tree: Tree,
    objective,
    *,
    wall_ns: int,
    trace: list | None = None,
    certificate: dict | None = None,
) -> dict:
    payload = {
        "solver": solver,
        "instance_digest": instance_digest(inst),
        "first_stage_tree": x_tree.sorted_ids(),
        "recovery_tree": y_tree.sorted_ids(),
        "objective": _rational(objective),
    }
    if certificate is not None:
        payload["certificate"] = certificate
    if trace is not None:
        payload["trace"] = trace
    if args.timing:
        payload["timing"] = {"wall_ns": int(wall_ns)}
    return payload


def _certificate_block(cert: ApproxCertificate) -> dict:
    return {
        "certified_ratio": _ratio(cert.certified_ratio),
        "ratio_nominal": _ratio(cert.ratio_nominal),
        "ratio_budget": _ratio(cert.ratio_budget),
        "ratio_value": _ratio(cert.ratio_value),
        "nominal_fraction": _ratio(cert.nominal_fraction),
        "nominal_fraction_source": cert.nominal_fraction_source,
        "budget_fraction": _ratio(cert.budget_fraction),
        "value_fraction": _ratio(cert.value_fraction),
    }


def _cmd_solve_rec(args) -> int:
    inst = _load_with_overrides(args)
    inst.graph.require_connected()
    trace: list | None = [] if args.trace else None
    start = time.perf_counter_ns()
    result = solve_recoverable(
        inst.graph, inst.first_cost, inst.second_cost, inst.k, trace=trace
    )
    wall_ns = time.perf_counter_ns() - start
    _emit(
        args,
        _result_payload(
            args,
            inst,
            "solve-rec",
            result.x_tree,
            result.y_tree,
            result.objective,
            wall_ns=wall_ns,
            trace=trace,
        ),
    )
    return EXIT_OK


def _cmd_solve_inc(args) -> int:
    inst = _load_with_overrides(args)
    inst.graph.require_connected()
    if args.base is not None:
        base = Tree(inst.graph, _parse_id_list(args.base, "base"))
    else:
        base = minimum_spanning_tree(inst.graph, inst.first_cost)
    costs = [int(v) for v in inst.second_cost]
    start = time.perf_counter_ns()
    result = solve_incremental(inst.graph, costs, base, inst.k)
    wall_ns = time.perf_counter_ns() - start
    _emit(
        args,
        _result_payload(
            args,
            inst,
            "solve-inc",
            base,
            result.tree,
            result.cost,
            wall_ns=wall_ns,
        ),
    )
    return EXIT_OK


def _cmd_solve_robust(args) -> int:
    inst = _load_with_overrides(args)
    inst.graph.require_connected()
    trace: list | None = [] if args.trace else None
    start = time.perf_counter_ns()
    result = solve_robust(inst, trace=trace)
    wall_ns = time.perf_counter_ns() - start
    solver = f"solve-robust/{inst.model}"
    if isinstance(result, ApproxCertificate):
        payload = _result_payload(
            args,
            inst,
            solver,
            result.x_tree,
            result.y_tree,
            result.objective,
            wall_ns=wall_ns,
            trace=trace,
            certificate=_certificate_block(result),
        )
        _emit(args, payload)
        if result.certified_ratio is None:
            print("no finite approximation certificate exists", file=sys.stderr)
            return EXIT_NO_CERTIFICATE
        return EXIT_OK
    _emit(
        args,
        _result_payload(
            args,
            inst,
            solver,
            result.x_tree,
            result.y_tree,
            result.objective,
            wall_ns=wall_ns,
            trace=trace,
        ),
    )
    return EXIT_OK


def _reevaluate_objective(inst: RobustInstance, result: dict) -> int:
    """Recompute a result file's objective from its trees alone."""
    solver = result.get("solver", "")
    x_tree = Tree(inst.graph, result["first_stage_tree"])
    y_tree = Tree(inst.graph, result["recovery_tree"])
    if solver == "solve-rec":
        return x_tree.cost(inst.first_cost) + y_tree.cost(inst.second_cost)
    if solver == "solve-inc":
        return y_tree.cost(inst.second_cost)
    if solver.startswith("solve-robust"):
        return x_tree.cost(inst.first_cost) + worst_case_fixed_tree(y_tree, inst)
    raise InstanceFormatError(f"result file has unknown solver id {solver!r}")


def _cmd_evaluate(args) -> int:
    inst = _load_with_overrides(args)
    inst.graph.require_connected()
    if (args.tree is None) == (args.result is None):
        raise InstanceFormatError("provide exactly one of --tree or --result")
    reproduced = None
    if args.result is not None:
        try:
            stored = json.loads(Path(args.result).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InstanceFormatError(f"result file: {exc}") from exc
        expected = _reevaluate_objective(inst, stored)
        recorded = stored.get("objective")
        if recorded != expected:
            print(
                f"objective mismatch: file records {recorded}, "
                f"re-evaluation gives {expected}",
                file=sys.stderr,
            )
            return EXIT_MISMATCH
        reproduced = True
        ids = stored["first_stage_tree"]
    else:
        ids = _parse_id_list(args.tree, "tree")
    tree = Tree(inst.graph, ids)
    start = time.perf_counter_ns()
    evaluation = robust_value(tree, inst)
    wall_ns = time.perf_counter_ns() - start
    payload = {
        "solver": "evaluate",
        "instance_digest": instance_digest(inst),
        "first_stage_tree": tree.sorted_ids(),
        "evaluation": {
            "value": _rational(evaluation.value),
            "lower": _rational(evaluation.lower),
            "upper": _rational(evaluation.upper),
            "exact": evaluation.exact,
            "method": evaluation.method,
        },
    }
    if reproduced is not None:
        payload["objective_reproduced"] = reproduced
    if args.timing:
        payload["timing"] = {"wall_ns": int(wall_ns)}
    _emit(args, payload)
    return EXIT_OK


def _oracle_instances(args):
    if args.instance is not None:
        yield str(args.instance), load_instance(args.instance)
        return
    for i in range(args.count):
        seed = args.seed + i
        inst = generate_instance(
            args.n,
            args.m,
            cost_max=args.cost_max,
            deviation_max=args.dev_max,
            k=args.k,
            model=args.model or "interval",
            gamma=args.gamma or 0,
            seed=seed,
        )
        yield f"seed={seed}", inst


def _oracle_check(inst: RobustInstance) -> list[str]:
    """Cross-check the fast solvers against brute force; returns problems."""
    problems: list[str] = []
    rec = solve_recoverable(
        inst.graph, inst.first_cost, inst.second_cost, inst.k
    )
    brute = brute_force_recoverable(
        inst.graph, inst.first_cost, inst.second_cost, inst.k
    )
    if rec.objective != brute.objective:
        problems.append(
            f"recoverable objective {rec.objective} != brute force {brute.objective}"
        )
    result = solve_robust(inst)
    if isinstance(result, ApproxCertificate):
        _, best = brute_force_robust(inst)
        achieved = brute_force_robust_value(result.x_tree, inst)
        if achieved > result.objective:
            problems.append(
                f"pair worst case {result.objective} below exact value {achieved}"
            )
        if result.certified_ratio is not None:
            if achieved > result.certified_ratio * best:
                problems.append(
                    f"certificate violated: F(X)={achieved} exceeds "
                    f"{result.certified_ratio} * optimum {best}"
                )
    else:
        _, best = brute_force_robust(inst)
        if result.objective != best:
            problems.append(
                f"interval objective {result.objective} != brute force {best}"
            )
    return problems


def _cmd_oracle(args) -> int:
    failures = 0
    for label, inst in _oracle_instances(args):
        problems = _oracle_check(inst)
        tag = (
            f"{label} n={inst.graph.node_count} m={inst.graph.edge_count} "
            f"k={inst.k} model={inst.model}"
        )
        if problems:
            failures += 1
            print(f"{tag} MISMATCH: {'; '.join(problems)}")
        else:
            print(f"{tag} MATCH")
    return EXIT_MISMATCH if failures else EXIT_OK


def _cmd_gen(args) -> int:
    inst = generate_instance(
        args.n,
        args.m,
        cost_max=args.cost_max,
        deviation_max=args.dev_max,
        k=args.k,
        model=args.model or "interval",
        gamma=args.gamma or 0,
        seed=args.seed,
    )
    text = serialize_instance(inst)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in _parse_id_list(args.sizes, "sizes")]
    backends = None
    if args.backends:
        backends = [b.strip() for b in args.backends.split(",") if b.strip()]
    rows = run_benchmark(
        sizes, repeats=args.repeats, seed=args.seed, backends=backends
    )
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_instance_flags(sub, *, model_override: bool = True) -> None:
    sub.add_argument("--instance", required=True, help="instance JSON path")
    sub.add_argument("--k", type=int, default=None, help="override instance k")
    if model_override:
        sub.add_argument(
            "--model", choices=MODELS, default=None, help="override instance model"
        )
        sub.add_argument(
            "--gamma", type=int, default=None, help="override instance gamma"
        )


def _add_output_flags(sub) -> None:
    sub.add_argument("--out", default=None, help="write output here (default stdout)")
    sub.add_argument(
        "--timing",
        action="store_true",
        help="include wall-clock timing (breaks byte-level reproducibility)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recotree",
        description="Recoverable and robust spanning-tree solvers.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser(
        "solve-rec",
        help="optimal tree pair under nominal first/second-stage costs",
    )
    _add_instance_flags(sub, model_override=False)
    _add_output_flags(sub)
    sub.add_argument("--trace", action="store_true", help="include solver events")
    sub.set_defaults(func=_cmd_solve_rec)

    sub = subs.add_parser(
        "solve-inc",
        help="best recovery tree for a fixed base tree (nominal second-stage costs)",
    )
    _add_instance_flags(sub, model_override=False)
    _add_output_flags(sub)
    sub.add_argument(
        "--base",
        default=None,
        help="base tree edge ids, comma-separated "
        "(default: minimum spanning tree under first-stage costs)",
    )
    sub.set_defaults(func=_cmd_solve_inc)

    sub = subs.add_parser(
        "solve-robust",
        help="exact interval solve or certified budget-model approximation",
    )
    _add_instance_flags(sub)
    _add_output_flags(sub)
    sub.add_argument("--trace", action="store_true", help="include solver events")
    sub.set_defaults(func=_cmd_solve_robust)

    sub = subs.add_parser(
        "evaluate",
        help="worst-case value of a first-stage tree; re-evaluates result files",
    )
    _add_instance_flags(sub)
    _add_output_flags(sub)
    sub.add_argument("--tree", default=None, help="edge ids, comma-separated")
    sub.add_argument("--result", default=None, help="result JSON to re-evaluate")
    sub.set_defaults(func=_cmd_evaluate)

    sub = subs.add_parser(
        "oracle", help="cross-check fast solvers against brute-force enumeration"
    )
    sub.add_argument("--instance", default=None, help="instance JSON path")
    sub.add_argument("--count", type=int, default=1, help="generated instances")
    sub.add_argument("--seed", type=int, default=0, help="first generator seed")
    sub.add_argument("--n", type=int, default=5, help="generated node count")
    sub.add_argument("--m", type=int, default=7, help="generated edge count")
    sub.add_argument("--cost-max", type=int, default=20)
    sub.add_argument("--dev-max", type=int, default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--model", choices=MODELS, default=None)
    sub.add_argument("--gamma", type=int, default=None)
    sub.set_defaults(func=_cmd_oracle)

    sub = subs.add_parser("gen", help="write a seeded random instance file")
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--cost-max", type=int, default=20)
    sub.add_argument("--dev-max", type=int, default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--model", choices=MODELS, default=None)
    sub.add_argument("--gamma", type=int, default=None)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=_cmd_gen)

    sub = subs.add_parser("bench", help="solver scaling benchmark (CSV)")
    sub.add_argument("--sizes", default="20,40,80", help="comma-separated node counts")
    sub.add_argument("--repeats", type=int, default=3)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument(
        "--backends",
        default=None,
        help="comma-separated kernel backends (default: all available)",
    )
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFormatError, InvalidParameterError, InvalidTreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except GraphConnectivityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except OracleCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_REFUSED
    except RecotreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
