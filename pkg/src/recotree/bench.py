"""Benchmark harness: times the recoverable solver across instance sizes
and kernel backends, emitting rows suitable for CSV scaling analysis.

One row is produced per (size, backend, repeat).  Instances are generated
deterministically from the sweep seed, so repeated runs time identical
inputs; objectives are recorded so downstream checks can confirm that the
backends agree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import kernels
from .instances import generate_instance
from .recsolver import solve_recoverable

CSV_HEADER = "n,m,k,L,solver,wall_ns,objective"


@dataclass(frozen=True)
class BenchRow:
    n: int
    m: int
    k: int
    L: int
    solver: str
    wall_ns: int
    objective: int

    def as_csv(self) -> str:
        return (
            f"{self.n},{self.m},{self.k},{self.L},"
            f"{self.solver},{self.wall_ns},{self.objective}"
        )


def _bench_instance(n: int, seed: int):
    m = 3 * n
    k = n // 2
    inst = generate_instance(
        n, m, cost_max=1000, k=k, seed=seed * 1_000_003 + n
    )
    return inst, m, k


def run_benchmark(
    sizes=(20, 40, 80),
    *,
    repeats: int = 3,
    seed: int = 0,
    backends=None,
) -> list[BenchRow]:
    """Time the recoverable solver on generated instances.

    Each size ``n`` uses ``m = 3n`` edges and ``k = n // 2``; every
    requested backend (default: all available) solves the same instance
    ``repeats`` times after one untimed warm-up solve.  The active kernel
    backend is restored before returning.
    """
    if backends is None:
        backends = kernels.available_backends()
    rows: list[BenchRow] = []
    previous = kernels.active_backend()
    try:
        for n in sizes:
            inst, m, k = _bench_instance(int(n), seed)
            L = n - 1 - k
            for backend in backends:
                kernels.set_backend(backend)
                solver = f"solve-rec/{backend}"
                args = (inst.graph, inst.first_cost, inst.second_cost, inst.k)
                warm = solve_recoverable(*args)
                for _ in range(repeats):
                    start = time.perf_counter_ns()
                    result = solve_recoverable(*args)
                    elapsed = time.perf_counter_ns() - start
                    if result.objective != warm.objective:
                        raise AssertionError(
                            "benchmark solve changed its objective between runs"
                        )
                    rows.append(
                        BenchRow(n, m, k, L, solver, elapsed, result.objective)
                    )
    finally:
        kernels.set_backend(previous)
    return rows


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    lines.extend(row.as_csv() for row in rows)
    return "\n".join(lines) + "\n"
