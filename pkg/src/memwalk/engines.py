"""Uniform ``run`` over the three ways of producing density profiles."""

from __future__ import annotations

from memwalk import analytics, dense, evolution
from memwalk.evolution import Q, QTable
from memwalk.lattice import DensityProfile, WalkProgram

ENGINES = ("sparse", "dense", "analytic")


def run(program: WalkProgram, steps: int, engine: str = "sparse", table: QTable = Q) -> list[DensityProfile]:
    if engine == "sparse":
        if table is Q:
            return evolution.run(program, steps)
        state = evolution.SparseState.initial(program)
        return [evolution.position_distribution(s) for s in evolution.evolve(state, steps, table)]
    if engine == "dense":
        return dense.run(program, steps, table)
    if engine == "analytic":
        params = analytics.ClosedFormParams(program.A, program.B, horizon=steps)
        return [analytics.density_profile(t, params) for t in range(steps + 1)]
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
