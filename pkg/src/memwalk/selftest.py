"""Invariant checks behind ``memwalk selftest``.

Each check returns ``(name, ok, detail)``.  Kept small enough to run in a
few seconds.
"""

from __future__ import annotations

import math

import numpy as np

from memwalk import analytics, dense, designer, engines, evolution
from memwalk.lattice import LatticeConfig, WalkProgram, profiles_max_deviation

NORMALIZATION_TOL = 1e-12
AGREEMENT_TOL = 1e-12


def _random_program(rng, lattice: LatticeConfig) -> WalkProgram:
    return WalkProgram.from_b(lattice, rng.uniform(0.0, 1.0, lattice.half))


def check_qtable():
    table = evolution.q_table()
    ok = table.is_permutation and table.inverse().compose(table) == evolution.QTable(tuple(range(8)))
    return "qtable-permutation", ok, f"codes={table.codes}"


def check_normalization(rng):
    worst = 0.0
    for N in (9, 11, 41):
        lat = LatticeConfig(N)
        for engine in ("sparse", "analytic") + (("dense",) if N <= 11 else ()):
            for prof in engines.run(_random_program(rng, lat), lat.half, engine):
                worst = max(worst, abs(math.fsum(prof.probs) - 1.0))
    for z in (0.05, 0.1, 0.2, 0.5):
        s = analytics.ScenarioParams.parabolic(z)
        params = analytics.scenario_params(s, s.horizon)
        for t in range(s.horizon + 1):
            worst = max(worst, abs(math.fsum(analytics.density_profile(t, params).probs) - 1.0))
    return "normalization", worst <= NORMALIZATION_TOL, f"max |sum P - 1| = {worst:.3g}"


def check_light_cone(rng):
    worst_sparse = worst_dense = 0.0
    lat = LatticeConfig(11)
    program = _random_program(rng, lat)
    for prof in engines.run(program, lat.half, "sparse"):
        worst_sparse = max(worst_sparse, prof.light_cone_violation())
    for prof in engines.run(program, lat.half, "dense"):
        worst_dense = max(worst_dense, prof.light_cone_violation())
    ok = worst_sparse == 0.0 and worst_dense <= 1e-14
    return "light-cone-parity", ok, f"sparse {worst_sparse:.3g}, dense {worst_dense:.3g}"


def check_cross_engine(rng):
    worst = 0.0
    for _ in range(10):
        lat = LatticeConfig(int(rng.choice([9, 11])))
        program = _random_program(rng, lat)
        runs = {e: engines.run(program, lat.half, e) for e in engines.ENGINES}
        worst = max(
            worst,
            profiles_max_deviation(runs["sparse"], runs["dense"], lat),
            profiles_max_deviation(runs["sparse"], runs["analytic"], lat),
        )
    return "cross-engine", worst <= AGREEMENT_TOL, f"max |dP| = {worst:.3g}"


def check_roundtrip(rng):
    targets = [(1.0,), tuple(2.0 ** -(i + 1) for i in range(12))]
    for _ in range(5):
        T = int(rng.integers(1, 15))
        targets.append(tuple(rng.dirichlet(np.ones(T + 1))[:T]))
    worst = max(designer.roundtrip_check(f) for f in targets)
    return "design-roundtrip", worst <= AGREEMENT_TOL, f"max |dP| = {worst:.3g}"


def check_linear_edge():
    b2 = 0.3
    lat = LatticeConfig(21)
    program = WalkProgram.from_b(lat, [math.sqrt(b2)])
    worst = 0.0
    for prof in evolution.run(program, 9)[1:]:
        worst = max(worst, abs(prof.p(-prof.t) - (1 - b2)), abs(prof.p(prof.t) - b2))
    return "linear-edge-density", worst <= AGREEMENT_TOL, f"P(-t) vs 1-B1^2: {worst:.3g}"


def check_dense_adjoint(rng):
    lat = LatticeConfig(9)
    state = dense.dense_initial(_random_program(rng, lat))
    for _ in range(3):
        state = dense.dense_step_memory(state)
    back = dense.apply_memory_coin(dense.apply_memory_coin(state), inverse=True)
    err = float(np.max(np.abs(back.vector - state.vector)))
    return "dense-coin-adjoint", err <= 1e-12, f"max |dpsi| = {err:.3g}"


def run_all(seed: int = 0):
    rng = np.random.default_rng(seed)
    return [
        check_qtable(),
        check_normalization(rng),
        check_light_cone(rng),
        check_cross_engine(rng),
        check_roundtrip(rng),
        check_linear_edge(),
        check_dense_adjoint(rng),
    ]
