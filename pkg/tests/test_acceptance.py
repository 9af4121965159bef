"""Acceptance suite.  Each test records one PASS/FAIL line, printed in the
``acceptance criteria`` section at the end of the pytest run."""

import math
import time

import numpy as np

from memwalk import analytics, designer, engines, evolution, selftest
from memwalk.lattice import LatticeConfig, Velocity, WalkProgram
from memwalk.evolution import QTable, SparseState

M, P = Velocity.MINUS, Velocity.PLUS


def random_program(rng, N):
    lat = LatticeConfig(N)
    return WalkProgram.from_b(lat, rng.uniform(0, 1, lat.half))


def test_ac1_unitarity(report, rng):
    start = time.perf_counter()
    table = evolution.q_table()
    perm = table.is_permutation and table.inverse().compose(table) == QTable(tuple(range(8)))

    worst_inv = 0.0
    for N in (9, 15, 31):
        state = SparseState.initial(random_program(rng, N))
        for _ in range(N // 2):
            worst_inv = max(worst_inv, evolution.state_distance(evolution.unstep(evolution.step(state)), state))
            state = evolution.step(state)

    lat = LatticeConfig(2001)
    state = SparseState.initial(WalkProgram.from_b(lat, [math.sqrt(0.3)]))
    drift = 0.0
    for s in evolution.evolve(state, 1000):
        drift = max(drift, abs(evolution.norm_squared(s) - 1.0))
    elapsed = time.perf_counter() - start
    ok = perm and worst_inv <= 1e-12 and drift <= 1e-10 and elapsed < 5
    report(
        "AC1 unitarity",
        ok,
        f"permutation={perm}, step/unstep {worst_inv:.2g} (tol 1e-12), norm drift {drift:.2g} (tol 1e-10), {elapsed:.2f}s (<5s)",
    )
    assert ok


def test_ac2_early_branches(report, rng):
    lat = LatticeConfig(9)
    worst = 0.0
    shape_ok = True
    for _ in range(20):
        B = rng.uniform(0, 1, 2)
        A = np.sqrt(1 - B**2)
        s1 = evolution.step(SparseState.initial(WalkProgram(lat, tuple(A), tuple(B))))
        s2 = evolution.step(s1)
        want1 = {(-1, M): A[0], (1, P): B[0]}
        want2 = {(-2, M): A[1] * A[0], (0, P): B[1] * A[0], (2, P): B[0]}
        for state, want in ((s1, want1), (s2, want2)):
            got = {}
            for b in state.branches():
                key = (b.position, b.velocity)
                shape_ok &= key not in got
                got[key] = b.amplitude
            shape_ok &= set(got) == set(want)
            for key in want:
                worst = max(worst, abs(got.get(key, 0.0) - want[key]))
    ok = shape_ok and worst <= 1e-14
    report("AC2 one- and two-step branches", ok, f"20 draws, branch sets match={shape_ok}, max |delta amp| {worst:.2g} (tol 1e-14)")
    assert ok


def test_ac3_four_way_agreement(report, rng):
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        N = int(rng.choice([9, 11]))
        program = random_program(rng, N)
        T = N // 2
        params = analytics.ClosedFormParams(program.A, program.B)
        table = analytics.recurrence_evolve(params, T)
        sparse = engines.run(program, T, "sparse")
        dense = engines.run(program, T, "dense")
        for t in range(T + 1):
            ps, pd = sparse[t].as_dict(), dense[t].as_dict()
            rec = dict(zip(range(-T, T + 1), table.density(t)))
            for x in program.lattice.labels:
                x = int(x)
                vals = [ps[x], pd[x], analytics.density(x, t, params), rec.get(x, 0.0)]
                worst = max(worst, max(vals) - min(vals))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 30
    report("AC3 four-way agreement", ok, f"50 programs N in 9..11, max spread {worst:.2g} (tol 1e-12), {elapsed:.2f}s (<30s)")
    assert ok


def test_ac4_linear_scenario(report):
    lat = LatticeConfig(103)
    worst_mean = worst_var = 0.0
    for b2 in (0.0, 0.25, 0.5, 0.75, 1.0):
        for prof in evolution.run(WalkProgram.from_b(lat, [math.sqrt(b2)]), 50):
            t = prof.t
            worst_mean = max(worst_mean, abs(prof.mean + t * (1 - 2 * b2)))
            worst_var = max(worst_var, abs(prof.variance - 4 * b2 * (1 - b2) * t * t))
    ok = worst_mean <= 1e-10 and worst_var <= 1e-8
    report("AC4 linear scenario", ok, f"mean {worst_mean:.2g} (tol 1e-10), variance {worst_var:.2g} (tol 1e-8)")
    assert ok


def test_ac5_parabolic_scenario(report):
    worst_mean = worst_sigma = worst_edge = 0.0
    horizons = {}
    for z in (0.05, 0.1, 0.2):
        s = analytics.ScenarioParams.parabolic(z)
        T = s.horizon
        horizons[z] = T
        lat = LatticeConfig(2 * T + 3)
        program = WalkProgram.from_coefficients(lat, analytics.scenario_params(s, T))
        for prof in evolution.run(program, T):
            t = prof.t
            worst_mean = max(worst_mean, abs(prof.mean - t * (z * t - 2) / (z + 2)))
            worst_sigma = max(worst_sigma, abs(prof.sigma - analytics.scenario_sigma(s, t)))
            worst_edge = max(worst_edge, abs(prof.p(-t) - (1 - t * z / (z + 2))))
    ok = worst_mean <= 1e-10 and worst_sigma <= 1e-8 and worst_edge <= 1e-10
    report(
        "AC5 parabolic scenario",
        ok,
        f"horizons {horizons}, mean {worst_mean:.2g} (tol 1e-10), sigma {worst_sigma:.2g} (tol 1e-8), P(-t) {worst_edge:.2g} (tol 1e-10)",
    )
    assert ok


def test_ac6_design_roundtrip(report, rng):
    targets = []
    for _ in range(50):
        T = int(rng.integers(1, 21))
        targets.append(tuple(rng.dirichlet(np.ones(T + 1))[:T]))
    targets.append(tuple(2.0 ** -(k + 1) for k in range(20)))
    targets.append((1.0,))
    worst_rt = worst_id = 0.0
    for f in targets:
        worst_rt = max(worst_rt, designer.roundtrip_check(f))
        p = designer.design(f)
        for k in range(1, len(f) + 1):
            worst_id = max(worst_id, abs(p.prod_a2(k) - (1 - math.fsum(f[:k]))))
            worst_id = max(worst_id, abs(p.b(k) ** 2 * p.prod_a2(k - 1) - f[k - 1]))
    ok = worst_rt <= 1e-12 and worst_id <= 1e-12
    report("AC6 design round trip", ok, f"{len(targets)} targets, max |dP| {worst_rt:.2g}, identities {worst_id:.2g} (tol 1e-12)")
    assert ok


def test_ac7_light_cone_and_parity(report, rng):
    worst = {"sparse": 0.0, "dense": 0.0, "analytic": 0.0}
    for _ in range(10):
        program = random_program(rng, 11)
        for engine in worst:
            for prof in engines.run(program, 5, engine):
                worst[engine] = max(worst[engine], prof.light_cone_violation())
    program = random_program(rng, 201)
    for prof in engines.run(program, 100, "sparse"):
        worst["sparse"] = max(worst["sparse"], prof.light_cone_violation())
    ok = worst["sparse"] == 0.0 and worst["analytic"] == 0.0 and worst["dense"] <= 1e-14
    report("AC7 light cone + parity", ok, ", ".join(f"{k} {v:.2g}" for k, v in worst.items()) + " (sparse exact, dense tol 1e-14)")
    assert ok


def test_ac8_branch_count(report, rng):
    lat = LatticeConfig(2003)
    worst = -1
    peak = 0
    programs = [
        WalkProgram.from_b(lat, rng.uniform(0, 1, 1000)),
        WalkProgram.from_coefficients(lat, analytics.scenario_params(analytics.ScenarioParams.parabolic(0.002), 1000)),
    ]
    for program in programs:
        for s in evolution.evolve(SparseState.initial(program), 1000):
            worst = max(worst, len(s) - (s.t + 1))
            peak = max(peak, len(s))
    ok = worst <= 0
    report("AC8 branch-count bound", ok, f"t <= 1000, max (branches - (t+1)) = {worst}, peak {peak} branches")
    assert ok


def test_ac9_errata_enforced(report):
    lat = LatticeConfig(61)
    worst_edge = 0.0
    for b2 in (0.1, 0.3, 0.64, 0.9):
        for prof in evolution.run(WalkProgram.from_b(lat, [math.sqrt(b2)]), 30)[1:]:
            worst_edge = max(worst_edge, abs(prof.p(-prof.t) - (1 - b2)))

    # lower summation index i = 0: the two conventions differ once f_0 > 0
    f = (0.4, 0.3, 0.2)
    p = designer.design(f)
    i0 = all(abs(p.b(k) ** 2 - f[k - 1] / (1 - math.fsum(f[: k - 1]))) <= 1e-15 for k in (1, 2, 3))
    prof = engines.run(WalkProgram.from_coefficients(LatticeConfig(9), p), 3, "sparse")
    i0 &= all(abs(prof[t].p(-t) - (1 - math.fsum(f[:t]))) <= 1e-14 for t in range(4))

    results = dict((name, ok) for name, ok, _ in selftest.run_all(0))
    norm_ok = results["normalization"] and all(results.values())
    ok = worst_edge <= 1e-14 and i0 and norm_ok
    report(
        "AC9 errata enforced",
        ok,
        f"linear P(-t) = 1 - B1^2 to {worst_edge:.2g}, i=0 convention {i0}, selftest normalization {norm_ok}",
    )
    assert ok
