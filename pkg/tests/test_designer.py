import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memwalk import analytics, designer
from memwalk.lattice import InfeasibleError, LatticeConfig


def random_target(rng, T):
    # Dirichlet draw with a leftover share so the mass stays below one
    w = rng.dirichlet(np.ones(T + 1))
    return tuple(w[:T])


def test_single_deterministic_step():
    p = designer.design([1.0])
    assert (p.A, p.B) == ((0.0,), (1.0,))
    assert designer.roundtrip_check([1.0]) == 0.0


def test_geometric_target_gives_half_splits():
    f = [2.0 ** -(k + 1) for k in range(12)]
    p = designer.design(f)
    for b in p.B:
        assert b * b == pytest.approx(0.5, abs=1e-15)


def test_two_entry_target():
    p = designer.design([0.5, 0.25])
    assert p.B[0] ** 2 == pytest.approx(0.5)
    assert p.B[1] ** 2 == pytest.approx(0.5)
    prof = designer.predicted_profile([0.5, 0.25], 2)
    assert prof.as_dict() == pytest.approx({-2: 0.25, -1: 0, 0: 0.25, 1: 0, 2: 0.5})


def test_frozen_oracle_two_step_density():
    # frozen from tests/oracle.py, N = 9
    rows = designer.roundtrip([0.5, 0.25], lattice=LatticeConfig(9))
    sim = {x: q for t, x, _, q in rows if t == 2}
    assert sim == pytest.approx({-4: 0, -3: 0, -2: 0.25, -1: 0, 0: 0.25, 1: 0, 2: 0.5, 3: 0, 4: 0}, abs=1e-15)


@pytest.mark.parametrize("f", [(0.7, 0.4), (1.2,), (-0.1, 0.5), (0.5, float("nan"))])
def test_infeasible_targets(f):
    with pytest.raises(InfeasibleError):
        designer.design(f)


def test_exhausted_mass_gives_identity_coefficients():
    p = designer.design([0.5, 0.5, 0.0, 0.0])
    assert p.B[1] == 1.0
    assert (p.A[2], p.B[2]) == (1.0, 0.0)
    assert (p.A[3], p.B[3]) == (1.0, 0.0)
    with pytest.raises(InfeasibleError, match="f_2"):
        designer.design([0.5, 0.5, 1e-6])


def test_float_slack_admits_sums_slightly_over_one():
    f = (0.1,) * 10
    assert math.fsum(f) == pytest.approx(1.0)
    designer.design(f + (0.0,))


def test_predicted_density_bounds():
    with pytest.raises(ValueError):
        designer.predicted_density([0.5], 0, 2)
    assert designer.predicted_density([0.5], 1, 0) == 0.0


def test_roundtrip_needs_room():
    with pytest.raises(ValueError):
        designer.roundtrip([0.2] * 4, lattice=LatticeConfig(9))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**32))
def test_proof_identities(T, seed):
    f = random_target(np.random.default_rng(seed), T)
    p = designer.design(f)
    for t in range(T + 1):
        assert p.prod_a2(t) == pytest.approx(1 - math.fsum(f[:t]), abs=1e-12)
    for k in range(1, T + 1):
        assert p.b(k) ** 2 * p.prod_a2(k - 1) == pytest.approx(f[k - 1], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32))
def test_designed_closed_form_matches_prediction(T, seed):
    f = random_target(np.random.default_rng(seed), T)
    p = designer.design(f)
    for t in range(T + 1):
        for x in range(-t, t + 1):
            assert analytics.density(x, t, p) == pytest.approx(designer.predicted_density(f, x, t), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_remaining_mass_monotone(raw):
    scale = max(1.0, math.fsum(raw))
    target = designer.TargetDensity(tuple(v / scale for v in raw))
    rem = [target.remaining(t) for t in range(target.horizon + 1)]
    assert all(-1e-12 <= r <= 1 + 1e-12 for r in rem)
    assert all(b <= a + 1e-15 for a, b in zip(rem, rem[1:]))


@pytest.mark.parametrize("engine", ["sparse", "dense", "analytic"])
def test_roundtrip_engines(engine, rng):
    f = random_target(rng, 4 if engine == "dense" else 10)
    lattice = LatticeConfig(11) if engine == "dense" else None
    assert designer.roundtrip_check(f, engine, lattice) <= 1e-12
