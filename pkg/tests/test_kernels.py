"""Both kernel backends against each other and against direct loops."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memwalk import _pykernels, kernels
from memwalk.evolution import Q

BACKENDS = sorted(kernels.available())


def random_table(rng, n_sites, n_branches):
    nw = (n_sites + 63) // 64
    pos = rng.integers(0, n_sites, n_branches).astype(np.int64)
    vel = rng.integers(0, 2, n_branches).astype(np.uint8)
    mask = rng.integers(0, 2**63, (n_branches, nw), dtype=np.uint64)
    bits = rng.integers(0, 2**63, (n_branches, nw), dtype=np.uint64) & mask
    tail = n_sites % 64
    if tail:
        mask[:, -1] &= np.uint64((1 << tail) - 1)
        bits[:, -1] &= mask[:, -1]
    amp = rng.normal(size=n_branches) + 1j * rng.normal(size=n_branches)
    a = rng.uniform(0, 1, n_sites)
    a[rng.uniform(size=n_sites) < 0.3] = 1.0
    a[rng.uniform(size=n_sites) < 0.1] = 0.0
    b = np.sqrt(1 - a**2)
    return pos, vel, mask, bits, amp, a, b


def sorted_children(children):
    pos, vel, mask, bits, amp = children
    rows = sorted(
        zip(pos.tolist(), vel.tolist(), map(tuple, mask.tolist()), map(tuple, bits.tolist()), amp.real.tolist(), amp.imag.tolist())
    )
    return rows


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
@settings(max_examples=60, deadline=None)
@given(st.integers(5, 150).map(lambda h: 2 * (h // 2) + 1), st.integers(0, 40), st.integers(0, 2**32))
def test_expand_coin_backends_agree(n_sites, n_branches, seed):
    args = random_table(np.random.default_rng(seed), n_sites, n_branches)
    out = [
        sorted_children(kernels.get(name).expand_coin(*args, Q.as_array(), n_sites)) for name in BACKENDS
    ]
    assert out[0] == out[1]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
@settings(max_examples=60, deadline=None)
@given(st.integers(5, 150), st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32))
def test_overlap_backends_agree(n_sites, na, nb, seed):
    rng = np.random.default_rng(seed)
    _, _, ma, va, _, a, b = random_table(rng, n_sites, na)
    _, _, mb, vb, _, _, _ = random_table(rng, n_sites, nb)
    got = [kernels.get(name).overlap_matrix(ma, va, mb, vb, a, b, n_sites) for name in BACKENDS]
    np.testing.assert_allclose(got[0], got[1], rtol=1e-13, atol=0)


def test_overlap_matches_site_loop(backend, rng):
    n = 70
    _, _, ma, va, _, a, b = random_table(rng, n, 6)
    _, _, mb, vb, _, _, _ = random_table(rng, n, 5)

    def bit(words, s):
        return int(words[s // 64]) >> (s % 64) & 1

    expected = np.ones((6, 5))
    for i in range(6):
        for j in range(5):
            for s in range(n):
                mi, mj = bit(ma[i], s), bit(mb[j], s)
                ui, uj = bit(va[i], s), bit(vb[j], s)
                if mi and mj:
                    expected[i, j] *= float(ui == uj)
                elif mi:
                    expected[i, j] *= b[s] if ui else a[s]
                elif mj:
                    expected[i, j] *= b[s] if uj else a[s]
    np.testing.assert_allclose(backend.overlap_matrix(ma, va, mb, vb, a, b, n), expected, rtol=1e-13)


def test_expand_coin_conserves_weight(backend, rng):
    n = 33
    pos, vel, mask, bits, amp, a, b = random_table(rng, n, 25)
    # clear neighbour sites so every branch splits over open qubits
    _, _, _, _, camp = backend.expand_coin(pos, vel, np.zeros_like(mask), np.zeros_like(bits), amp, a, b, Q.as_array(), n)
    assert np.sum(np.abs(camp) ** 2) == pytest.approx(np.sum(np.abs(amp) ** 2), rel=1e-13)


@pytest.mark.parametrize("n_sites", [5, 7, 9])
def test_coin_permutation_backends_and_bijection(n_sites):
    perms = [kernels.get(name).coin_permutation(n_sites, Q.as_array()) for name in BACKENDS]
    for perm in perms:
        assert np.array_equal(np.sort(perm), np.arange(n_sites * 2 * 2**n_sites))
    for perm in perms[1:]:
        assert np.array_equal(perm, perms[0])


def test_coin_permutation_keeps_position():
    n = 7
    m = 1 << n
    perm = _pykernels.coin_permutation(n, Q.as_array())
    assert np.array_equal(perm // (2 * m), np.arange(n * 2 * m) // (2 * m))


def test_backend_lookup():
    assert kernels.get("python") is _pykernels
    with pytest.raises(ValueError):
        kernels.get("fortran")
