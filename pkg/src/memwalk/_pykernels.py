"""Vectorized numpy implementations of the hot kernels.

Memory configurations are bit-packed: row ``i`` of ``mask``/``bits`` holds
``ceil(N / 64)`` little-endian uint64 words, bit ``s`` of the row being site
``s`` (internal index).  ``mask`` marks materialized sites, ``bits`` their
values.  A coin ``table`` maps ``v*4 + left*2 + right`` to the output label
in the same encoding.
"""

import numpy as np

_ONE = np.uint64(1)
_CHILD_L = np.array([0, 0, 1, 1], dtype=np.int64)
_CHILD_R = np.array([0, 1, 0, 1], dtype=np.int64)


def _get(words, rows, site):
    w = site // 64
    off = (site % 64).astype(np.uint64)
    return ((words[rows, w] >> off) & _ONE).astype(np.int64)


def _site_weights(materialized, bit, a_s, b_s, choice):
    # materialized sites admit only their stored bit; open sites split a/b
    fixed = (choice[None, :] == bit[:, None]).astype(float)
    open_ = np.where(choice[None, :] == 0, a_s[:, None], b_s[:, None])
    return np.where(materialized[:, None] == 1, fixed, open_)


def expand_coin(pos, vel, mask, bits, amp, spec_a, spec_b, table, n_sites):
    """Apply the memory coin to every branch; returns the children arrays
    ``(pos, vel, mask, bits, amp)``.  Positions are unchanged."""
    rows = np.arange(pos.shape[0])
    left = (pos - 1) % n_sites
    right = (pos + 1) % n_sites
    ml, bl = _get(mask, rows, left), _get(bits, rows, left)
    mr, br = _get(mask, rows, right), _get(bits, rows, right)
    w = _site_weights(ml, bl, spec_a[left], spec_b[left], _CHILD_L) * _site_weights(
        mr, br, spec_a[right], spec_b[right], _CHILD_R
    )
    src, which = np.nonzero(w != 0.0)
    out = np.asarray(table, dtype=np.int64)[vel[src].astype(np.int64) * 4 + _CHILD_L[which] * 2 + _CHILD_R[which]]

    lsite, rsite = left[src], right[src]
    new_mask = mask[src].copy()
    new_bits = bits[src].copy()
    k = np.arange(src.shape[0])
    for site, value in ((lsite, (out >> 1) & 1), (rsite, out & 1)):
        wd = site // 64
        flag = _ONE << (site % 64).astype(np.uint64)
        new_mask[k, wd] |= flag
        new_bits[k, wd] &= ~flag
        new_bits[k, wd] |= np.where(value == 1, flag, np.uint64(0))
    return (
        pos[src].copy(),
        (out >> 2).astype(np.uint8),
        new_mask,
        new_bits,
        amp[src] * w[src, which],
    )


def _unpack(words, n_sites):
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :n_sites].astype(bool)


def overlap_matrix(mask_a, bits_a, mask_b, bits_b, spec_a, spec_b, n_sites):
    """Inner products of the memory factors of two branch sets.

    Materialized/materialized sites contribute 1 or 0, materialized bit 0
    (1) against an open site contributes ``a`` (``b``), open/open gives 1.
    """
    ma, va = _unpack(mask_a, n_sites), _unpack(bits_a, n_sites)
    mb, vb = _unpack(mask_b, n_sites), _unpack(bits_b, n_sites)
    both = ma[:, None, :] & mb[None, :, :]
    clash = np.any(both & (va[:, None, :] != vb[None, :, :]), axis=2)
    wa = np.where(va, spec_b, spec_a)
    wb = np.where(vb, spec_b, spec_a)
    only_a = ma[:, None, :] & ~mb[None, :, :]
    only_b = ~ma[:, None, :] & mb[None, :, :]
    fa = np.prod(np.where(only_a, wa[:, None, :], 1.0), axis=2)
    fb = np.prod(np.where(only_b, wb[None, :, :], 1.0), axis=2)
    return np.where(clash, 0.0, fa * fb)


def coin_permutation(n_sites, table):
    """Destination index of every dense basis state under the site-local coin.

    Dense index is ``(position * 2 + velocity) * 2**n_sites + memory_mask``.
    """
    m = 1 << n_sites
    idx = np.arange(n_sites * 2 * m, dtype=np.int64)
    p = idx // (2 * m)
    v = (idx // m) % 2
    mem = idx % m
    left = (p - 1) % n_sites
    right = (p + 1) % n_sites
    bl = (mem >> left) & 1
    br = (mem >> right) & 1
    out = np.asarray(table, dtype=np.int64)[v * 4 + bl * 2 + br]
    mem = mem & ~((1 << left) | (1 << right))
    mem = mem | (((out >> 1) & 1) << left) | ((out & 1) << right)
    return (p * 2 + (out >> 2)) * m + mem
