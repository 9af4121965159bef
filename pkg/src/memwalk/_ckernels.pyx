# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; identical signatures."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t

cnp.import_array()


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int _bit(const uint64_t[:, ::1] words, Py_ssize_t row, int64_t site) noexcept nogil:
    return <int>((words[row, site >> 6] >> (site & 63)) & 1)


def expand_coin(pos, vel, mask, bits, amp, spec_a, spec_b, table, int64_t n_sites):
    cdef const int64_t[::1] p = np.ascontiguousarray(pos, dtype=np.int64)
    cdef const uint8_t[::1] v = np.ascontiguousarray(vel, dtype=np.uint8)
    cdef const uint64_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint64)
    cdef const uint64_t[:, ::1] bt = np.ascontiguousarray(bits, dtype=np.uint64)
    cdef const double complex[::1] am = np.ascontiguousarray(amp, dtype=np.complex128)
    cdef const double[::1] sa = np.ascontiguousarray(spec_a, dtype=np.float64)
    cdef const double[::1] sb = np.ascontiguousarray(spec_b, dtype=np.float64)
    cdef const int64_t[::1] tb = np.ascontiguousarray(table, dtype=np.int64)
    cdef Py_ssize_t n = p.shape[0], nw = m.shape[1]
    cdef Py_ssize_t i, k, c, w
    cdef int64_t left, right
    cdef int ml, mr, bl, br, cl, cr, o
    cdef double wl[2]
    cdef double wr[2]
    cdef uint64_t fl, fr

    # first pass: count children
    cdef Py_ssize_t total = 0
    for i in range(n):
        left = (p[i] - 1 + n_sites) % n_sites
        right = (p[i] + 1) % n_sites
        c = 1
        if not _bit(m, i, left):
            c *= (sa[left] != 0.0) + (sb[left] != 0.0)
        if not _bit(m, i, right):
            c *= (sa[right] != 0.0) + (sb[right] != 0.0)
        total += c

    out_pos = np.empty(total, dtype=np.int64)
    out_vel = np.empty(total, dtype=np.uint8)
    out_mask = np.empty((total, nw), dtype=np.uint64)
    out_bits = np.empty((total, nw), dtype=np.uint64)
    out_amp = np.empty(total, dtype=np.complex128)
    cdef int64_t[::1] op = out_pos
    cdef uint8_t[::1] ov = out_vel
    cdef uint64_t[:, ::1] om = out_mask
    cdef uint64_t[:, ::1] ob = out_bits
    cdef double complex[::1] oa = out_amp

    k = 0
    for i in range(n):
        left = (p[i] - 1 + n_sites) % n_sites
        right = (p[i] + 1) % n_sites
        ml = _bit(m, i, left)
        mr = _bit(m, i, right)
        bl = _bit(bt, i, left)
        br = _bit(bt, i, right)
        if ml:
            wl[0] = 1.0 if bl == 0 else 0.0
            wl[1] = 1.0 - wl[0]
        else:
            wl[0] = sa[left]
            wl[1] = sb[left]
        if mr:
            wr[0] = 1.0 if br == 0 else 0.0
            wr[1] = 1.0 - wr[0]
        else:
            wr[0] = sa[right]
            wr[1] = sb[right]
        fl = (<uint64_t>1) << (left & 63)
        fr = (<uint64_t>1) << (right & 63)
        for cl in range(2):
            if wl[cl] == 0.0:
                continue
            for cr in range(2):
                if wr[cr] == 0.0:
                    continue
                o = <int>tb[v[i] * 4 + cl * 2 + cr]
                op[k] = p[i]
                ov[k] = <uint8_t>(o >> 2)
                for w in range(nw):
                    om[k, w] = m[i, w]
                    ob[k, w] = bt[i, w]
                om[k, left >> 6] |= fl
                ob[k, left >> 6] &= ~fl
                if (o >> 1) & 1:
                    ob[k, left >> 6] |= fl
                om[k, right >> 6] |= fr
                ob[k, right >> 6] &= ~fr
                if o & 1:
                    ob[k, right >> 6] |= fr
                oa[k] = am[i] * (wl[cl] * wr[cr])
                k += 1
    return out_pos, out_vel, out_mask, out_bits, out_amp


cdef inline double _one_sided(uint64_t only, uint64_t vals, Py_ssize_t word,
                              const double[::1] sa, const double[::1] sb) noexcept nogil:
    cdef double f = 1.0
    cdef int s
    while only:
        s = __builtin_ctzll(only)
        if (vals >> s) & 1:
            f *= sb[word * 64 + s]
        else:
            f *= sa[word * 64 + s]
        only &= only - 1
    return f


def overlap_matrix(mask_a, bits_a, mask_b, bits_b, spec_a, spec_b, int64_t n_sites):
    cdef const uint64_t[:, ::1] ma = np.ascontiguousarray(mask_a, dtype=np.uint64)
    cdef const uint64_t[:, ::1] va = np.ascontiguousarray(bits_a, dtype=np.uint64)
    cdef const uint64_t[:, ::1] mb = np.ascontiguousarray(mask_b, dtype=np.uint64)
    cdef const uint64_t[:, ::1] vb = np.ascontiguousarray(bits_b, dtype=np.uint64)
    cdef const double[::1] sa = np.ascontiguousarray(spec_a, dtype=np.float64)
    cdef const double[::1] sb = np.ascontiguousarray(spec_b, dtype=np.float64)
    cdef Py_ssize_t na = ma.shape[0], nb = mb.shape[0], nw = ma.shape[1]
    out = np.zeros((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, w
    cdef double f
    cdef uint64_t both
    with nogil:
        for i in range(na):
            for j in range(nb):
                f = 1.0
                for w in range(nw):
                    both = ma[i, w] & mb[j, w]
                    if (va[i, w] ^ vb[j, w]) & both:
                        f = 0.0
                        break
                    f *= _one_sided(ma[i, w] & ~mb[j, w], va[i, w], w, sa, sb)
                    f *= _one_sided(mb[j, w] & ~ma[i, w], vb[j, w], w, sa, sb)
                    if f == 0.0:
                        break
                o[i, j] = f
    return out


def coin_permutation(int n_sites, table):
    cdef const int64_t[::1] tb = np.ascontiguousarray(table, dtype=np.int64)
    cdef int64_t m = (<int64_t>1) << n_sites
    cdef int64_t size = n_sites * 2 * m
    perm = np.empty(size, dtype=np.int64)
    cdef int64_t[::1] out = perm
    cdef int64_t p, v, mem, left, right, o, nm
    with nogil:
        for p in range(n_sites):
            left = (p - 1 + n_sites) % n_sites
            right = (p + 1) % n_sites
            for v in range(2):
                for mem in range(m):
                    o = tb[v * 4 + ((mem >> left) & 1) * 2 + ((mem >> right) & 1)]
                    nm = mem & ~(((<int64_t>1) << left) | ((<int64_t>1) << right))
                    nm = nm | (((o >> 1) & 1) << left) | ((o & 1) << right)
                    out[(p * 2 + v) * m + mem] = (p * 2 + (o >> 2)) * m + nm
    return perm
