"""Exact sparse evolution under ``G = S Q``.

The state is a list of branches.  Each branch holds a walker position and
velocity, the memory bits it has already fixed, and an amplitude.  A memory
qubit stays in its initial ``a|0> + b|1>`` state until the coin first reads
it, so equivalent branches can carry different materialized supports.
Probabilities are therefore computed with the overlap (Gram) of the memory
factors, not by summing ``|amp|**2``.

Branches are stored column-wise (see ``_pykernels`` for the bit packing) and
kept sorted by ``(position, velocity, mask, bits)``, the merge key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from memwalk import kernels
from memwalk.lattice import (
    ConsistencyError,
    DensityProfile,
    LatticeConfig,
    MemorySpec,
    Velocity,
    WalkProgram,
)

NORM_ATOL = 1e-12

# (velocity, left bit, right bit) -> (velocity, left bit, right bit)
_KET_BRA_Q = {
    (Velocity.PLUS, 0, 0): (Velocity.PLUS, 1, 1),
    (Velocity.MINUS, 0, 0): (Velocity.MINUS, 0, 0),
    (Velocity.PLUS, 0, 1): (Velocity.MINUS, 0, 1),
    (Velocity.MINUS, 1, 0): (Velocity.PLUS, 0, 1),
    (Velocity.PLUS, 1, 0): (Velocity.PLUS, 1, 0),
    (Velocity.MINUS, 0, 1): (Velocity.MINUS, 1, 0),
    (Velocity.PLUS, 1, 1): (Velocity.PLUS, 0, 0),
    (Velocity.MINUS, 1, 1): (Velocity.MINUS, 1, 1),
}


def _encode(v: int, left: int, right: int) -> int:
    return int(v) * 4 + left * 2 + right


def _decode(code: int) -> tuple[Velocity, int, int]:
    return Velocity(code >> 2), (code >> 1) & 1, code & 1


@dataclass(frozen=True)
class QTable:
    """A permutation of the eight ``(velocity, left, right)`` labels."""

    codes: tuple[int, ...]

    def __post_init__(self):
        if len(self.codes) != 8 or any(not 0 <= c < 8 for c in self.codes):
            raise ValueError(f"QTable needs 8 codes in 0..7, got {self.codes}")

    def __call__(self, velocity: Velocity, left: int, right: int) -> tuple[Velocity, int, int]:
        return _decode(self.codes[_encode(velocity, left, right)])

    @property
    def is_permutation(self) -> bool:
        return sorted(self.codes) == list(range(8))

    def inverse(self) -> "QTable":
        if not self.is_permutation:
            raise ValueError("table is not invertible")
        inv = [0] * 8
        for i, c in enumerate(self.codes):
            inv[c] = i
        return QTable(tuple(inv))

    def compose(self, other: "QTable") -> "QTable":
        """``self`` after ``other``."""
        return QTable(tuple(self.codes[c] for c in other.codes))

    def as_array(self) -> np.ndarray:
        return np.array(self.codes, dtype=np.int64)

    def items(self) -> Iterator[tuple[tuple[Velocity, int, int], tuple[Velocity, int, int]]]:
        for i, c in enumerate(self.codes):
            yield _decode(i), _decode(c)


def q_table() -> QTable:
    codes = [0] * 8
    for (v, l, r), (v2, l2, r2) in _KET_BRA_Q.items():
        codes[_encode(v, l, r)] = _encode(v2, l2, r2)
    return QTable(tuple(codes))


Q = q_table()


@dataclass(frozen=True)
class Branch:
    """One basis component; ``materialized`` maps signed sites to fixed bits."""

    position: int
    velocity: Velocity
    materialized: Mapping[int, int] = field(default_factory=dict)
    amplitude: complex = 1.0


def apply_coin(branch: Branch, spec: MemorySpec, table: QTable = Q) -> list[Branch]:
    """Reference (per-branch) coin application."""
    lat = spec.lattice
    left, right = lat.wrap(branch.position - 1), lat.wrap(branch.position + 1)

    def options(site):
        if site in branch.materialized:
            return [(branch.materialized[site], 1.0)]
        a, b = spec.at(site)
        return [(bit, w) for bit, w in ((0, a), (1, b)) if w != 0.0]

    children = []
    for bl, wl in options(left):
        for br, wr in options(right):
            v, nl, nr = table(branch.velocity, bl, br)
            mem = dict(branch.materialized)
            mem[left], mem[right] = nl, nr
            children.append(Branch(branch.position, v, mem, branch.amplitude * wl * wr))
    return children


def apply_shift(branch: Branch, lattice: LatticeConfig) -> Branch:
    return Branch(
        lattice.wrap(branch.position + branch.velocity.step),
        branch.velocity,
        dict(branch.materialized),
        branch.amplitude,
    )


def _words(n_sites: int) -> int:
    return (n_sites + 63) // 64


def _frozen(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True, eq=False)
class SparseState:
    """Canonical branch table at time ``t``; positions are internal indices."""

    memory: MemorySpec
    t: int
    pos: np.ndarray
    vel: np.ndarray
    mask: np.ndarray
    bits: np.ndarray
    amp: np.ndarray

    def __post_init__(self):
        _frozen(self.pos, self.vel, self.mask, self.bits, self.amp)

    @property
    def lattice(self) -> LatticeConfig:
        return self.memory.lattice

    def __len__(self) -> int:
        return int(self.pos.shape[0])

    @classmethod
    def _build(cls, memory, t, pos, vel, mask, bits, amp, prune=0.0) -> "SparseState":
        return cls(memory, t, *_merge(pos, vel, mask, bits, amp, prune))

    @classmethod
    def localized(
        cls, memory: MemorySpec, position: int = 0, velocity: Velocity = Velocity.MINUS
    ) -> "SparseState":
        return cls.from_branches(memory, [Branch(position, velocity, {}, 1.0)])

    @classmethod
    def initial(cls, program: WalkProgram) -> "SparseState":
        return cls.localized(program.memory(), program.start_position, program.start_velocity)

    @classmethod
    def from_branches(cls, memory: MemorySpec, branches: Iterable[Branch], t: int = 0) -> "SparseState":
        lat = memory.lattice
        branches = list(branches)
        nw = _words(lat.site_count)
        pos = np.array([lat.signed_to_index(lat.wrap(b.position)) for b in branches], dtype=np.int64)
        vel = np.array([int(b.velocity) for b in branches], dtype=np.uint8)
        mask = np.zeros((len(branches), nw), dtype=np.uint64)
        bits = np.zeros((len(branches), nw), dtype=np.uint64)
        for row, b in enumerate(branches):
            for x, bit in b.materialized.items():
                i = lat.signed_to_index(lat.wrap(x))
                flag = np.uint64(1) << np.uint64(i % 64)
                mask[row, i // 64] |= flag
                if bit:
                    bits[row, i // 64] |= flag
        amp = np.array([complex(b.amplitude) for b in branches], dtype=np.complex128)
        return cls._build(memory, t, pos, vel, mask, bits, amp)

    def branches(self) -> list[Branch]:
        lat = self.lattice
        out = []
        for row in range(len(self)):
            mem = {}
            for w in range(self.mask.shape[1]):
                m, v = int(self.mask[row, w]), int(self.bits[row, w])
                while m:
                    s = (m & -m).bit_length() - 1
                    mem[lat.index_to_signed(w * 64 + s)] = (v >> s) & 1
                    m &= m - 1
            out.append(
                Branch(
                    lat.index_to_signed(int(self.pos[row])),
                    Velocity(int(self.vel[row])),
                    dict(sorted(mem.items())),
                    complex(self.amp[row]),
                )
            )
        return out

    def signed_positions(self) -> np.ndarray:
        return self.pos - self.lattice.half


def _merge(pos, vel, mask, bits, amp, prune=0.0):
    n = pos.shape[0]
    nw = mask.shape[1]
    if n == 0:
        return pos, vel, mask, bits, amp
    width = 2 + 2 * nw
    # big-endian rows compare bytewise in numeric column order
    key = np.empty((n, width), dtype=">u8")
    key[:, 0] = pos
    key[:, 1] = vel
    key[:, 2 : 2 + nw] = mask
    key[:, 2 + nw :] = bits
    flat = np.ascontiguousarray(key).view(np.dtype((np.void, 8 * width))).reshape(-1)
    uniq, inv = np.unique(flat, return_inverse=True)
    uniq = uniq.view(">u8").reshape(-1, width).astype(np.uint64)
    inv = inv.reshape(-1)
    m = uniq.shape[0]
    total = np.bincount(inv, weights=amp.real, minlength=m) + 1j * np.bincount(
        inv, weights=amp.imag, minlength=m
    )
    keep = np.abs(total) > prune
    uniq = uniq[keep]
    return (
        uniq[:, 0].astype(np.int64),
        uniq[:, 1].astype(np.uint8),
        np.ascontiguousarray(uniq[:, 2 : 2 + nw]),
        np.ascontiguousarray(uniq[:, 2 + nw :]),
        total[keep],
    )


def _coin(state: SparseState, table: QTable, backend):
    k = backend or kernels.active
    return k.expand_coin(
        state.pos,
        state.vel,
        state.mask,
        state.bits,
        state.amp,
        state.memory.a,
        state.memory.b,
        table.as_array(),
        state.lattice.site_count,
    )


def _shifted(pos, vel, n_sites, sign=1):
    delta = np.where(vel == Velocity.PLUS, 1, -1) * sign
    return (pos + delta) % n_sites


def step(state: SparseState, table: QTable = Q, prune: float = 0.0, backend=None) -> SparseState:
    """One application of ``G = S Q``; interfering branches are merged."""
    pos, vel, mask, bits, amp = _coin(state, table, backend)
    pos = _shifted(pos, vel, state.lattice.site_count)
    return SparseState._build(state.memory, state.t + 1, pos, vel, mask, bits, amp, prune)


def unstep(state: SparseState, table: QTable = Q, backend=None) -> SparseState:
    """Apply ``G^-1 = Q^-1 S^-1``."""
    back = SparseState(
        state.memory,
        state.t,
        _shifted(state.pos, state.vel, state.lattice.site_count, sign=-1),
        state.vel,
        state.mask,
        state.bits,
        state.amp,
    )
    pos, vel, mask, bits, amp = _coin(back, table.inverse(), backend)
    return SparseState._build(state.memory, state.t - 1, pos, vel, mask, bits, amp)


def evolve(state: SparseState, steps: int, table: QTable = Q, prune: float = 0.0) -> Iterator[SparseState]:
    """Yield the state after 0, 1, ..., ``steps`` steps."""
    yield state
    for _ in range(steps):
        state = step(state, table, prune)
        yield state


def _group_mass(state: SparseState, backend=None) -> np.ndarray:
    """Probability carried by each ``(position, velocity)`` group, indexed by
    the group's first row."""
    k = backend or kernels.active
    n = len(state)
    if n == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    label = state.pos * 2 + state.vel
    starts = np.flatnonzero(np.r_[True, label[1:] != label[:-1]])
    ends = np.r_[starts[1:], n]
    mass = np.abs(state.amp[starts]) ** 2
    for g in np.flatnonzero(ends - starts > 1):
        lo, hi = starts[g], ends[g]
        gram = k.overlap_matrix(
            state.mask[lo:hi],
            state.bits[lo:hi],
            state.mask[lo:hi],
            state.bits[lo:hi],
            state.memory.a,
            state.memory.b,
            state.lattice.site_count,
        )
        a = state.amp[lo:hi]
        mass[g] = float(np.real(np.conj(a) @ gram @ a))
    return mass, state.pos[starts]


def norm_squared(state: SparseState) -> float:
    mass, _ = _group_mass(state)
    return math.fsum(mass)


def position_distribution(state: SparseState, backend=None) -> DensityProfile:
    lat = state.lattice
    mass, where = _group_mass(state, backend)
    probs = np.zeros(lat.site_count)
    np.add.at(probs, where, mass)
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-10:
        raise ConsistencyError(f"sparse state mass {total!r} != 1 at t={state.t}")
    return DensityProfile(state.t, lat.labels, probs)


def materialize(state: SparseState, mask_words: np.ndarray) -> SparseState:
    """Expand every branch over the open sites flagged in ``mask_words``."""
    pos, vel, mask, bits, amp = state.pos, state.vel, state.mask, state.bits, state.amp
    for w in range(mask_words.shape[0]):
        word = int(mask_words[w])
        while word:
            s = (word & -word).bit_length() - 1
            word &= word - 1
            site = w * 64 + s
            flag = np.uint64(1) << np.uint64(s)
            open_rows = (mask[:, w] & flag) == 0
            a, b = state.memory.a[site], state.memory.b[site]
            parts = [(~open_rows, 1.0, None)]
            if a != 0.0:
                parts.append((open_rows, a, 0))
            if b != 0.0:
                parts.append((open_rows, b, 1))
            cols = [[], [], [], [], []]
            for rows, weight, bit in parts:
                m = mask[rows].copy()
                bt = bits[rows].copy()
                if bit is not None:
                    m[:, w] |= flag
                    if bit:
                        bt[:, w] |= flag
                for c, arr in zip(cols, (pos[rows], vel[rows], m, bt, amp[rows] * weight)):
                    c.append(arr)
            pos, vel, mask, bits, amp = (np.concatenate(c) for c in cols)
    return SparseState._build(state.memory, state.t, pos, vel, mask, bits, amp)


def state_distance(s1: SparseState, s2: SparseState) -> float:
    """Largest amplitude difference after expanding both states on a common
    materialized support."""
    if s1.memory != s2.memory:
        raise ValueError("states built on different memory specifications")
    nw = s1.mask.shape[1]
    union = np.zeros(nw, dtype=np.uint64)
    for s in (s1, s2):
        if len(s):
            union |= np.bitwise_or.reduce(s.mask, axis=0)
    e1, e2 = materialize(s1, union), materialize(s2, union)

    def table(s):
        return {
            (int(p), int(v), s.bits[i].tobytes()): complex(s.amp[i])
            for i, (p, v) in enumerate(zip(s.pos, s.vel))
        }

    t1, t2 = table(e1), table(e2)
    return max((abs(t1.get(k, 0) - t2.get(k, 0)) for k in t1.keys() | t2.keys()), default=0.0)


def run(program: WalkProgram, steps: int, prune: float = 0.0) -> list[DensityProfile]:
    """Density profiles for t = 0..steps starting from the program's state."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    return [position_distribution(s) for s in evolve(SparseState.initial(program), steps, prune=prune)]
