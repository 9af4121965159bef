"""Brute-force state-vector oracle over position x velocity x all memory qubits.

Basis index is ``(position_index * 2 + velocity) * 2**N + memory_mask`` with
bit ``i`` of the mask holding the memory qubit of internal site ``i``.
Velocity ``0`` is minus, ``1`` is plus.  Also hosts the memoryless coined
walk used as a ballistic baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from memwalk import kernels
from memwalk.evolution import Q, QTable
from memwalk.lattice import (
    CapacityError,
    ConsistencyError,
    DensityProfile,
    LatticeConfig,
    MemorySpec,
    Velocity,
    WalkProgram,
)

MAX_MEMORY_SITES = 14
NORM_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class DenseState:
    lattice: LatticeConfig
    vector: np.ndarray
    t: int = 0
    with_memory: bool = True

    def __post_init__(self):
        n = self.lattice.site_count
        if self.with_memory and n > MAX_MEMORY_SITES:
            raise CapacityError(f"dense memory states are capped at N={MAX_MEMORY_SITES}, got N={n}")
        expected = n * 2 * self.memory_dim
        vec = np.asarray(self.vector, dtype=np.complex128)
        if vec.shape != (expected,):
            raise ValueError(f"vector must have {expected} entries, got shape {vec.shape}")
        norm = float(np.vdot(vec, vec).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ConsistencyError(f"dense state norm {norm!r} != 1")
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)

    @property
    def memory_dim(self) -> int:
        return 1 << self.lattice.site_count if self.with_memory else 1

    def cube(self) -> np.ndarray:
        """View as ``(position, velocity, memory)``."""
        return self.vector.reshape(self.lattice.site_count, 2, self.memory_dim)


def memory_product(spec: MemorySpec) -> np.ndarray:
    """Amplitudes of the product memory state over all bitmasks."""
    vec = np.ones(1)
    for a, b in zip(spec.a, spec.b):
        vec = np.concatenate([vec * a, vec * b])
    return vec


def dense_from_spec(
    spec: MemorySpec, position: int = 0, velocity: Velocity = Velocity.MINUS
) -> DenseState:
    lat = spec.lattice
    if lat.site_count > MAX_MEMORY_SITES:
        raise CapacityError(f"dense memory states are capped at N={MAX_MEMORY_SITES}, got N={lat.site_count}")
    cube = np.zeros((lat.site_count, 2, 1 << lat.site_count), dtype=np.complex128)
    cube[lat.signed_to_index(position), int(velocity)] = memory_product(spec)
    return DenseState(lat, cube.reshape(-1))


def dense_initial(program: WalkProgram) -> DenseState:
    return dense_from_spec(program.memory(), program.start_position, program.start_velocity)


def dense_standard_initial(
    lattice: LatticeConfig, position: int = 0, velocity: Velocity = Velocity.MINUS
) -> DenseState:
    """Memory-free walker for the coined baseline."""
    vec = np.zeros(lattice.site_count * 2, dtype=np.complex128)
    vec[lattice.signed_to_index(position) * 2 + int(velocity)] = 1.0
    return DenseState(lattice, vec, with_memory=False)


@lru_cache(maxsize=16)
def _permutation(n_sites: int, codes: tuple[int, ...], backend: str) -> np.ndarray:
    perm = kernels.get(backend).coin_permutation(n_sites, np.array(codes, dtype=np.int64))
    perm.flags.writeable = False
    return perm


def coin_permutation(n_sites: int, table: QTable = Q, backend: str | None = None) -> np.ndarray:
    return _permutation(n_sites, table.codes, backend or kernels.BACKEND)


def apply_memory_coin(state: DenseState, table: QTable = Q, inverse: bool = False) -> DenseState:
    """``sum_x |x><x| (x) Q_{x-1,x+1}``; with ``inverse`` its adjoint."""
    if not state.with_memory:
        raise ValueError("memory coin needs a state with memory qubits")
    if inverse:
        table = table.inverse()
    perm = coin_permutation(state.lattice.site_count, table)
    out = np.empty_like(state.vector)
    out[perm] = state.vector
    return DenseState(state.lattice, out, state.t, True)


def _shift(cube: np.ndarray, sign: int = 1) -> np.ndarray:
    out = np.empty_like(cube)
    out[:, Velocity.PLUS] = np.roll(cube[:, Velocity.PLUS], sign, axis=0)
    out[:, Velocity.MINUS] = np.roll(cube[:, Velocity.MINUS], -sign, axis=0)
    return out


def dense_step_memory(state: DenseState, table: QTable = Q) -> DenseState:
    coined = apply_memory_coin(state, table)
    out = _shift(coined.cube())
    return DenseState(state.lattice, out.reshape(-1), state.t + 1, True)


def dense_unstep_memory(state: DenseState, table: QTable = Q) -> DenseState:
    back = DenseState(state.lattice, _shift(state.cube(), -1).reshape(-1), state.t - 1, True)
    return apply_memory_coin(back, table, inverse=True)


def coin_matrix(theta: float) -> np.ndarray:
    """Coin in the ordered basis ``(v+, v-)``."""
    if not math.isfinite(theta):
        raise ValueError(f"coin angle must be finite, got {theta!r}")
    c, s = math.cos(theta), 1j * math.sin(theta)
    return np.array([[c, s], [s, c]])


def dense_step_standard(state: DenseState, theta: float) -> DenseState:
    """One step of ``W = S (Id (x) C)``; memory qubits, if any, are untouched."""
    c = coin_matrix(theta)
    cube = state.cube()
    plus, minus = cube[:, Velocity.PLUS], cube[:, Velocity.MINUS]
    coined = np.empty_like(cube)
    coined[:, Velocity.PLUS] = c[0, 0] * plus + c[0, 1] * minus
    coined[:, Velocity.MINUS] = c[1, 0] * plus + c[1, 1] * minus
    return DenseState(state.lattice, _shift(coined).reshape(-1), state.t + 1, state.with_memory)


def marginal_position(state: DenseState) -> DensityProfile:
    probs = np.sum(np.abs(state.cube()) ** 2, axis=(1, 2))
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-10:
        raise ConsistencyError(f"dense state mass {total!r} != 1 at t={state.t}")
    return DensityProfile(state.t, state.lattice.labels, probs)


def run(program: WalkProgram, steps: int, table: QTable = Q) -> list[DensityProfile]:
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    state = dense_initial(program)
    out = [marginal_position(state)]
    for _ in range(steps):
        state = dense_step_memory(state, table)
        out.append(marginal_position(state))
    return out


def run_standard(lattice: LatticeConfig, theta: float, steps: int) -> list[DensityProfile]:
    state = dense_standard_initial(lattice)
    out = [marginal_position(state)]
    for _ in range(steps):
        state = dense_step_standard(state, theta)
        out.append(marginal_position(state))
    return out
