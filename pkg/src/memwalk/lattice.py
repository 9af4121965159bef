"""Lattice geometry, memory specifications and walk programs.

Sites are labelled by signed positions ``-h..h`` with ``h = N // 2`` and
stored internally at indices ``0..N-1`` (index ``i`` holds label ``i - h``).
The cycle is periodic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

NORM_ATOL = 1e-12
MASS_ATOL = 1e-10


class ValidationError(ValueError):
    """Invalid configuration or parameters."""


class InfeasibleError(ValidationError):
    """Parameters outside the region where a prescribed dynamics exists."""


class CapacityError(ValidationError):
    """Request exceeds a hard size cap."""


class ConsistencyError(RuntimeError):
    """An engine produced a state violating a conservation law."""


class Velocity(enum.IntEnum):
    MINUS = 0
    PLUS = 1

    @property
    def step(self) -> int:
        return 1 if self is Velocity.PLUS else -1


@dataclass(frozen=True)
class LatticeConfig:
    """An odd cycle of ``site_count`` sites."""

    site_count: int

    def __post_init__(self):
        n = self.site_count
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ValidationError(f"site_count must be an integer, got {n!r}")
        if n < 5 or n % 2 == 0:
            raise ValidationError(f"site_count must be odd and >= 5, got {n}")

    @property
    def half(self) -> int:
        return self.site_count // 2

    @property
    def labels(self) -> np.ndarray:
        return np.arange(-self.half, self.half + 1)

    def signed_to_index(self, x: int) -> int:
        if not -self.half <= x <= self.half:
            raise IndexError(
                f"position {x} outside [-{self.half}, {self.half}] for N={self.site_count}"
            )
        return int(x) + self.half

    def index_to_signed(self, i: int) -> int:
        if not 0 <= i < self.site_count:
            raise IndexError(f"index {i} outside [0, {self.site_count})")
        return int(i) - self.half

    def wrap(self, x: int) -> int:
        """Reduce any integer label onto ``-h..h``."""
        return (int(x) + self.half) % self.site_count - self.half


def signed_to_index(lattice: LatticeConfig, x: int) -> int:
    return lattice.signed_to_index(x)


def index_to_signed(lattice: LatticeConfig, i: int) -> int:
    return lattice.index_to_signed(i)


def _check_pair(a: float, b: float, what: str) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError(f"{what}: non-finite amplitude ({a}, {b})")
    if a < -NORM_ATOL or b < -NORM_ATOL or a > 1 + NORM_ATOL or b > 1 + NORM_ATOL:
        raise ValidationError(f"{what}: amplitudes ({a}, {b}) outside [0, 1]")
    if abs(a * a + b * b - 1.0) > NORM_ATOL:
        raise ValidationError(f"{what}: a^2 + b^2 = {a * a + b * b!r} != 1")


@dataclass(frozen=True, eq=False)
class MemorySpec:
    """Per-site memory qubit ``a|0> + b|1>``, arrays indexed by internal site."""

    lattice: LatticeConfig
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        n = self.lattice.site_count
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.shape != (n,) or b.shape != (n,):
            raise ValidationError(f"memory arrays must have shape ({n},)")
        for i in range(n):
            _check_pair(a[i], b[i], f"site {self.lattice.index_to_signed(i)}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def blank(cls, lattice: LatticeConfig) -> "MemorySpec":
        n = lattice.site_count
        return cls(lattice, np.ones(n), np.zeros(n))

    @classmethod
    def from_sites(cls, lattice: LatticeConfig, sites: Mapping[int, tuple[float, float]]) -> "MemorySpec":
        """All sites ``(1, 0)`` except the signed labels given in ``sites``."""
        a = np.ones(lattice.site_count)
        b = np.zeros(lattice.site_count)
        for x, (ax, bx) in sites.items():
            i = lattice.signed_to_index(x)
            a[i], b[i] = ax, bx
        return cls(lattice, a, b)

    def at(self, x: int) -> tuple[float, float]:
        i = self.lattice.signed_to_index(x)
        return float(self.a[i]), float(self.b[i])

    def norm_defect(self) -> float:
        return float(np.sum((self.a**2 + self.b**2 - 1.0) ** 2))

    def __eq__(self, other):
        if not isinstance(other, MemorySpec):
            return NotImplemented
        return (
            self.lattice == other.lattice
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    __hash__ = None


@dataclass(frozen=True)
class WalkProgram:
    """Control coefficients ``(A_k, B_k)``, k = 1.., of the localized initial state.

    The walker starts at position 0 moving left.  Site ``x < 0`` holds memory
    ``(A_{-x}, B_{-x})``; sites ``x >= 0`` hold ``|0>``.  Coefficients not
    supplied (up to ``N // 2``) default to ``(1, 0)``.
    """

    lattice: LatticeConfig
    A: tuple[float, ...]
    B: tuple[float, ...]
    start_position: int = field(default=0, init=False)
    start_velocity: Velocity = field(default=Velocity.MINUS, init=False)

    def __post_init__(self):
        A = tuple(float(v) for v in self.A)
        B = tuple(float(v) for v in self.B)
        if len(A) != len(B):
            raise ValidationError(f"got {len(A)} A coefficients but {len(B)} B coefficients")
        if len(A) > self.lattice.half:
            raise ValidationError(
                f"{len(A)} coefficient pairs do not fit N={self.lattice.site_count} "
                f"(at most {self.lattice.half})"
            )
        for k, (a, b) in enumerate(zip(A, B), start=1):
            _check_pair(a, b, f"coefficient k={k}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_b(cls, lattice: LatticeConfig, B: Iterable[float]) -> "WalkProgram":
        B = [float(b) for b in B]
        return cls(lattice, tuple(math.sqrt(max(0.0, 1.0 - b * b)) for b in B), tuple(B))

    @classmethod
    def from_coefficients(cls, lattice: LatticeConfig, coeffs) -> "WalkProgram":
        """Build from anything exposing ``A`` and ``B`` sequences.

        Trailing ``(1, 0)`` pairs beyond ``N // 2`` are dropped; anything else
        there cannot be placed on the lattice and is rejected.
        """
        A, B = list(coeffs.A), list(coeffs.B)
        h = lattice.half
        for k in range(h, len(A)):
            if (A[k], B[k]) != (1.0, 0.0):
                raise ValidationError(
                    f"coefficient k={k + 1} needs a lattice with N >= {2 * (k + 1) + 1}"
                )
        return cls(lattice, tuple(A[:h]), tuple(B[:h]))

    def coefficient(self, k: int) -> tuple[float, float]:
        if 1 <= k <= len(self.A):
            return self.A[k - 1], self.B[k - 1]
        return 1.0, 0.0

    def memory(self) -> MemorySpec:
        return build_initial_memory(self)


def build_initial_memory(program: WalkProgram) -> MemorySpec:
    lat = program.lattice
    a = np.ones(lat.site_count)
    b = np.zeros(lat.site_count)
    for k in range(1, len(program.A) + 1):
        i = lat.signed_to_index(-k)
        a[i], b[i] = program.coefficient(k)
    return MemorySpec(lat, a, b)


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Position distribution at time ``t`` over signed labels."""

    t: int
    positions: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=float)
        if positions.shape != probs.shape:
            raise ValidationError("positions and probs must have the same shape")
        if np.any(probs < -NORM_ATOL) or np.any(probs > 1 + NORM_ATOL):
            raise ConsistencyError(f"probabilities outside [0, 1] at t={self.t}")
        mass = math.fsum(probs)
        if abs(mass - 1.0) > MASS_ATOL:
            raise ConsistencyError(f"total mass {mass!r} != 1 at t={self.t}")
        positions.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, t: int, values: Mapping[int, float]) -> "DensityProfile":
        xs = sorted(values)
        return cls(t, np.array(xs, dtype=np.int64), np.array([values[x] for x in xs], dtype=float))

    def p(self, x: int) -> float:
        hit = np.nonzero(self.positions == x)[0]
        return float(self.probs[hit].sum()) if hit.size else 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(x): float(p) for x, p in zip(self.positions, self.probs)}

    @property
    def mean(self) -> float:
        return float(np.dot(self.positions, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return max(0.0, float(np.dot((self.positions - m) ** 2, self.probs)))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def light_cone_violation(self) -> float:
        """Largest probability found at ``|x| > t`` or at odd ``x - t``."""
        outside = (np.abs(self.positions) > self.t) | ((self.positions - self.t) % 2 != 0)
        return float(np.max(np.abs(self.probs[outside]), initial=0.0))


def dense_vector(profile: DensityProfile, lattice: LatticeConfig) -> np.ndarray:
    """Probabilities laid out over internal indices of ``lattice``."""
    out = np.zeros(lattice.site_count)
    for x, p in zip(profile.positions, profile.probs):
        out[lattice.signed_to_index(lattice.wrap(int(x)))] += p
    return out


def max_deviation(p: DensityProfile, q: DensityProfile, lattice: LatticeConfig) -> float:
    return float(np.max(np.abs(dense_vector(p, lattice) - dense_vector(q, lattice))))


def profiles_max_deviation(
    ps: Sequence[DensityProfile], qs: Sequence[DensityProfile], lattice: LatticeConfig
) -> float:
    if len(ps) != len(qs):
        raise ValidationError(f"profile sequences differ in length ({len(ps)} vs {len(qs)})")
    return max((max_deviation(p, q, lattice) for p, q in zip(ps, qs)), default=0.0)
