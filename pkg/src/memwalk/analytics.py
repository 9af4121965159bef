"""Closed-form amplitudes, densities and moments for localized programs.

Coefficients are indexed from ``k = 1``; any ``k`` outside the supplied
sequence behaves as ``(A, B) = (1, 0)``.  Empty products are 1 and empty
sums 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from memwalk.lattice import NORM_ATOL, DensityProfile, InfeasibleError, ValidationError


@dataclass(frozen=True)
class ClosedFormParams:
    A: tuple[float, ...]
    B: tuple[float, ...]
    horizon: int | None = None

    def __post_init__(self):
        A = tuple(float(a) for a in self.A)
        B = tuple(float(b) for b in self.B)
        if len(A) != len(B):
            raise ValidationError(f"got {len(A)} A coefficients but {len(B)} B coefficients")
        for k, (a, b) in enumerate(zip(A, B), start=1):
            if a < -NORM_ATOL or b < -NORM_ATOL or abs(a * a + b * b - 1.0) > NORM_ATOL:
                raise ValidationError(f"coefficient k={k}: ({a}, {b}) is not a unit pair in [0, 1]")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.horizon is None:
            object.__setattr__(self, "horizon", max(len(A) - 1, 0))

    @classmethod
    def from_b(cls, B: Sequence[float], horizon: int | None = None) -> "ClosedFormParams":
        B = [float(b) for b in B]
        return cls(tuple(math.sqrt(max(0.0, 1.0 - b * b)) for b in B), tuple(B), horizon)

    @classmethod
    def from_b_squared(cls, B2: Sequence[float], horizon: int | None = None) -> "ClosedFormParams":
        return cls(
            tuple(math.sqrt(max(0.0, 1.0 - b2)) for b2 in B2),
            tuple(math.sqrt(max(0.0, b2)) for b2 in B2),
            horizon,
        )

    def a(self, k: int) -> float:
        return self.A[k - 1] if 1 <= k <= len(self.A) else 1.0

    def b(self, k: int) -> float:
        return self.B[k - 1] if 1 <= k <= len(self.B) else 0.0

    def prod_a(self, n: int) -> float:
        return math.prod(self.a(i) for i in range(1, n + 1))

    def prod_a2(self, n: int) -> float:
        return math.prod(self.a(i) ** 2 for i in range(1, n + 1))


def amplitude_minus(x: int, t: int, params: ClosedFormParams) -> float:
    return params.prod_a(t) if x == -t else 0.0


def amplitude_plus(x: int, t: int, params: ClosedFormParams) -> float:
    if abs(x) > t or x == -t or (x - t) % 2:
        return 0.0
    k = (t - x) // 2
    return params.b(k + 1) * params.prod_a(k)


@dataclass(frozen=True, eq=False)
class RecurrenceTable:
    """``minus[t, x + T]`` and ``plus[t, x + T]`` for ``|x| <= T``."""

    T: int
    minus: np.ndarray
    plus: np.ndarray

    def at(self, x: int, t: int) -> tuple[float, float]:
        if abs(x) > self.T:
            return 0.0, 0.0
        return float(self.minus[t, x + self.T]), float(self.plus[t, x + self.T])

    def density(self, t: int) -> np.ndarray:
        return self.minus[t] ** 2 + self.plus[t] ** 2


def recurrence_evolve(params: ClosedFormParams, T: int) -> RecurrenceTable:
    """Iterate the amplitude recurrences on the infinite line from a
    left-mover at the origin."""
    width = 2 * T + 3  # one guard cell each side
    c = T + 1
    minus = np.zeros((T + 1, width))
    plus = np.zeros((T + 1, width))
    minus[0, c] = 1.0
    for t in range(T):
        for j in range(1, width - 1):
            x = j - c
            minus[t + 1, j] = params.a(-x) * minus[t, j + 1]
            plus[t + 1, j] = plus[t, j - 1] + params.b(-x + 2) * minus[t, j - 1]
    return RecurrenceTable(T, minus[:, 1:-1].copy(), plus[:, 1:-1].copy())


def density(x: int, t: int, params: ClosedFormParams) -> float:
    if abs(x) > t or (x - t) % 2:
        return 0.0
    if x == -t:
        return params.prod_a2(t)
    k = (t - x) // 2
    return params.b(k + 1) ** 2 * params.prod_a2(k)


def density_profile(t: int, params: ClosedFormParams) -> DensityProfile:
    xs = np.arange(-t, t + 1)
    return DensityProfile(t, xs, np.array([density(int(x), t, params) for x in xs]))


def _peel_terms(t: int, params: ClosedFormParams):
    # mass peeled off the left edge at step k+1, now sitting at x = t - 2k
    return [(t - 2 * k, params.b(k + 1) ** 2 * params.prod_a2(k)) for k in range(t)]


def mean(t: int, params: ClosedFormParams) -> float:
    return -t * params.prod_a2(t) + math.fsum(x * w for x, w in _peel_terms(t, params))


def variance(t: int, params: ClosedFormParams) -> float:
    """The displayed variance sum, i.e. ``E[X^2] - E[X]^2`` written out."""
    stay = params.prod_a2(t)
    terms = [((2 * i - t), params.b(i + 1) ** 2 * params.prod_a2(i)) for i in range(t)]
    inner = t * stay - math.fsum(-d * w for d, w in terms)
    return t * t * stay - inner**2 + math.fsum(d * d * w for d, w in terms)


def moments_from_density(t: int, params: ClosedFormParams) -> tuple[float, float]:
    prof = density_profile(t, params)
    return prof.mean, prof.variance


@dataclass(frozen=True)
class ScenarioParams:
    """``linear`` takes ``b1``; ``parabolic`` takes ``z``."""

    variant: str
    b1: float | None = None
    z: float | None = None

    def __post_init__(self):
        if self.variant == "linear":
            if self.b1 is None or not 0.0 <= self.b1 <= 1.0:
                raise ValidationError(f"linear scenario needs 0 <= b1 <= 1, got {self.b1}")
        elif self.variant == "parabolic":
            if self.z is None or not (math.isfinite(self.z) and self.z > 0):
                raise ValidationError(f"parabolic scenario needs z > 0, got {self.z}")
        else:
            raise ValidationError(f"unknown scenario variant {self.variant!r}")

    @classmethod
    def linear(cls, b1: float) -> "ScenarioParams":
        return cls("linear", b1=b1)

    @classmethod
    def linear_velocity(cls, v: float) -> "ScenarioParams":
        """Linear scenario with mean velocity ``v = 2 B_1^2 - 1``."""
        if not -1.0 <= v <= 1.0:
            raise ValidationError(f"mean velocity must lie in [-1, 1], got {v}")
        return cls("linear", b1=math.sqrt((1.0 + v) / 2.0))

    @classmethod
    def parabolic(cls, z: float) -> "ScenarioParams":
        return cls("parabolic", z=z)

    @property
    def velocity(self) -> float | None:
        return 2 * self.b1**2 - 1 if self.variant == "linear" else None

    @property
    def horizon(self) -> int | None:
        """Largest feasible time, ``None`` when unbounded."""
        if self.variant == "linear":
            return None
        # floor((z + 2) / z) with slack for values like z = 0.1
        return int(math.floor((self.z + 2.0) / self.z + 1e-9))


def _parabolic_b2(z: float, k: int) -> float:
    # constant peel fraction z / (z + 2) per step
    b2 = z / (2.0 - z * (k - 2))
    return 1.0 if abs(b2 - 1.0) <= 1e-12 else b2


def scenario_params(s: ScenarioParams, T: int) -> ClosedFormParams:
    if T < 0:
        raise ValidationError(f"horizon must be >= 0, got {T}")
    if s.variant == "linear":
        return ClosedFormParams.from_b([s.b1], horizon=T)
    h = s.horizon
    if T > h:
        k = h + 1
        raise InfeasibleError(
            f"parabolic z={s.z}: coefficient k={k} needs z*(k-1) <= 2; "
            f"max feasible horizon is T={h}"
        )
    return ClosedFormParams.from_b_squared([_parabolic_b2(s.z, k) for k in range(1, T + 1)], horizon=T)


def scenario_mean(s: ScenarioParams, t: int) -> float:
    if s.variant == "linear":
        return -t * (1 - 2 * s.b1**2)
    return t * (s.z * t - 2) / (s.z + 2)


def scenario_sigma(s: ScenarioParams, t: int) -> float:
    """Closed-form standard deviation of the scenario at time ``t``."""
    if s.variant == "linear":
        b2 = s.b1**2
        return t * math.sqrt(4 * b2 * (1 - b2))
    if t > s.horizon:
        raise InfeasibleError(f"t={t} beyond the feasibility horizon T={s.horizon} for z={s.z}")
    z = s.z
    num = t * (-3 * t * (t * z - 2) ** 2 + (z + 2) * (-2 * t**2 * z + 3 * t * z + 6 * t + 2 * z))
    return math.sqrt(max(0.0, num / (3 * (z + 2) ** 2)))


def scenario_edge_density(s: ScenarioParams, t: int) -> float:
    """Mass still on the left-moving edge ``x = -t``."""
    if s.variant == "linear":
        return 1.0 if t == 0 else 1 - s.b1**2
    return 1 - t * s.z / (s.z + 2)
