"""Inverse design: memory coefficients that realize a prescribed density.

A target ``f_0, ..., f_{T-1}`` asks for mass ``f_k`` at ``x = t - 2k`` for
every ``t > k``, with the remainder ``1 - sum_{i<t} f_i`` on the left edge
``x = -t``.  The coefficients are

    B_k^2 = f_{k-1} / (1 - sum_{i=0}^{k-2} f_i),    A_k^2 = 1 - B_k^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from memwalk.analytics import ClosedFormParams
from memwalk.lattice import DensityProfile, InfeasibleError, LatticeConfig, WalkProgram

FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class TargetDensity:
    f: tuple[float, ...]

    def __post_init__(self):
        f = tuple(float(v) for v in self.f)
        running = 0.0
        for i, v in enumerate(f):
            if not math.isfinite(v) or v < -FEASIBILITY_SLACK or v > 1 + FEASIBILITY_SLACK:
                raise InfeasibleError(f"f_{i} = {v!r} outside [0, 1]")
            running = math.fsum(f[: i + 1])
            if running > 1 + FEASIBILITY_SLACK:
                raise InfeasibleError(f"cumulative target mass {running!r} exceeds 1 at f_{i}")
        object.__setattr__(self, "f", f)

    @property
    def horizon(self) -> int:
        return len(self.f)

    def remaining(self, t: int) -> float:
        """``1 - sum_{i<t} f_i``."""
        return 1.0 - math.fsum(self.f[:t])


def _as_target(f) -> TargetDensity:
    return f if isinstance(f, TargetDensity) else TargetDensity(tuple(f))


def design(f: TargetDensity | Sequence[float]) -> ClosedFormParams:
    target = _as_target(f)
    A, B = [], []
    for k in range(1, target.horizon + 1):
        left = target.remaining(k - 1)
        fk = target.f[k - 1]
        if left <= FEASIBILITY_SLACK:
            if fk > FEASIBILITY_SLACK:
                raise InfeasibleError(f"f_{k - 1} = {fk!r} requested after the target mass is exhausted")
            A.append(1.0)
            B.append(0.0)
            continue
        b2 = min(max(fk / left, 0.0), 1.0)
        A.append(math.sqrt(1.0 - b2))
        B.append(math.sqrt(b2))
    return ClosedFormParams(tuple(A), tuple(B), horizon=target.horizon)


def predicted_density(f: TargetDensity | Sequence[float], x: int, t: int) -> float:
    target = _as_target(f)
    if t > target.horizon:
        raise ValueError(f"t={t} beyond target horizon {target.horizon}")
    if abs(x) > t or (x - t) % 2:
        return 0.0
    if x == -t:
        return target.remaining(t)
    return target.f[(t - x) // 2]


def predicted_profile(f: TargetDensity | Sequence[float], t: int) -> DensityProfile:
    target = _as_target(f)
    xs = np.arange(-t, t + 1)
    return DensityProfile(t, xs, np.array([predicted_density(target, int(x), t) for x in xs]))


def lattice_for(horizon: int) -> LatticeConfig:
    """Smallest lattice keeping a horizon-``T`` run clear of the wrap."""
    return LatticeConfig(max(5, 2 * horizon + 3))


def roundtrip(
    f: TargetDensity | Sequence[float], engine: str = "sparse", lattice: LatticeConfig | None = None
) -> list[tuple[int, int, float, float]]:
    """``(t, x, p_target, p_sim)`` for every lattice site and ``t <= T``."""
    from memwalk import engines

    target = _as_target(f)
    T = target.horizon
    lattice = lattice or lattice_for(T)
    if T >= lattice.half:
        raise ValueError(f"horizon T={T} needs N > {2 * T + 1}, got N={lattice.site_count}")
    program = WalkProgram.from_coefficients(lattice, design(target))
    rows = []
    for prof in engines.run(program, T, engine):
        sim = prof.as_dict()
        for x in lattice.labels:
            x = int(x)
            rows.append((prof.t, x, predicted_density(target, x, prof.t), sim.get(x, 0.0)))
    return rows


def roundtrip_check(
    f: TargetDensity | Sequence[float], engine: str = "sparse", lattice: LatticeConfig | None = None
) -> float:
    return max(abs(p - q) for _, _, p, q in roundtrip(f, engine, lattice))
