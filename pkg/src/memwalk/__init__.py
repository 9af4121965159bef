"""Quantum walk with one memory qubit per site.

The walker's whole future density is fixed by the initial memory state.
This package simulates it exactly (sparse branches and a dense oracle),
evaluates the closed forms, and designs memory states for target densities.
"""

from memwalk.analytics import ClosedFormParams, ScenarioParams, scenario_params
from memwalk.designer import TargetDensity, design, predicted_density, roundtrip_check
from memwalk.engines import run
from memwalk.evolution import Branch, QTable, SparseState, position_distribution, q_table, step
from memwalk.kernels import BACKEND
from memwalk.lattice import (
    DensityProfile,
    LatticeConfig,
    MemorySpec,
    Velocity,
    WalkProgram,
    build_initial_memory,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Branch",
    "ClosedFormParams",
    "DensityProfile",
    "LatticeConfig",
    "MemorySpec",
    "QTable",
    "ScenarioParams",
    "SparseState",
    "TargetDensity",
    "Velocity",
    "WalkProgram",
    "build_initial_memory",
    "design",
    "position_distribution",
    "predicted_density",
    "q_table",
    "roundtrip_check",
    "run",
    "scenario_params",
    "step",
]
