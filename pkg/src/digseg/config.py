"""Run configuration and result types shared by the solvers."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties
from .objective import CostBreakdown, total_cost

SOLVER_KINDS = ("greedy", "treedp", "mcut")
COMMIT_TOL = 1e-9


@dataclass(frozen=True)
class SolveConfig:
    max_iters: int = 100
    restarts: int = 10
    seed: int = 0
    rel_tol: float = 1e-9
    solver_kind: str = "greedy"
    forbid_empty: bool = False
    track_steps: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be at least 1, got {self.restarts}")
        if self.solver_kind not in SOLVER_KINDS:
            raise ValueError(f"solver_kind must be one of {SOLVER_KINDS}, got {self.solver_kind!r}")

    def with_seed(self, seed: int) -> "SolveConfig":
        return dataclasses.replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SolveResult:
    partition: OrderedPartition
    breakdown: CostBreakdown
    iterations: int
    converged: bool
    seed: int
    seconds: float
    step_losses: Optional[list[float]] = None


def norm_seed(seed: int) -> int:
    """Clamp a seed into the unsigned 64-bit range numpy generators accept."""
    return int(seed) % (1 << 64)


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Deterministic per-iteration generator derived from the run seed."""
    return np.random.default_rng((norm_seed(seed), iteration))


def small_improvement(old: float, new: float, rel_tol: float) -> bool:
    """True when the relative loss improvement falls below `rel_tol`.

    Losses can span orders of magnitude, so the improvement is scaled by
    max(old, 1).  Two infinite losses are incomparable here (progress may
    still be happening in the count of infinitely-penalized edges), so the
    loops keep going until they stop committing moves.
    """
    if math.isinf(old):
        return False
    return (old - new) / max(old, 1.0) < rel_tol


def finish_result(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    partition: OrderedPartition,
    iterations: int,
    converged: bool,
    seed: int,
    seconds: float,
    step_losses: Optional[list[float]] = None,
) -> SolveResult:
    """Assemble a result with the breakdown recomputed from scratch."""
    return SolveResult(
        partition=partition,
        breakdown=total_cost(graph, features, partition, penalties),
        iterations=iterations,
        converged=converged,
        seed=seed,
        seconds=seconds,
        step_losses=step_losses,
    )
