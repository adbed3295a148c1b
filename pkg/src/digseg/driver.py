"""Alternating optimization driver: random init, solver dispatch, restarts.

One outer iteration recomputes group centers from the current partition and
then runs the configured partition step: an exact tree solve, a pairwise cut
sweep, or a greedy scan.  The center step never increases the fixed-center
objective (means are optimal) and neither does any partition step, so the
loss sequence is non-increasing.  Empty groups are reseeded before partition
steps that need every center defined.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import greedy as greedy_mod
from . import mincut as mincut_mod
from . import treedp as treedp_mod
from .config import SolveConfig, SolveResult, finish_result, norm_seed, small_improvement
from .core import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties
from .objective import SolveState


def random_init(n: int, k: int, seed: int) -> OrderedPartition:
    """Uniformly random assignment of n vertices into k groups, seeded."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    rng = np.random.default_rng(norm_seed(seed))
    return OrderedPartition.from_labels(k, rng.integers(1, k + 1, size=n))


def repair_empty_groups(state: SolveState, features: FeatureMatrix, seed: int) -> SolveState:
    """Reseed each empty group with one vertex, farthest from its own center.

    Donor groups must keep at least two members so the repair cannot create a
    new empty group; ties go to the lowest vertex id.  With fewer vertices
    than groups some groups necessarily stay empty (visible via
    `state.empty_groups()`).  Deterministic regardless of `seed`; the
    argument is kept for interface stability.
    """
    del seed
    while True:
        empties = state.empty_groups()
        if not empties:
            return state
        counts = state.counts[state.assign]
        movable = counts >= 2
        if not movable.any():
            return state
        centroids = state.centroids()
        own_mu = centroids.mu[state.assign - 1]
        dist2 = ((features.values - own_mu) ** 2).sum(axis=1)
        dist2 = np.where(movable, dist2, -1.0)
        v = int(np.argmax(dist2))  # argmax keeps the lowest id among ties
        state.apply_move(v, empties[0])


def _make_repair(features: FeatureMatrix, seed: int):
    def hook(state: SolveState) -> None:
        if state.empty_groups():
            repair_empty_groups(state, features, seed)

    return hook


def _run_treedp(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    k: int,
    init: OrderedPartition,
    config: SolveConfig,
    repair_hook,
) -> SolveResult:
    start = time.perf_counter()
    state = SolveState.from_partition(graph, features, penalties, init)
    step_log: Optional[list[float]] = [] if config.track_steps else None
    loss = state.total()
    converged = False
    iterations = 0
    for it in range(1, config.max_iters + 1):
        iterations = it
        if repair_hook is not None:
            repair_hook(state)
        centroids = state.centroids()
        new_part, _ = treedp_mod.solve_tree_partition(graph, features, centroids, penalties)
        if np.array_equal(new_part.assign, state.assign):
            converged = True
            break
        state = SolveState.from_partition(graph, features, penalties, new_part)
        new_loss = state.total()
        if step_log is not None:
            step_log.append(new_loss)
        if small_improvement(loss, new_loss, config.rel_tol):
            converged = True
            loss = new_loss
            break
        loss = new_loss
    return finish_result(
        graph,
        features,
        penalties,
        state.partition(),
        iterations,
        converged,
        config.seed,
        time.perf_counter() - start,
        step_log,
    )


def run_iterative(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    k: int,
    config: SolveConfig,
) -> SolveResult:
    """One alternating run from a seeded random initialization.

    The tree solver requires an arborescence forest; the pairwise cut solver
    requires k >= 2.  Empty groups are reseeded before every tree / pair-cut
    partition step, and before greedy scans only under `forbid_empty`.
    """
    init = random_init(graph.n, k, config.seed)
    if config.solver_kind == "treedp":
        return _run_treedp(
            graph, features, penalties, k, init, config, _make_repair(features, config.seed)
        )
    if config.solver_kind == "mcut":
        return mincut_mod.run_mcut(
            graph, features, penalties, k, init, config,
            _repair=_make_repair(features, config.seed),
        )
    repair = _make_repair(features, config.seed) if config.forbid_empty else None
    return greedy_mod.run_greedy(graph, features, penalties, k, init, config, _repair=repair)


def _restart_worker(args) -> SolveResult:
    graph, features, penalties, k, config = args
    return run_iterative(graph, features, penalties, k, config)


def multi_restart(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    k: int,
    config: SolveConfig,
    threads: int = 1,
) -> SolveResult:
    """Best of `config.restarts` independent runs with seeds seed, seed+1, ...

    Returns the minimum-loss result, breaking ties toward the lower seed;
    deterministic for a fixed configuration whether run serially or with
    process parallelism (`threads` > 1).
    """
    configs = [config.with_seed(config.seed + r) for r in range(config.restarts)]
    if threads > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=min(threads, config.restarts)) as pool:
            results = list(pool.map(
                _restart_worker,
                [(graph, features, penalties, k, c) for c in configs],
            ))
    else:
        results = [run_iterative(graph, features, penalties, k, c) for c in configs]
    return min(results, key=lambda r: (r.breakdown.total, r.seed))
