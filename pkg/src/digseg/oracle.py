"""Exhaustive exact solvers, used as ground truth in tests and benchmarks.

Both solvers enumerate every one of the k^n assignments and score it from
the definitions (means plus direct residuals, masked infinite penalties),
independently of the incremental machinery the production solvers rely on.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties
from .objective import Centroids

ENUMERATION_GUARD = 10_000_000
_CHUNK = 1 << 14


class OracleSizeError(ValueError):
    """The instance exceeds the k^n enumeration guard."""


def _check_guard(n: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"group count must be at least 1, got {k}")
    if k**n > ENUMERATION_GUARD:
        raise OracleSizeError(f"k^n = {k}**{n} exceeds the enumeration guard {ENUMERATION_GUARD}")


def _assignment_chunk(start: int, stop: int, n: int, k: int) -> np.ndarray:
    """Rows `start..stop-1` of the lexicographic assignment enumeration.

    Assignment r is the base-k expansion of r with vertex 0 as the most
    significant digit, shifted to group labels 1..k.
    """
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    for v in range(n):
        out[:, v] = (idx // k ** (n - 1 - v)) % k + 1
    return out


def _edge_penalty(assign_rows: np.ndarray, graph: DirectedGraph, penalties: Penalties) -> np.ndarray:
    """Penalty term per enumerated assignment row."""
    rows = assign_rows.shape[0]
    pen = np.zeros(rows, dtype=np.float64)
    if graph.m == 0:
        return pen
    gs = assign_rows[:, graph.edge_src]
    gd = assign_rows[:, graph.edge_dst]
    fwd = (gs < gd).sum(axis=1)
    bwd = (gs > gd).sum(axis=1)
    if math.isinf(penalties.lambda_f):
        pen[fwd > 0] = math.inf
    else:
        pen += penalties.lambda_f * fwd
    if math.isinf(penalties.lambda_b):
        pen[bwd > 0] = math.inf
    else:
        pen += penalties.lambda_b * bwd
    return pen


def _scan(n: int, k: int, score_chunk) -> tuple[np.ndarray, float]:
    """Minimize over the full enumeration, keeping the first (lexicographically
    smallest) assignment among ties."""
    total = k**n
    best_cost = math.inf
    best_row = _assignment_chunk(0, 1, n, k)[0]
    have = False
    for start in range(0, total, _CHUNK):
        rows = _assignment_chunk(start, min(start + _CHUNK, total), n, k)
        costs = score_chunk(rows)
        pos = int(np.argmin(costs))
        if not have or costs[pos] < best_cost:
            best_cost = float(costs[pos])
            best_row = rows[pos].copy()
            have = True
    return best_row, best_cost


def brute_force_dgs(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    k: int,
) -> tuple[OrderedPartition, float]:
    """Global minimizer of the full objective (optimal centers per group).

    Ties break toward the lexicographically smallest assignment array.
    Guarded at k^n <= 10^7.
    """
    n = graph.n
    _check_guard(n, k)
    vals = features.values

    def score(rows: np.ndarray) -> np.ndarray:
        coh = np.zeros(rows.shape[0], dtype=np.float64)
        for g in range(1, k + 1):
            mask = rows == g
            cnt = mask.sum(axis=1)
            sums = mask.astype(np.float64) @ vals
            means = sums / np.maximum(cnt, 1)[:, None]
            diff = vals[None, :, :] - means[:, None, :]
            sq = (diff * diff).sum(axis=2)
            coh += (sq * mask).sum(axis=1)
        return coh + _edge_penalty(rows, graph, penalties)

    row, cost = _scan(n, k, score)
    return OrderedPartition.from_labels(k, row), cost


def brute_force_fixed_centroids(
    graph: DirectedGraph,
    features: FeatureMatrix,
    centroids: Centroids,
    penalties: Penalties,
    k: int,
) -> tuple[OrderedPartition, float]:
    """Global minimizer of the objective under externally fixed group centers.

    Same enumeration, tie-break, and guard as `brute_force_dgs`.
    """
    n = graph.n
    _check_guard(n, k)
    if centroids.k != k:
        raise ValueError(f"expected {k} centroid rows, got {centroids.k}")
    vals = features.values
    sqd = np.empty((n, k), dtype=np.float64)
    for g in range(k):
        diff = vals - centroids.mu[g]
        sqd[:, g] = (diff * diff).sum(axis=1)
    sqd[:, ~centroids.defined] = math.inf
    vidx = np.arange(n)

    def score(rows: np.ndarray) -> np.ndarray:
        feat = sqd[vidx[None, :], rows - 1].sum(axis=1)
        return feat + _edge_penalty(rows, graph, penalties)

    row, cost = _scan(n, k, score)
    return OrderedPartition.from_labels(k, row), cost
