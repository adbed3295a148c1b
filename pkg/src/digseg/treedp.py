"""Exact fixed-center partitioning of arborescence forests by dynamic programming.

For each vertex v and group i, `c[v, i]` is the optimal cost of partitioning
the subtree rooted at v with v placed in group i.  A child w of v either
shares v's group (cost c[w, i]), sits in a later group (forward edge,
lambda_f + u[w, i]) or in an earlier one (backward edge, lambda_b + l[w, i]),
where l and u are prefix/suffix minima of c over groups.  The recurrence is
evaluated bottom-up with an explicit stack, so arbitrarily deep paths are fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties
from .objective import Centroids, vertex_group_costs


class ArborescenceError(ValueError):
    """The graph is not a forest of arborescences."""


def check_arborescence(graph: DirectedGraph) -> list[int]:
    """Return the root vertices if the graph is a forest of arborescences.

    Requires in-degree <= 1 everywhere and no cycles; the error names an
    offending vertex.
    """
    for v in range(graph.n):
        if graph.in_degree(v) > 1:
            raise ArborescenceError(
                f"vertex {v} has in-degree {graph.in_degree(v)}; trees require at most 1"
            )
    roots = [v for v in range(graph.n) if graph.in_degree(v) == 0]
    seen = np.zeros(graph.n, dtype=bool)
    for r in roots:
        stack = [r]
        seen[r] = True
        while stack:
            v = stack.pop()
            for w in graph.out_adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    if graph.n and not seen.all():
        v = int(np.flatnonzero(~seen)[0])
        raise ArborescenceError(f"vertex {v} lies on a directed cycle")
    return roots


def _processing_order(graph: DirectedGraph, roots: list[int]) -> list[int]:
    """Vertices ordered so every child precedes its parent (reversed preorder)."""
    pre: list[int] = []
    for r in roots:
        stack = [r]
        while stack:
            v = stack.pop()
            pre.append(v)
            stack.extend(graph.out_adj[v])
    pre.reverse()
    return pre


@dataclass(frozen=True, eq=False)
class DpTables:
    """Per-vertex cost tables (columns are groups 1..k, stored 0-based).

    `ell[v, i]` / `u[v, i]` are the cheapest costs of placing v strictly
    below / above group i+1, with `ell_arg` / `u_arg` holding the smallest
    0-based group attaining them (-1 where the range is empty).
    """

    c: np.ndarray
    ell: np.ndarray
    u: np.ndarray
    ell_arg: np.ndarray
    u_arg: np.ndarray
    roots: list[int]


def compute_dp_tables(
    graph: DirectedGraph,
    features: FeatureMatrix,
    centroids: Centroids,
    penalties: Penalties,
) -> DpTables:
    """Fill the dynamic-programming tables for an arborescence forest."""
    roots = check_arborescence(graph)
    n, k = graph.n, centroids.k
    lam_f, lam_b = penalties.lambda_f, penalties.lambda_b
    point_costs = vertex_group_costs(features, centroids)
    c = np.empty((n, k), dtype=np.float64)
    ell = np.empty((n, k), dtype=np.float64)
    u = np.empty((n, k), dtype=np.float64)
    ell_arg = np.full((n, k), -1, dtype=np.int64)
    u_arg = np.full((n, k), -1, dtype=np.int64)

    for v in _processing_order(graph, roots):
        row = point_costs[v].copy()
        for w in graph.out_adj[v]:
            row += np.minimum(c[w], np.minimum(lam_f + u[w], lam_b + ell[w]))
        c[v] = row
        best = math.inf
        arg = -1
        for i in range(k):
            ell[v, i] = best
            ell_arg[v, i] = arg
            if row[i] < best:  # strict: ties keep the lowest group
                best = row[i]
                arg = i
        best = math.inf
        arg = -1
        for i in range(k - 1, -1, -1):
            u[v, i] = best
            u_arg[v, i] = arg
            if row[i] <= best:  # non-strict: scanning right-to-left, ties keep the lowest group
                best = row[i]
                arg = i
    return DpTables(c=c, ell=ell, u=u, ell_arg=ell_arg, u_arg=u_arg, roots=roots)


def solve_tree_partition(
    graph: DirectedGraph,
    features: FeatureMatrix,
    centroids: Centroids,
    penalties: Penalties,
) -> tuple[OrderedPartition, float]:
    """Exact minimizer of the fixed-center objective on an arborescence forest.

    Groups with undefined centers are treated as forbidden (infinite point
    cost).  Tie-breaking is deterministic: equal branch cases prefer keeping
    the parent's group over a forward edge over a backward edge, and equal
    root costs prefer the lowest group.  The forest optimum is the sum of the
    per-tree optima.
    """
    tables = compute_dp_tables(graph, features, centroids, penalties)
    k = centroids.k
    lam_f, lam_b = penalties.lambda_f, penalties.lambda_b
    assign = np.ones(graph.n, dtype=np.int64)
    total = 0.0
    for r in tables.roots:
        root_col = int(np.argmin(tables.c[r]))
        total += float(tables.c[r, root_col])
        stack = [(r, root_col)]
        while stack:
            v, col = stack.pop()
            assign[v] = col + 1
            for w in graph.out_adj[v]:
                same = tables.c[w, col]
                fwd = lam_f + tables.u[w, col]
                bwd = lam_b + tables.ell[w, col]
                if same <= fwd and same <= bwd:
                    child_col = col
                elif fwd <= bwd:
                    child_col = int(tables.u_arg[w, col])
                else:
                    child_col = int(tables.ell_arg[w, col])
                stack.append((w, child_col))
    return OrderedPartition.from_labels(k, assign), total
