"""Shared helpers for randomized tests."""

from __future__ import annotations

import math

import numpy as np

from digseg import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties, SolveState


def random_digraph(rng: np.random.Generator, n: int, m: int) -> DirectedGraph:
    """Random multigraph without self-loops; parallel edges allowed."""
    edges = []
    while len(edges) < m:
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u != v:
            edges.append((u, v))
    return DirectedGraph.from_edges(n, edges)


def random_arborescence(rng: np.random.Generator, n: int) -> DirectedGraph:
    """Random arborescence over a random labeling; root is perm[0]."""
    perm = rng.permutation(n)
    edges = []
    for pos in range(1, n):
        parent = perm[int(rng.integers(0, pos))]
        edges.append((int(parent), int(perm[pos])))
    return DirectedGraph.from_edges(n, edges)


def random_features(rng: np.random.Generator, n: int, d: int, scale: float = 1.0) -> FeatureMatrix:
    return FeatureMatrix.from_array(rng.normal(0.0, scale, size=(n, d)))


def random_state(
    rng: np.random.Generator,
    n: int,
    m: int,
    d: int,
    k: int,
    penalties: Penalties,
) -> SolveState:
    graph = random_digraph(rng, n, m)
    features = random_features(rng, n, d)
    assign = rng.integers(1, k + 1, size=n)
    return SolveState(graph, features, penalties, assign, k)


def sse_of_partition(assign, values) -> float:
    """k-means SSE computed with plain Python accumulation (independent route)."""
    groups = {}
    for v, g in enumerate(assign):
        groups.setdefault(int(g), []).append(v)
    total = 0.0
    for members in groups.values():
        dim = len(values[0])
        mean = [math.fsum(values[v][j] for v in members) / len(members) for j in range(dim)]
        total += math.fsum(
            (values[v][j] - mean[j]) ** 2 for v in members for j in range(dim)
        )
    return total


def rel_close(a: float, b: float, rtol: float = 1e-9) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))
