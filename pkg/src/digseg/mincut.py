"""Minimum s-t cut solvers: exact 2-group partitioning and the pairwise sweep.

Placing a vertex on the source side of the cut network means group 1 (or the
earlier group of a pair).  Terminal arc weights are squared distances to the
*other* side's center, so every s-t cut weighs exactly the fixed-center
objective of the partition it induces; edge arcs carry lambda_f forward and
lambda_b backward.  Infinite weights become a finite sentinel larger than any
cut that avoids them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import DirectedGraph, FeatureMatrix, OrderedPartition, Penalties
from .config import COMMIT_TOL, SolveConfig, SolveResult, finish_result, small_improvement
from .objective import Centroids, SolveState, fixed_centroid_cost, vertex_group_costs

GRID_SCALE = 2.0**40
_EPS = 0.5 / GRID_SCALE  # half a grid step: residuals below this are dust


def _snap(x: float) -> float:
    """Round a finite capacity to the 2^-40 binary grid.

    Floats at or above 2^12 already sit on the grid (their ulp is coarser),
    so only small values need explicit rounding.
    """
    if x >= 4096.0:
        return x
    return round(x * GRID_SCALE) / GRID_SCALE


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Directed flow network with designated source and sink.

    Arcs are parallel arrays (tails, heads, caps); capacities are finite,
    non-negative, and grid-snapped, with infinite inputs replaced by the
    sentinel.  `node_labels` maps internal vertex nodes back to graph
    vertex ids.
    """

    num_nodes: int
    source: int
    sink: int
    tails: np.ndarray
    heads: np.ndarray
    caps: np.ndarray
    sentinel: float
    node_labels: Optional[np.ndarray] = None

    @classmethod
    def from_arcs(
        cls,
        num_nodes: int,
        source: int,
        sink: int,
        arcs: list[tuple[int, int, float]],
        node_labels=None,
    ) -> "FlowNetwork":
        caps_raw = [c for _, _, c in arcs]
        snapped = [_snap(c) if math.isfinite(c) else math.inf for c in caps_raw]
        sentinel = 1.0 + sum(c for c in snapped if math.isfinite(c))
        caps = np.array([sentinel if math.isinf(c) else c for c in snapped], dtype=np.float64)
        tails = np.array([u for u, _, _ in arcs], dtype=np.int64)
        heads = np.array([v for _, v, _ in arcs], dtype=np.int64)
        if caps.size and caps.min() < 0:
            raise ValueError("arc capacities must be non-negative")
        labels = None if node_labels is None else np.asarray(node_labels, dtype=np.int64)
        return cls(
            num_nodes=num_nodes,
            source=source,
            sink=sink,
            tails=tails,
            heads=heads,
            caps=caps,
            sentinel=sentinel,
            node_labels=labels,
        )

    @property
    def num_arcs(self) -> int:
        return len(self.caps)

    def cut_weight(self, source_side) -> float:
        """Total capacity of arcs leaving the given source side."""
        side = np.zeros(self.num_nodes, dtype=bool)
        side[list(source_side)] = True
        crossing = side[self.tails] & ~side[self.heads]
        return float(self.caps[crossing].sum())


def max_flow_min_cut(net: FlowNetwork) -> tuple[float, set[int]]:
    """Minimum s-t cut value and its source side.

    Dinic's algorithm (BFS level graph + pointer-based blocking flow).  The
    returned source side is the complement of the nodes that can still reach
    the sink in the final residual network, i.e. the largest minimum cut;
    among cost ties this leans vertices toward the source side.  The value is
    re-summed from the crossing arc capacities.
    """
    n, s, t = net.num_nodes, net.source, net.sink
    to: list[int] = []
    res: list[float] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, c in zip(net.tails, net.heads, net.caps):
        if c <= 0.0:
            continue  # cannot carry flow; contributes its 0 weight regardless of side
        adj[int(u)].append(len(to))
        to.append(int(v))
        res.append(float(c))
        adj[int(v)].append(len(to))
        to.append(int(u))
        res.append(0.0)

    level = [-1] * n

    def bfs() -> bool:
        for i in range(n):
            level[i] = -1
        level[s] = 0
        queue = [s]
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for a in adj[u]:
                v = to[a]
                if level[v] < 0 and res[a] > _EPS:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level[t] >= 0

    while bfs():
        iters = [0] * n
        while True:
            path: list[int] = []
            u = s
            stuck = False
            while u != t:
                advanced = False
                while iters[u] < len(adj[u]):
                    a = adj[u][iters[u]]
                    v = to[a]
                    if res[a] > _EPS and level[v] == level[u] + 1:
                        path.append(a)
                        u = v
                        advanced = True
                        break
                    iters[u] += 1
                if not advanced:
                    if u == s:
                        stuck = True
                        break
                    a = path.pop()
                    u = to[a ^ 1]
                    iters[u] += 1
            if stuck:
                break
            bottleneck = min(res[a] for a in path)
            for a in path:
                res[a] -= bottleneck
                res[a ^ 1] += bottleneck

    # Nodes that can still reach the sink: reverse reachability over residual arcs.
    reaches_sink = [False] * n
    reaches_sink[t] = True
    queue = [t]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        for b in adj[x]:
            w = to[b]
            # arc (w -> x) is the partner of (x -> w)
            if not reaches_sink[w] and res[b ^ 1] > _EPS:
                reaches_sink[w] = True
                queue.append(w)
    side = {i for i in range(n) if not reaches_sink[i]}
    return net.cut_weight(side), side


def build_cut_graph_k2(
    graph: DirectedGraph,
    features: FeatureMatrix,
    mu1,
    mu2,
    penalties: Penalties,
) -> FlowNetwork:
    """Cut network for exact 2-group partitioning of a whole graph.

    Internal node v is graph vertex v; source = n, sink = n + 1.  The arc
    (s, v) weighs the cost of assigning v to group 2, the arc (v, t) the cost
    of group 1; each graph edge (v, w) adds (v, w) at lambda_f and (w, v) at
    lambda_b.
    """
    n = graph.n
    costs = vertex_group_costs(features, Centroids.from_rows([mu1, mu2]))
    to_g1, to_g2 = costs[:, 0], costs[:, 1]
    s, t = n, n + 1
    arcs: list[tuple[int, int, float]] = []
    for v in range(n):
        arcs.append((s, v, float(to_g2[v])))
        arcs.append((v, t, float(to_g1[v])))
    for u, v in graph.edges:
        arcs.append((u, v, penalties.lambda_f))
        arcs.append((v, u, penalties.lambda_b))
    return FlowNetwork.from_arcs(n + 2, s, t, arcs, node_labels=np.arange(n, dtype=np.int64))


def solve_two_partition(
    graph: DirectedGraph,
    features: FeatureMatrix,
    mu1,
    mu2,
    penalties: Penalties,
) -> tuple[OrderedPartition, float]:
    """Exact minimizer of the fixed-center objective for k = 2.

    The returned cost is the objective of the partition; it equals the cut
    value whenever no sentinel (infinite-weight) arc is cut.  Vertices whose
    placement is cost-neutral land in group 1.
    """
    net = build_cut_graph_k2(graph, features, mu1, mu2, penalties)
    _, side = max_flow_min_cut(net)
    assign = np.full(graph.n, 2, dtype=np.int64)
    for node in side:
        if node < graph.n:
            assign[node] = 1
    partition = OrderedPartition.from_labels(2, assign)
    cost = fixed_centroid_cost(graph, features, partition, Centroids.from_rows([mu1, mu2]), penalties)
    return partition, cost


def build_cut_graph_pair(
    state: SolveState,
    i: int,
    j: int,
    penalties: Penalties,
) -> FlowNetwork:
    """Cut network that redistributes the members of groups i and j (i < j).

    Only those vertices appear as internal nodes (`node_labels` maps them
    back).  Terminal weights gain corrections for edges to the groups
    strictly between i and j: such an edge is backward on one side of the
    choice and forward on the other.  Edges to groups outside (i, j) cost the
    same either way and are omitted.
    """
    if not (1 <= i < j <= state.k):
        raise ValueError(f"expected 1 <= i < j <= {state.k}, got ({i}, {j})")
    assign = state.assign
    members = np.flatnonzero((assign == i) | (assign == j))
    nloc = members.size
    s, t = nloc, nloc + 1
    if nloc == 0:
        return FlowNetwork.from_arcs(2, s, t, [], node_labels=members)
    cents = state.centroids()
    pair_cents = Centroids.from_rows([cents.mu_for(i), cents.mu_for(j)])
    costs = vertex_group_costs(FeatureMatrix.from_array(state.values[members]), pair_cents)
    cost_i = costs[:, 0]  # price of the source side (group i)
    cost_j = costs[:, 1]  # price of the sink side (group j)

    local = np.full(state.graph.n, -1, dtype=np.int64)
    local[members] = np.arange(nloc)
    esrc, edst = state.graph.edge_src, state.graph.edge_dst
    gs, gd = assign[esrc], assign[edst]
    in_pair_src = (gs == i) | (gs == j)
    in_pair_dst = (gd == i) | (gd == j)
    between_src = (gs > i) & (gs < j)
    between_dst = (gd > i) & (gd < j)

    # edges v -> W and W -> v for members v
    out_to_w = np.bincount(local[esrc[in_pair_src & between_dst]], minlength=nloc)
    in_from_w = np.bincount(local[edst[between_src & in_pair_dst]], minlength=nloc)

    arcs: list[tuple[int, int, float]] = []
    for lv in range(nloc):
        sv = float(cost_j[lv]) + penalties.cross_cost(int(in_from_w[lv]), int(out_to_w[lv]))
        vt = float(cost_i[lv]) + penalties.cross_cost(int(out_to_w[lv]), int(in_from_w[lv]))
        arcs.append((s, lv, sv))
        arcs.append((lv, t, vt))
    both = in_pair_src & in_pair_dst
    for u, v in zip(esrc[both], edst[both]):
        arcs.append((int(local[u]), int(local[v]), penalties.lambda_f))
        arcs.append((int(local[v]), int(local[u]), penalties.lambda_b))
    return FlowNetwork.from_arcs(nloc + 2, s, t, arcs, node_labels=members)


def redistribute_pair(
    state: SolveState,
    i: int,
    j: int,
    penalties: Penalties,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Optimal reassignment of the members of groups i and j between i and j.

    Returns (member vertex ids, target group per member) or None when either
    group is empty.  Holds every other group and all centers fixed.
    """
    if state.counts[i] == 0 or state.counts[j] == 0:
        return None
    net = build_cut_graph_pair(state, i, j, penalties)
    members = net.node_labels
    if members.size == 0:
        return None
    _, side = max_flow_min_cut(net)
    targets = np.full(members.size, j, dtype=np.int64)
    for node in side:
        if node < members.size:
            targets[node] = i
    return members, targets


def pair_sweep(
    state: SolveState,
    penalties: Penalties,
    commit_tol: float = COMMIT_TOL,
    step_log: Optional[list[float]] = None,
) -> int:
    """One pass over all group pairs in lexicographic order.

    Each pair's redistribution is committed only if it strictly lowers the
    cached objective by more than `commit_tol` (guards rounding-induced
    oscillation); under an infinite weight, shedding infinitely-penalized
    edges counts as an improvement even though both totals print as inf.
    Centers refresh implicitly from the running sums after each commit.
    Returns the number of committed pair steps.
    """
    commits = 0
    for i in range(1, state.k):
        for j in range(i + 1, state.k + 1):
            result = redistribute_pair(state, i, j, penalties)
            if result is None:
                continue
            members, targets = result
            mask = state.assign[members] != targets
            changed = members[mask]
            if changed.size == 0:
                continue
            inf_before, fin_before = state.loss_parts()
            olds = state.assign[changed].copy()
            for v, g in zip(changed, targets[mask]):
                state.apply_move(int(v), int(g))
            inf_after, fin_after = state.loss_parts()
            improved = inf_after < inf_before or (
                inf_after == inf_before and fin_after < fin_before - commit_tol
            )
            if improved:
                commits += 1
                if step_log is not None:
                    step_log.append(state.total())
            else:
                for v, g in zip(changed, olds):
                    state.apply_move(int(v), int(g))
    return commits


def run_mcut(
    graph: DirectedGraph,
    features: FeatureMatrix,
    penalties: Penalties,
    k: int,
    init: OrderedPartition,
    config: SolveConfig,
    _repair: Optional[Callable[[SolveState], None]] = None,
) -> SolveResult:
    """Pairwise cut search from the given initial partition.

    Repeats full pair sweeps until one commits nothing, the relative loss
    improvement drops below `config.rel_tol`, or `config.max_iters` is
    reached.  Pairs with an empty (undefined-center) side are skipped; the
    iterative driver reseeds empty groups between sweeps.
    """
    if k < 2:
        raise ValueError(f"the pairwise cut solver needs k >= 2, got {k}")
    if init.k != k or init.n != graph.n:
        raise ValueError("initial partition does not match the instance")
    start = time.perf_counter()
    state = SolveState.from_partition(graph, features, penalties, init)
    step_log: Optional[list[float]] = [] if config.track_steps else None
    loss = state.total()
    converged = False
    iterations = 0
    for it in range(1, config.max_iters + 1):
        iterations = it
        if _repair is not None:
            _repair(state)
        state.rebuild()  # clear running-sum drift before the sweep
        commits = pair_sweep(state, penalties, step_log=step_log)
        new_loss = state.total()
        if commits == 0 or small_improvement(loss, new_loss, config.rel_tol):
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
