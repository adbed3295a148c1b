import math

import numpy as np
import pytest

from digseg import (
    ArborescenceError,
    DirectedGraph,
    FeatureMatrix,
    OrderedPartition,
    Penalties,
    SolveConfig,
    SolveState,
    coherence_l2,
    multi_restart,
    random_init,
    repair_empty_groups,
    run_iterative,
    total_cost,
)
from conftest import random_digraph, random_features, rel_close


def test_random_init_single_group():
    part = random_init(8, 1, 0)
    assert (part.assign == 1).all()


def test_random_init_deterministic():
    a = random_init(50, 4, 123)
    b = random_init(50, 4, 123)
    assert np.array_equal(a.assign, b.assign)
    c = random_init(50, 4, 124)
    assert not np.array_equal(a.assign, c.assign)


def test_random_init_balanced_within_five_sigma():
    n, k = 100_000, 5
    part = random_init(n, k, 7)
    sizes = part.group_sizes()[1:]
    sigma = math.sqrt(n * (1 / k) * (1 - 1 / k))
    assert (np.abs(sizes - n / k) <= 5 * sigma).all()


def test_run_iterative_treedp_path_example():
    g = DirectedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    f = FeatureMatrix.from_array([[0.0], [0.0], [1.0], [1.0]])
    cfg = SolveConfig(solver_kind="treedp", restarts=8, seed=0)
    res = multi_restart(g, f, Penalties(0.0, 1e5), 2, cfg)
    assert list(res.partition.assign) == [1, 1, 2, 2]
    assert res.breakdown.coherence == 0.0
    assert res.breakdown.forward_edges == 1 and res.breakdown.backward_edges == 0
    assert res.breakdown.total == 0.0


def test_run_iterative_k1_single_group():
    rng = np.random.default_rng(71)
    g = random_digraph(rng, 12, 20)
    f = random_features(rng, 12, 3)
    res = run_iterative(g, f, Penalties(1.0, 2.0), 1, SolveConfig(seed=0))
    assert res.converged and res.iterations == 1
    assert rel_close(res.breakdown.total, coherence_l2(range(12), f))


def test_run_iterative_max_iters_one_not_converged():
    rng = np.random.default_rng(72)
    g = random_digraph(rng, 40, 60)
    f = random_features(rng, 40, 3)
    cfg = SolveConfig(max_iters=1, seed=2)
    res = run_iterative(g, f, Penalties(0.0, 0.0), 4, cfg)
    assert res.iterations == 1 and not res.converged


def test_run_iterative_treedp_rejects_non_tree():
    g = DirectedGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    f = FeatureMatrix.from_array([[0.0], [0.5], [1.0]])
    with pytest.raises(ArborescenceError):
        run_iterative(g, f, Penalties(0, 0), 2, SolveConfig(solver_kind="treedp", seed=0))


def test_repair_noop_without_empty_groups():
    g = DirectedGraph.from_edges(2, [])
    f = FeatureMatrix.from_array([[0.0], [1.0]])
    st = SolveState(g, f, Penalties(0, 0), [1, 2], 2)
    before = st.assign.copy()
    repair_empty_groups(st, f, 0)
    assert np.array_equal(st.assign, before)


def test_repair_seeds_empty_group_with_outlier():
    g = DirectedGraph.from_edges(4, [])
    f = FeatureMatrix.from_array([[0.0], [0.1], [0.2], [50.0]])
    st = SolveState(g, f, Penalties(0, 0), [1, 1, 1, 1], 2)
    repair_empty_groups(st, f, 0)
    assert list(st.assign) == [1, 1, 1, 2]


def test_repair_with_fewer_vertices_than_groups():
    g = DirectedGraph.from_edges(1, [])
    f = FeatureMatrix.from_array([[3.0]])
    st = SolveState(g, f, Penalties(0, 0), [1], 2)
    repair_empty_groups(st, f, 0)
    assert st.empty_groups() == [2]


def test_multi_restart_single_restart_equals_run_iterative():
    rng = np.random.default_rng(73)
    g = random_digraph(rng, 20, 30)
    f = random_features(rng, 20, 2)
    cfg = SolveConfig(restarts=1, seed=11)
    a = multi_restart(g, f, Penalties(0.5, 1.5), 3, cfg)
    b = run_iterative(g, f, Penalties(0.5, 1.5), 3, cfg)
    assert np.array_equal(a.partition.assign, b.partition.assign)
    assert rel_close(a.breakdown.total, b.breakdown.total)


def test_multi_restart_returns_minimum_loss():
    rng = np.random.default_rng(74)
    g = random_digraph(rng, 25, 50)
    f = random_features(rng, 25, 3)
    pen = Penalties(0.2, 2.0)
    cfg = SolveConfig(restarts=6, seed=100)
    best = multi_restart(g, f, pen, 4, cfg)
    singles = [
        run_iterative(g, f, pen, 4, cfg.with_seed(100 + r)) for r in range(6)
    ]
    assert all(best.breakdown.total <= s.breakdown.total + 1e-9 for s in singles)
    assert any(
        rel_close(best.breakdown.total, s.breakdown.total) and best.seed == s.seed
        for s in singles
    )


def test_multi_restart_deterministic():
    rng = np.random.default_rng(75)
    g = random_digraph(rng, 15, 25)
    f = random_features(rng, 15, 2)
    cfg = SolveConfig(restarts=3, seed=5)
    a = multi_restart(g, f, Penalties(0, 1.0), 3, cfg)
    b = multi_restart(g, f, Penalties(0, 1.0), 3, cfg)
    assert np.array_equal(a.partition.assign, b.partition.assign)
    assert a.breakdown.total == b.breakdown.total and a.seed == b.seed


def test_result_breakdown_revalidates():
    rng = np.random.default_rng(76)
    for kind in ("greedy", "mcut"):
        g = random_digraph(rng, 30, 60)
        f = random_features(rng, 30, 2)
        pen = Penalties(0.3, 3.0)
        res = run_iterative(g, f, pen, 3, SolveConfig(solver_kind=kind, seed=4))
        fresh = total_cost(g, f, res.partition, pen)
        assert rel_close(res.breakdown.total, fresh.total)
        assert res.breakdown.forward_edges == fresh.forward_edges


def test_iteration_losses_non_increasing():
    rng = np.random.default_rng(77)
    edges = [(int(rng.integers(0, v)), v) for v in range(1, 50)]
    g = DirectedGraph.from_edges(50, edges)
    f = random_features(rng, 50, 3)
    cfg = SolveConfig(solver_kind="treedp", seed=6, track_steps=True)
    res = run_iterative(g, f, Penalties(0.0, 50.0), 3, cfg)
    losses = res.step_losses
    if losses and len(losses) > 1:
        assert (np.diff(losses) <= 1e-7).all()


def test_mcut_via_driver_requires_k2():
    g = DirectedGraph.from_edges(2, [(0, 1)])
    f = FeatureMatrix.from_array([[0.0], [1.0]])
    with pytest.raises(ValueError):
        run_iterative(g, f, Penalties(0, 0), 1, SolveConfig(solver_kind="mcut", seed=0))
