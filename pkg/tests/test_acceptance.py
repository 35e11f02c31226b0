"""Acceptance suite: one test per criterion, each printing a PASS line.

The heavy batches (the 300 randomized runs, the path/cycle sweep, the
exhaustive small-graph enumeration) are module-scoped fixtures shared by the
criteria that consume them.
"""

from __future__ import annotations

import random

import pytest

from stabsim.configs import false_ids, random_config, stored_keys, zeroed_config
from stabsim.experiments import (
    boundary_checks,
    closure_check,
    fit_and_validate,
    merge_segment_rounds,
    run_grouping,
    run_with_corruption,
    summary_bytes,
    RunDescriptor,
)
from stabsim.graphs import (
    cycle_graph,
    diameter,
    graph_to_json,
    make_graph,
    path_graph,
    random_connected_graph,
)
from stabsim.kgrouping import DOMAIN, IN_GROUP
from stabsim.oracle import exhaustive_min_groups
from stabsim.runtime import DaemonPolicy

N_RANDOM_RUNS = 300
N_FALSE = 3
N_INJECTIONS = 100


def _random_instance(index: int):
    rng = random.Random(1_000_003 * index + 17)
    n = rng.randrange(4, 31)
    k = rng.randrange(1, 7)
    g = random_connected_graph(n, 0.08 + 0.4 * rng.random(), index)
    return g, k, rng.randrange(2**31)


@pytest.fixture(scope="module")
def batch300():
    results = []
    for i in range(N_RANDOM_RUNS):
        g, k, seed = _random_instance(i)
        cfg0 = random_config(g, k, seed=seed, n_false=N_FALSE)
        daemon = DaemonPolicy(kind="random", p=0.5, seed=seed ^ 0x5A5A)
        res = run_grouping(g, k, daemon, cfg0, record_steps=False)
        results.append(res)
    return results


@pytest.fixture(scope="module")
def batch_checks(batch300):
    return [boundary_checks(res) for res in batch300]


@pytest.fixture(scope="module")
def sweep_results():
    out = []
    for family, build in (("path", path_graph), ("cycle", cycle_graph)):
        for n in range(6, 49, 6):
            g = build(n)
            d = diameter(g)
            for k in (2, 4):
                for seed in range(5):
                    cfg0 = random_config(g, k, seed=seed * 31 + n)
                    daemon = DaemonPolicy(kind="random", p=0.5, seed=seed)
                    res = run_grouping(g, k, daemon, cfg0, record_steps=False)
                    out.append((family, n, d, k, seed, res))
    return out


@pytest.fixture(scope="module")
def atlas_runs():
    nx = pytest.importorskip("networkx")
    runs = []
    for i, ag in enumerate(nx.graph_atlas_g()):
        n = ag.number_of_nodes()
        if not (2 <= n <= 7) or not nx.is_connected(ag):
            continue
        g = make_graph(
            [v + 1 for v in ag.nodes], [(u + 1, v + 1) for u, v in ag.edges]
        )
        for k in (1, 2):
            res = run_grouping(
                g, k, DaemonPolicy(kind="random", p=0.5, seed=i),
                zeroed_config(g, k), record_steps=False,
            )
            runs.append((i, k, g, res))
    return runs


def test_criterion_1_self_stabilization(batch300):
    failures = []
    for i, res in enumerate(batch300):
        if not res.trace.terminated:
            failures.append(f"run {i}: {res.verdict}")
        elif not res.report.verdict:
            failures.append(f"run {i}: {res.report.violations[:2]}")
    assert not failures, failures[:10]
    print(f"\n[criterion 1] PASS: {len(batch300)} randomized runs all "
          f"terminated with a valid minimal grouping")


def test_criterion_1_memory_and_false_ids(batch300):
    for i, res in enumerate(batch300):
        g = res.graph
        bound = 21 * (g.n + N_FALSE)
        final = res.trace.final
        for v, count in stored_keys(final).items():
            assert count <= bound, f"run {i}: process {v} stores {count} keys"
        fakes = set(false_ids(g, N_FALSE))
        for v in g.vertices:
            assert not (final[v][DOMAIN] & fakes), f"run {i}: fake id survived"
    print(f"\n[criterion 1+] PASS: per-process stored keys within "
          f"21*(n+n_false); false identifiers flushed at silence")


def test_criterion_2_group_count_bounds(batch300, sweep_results, atlas_runs):
    for i, res in enumerate(batch300):
        assert res.report.group_count <= 2 * res.graph.n / res.k + 1, f"run {i}"
    for family, n, d, k, seed, res in sweep_results:
        assert res.report.group_count <= 2 * n / k + 1
    checked = 0
    for i, k, g, res in atlas_runs:
        assert res.trace.terminated and res.report.verdict, (
            f"atlas graph {i} k={k}: {res.verdict} {res.report.violations[:2]}"
        )
        assert res.report.group_count <= 2 * g.n / k + 1
        best = exhaustive_min_groups(g, k)
        assert res.report.group_count >= best, f"atlas {i} k={k}"
        checked += 1
    print(f"\n[criterion 2] PASS: group count <= 2n/k+1 on every run; "
          f"{checked} exhaustive small-graph comparisons (n <= 7, k in 1..2)")


def test_criterion_3_round_scaling(sweep_results):
    samples = [
        (n, n * d / k + n, res.rounds)
        for family, n, d, k, seed, res in sweep_results
    ]
    c, ok, worst = fit_and_validate(samples, headroom=2.0)
    assert ok, f"validation ratio {worst:.2f} with c={c:.2f}"
    print(f"\n[criterion 3] PASS: rounds <= c*(nD/k + n) with c={c:.2f} "
          f"fitted on the small half; worst validation ratio {worst:.2f} <= 2")


def test_criterion_4_iteration_bounds(sweep_results):
    samples = [
        (n, n / k, res.iterations)
        for family, n, d, k, seed, res in sweep_results
    ]
    c1, ok, worst = fit_and_validate(samples, headroom=2.0)
    assert ok, f"iteration validation ratio {worst:.2f} (c'={c1:.2f})"

    segment_samples = []
    for family, n, d, k, seed, res in sweep_results:
        if n > 24 or seed > 1:
            continue
        for rounds in merge_segment_rounds(res):
            segment_samples.append((n, k, rounds))
    c2, ok2, worst2 = fit_and_validate(segment_samples, headroom=2.0)
    assert ok2, f"segment validation ratio {worst2:.2f} (c''={c2:.2f})"
    print(f"\n[criterion 4] PASS: iterations <= c'*n/k with c'={c1:.2f} "
          f"(worst ratio {worst:.2f}); isolated merge executions within "
          f"c''*k rounds, c''={c2:.2f} over {len(segment_samples)} executions")


def test_criterion_5_shiftable_convergence(batch_checks):
    qualifying = 0
    for i, checks in enumerate(batch_checks):
        for c in checks:
            if c.kind == "shift" and c.qualifying:
                qualifying += 1
                assert c.shift_error_free, f"run {i} boundary at step {c.step}"
            if c.kind == "handoff" and c.qualifying:
                assert c.shift_error_free, f"run {i} init boundary {c.step}"
    assert qualifying >= 100  # the check must not be vacuous
    print(f"\n[criterion 5] PASS: error predicate false everywhere after the "
          f"copy shift at {qualifying} complete iteration boundaries")


def test_criterion_6_stamp_soundness(batch_checks):
    total = 0
    for i, checks in enumerate(batch_checks):
        for c in checks:
            if c.qualifying:
                total += 1
                assert c.stamp_violations == [], (
                    f"run {i} step {c.step}: {c.stamp_violations}"
                )
    print(f"\n[criterion 6] PASS: every active stamp at {total} iteration "
          f"boundaries certifies a non-mergeable near pair")


def test_potential_monotone_and_strictly_decreasing(batch_checks):
    monotone_pairs = 0
    strict_pairs = 0
    for checks in batch_checks:
        seq = []
        for c in checks:
            if c.kind == "handoff":
                seq = []  # re-initialization resets the accounting
            elif c.kind == "shift" and c.qualifying and c.potential is not None:
                seq.append(c.potential[3])
        for a, b in zip(seq, seq[1:]):
            assert b <= a, f"potential increased: {seq}"
            monotone_pairs += 1
        for a, b in zip(seq, seq[2:]):
            assert b < a, f"no strict decrease over two iterations: {seq}"
            strict_pairs += 1
    assert monotone_pairs >= 50
    print(f"\n[invariant] PASS: merge-progress potential non-increasing over "
          f"{monotone_pairs} boundary pairs, strictly decreasing over "
          f"{strict_pairs} two-iteration windows")


def test_criterion_7_fault_injection(tmp_path):
    import json

    failures = []
    for i in range(N_INJECTIONS):
        rng = random.Random(7_777_7 * i + 5)
        n = rng.randrange(4, 17)
        g = random_connected_graph(n, 0.3, i)
        k = rng.randrange(1, 5)
        gpath = tmp_path / f"g{i}.json"
        gpath.write_text(json.dumps(graph_to_json(g)))
        desc = RunDescriptor(
            graph=g, k=k,
            daemon=DaemonPolicy(kind="random", p=0.5, seed=i),
            max_steps=None, init_mode="random", init_seed=i, n_false=N_FALSE,
        )
        variables = ("color", "mode", "reset", "in_group", "in_group_of",
                     "in_group_dist", "in_stamp_on", "in_prior",
                     "in_stamp1", "in_stamp2", "in_stamp_dist")
        count = max(1, int(0.25 * n * len(variables)))
        res = run_with_corruption(desc, variables, count, seed=i * 13,
                                  at_step=rng.randrange(20, 120))
        if not res.ok:
            failures.append((i, res.verdict, res.report.violations[:2]))
    assert not failures, failures[:5]
    print(f"\n[criterion 7] PASS: {N_INJECTIONS} mid-run corruption campaigns "
          f"(<= 25% of variables) all re-converged to valid groupings")


def test_criterion_8_closure_and_silence(batch300):
    for i, res in enumerate(batch300):
        assert closure_check(res), f"run {i}: final configuration not silent"
    print(f"\n[criterion 8] PASS: every final configuration is silent, "
          f"satisfies the terminal predicate, and re-runs for 0 steps")


def test_criterion_9_deterministic_replay():
    blobs = []
    for trial in range(6):
        g = random_connected_graph(5 + trial * 3, 0.3, trial)
        k = 1 + trial % 3
        cfg0 = random_config(g, k, seed=trial)
        daemon = DaemonPolicy(kind="random", p=0.5, seed=trial)
        a = run_grouping(g, k, daemon, cfg0)
        b = run_grouping(g, k, daemon, cfg0)
        assert summary_bytes(a) == summary_bytes(b), f"trial {trial} diverged"
        blobs.append(summary_bytes(a))
    assert len(set(blobs)) == len(blobs)  # different instances do differ
    print("\n[criterion 9] PASS: byte-identical trace summaries on replay")


def test_criterion_10_named_small_instances():
    p5 = path_graph(5)
    res = run_grouping(p5, 2, DaemonPolicy(kind="random", p=0.5, seed=1),
                       zeroed_config(p5, 2))
    assert res.ok
    groups = {gid: set(m) for gid, m in res.report.groups.items()}
    assert groups == {1: {1, 2, 3}, 4: {4, 5}}

    # The tree bands on a 6-cycle with k=2 are three adjacent pairs; every
    # pair of pairs has union diameter 3 > 2, so nothing merges.  (Derived by
    # evaluating the height/band functions on the stabilized tree and
    # confirmed by the oracle; a two-arc split is another valid minimal
    # grouping but is not the one this algorithm computes from a clean
    # start.)
    c6 = cycle_graph(6)
    res = run_grouping(c6, 2, DaemonPolicy(kind="random", p=0.5, seed=1),
                       zeroed_config(c6, 2))
    assert res.ok
    groups = {gid: set(m) for gid, m in res.report.groups.items()}
    assert groups == {1: {1, 2}, 3: {3, 4}, 6: {5, 6}}
    for seed in range(2, 8):
        res = run_grouping(c6, 2, DaemonPolicy(kind="random", p=0.5, seed=seed),
                           random_config(c6, 2, seed=seed))
        assert res.ok
        assert all(len(m) <= 3 for m in res.report.groups.values())
    print("\n[criterion 10] PASS: named instances match their derived "
          "groupings (P5/k=2 -> {1,2,3},{4,5}; C6/k=2 -> three adjacent "
          "pairs from a clean start)")
