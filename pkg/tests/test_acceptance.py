"""Acceptance suite: every exit criterion at its stated tolerance, one
pass/fail line per criterion (run with -s to see them on success)."""

import hashlib
import math
import random
import time

import pytest

from kshotlab import (
    build_1shot_chain_refinement,
    build_adversarial_chain,
    build_adversarial_layered,
    build_chain,
    build_transmission_tree,
    check_stage_progress,
    correct_policies,
    counting_min_height,
    min_tree_height_bruteforce,
    oblivious_kshot_schedule,
    random_reachable_digraph,
    round_robin_schedule,
    run_oblivious,
    save_trace,
    verify_line_properties,
    verify_shot_budget,
    verify_validity,
)
from kshotlab.adaptive_adversary import LazyViews
from kshotlab.cli import main as cli_main
from kshotlab.policies import LabelSweepPolicy

SEED0 = 1000
UPPER_N = (25, 49, 100, 225)


def k_ceiling(n):
    s = math.isqrt(n)
    return s if s * s == n else s + 1


def upper_grid():
    return [(n, k) for n in UPPER_N for k in range(3, k_ceiling(n) + 1)]


def _graphs_for_n(n):
    graphs = [(f"random:{SEED0 + i}", random_reachable_digraph(n, SEED0 + i))
              for i in range(40)]
    graphs.append(("chain:asc", build_chain(list(range(1, n + 1)))))
    graphs.append(("chain:desc", build_chain(list(range(n, 0, -1)))))
    for i in (2, 3, 4):
        rng = random.Random(SEED0 + i)
        ids = list(range(1, n + 1))
        rng.shuffle(ids)
        graphs.append((f"chain:shuf{SEED0 + i}", build_chain(ids)))
    return graphs


def _run_upper_corpus():
    """One full pass over the upper-bound corpus: >= 50 graphs per (n, k)."""
    runs = []
    digest = hashlib.sha256()
    graphs_by_n = {n: _graphs_for_n(n) for n in UPPER_N}
    for n, k in upper_grid():
        sched = oblivious_kshot_schedule(n, k)
        corpus = list(graphs_by_n[n])
        for s in range(1, 6):
            cert, net = build_adversarial_chain(n, k, sched, source=s, verify=False)
            corpus.append((f"adv:src{s}", net))
        for graph_id, net in corpus:
            trace = run_oblivious(net, sched, k, record_steps=False)
            violations = check_stage_progress(trace, net, sched)
            runs.append({
                "n": n, "k": k, "graph_id": graph_id,
                "steps": trace.completed_at,
                "budget_ok": bool(verify_shot_budget(trace, k)),
                "stage_violations": len(violations),
                "adversarial": graph_id.startswith("adv:"),
            })
            digest.update(
                f"{n},{k},{graph_id},{trace.completed_at},{sorted(trace.wake.items())},"
                f"{sorted(trace.shots_used.items())}".encode()
            )
    return runs, digest.hexdigest()


@pytest.fixture(scope="module")
def upper_corpus():
    return _run_upper_corpus()


def test_criterion_01_geometry():
    start = time.time()
    for p in (2, 3, 5, 7, 11, 13):
        report = verify_line_properties(p)
        assert report.ok, (p, report.properties)
        assert report.line_count == p * (p + 1)
    elapsed = time.time() - start
    assert elapsed < 5.0, f"geometry suite took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 1 PASS: geometry p in {{2,3,5,7,11,13}}, "
          f"p(p+1) lines, all five properties ({elapsed:.2f}s)")


def test_criterion_02_validity():
    start = time.time()
    checked = 0
    for n in (9, 16, 25, 49, 100):
        for k in range(3, k_ceiling(n) + 1):
            sched = oblivious_kshot_schedule(n, k)
            report = verify_validity(sched, k, horizon=8 * n * n)
            assert report.ok, (n, k, report.counterexample)
            checked += 1
    elapsed = time.time() - start
    assert elapsed < 120.0, f"validity suite took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 2 PASS: solo-slot validity for {checked} (n,k) pairs "
          f"up to horizon 8n^2 ({elapsed:.2f}s)")


def test_criterion_03_budgets(upper_corpus):
    runs, _ = upper_corpus
    bad = [r for r in runs if not r["budget_ok"]]
    assert not bad, bad[:5]
    print(f"\nACCEPTANCE 3 PASS: shot budgets respected on all {len(runs)} corpus traces")


def test_criterion_04_upper_bound(upper_corpus):
    runs, _ = upper_corpus
    unfinished = [r for r in runs if r["steps"] is None]
    assert not unfinished, unfinished[:5]
    c_all = max(r["steps"] * r["k"] / (r["n"] ** 2) for r in runs)
    assert c_all <= 20.0, f"tradeoff constant C={c_all:.2f} exceeds 20"
    floors = {}
    for n, k in upper_grid():
        adv = [r["steps"] for r in runs
               if r["n"] == n and r["k"] == k and r["adversarial"]]
        floors[(n, k)] = max(adv) * k / (n * n)
    worst_floor = min(floors.values())
    assert worst_floor >= 0.2, f"adversarial tradeoff floor {worst_floor:.3f} below 0.2"
    print(f"\nACCEPTANCE 4 PASS: {len(runs)} runs complete within C*n^2/k, "
          f"C={c_all:.3f} (<=20), adversarial floor {worst_floor:.3f} (>=0.2)")


def test_criterion_05_oblivious_lower_bound():
    checked = 0
    for n in (12, 24, 48):
        for k in (1, 2, 3, 4):
            floor = 1 + sum(n - j * k for j in range(1, n // k + 1))
            for sched in (round_robin_schedule(n), oblivious_kshot_schedule(n, k)):
                cert, net = build_adversarial_chain(n, k, sched)
                assert cert.claimed_delay >= floor, (n, k, sched.descriptor(),
                                                     cert.claimed_delay, floor)
                assert cert.replayed and cert.replay_ok, (n, k, sched.descriptor())
                checked += 1
    print(f"\nACCEPTANCE 5 PASS: {checked} chain certificates meet the "
          f"1 + sum(n - jk) floor and replay")


def test_criterion_06_adaptive_one_shot():
    checked = 0
    for n in (8, 10, 14):
        floor = n * (n - 1) // 2 - 1
        policies = {name: pol for name, pol in correct_policies(n, 1).items()}
        assert policies, "need at least one complete builtin budget-1 policy"
        for name, pol in policies.items():
            cert, net = build_1shot_chain_refinement(n, pol)
            assert cert.claimed_delay >= floor, (n, name, cert.claimed_delay, floor)
            assert cert.replay_ok, (n, name)
            checked += 1
    print(f"\nACCEPTANCE 6 PASS: {checked} budget-1 refinement certificates meet "
          f"the n(n-1)/2 - 1 floor and replay")


def test_criterion_07_transmission_trees():
    start = time.time()
    for a in range(2, 9):
        assert min_tree_height_bruteforce(a, 1) == a - 1
    oracle = {(a, k): min_tree_height_bruteforce(a, k)
              for a in range(2, 13) for k in (1, 2, 3)}
    for (a, k), h in oracle.items():
        assert h >= counting_min_height(a, k), (a, k)
    elapsed = time.time() - start
    assert elapsed < 60.0, f"oracle took {elapsed:.1f}s"

    trees = 0
    for a in (2, 4, 6, 9, 12):
        ids = list(range(2, a + 2))
        for k in (1, 2, 3):
            n = a + 1
            policies = list(correct_policies(n, k).values()) + [LabelSweepPolicy(1)]
            for pol in policies:
                views = LazyViews([[1]], pol, k, cap=8 * n * n)
                tree = build_transmission_tree(ids, views, pol, k, 8 * n * n)
                assert not tree.findings, (a, k, pol.name, tree.findings)
                assert tree.height >= oracle[(a, k)], (a, k, pol.name, tree.height)
                assert tree.height >= counting_min_height(a, k)
                trees += 1
    print(f"\nACCEPTANCE 7 PASS: oracle exact for budget 1, {trees} policy trees "
          f"dominate oracle and counting bounds ({elapsed:.2f}s oracle)")


def test_criterion_08_adaptive_kshot_lower_bound():
    checked = 0
    for n in (10, 14, 20):
        for k in (1, 2):
            floor = (n - 4) * n ** (1.0 / k) / 8.0
            for name, pol in correct_policies(n, k).items():
                cert, net = build_adversarial_layered(n, k, pol)
                assert cert.claimed_delay >= floor, (n, k, name,
                                                     cert.claimed_delay, floor)
                assert cert.replay_ok, (n, k, name)
                checked += 1
    print(f"\nACCEPTANCE 8 PASS: {checked} layered certificates meet the "
          f"(1/8)(n-4)n^(1/k) floor and replay")


def test_criterion_09_stage_progress_monitor(upper_corpus):
    runs, _ = upper_corpus
    violating = [r for r in runs if r["stage_violations"]]
    assert not violating, violating[:5]
    print(f"\nACCEPTANCE 9 PASS: zero stage-progress violations across "
          f"{len(runs)} corpus runs")


def test_criterion_10_determinism(upper_corpus, tmp_path):
    runs, digest_first = upper_corpus
    _, digest_second = _run_upper_corpus()
    assert digest_first == digest_second, "corpus re-run diverged"

    # byte-identical traces
    net = random_reachable_digraph(49, SEED0)
    sched = oblivious_kshot_schedule(49, 4)
    p1, p2 = tmp_path / "t1.txt", tmp_path / "t2.txt"
    save_trace(run_oblivious(net, sched, 4), p1)
    save_trace(run_oblivious(net, sched, 4), p2)
    assert p1.read_bytes() == p2.read_bytes()

    # byte-identical CSVs through the CLI
    c1, c2 = str(tmp_path / "s1.csv"), str(tmp_path / "s2.csv")
    args = ["sweep", "--n", "25,49", "--k", "3,4", "--graphs",
            "random:5,chains:3,adversarial:2", "--seed", str(SEED0), "--out"]
    assert cli_main(args + [c1]) == 0
    assert cli_main(args + [c2]) == 0
    assert open(c1, "rb").read() == open(c2, "rb").read()
    print(f"\nACCEPTANCE 10 PASS: full corpus re-run digest, trace bytes and "
          f"CSV bytes all identical ({len(runs)} runs)")
