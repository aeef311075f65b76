import pytest

from kshotlab import (
    EchoOncePolicy,
    FirstSilencePolicy,
    LabelSweepPolicy,
    NeverTransmitPolicy,
    NoPair,
    PolicyFinding,
    RoundRobinEchoPolicy,
    ScheduleEchoPolicy,
    TooLarge,
    build_1shot_chain_refinement,
    build_adversarial_layered,
    build_transmission_tree,
    candidate_action,
    correct_policies,
    counting_min_height,
    deepest_pair,
    incoming_view_sequence,
    min_tree_height_bruteforce,
    round_robin_schedule,
    run_adaptive,
    tree_invariants_ok,
)
from kshotlab.adaptive_adversary import CandidateSim, LazyViews, _MappedViews
from kshotlab.engine import RECEIVE, TRANSMIT
from kshotlab.policies import Policy


# --- incoming views ---------------------------------------------------------------

def test_source_prefix_delivers_at_first_transmit():
    views = incoming_view_sequence([[1]], RoundRobinEchoPolicy(6, 1), 1, rounds=8)
    assert views.event(1) is not None and views.event(1).sender == 1
    assert views.event(1).informs()
    assert all(views.event(j) is None for j in range(2, 9))


def test_colliding_layer_yields_nothing():
    # both middle nodes wake together under echo-once and transmit together
    views = incoming_view_sequence([[1], [2, 3]], EchoOncePolicy(1), 1, rounds=6)
    assert all(views.event(j) is None for j in range(2, 7))


def test_views_independent_of_candidates():
    a = incoming_view_sequence([[1], [5, 6]], RoundRobinEchoPolicy(9, 2), 2, rounds=30)
    b = incoming_view_sequence([[1], [5, 6]], RoundRobinEchoPolicy(9, 2), 2, rounds=30)
    for j in range(1, 31):
        ea, eb = a.event(j), b.event(j)
        assert (ea is None) == (eb is None)
        if ea is not None:
            assert ea.sender == eb.sender and ea.informs() == eb.informs()


# --- candidate folding ------------------------------------------------------------

def test_candidate_action_round_one_is_policy_on_initial_view():
    views = _MappedViews({})
    pol = LabelSweepPolicy(offset=0)  # v transmits at t == v
    assert candidate_action(3, 3, views, pol, 1) == (TRANSMIT, False)
    assert candidate_action(3, 2, views, pol, 1) == (RECEIVE, False)


class TalkEveryRound(Policy):
    name = "talk-every-round"

    def decide(self, v, t, history):
        return TRANSMIT


def test_candidate_action_budget_flag():
    views = _MappedViews({})
    assert candidate_action(1, 2, views, TalkEveryRound(), 2) == (TRANSMIT, False)
    assert candidate_action(1, 3, views, TalkEveryRound(), 2) == (RECEIVE, True)


def test_candidate_private_view_overrides_on_transmit():
    # the candidate transmits exactly when the shared view delivers: it must
    # not hear that delivery (half-duplex), so it never becomes informed
    views = LazyViews([[1]], RoundRobinEchoPolicy(4, 1), 1, cap=50)
    pol = LabelSweepPolicy(offset=0)
    sim = CandidateSim(1 + 0, views, pol, 1)  # label 1 transmits at round 1
    sim.ensure(6)
    assert sim.hist_at(6).informed is False


# --- transmission trees -----------------------------------------------------------

def test_tree_singleton_root():
    tree = build_transmission_tree([5], _MappedViews({}), NeverTransmitPolicy(), 1, 10)
    assert tree.height == 0 and tree.root.is_leaf and tree.deepest is None
    with pytest.raises(NoPair):
        deepest_pair(tree)


def test_label_sweep_tree_is_minimal_for_budget_one():
    for a in (2, 4, 7):
        ids = list(range(2, a + 2))
        tree = build_transmission_tree(ids, _MappedViews({}), LabelSweepPolicy(1), 1, 100)
        assert not tree.findings
        assert tree.height == a - 1 == min_tree_height_bruteforce(a, 1)
        assert tree_invariants_ok(tree, 1)


def test_budget_one_right_children_are_singleton_leaves():
    views = LazyViews([[1]], RoundRobinEchoPolicy(10, 1), 1, cap=500)
    tree = build_transmission_tree(list(range(2, 11)), views, RoundRobinEchoPolicy(10, 1), 1, 500)

    def walk(node):
        if node.right is not None:
            assert len(node.right.ids) == 1 and node.right.is_leaf
            walk_children = ()
        for child in (node.left, node.right):
            if child is not None:
                walk(child)

    walk(tree.root)
    assert tree_invariants_ok(tree, 1)


def test_deepest_pair_at_root():
    # 4 transmits at round 1 under offset 3, so the root itself splits
    tree = build_transmission_tree([4, 7], _MappedViews({}), LabelSweepPolicy(3), 1, 50)
    assert deepest_pair(tree) == (4, 7, 0)


def test_deepest_pair_mid_tree():
    tree = build_transmission_tree([2, 3, 4], _MappedViews({}), LabelSweepPolicy(1), 1, 50)
    v1, v2, depth = deepest_pair(tree)
    assert (v1, v2, depth) == (3, 4, 1)  # relay delayed until round 2


def test_tree_findings_never_separates():
    tree = build_transmission_tree([2, 3], _MappedViews({}), NeverTransmitPolicy(), 1, 25)
    kinds = [f[0] for f in tree.findings]
    assert kinds == ["PolicyNeverSeparates"]


def test_tree_findings_budget_deadlock():
    tree = build_transmission_tree([2, 3], _MappedViews({}), TalkEveryRound(), 2, 50)
    kinds = [f[0] for f in tree.findings]
    assert "PolicyBudgetDeadlock" in kinds


# --- brute-force oracle -----------------------------------------------------------

def test_oracle_budget_one_exact():
    for a in range(2, 9):
        assert min_tree_height_bruteforce(a, 1) == a - 1


def test_oracle_examples():
    assert min_tree_height_bruteforce(4, 2) == 2
    for k in (1, 2, 3):
        assert min_tree_height_bruteforce(2, k) == 1


def test_oracle_matches_counting_bound():
    for a in range(1, 13):
        for k in (1, 2, 3):
            assert min_tree_height_bruteforce(a, k) >= counting_min_height(a, k)


def test_oracle_scale_guard():
    with pytest.raises(TooLarge):
        min_tree_height_bruteforce(13, 2)
    with pytest.raises(TooLarge):
        min_tree_height_bruteforce(8, 4)


def test_policy_trees_never_beat_the_oracle():
    for a in (3, 5, 8, 12):
        ids = list(range(2, a + 2))
        for k in (1, 2, 3):
            n = a + 1
            for pol in (RoundRobinEchoPolicy(n, k), LabelSweepPolicy(1)):
                views = LazyViews([[1]], pol, k, cap=2000)
                tree = build_transmission_tree(ids, views, pol, k, 2000)
                assert not tree.findings
                assert tree.height >= min_tree_height_bruteforce(a, k)
                assert tree.height >= counting_min_height(a, k)
                assert tree_invariants_ok(tree, k)


# --- layered synthesis ------------------------------------------------------------

def test_layered_certificate_n10_k1_round_robin_echo():
    pol = RoundRobinEchoPolicy(10, 1)
    cert, net = build_adversarial_layered(10, 1, pol)
    assert [e.pair for e in cert.layers] == [(9, 10), (7, 8), (5, 6), (3, 4)]
    assert [e.bound for e in cert.layers] == [9, 17, 25, 33]
    assert cert.claimed_delay == 33
    assert sum(e.gain for e in cert.layers) == cert.claimed_delay
    assert cert.replay_ok and cert.replay_completed_at == 33


def test_layered_structure():
    cert, net = build_adversarial_layered(11, 1, RoundRobinEchoPolicy(11, 1))
    sizes = [len(layer) for layer in cert.spec.layer_ids]
    assert sizes[0] == 1 and all(s == 2 for s in sizes[1:-1]) and sizes[-1] in (1, 2)
    assert net.source == 1


def test_layered_certificate_floor_k2():
    n, k = 14, 2
    floor = (n - 4) * n ** (1 / k) / 8
    for pol in correct_policies(n, k).values():
        cert, net = build_adversarial_layered(n, k, pol)
        assert cert.claimed_delay >= floor
        assert cert.replay_ok


def test_layered_broken_policies_abort():
    with pytest.raises(PolicyFinding) as err:
        build_adversarial_layered(8, 1, NeverTransmitPolicy(), depth_cap=200)
    assert err.value.kind == "PolicyNeverSeparates"
    with pytest.raises(PolicyFinding) as err:
        build_adversarial_layered(8, 1, FirstSilencePolicy(1), depth_cap=200)
    assert err.value.kind == "PolicyBudgetDeadlock"


def test_layered_replay_is_the_defining_check():
    for n, k in ((8, 1), (10, 2), (13, 1)):
        pol = RoundRobinEchoPolicy(n, k)
        cert, net = build_adversarial_layered(n, k, pol)
        trace = run_adaptive(net, pol, k)
        assert trace.completed_at == cert.replay_completed_at
        assert trace.completed_at >= cert.claimed_delay


# --- budget-1 chain refinement ----------------------------------------------------

def test_refinement_n10_round_robin_echo():
    pol = RoundRobinEchoPolicy(10, 1)
    cert, net = build_1shot_chain_refinement(10, pol)
    assert cert.claimed_delay >= 10 * 9 // 2 - 1 == 44
    assert cert.claimed_delay == 65  # regression pin
    assert cert.replay_ok and cert.replay_completed_at == 73
    assert cert.chain.sequence == (1, 10, 9, 8, 7, 6, 5, 4, 3, 2)


def test_refinement_stage_floors():
    # every stage must push the tip's transmission at least n - i steps out
    cert, _ = build_1shot_chain_refinement(6, RoundRobinEchoPolicy(6, 1))
    assert cert.stage_floors
    for stage, measured, floor in cert.stage_floors:
        assert measured >= floor


def test_refinement_beats_layered_on_same_policy():
    pol = RoundRobinEchoPolicy(10, 1)
    chain_cert, _ = build_1shot_chain_refinement(10, pol)
    layered_cert, _ = build_adversarial_layered(10, 1, pol)
    assert chain_cert.claimed_delay >= layered_cert.claimed_delay


def test_refinement_schedule_echo_policy():
    pol = ScheduleEchoPolicy(round_robin_schedule(10), 1)
    cert, net = build_1shot_chain_refinement(10, pol)
    assert cert.claimed_delay >= 44 and cert.replay_ok


def test_refinement_collision_witness():
    with pytest.raises(PolicyFinding) as err:
        build_1shot_chain_refinement(8, EchoOncePolicy(1), horizon=500)
    assert err.value.kind == "CollisionGraph"
    witness = err.value.witness
    assert witness.pair[0] != witness.pair[1]
    # the witness graph really defeats the policy: the sink never hears anything
    trace = run_adaptive(witness.network, EchoOncePolicy(1), 1, horizon=500)
    assert trace.completed_at is None


def test_refinement_never_transmit_aborts():
    with pytest.raises(PolicyFinding) as err:
        build_1shot_chain_refinement(8, NeverTransmitPolicy(), horizon=300)
    assert err.value.kind == "PolicyIncomplete"


def test_refinement_trivial_sizes():
    cert, net = build_1shot_chain_refinement(1, RoundRobinEchoPolicy(1, 1))
    assert cert.claimed_delay == 0
    cert2, net2 = build_1shot_chain_refinement(2, RoundRobinEchoPolicy(2, 1))
    assert cert2.replay_ok
    cert3, net3 = build_1shot_chain_refinement(3, RoundRobinEchoPolicy(3, 1))
    assert cert3.replay_ok and cert3.claimed_delay >= 2
