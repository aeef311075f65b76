"""Worst-case analysis of oblivious schedules: appearance statistics, greedy
sequence occurrence, the slowest-node maximizer with its peeling certificate,
gap-sequence extensions, and the full adversarial-chain synthesizer.

The synthesized chain comes with a machine-checkable certificate: simulating
the schedule on the emitted network can never finish before the claimed delay,
because the message must traverse the chain one scheduled appearance at a time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .engine import default_horizon, run_oblivious
from .errors import NoOccurrence, NotEnoughShots, ProtocolIncomplete
from .topology import Chain, build_chain


def shots_after(v: int, T: int, schedule, k: int, horizon: int | None = None) -> int:
    """min(k, number of appearances of v strictly after step T, up to the horizon)."""
    if horizon is None:
        horizon = default_horizon(schedule.n)
    return min(k, schedule.index().count_between(v, T, horizon))


def t_at(v: int, i: int, T: int, schedule, k: int, horizon: int | None = None) -> int:
    """Step of the i-th appearance of v after T; defined only for i <= shots_after."""
    if horizon is None:
        horizon = default_horizon(schedule.n)
    if i < 1 or i > shots_after(v, T, schedule, k, horizon):
        raise NotEnoughShots(f"node {v} has no {i}-th shot after step {T}")
    return schedule.index().nth_after(v, T, i)


def t_leq(v: int, i: int, T: int, schedule, k: int, horizon: int | None = None) -> int:
    """i-th appearance after T, clamped to the last shot the node would fire."""
    if horizon is None:
        horizon = default_horizon(schedule.n)
    shots = shots_after(v, T, schedule, k, horizon)
    if shots < 1:
        raise NotEnoughShots(f"node {v} never appears after step {T} within horizon {horizon}")
    return schedule.index().nth_after(v, T, min(i, shots))


def first_occurrence(S, T: int, schedule, horizon: int | None = None) -> int:
    """Earliest step at which the whole label sequence S has occurred after T.

    Greedy per-element earliest matching minimizes the step of the final
    matched transmission set.
    """
    seq = list(S)
    if not seq:
        raise ValueError("sequence must be nonempty")
    if horizon is None:
        horizon = default_horizon(schedule.n)
    idx = schedule.index()
    cur = T
    for v in seq:
        nxt = idx.next_after(v, cur)
        if nxt is None or nxt > horizon:
            raise NoOccurrence(f"no occurrence of {seq} after step {T} within horizon {horizon}")
        cur = nxt
    return cur


@dataclass(frozen=True)
class MaxDelayResult:
    node: int
    step: int
    bound: int
    bound_holds: bool


def max_delay_node(Q, T: int, schedule, k: int, horizon: int | None = None) -> MaxDelayResult:
    """The node of Q whose k-th (clamped) appearance after T comes last.

    For any schedule that can finish broadcasting, that step is at least
    T + |Q| - 1; a violation is reported as a finding about the schedule,
    never raised.
    """
    nodes = sorted(Q)
    if not nodes:
        raise ValueError("Q must be nonempty")
    if horizon is None:
        horizon = default_horizon(schedule.n)
    best_v, best_t = None, -1
    for q in nodes:
        try:
            step = t_leq(q, k, T, schedule, k, horizon)
        except NotEnoughShots:
            raise ProtocolIncomplete(q) from None
        if step > best_t:
            best_v, best_t = q, step
    bound = T + len(nodes) - 1
    return MaxDelayResult(best_v, best_t, bound, best_t >= bound)


def delay_certificate_bipartite(Q, T: int, schedule, k: int, horizon: int | None = None):
    """Bipartite (nodes, transmit steps) graph backing the slowest-node bound.

    Drops the largest label of Q, then connects each remaining node to every
    step at which it would transmit had it been informed at T. Feeding this to
    peel_conflicting independently certifies that the steps outnumber the nodes.
    """
    nodes = sorted(Q)
    if len(nodes) < 2:
        raise ValueError("need at least two nodes to build the bipartite graph")
    if horizon is None:
        horizon = default_horizon(schedule.n)
    dropped = nodes[-1]  # any choice is valid; fixed for determinism
    A = nodes[:-1]
    idx = schedule.index()
    L = 0
    tx_steps = {}
    for u in A:
        shots = shots_after(u, T, schedule, k, horizon)
        if shots < 1:
            raise ProtocolIncomplete(u)
        steps = [idx.nth_after(u, T, i) for i in range(1, shots + 1)]
        tx_steps[u] = steps
        L = max(L, steps[-1])
    E = [(u, t) for u in A for t in tx_steps[u] if t <= L]
    B = sorted({t for _, t in E})
    return A, B, E, dropped, L


@dataclass
class PeelResult:
    success: bool
    removals: tuple  # ((step, node), ...) in removal order
    stuck: tuple | None = None  # (nodes, steps, edges) of the conflicting subgraph

    def __bool__(self):
        return self.success


def peel_conflicting(A, B, E) -> PeelResult:
    """Repeatedly remove a degree-1 step vertex together with its only node.

    Exhausting the node side certifies an injective node -> step mapping
    (so there are at least |A| distinct steps). Getting stuck returns the
    remaining subgraph, whose every surviving step touches two or more nodes:
    a ready-made collision witness against the schedule.
    """
    nodes = set(A)
    node_adj = {u: set() for u in nodes}
    step_adj = {}
    for u, t in E:
        node_adj[u].add(t)
        step_adj.setdefault(t, set()).add(u)
    for t in B:
        step_adj.setdefault(t, set())
    removals = []
    candidates = sorted(t for t, us in step_adj.items() if len(us) == 1)
    while nodes and candidates:
        t = candidates.pop(0)
        us = step_adj.get(t)
        if us is None or len(us) != 1:
            continue
        u = next(iter(us))
        removals.append((t, u))
        del step_adj[t]
        nodes.discard(u)
        for t2 in node_adj.pop(u, ()):
            if t2 in step_adj:
                step_adj[t2].discard(u)
                if len(step_adj[t2]) == 1:
                    candidates.append(t2)
        candidates.sort()
    if not nodes:
        return PeelResult(True, tuple(removals))
    stuck_steps = sorted(t for t, us in step_adj.items() if len(us) >= 2)
    stuck_edges = tuple((u, t) for t in stuck_steps for u in sorted(step_adj[t]))
    return PeelResult(False, tuple(removals), (tuple(sorted(nodes)), tuple(stuck_steps), stuck_edges))


@dataclass(frozen=True)
class SeqWithGaps:
    """A sequence whose entries may be gaps (None); `effective` skips the gaps."""

    entries: tuple

    @property
    def effective(self) -> tuple:
        return tuple(v for v in self.entries if v is not None)


@dataclass
class ExtensionResult:
    seq: SeqWithGaps
    t_end: int
    bound: int
    bound_holds: bool
    picked: tuple  # the k delay-maximizing nodes the gap sequence was drawn from


def build_extension(S, T: int, schedule, k: int, horizon: int | None = None) -> ExtensionResult:
    """Extend an occurred sequence S (last matched at T) by at most k nodes that
    push the occurrence as far out as possible.

    First pick k nodes whose clamped last shots after T are latest (refreshing
    the pool each pick); then choose entry i as the pool node whose i-th
    clamped appearance is the latest seen so far, or a gap when nothing beats
    the running maximum. The resulting occurrence step is at least
    T + n - |S| - k for any schedule able to broadcast; a miss is reported as
    a finding, not raised.
    """
    if horizon is None:
        horizon = default_horizon(schedule.n)
    n = schedule.n
    used = set(S)
    Q = [v for v in range(1, n + 1) if v not in used]
    if len(Q) < k + 1:
        raise ValueError(f"need at least k+1={k + 1} unused labels, have {len(Q)}")
    picked = []
    pool = set(Q)
    for _ in range(k):
        res = max_delay_node(pool, T, schedule, k, horizon)
        picked.append(res.node)
        pool.discard(res.node)

    entries = []
    remaining = set(picked)
    best = -1
    for i in range(1, k + 1):
        m_i, arg = -1, None
        for v in sorted(remaining):
            step = t_leq(v, i, T, schedule, k, horizon)
            if step > m_i:
                m_i, arg = step, v
        if m_i <= best:
            entries.append(None)
        else:
            entries.append(arg)
            remaining.discard(arg)
            best = m_i
    bound = T + n - len(list(S)) - k
    return ExtensionResult(SeqWithGaps(tuple(entries)), best, bound, best >= bound, tuple(picked))


@dataclass
class ChainCertificate:
    """A synthesized slow chain plus the bookkeeping that justifies its delay."""

    chain: Chain
    segment_bounds: tuple  # ((segment j, occurrence step T_j, labels added), ...)
    claimed_delay: int
    findings: tuple = ()
    replay_completed_at: int | None = None
    replayed: bool = False

    @property
    def replay_ok(self) -> bool:
        if not self.replayed:
            return False
        if self.replay_completed_at is None:
            return True  # never completed within horizon: certainly not earlier
        return self.replay_completed_at >= self.claimed_delay


def _order_tail(tail, start, idx, horizon):
    """Order leftover labels to stretch the greedy occurrence as far as possible."""
    if len(tail) <= 5:
        best_perm, best_end = None, -1
        for perm in itertools.permutations(sorted(tail)):
            cur = start
            for v in perm:
                nxt = idx.next_after(v, cur)
                if nxt is None:
                    cur = None
                    break
                cur = nxt
            end = cur if cur is not None else horizon + 1
            if end > best_end:
                best_perm, best_end = perm, end
        return list(best_perm)
    ordered = []
    remaining = sorted(tail)
    cur = start
    while remaining:
        pick, pick_step = None, -1
        for v in remaining:
            nxt = idx.next_after(v, cur)
            step = nxt if nxt is not None else horizon + 1
            if step > pick_step:
                pick, pick_step = v, step
        ordered.append(pick)
        remaining.remove(pick)
        cur = min(pick_step, horizon)
    return ordered


def build_adversarial_chain(n: int, k: int, schedule, horizon: int | None = None,
                            source: int = 1, verify: bool = True):
    """Synthesize an n-node chain on which the given schedule is slow.

    Grows the chain by repeated extensions until fewer than k+1 labels remain,
    appends the leftovers as a tail, and claims the occurrence step of the
    chain minus its final node: no run can inform the last node earlier,
    because each hop needs its predecessor to hit a scheduled appearance.
    Returns (certificate, network); with verify=True the certificate carries
    the replayed completion step.
    """
    if horizon is None:
        horizon = default_horizon(n)
    if schedule.n != n:
        raise ValueError(f"schedule is for n={schedule.n}, requested n={n}")
    if not 1 <= source <= n:
        raise ValueError(f"source {source} outside 1..{n}")
    idx = schedule.index()
    findings = []
    chain = [source]
    if n == 1:
        cert = ChainCertificate(Chain((source,)), ((0, 0, (source,)),), 0)
        return cert, build_chain([source], n)
    T = idx.next_after(source, 0)
    if T is None or T > horizon:
        raise ProtocolIncomplete(source)
    segments = [(0, T, (source,))]
    j = 0
    while n - len(chain) >= k + 1:
        j += 1
        ext = build_extension(chain, T, schedule, k, horizon)
        labels = ext.seq.effective
        chain.extend(labels)
        T = ext.t_end
        segments.append((j, T, labels))
        if not ext.bound_holds:
            findings.append(
                f"extension {j}: occurrence step {ext.t_end} below bound {ext.bound}; "
                f"the schedule cannot broadcast on this chain family"
            )
    tail = [v for v in range(1, n + 1) if v not in set(chain)]
    if tail:
        ordered = _order_tail(tail, T, idx, horizon)
        chain.extend(ordered)
    try:
        claimed = first_occurrence(chain[:-1], 0, schedule, horizon) if len(chain) > 1 else 0
    except NoOccurrence:
        claimed = horizon
        findings.append(
            "chain prefix never occurs within the horizon; the schedule cannot "
            "complete broadcasting on the emitted chain"
        )
    if tail:
        segments.append((j + 1, claimed, tuple(ordered)))
    network = build_chain(chain, n)
    cert = ChainCertificate(Chain(tuple(chain)), tuple(segments), claimed, tuple(findings))
    if verify:
        trace = run_oblivious(network, schedule, k, horizon, record_steps=False)
        cert.replay_completed_at = trace.completed_at
        cert.replayed = True
    return cert, network


def save_chain_certificate(cert: ChainCertificate, path) -> None:
    lines = []
    for j, T, labels in cert.segment_bounds:
        lines.append(f"segment j={j} T={T} labels=" + ",".join(map(str, labels)))
    lines.append(f"claimed_delay={cert.claimed_delay}")
    for note in cert.findings:
        lines.append(f"# finding: {note}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
