"""Worst-case analysis of adaptive policies over layered networks.

Every candidate sitting behind the same assigned prefix observes the same
incoming event sequence, so a deterministic policy splits any candidate set,
round by round, into receivers and transmitters: a binary transmission tree.
The deepest surviving pair of ids is the worst choice for the next layer, and
chaining those choices yields a layered network with a delay certificate.
A brute-force enumeration of legal trees provides the independent floor on
achievable tree heights, and a direct chain-refinement construction covers the
budget-1 case as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .engine import (
    RECEIVE,
    TRANSMIT,
    History,
    Message,
    default_horizon,
    run_adaptive,
)
from .errors import NoPair, PolicyError, PolicyFinding, TooLarge
from .topology import Chain, LayeredSpec, Network, build_chain, build_layered


class _PrefixSim:
    """Run a policy over assigned prefix layers only, emitting per-round events
    as seen by the (absent) next layer: a message when exactly one node of the
    deepest layer transmits, nothing otherwise. Never stops early: deeper
    layers need views past the prefix's own completion."""

    def __init__(self, layers, policy, k: int):
        self.layers = [list(layer) for layer in layers]
        self.policy = policy
        self.k = k
        self.nodes = [v for layer in self.layers for v in layer]
        self.deepest = set(self.layers[-1])
        self.in_neighbors = {}
        for i, layer in enumerate(self.layers):
            for v in layer:
                self.in_neighbors[v] = list(self.layers[i - 1]) if i > 0 else []
        source = self.layers[0][0]
        self.hist = {v: History.initial(v == source) for v in self.nodes}
        self.t = 0

    def step(self) -> Message | None:
        self.t += 1
        t = self.t
        tx = []
        for v in self.nodes:
            d1 = self.policy.decide(v, t, self.hist[v])
            d2 = self.policy.decide(v, t, self.hist[v])
            if d1 != d2:
                raise PolicyError(f"policy {self.policy.name} nondeterministic at (v={v}, t={t})")
            if d1 == TRANSMIT and self.hist[v].shots_used < self.k:
                tx.append(v)
        messages = {u: Message(u, self.hist[u]) for u in tx}
        txset = set(tx)
        new_hist = {}
        for v in self.nodes:
            if v in txset:
                new_hist[v] = self.hist[v].extend("transmitted", None)
                continue
            senders = [u for u in self.in_neighbors[v] if u in txset]
            incoming = messages[senders[0]] if len(senders) == 1 else None
            new_hist[v] = self.hist[v].extend("silent", incoming)
        self.hist = new_hist
        deep_tx = [u for u in tx if u in self.deepest]
        return messages[deep_tx[0]] if len(deep_tx) == 1 else None


class LazyViews:
    """Incoming events for the next layer's candidates, extended on demand."""

    def __init__(self, layers, policy, k: int, cap: int):
        self._sim = _PrefixSim(layers, policy, k)
        self._events = []  # index j-1 holds the event of round j
        self.cap = cap

    def event(self, j: int) -> Message | None:
        if j < 1 or j > self.cap:
            raise IndexError(f"round {j} outside 1..{self.cap}")
        while len(self._events) < j:
            self._events.append(self._sim.step())
        return self._events[j - 1]


@dataclass(frozen=True)
class IncomingViewSeq:
    """Materialized per-round incoming events (None = silence or collision)."""

    events: tuple

    def event(self, j: int) -> Message | None:
        if j < 1 or j > len(self.events):
            raise IndexError(f"round {j} outside 1..{len(self.events)}")
        return self.events[j - 1]


class _MappedViews:
    """Sparse view sequence: a handful of delivery rounds, silence elsewhere."""

    def __init__(self, deliveries: dict):
        self.deliveries = dict(deliveries)

    def event(self, j: int) -> Message | None:
        return self.deliveries.get(j)


def incoming_view_sequence(prefix_layers, policy, k: int, rounds: int) -> IncomingViewSeq:
    """Simulate the assigned prefix and collect the events its deepest layer
    pushes toward unassigned candidates. Identical for every candidate id,
    which is the whole point: the prefix has no path back from the candidates."""
    views = LazyViews(prefix_layers, policy, k, rounds)
    return IncomingViewSeq(tuple(views.event(j) for j in range(1, rounds + 1)))


class CandidateSim:
    """Fold one candidate's own actions over a shared incoming-event sequence.

    The private view differs from the shared one only where the candidate
    itself transmits (half-duplex: it hears nothing that round) and in the
    budget clamp, mirroring the engine exactly.
    """

    def __init__(self, v: int, views, policy, k: int, is_source: bool = False):
        self.v = v
        self.views = views
        self.policy = policy
        self.k = k
        self.hist = History.initial(is_source)
        self.t = 0
        self.actions = []  # (transmitted, suppressed) per round

    def _advance(self):
        t = self.t + 1
        d1 = self.policy.decide(self.v, t, self.hist)
        d2 = self.policy.decide(self.v, t, self.hist)
        if d1 != d2:
            raise PolicyError(f"policy {self.policy.name} nondeterministic at (v={self.v}, t={t})")
        wants = d1 == TRANSMIT
        suppressed = wants and self.hist.shots_used >= self.k
        transmitted = wants and not suppressed
        if transmitted:
            self.hist = self.hist.extend("transmitted", None)
        else:
            self.hist = self.hist.extend("silent", self.views.event(t))
        self.actions.append((transmitted, suppressed))
        self.t = t

    def ensure(self, t: int):
        while self.t < t:
            self._advance()

    def transmitted_at(self, t: int) -> bool:
        self.ensure(t)
        return self.actions[t - 1][0]

    def suppressed_at(self, t: int) -> bool:
        self.ensure(t)
        return self.actions[t - 1][1]

    def shots_at(self, t: int) -> int:
        self.ensure(t)
        return sum(1 for a, _ in self.actions[:t] if a)

    def first_transmit(self, after: int, upto: int):
        """First round in (after, upto] where the candidate transmits, or None."""
        for t in range(after + 1, upto + 1):
            if self.transmitted_at(t):
                return t
        return None

    def hist_at(self, t: int) -> History:
        """History snapshot at the end of round t (so H_t, an O(1) shared link)."""
        self.ensure(t)
        h = self.hist
        while h.step > t:
            h = h.prev
        return h


def candidate_action(v: int, t: int, views, policy, k: int):
    """Action of candidate v at round t under the shared views: ("transmit" |
    "receive", budget_exhausted_flag). Rebuilds the private history from the
    candidate's own earlier actions."""
    sim = CandidateSim(v, views, policy, k)
    sim.ensure(t)
    transmitted, suppressed = sim.actions[t - 1]
    return (TRANSMIT if transmitted else RECEIVE, suppressed)


# --- transmission trees -----------------------------------------------------------

@dataclass
class TreeNode:
    ids: frozenset
    depth: int
    left: "TreeNode | None" = None   # receivers of the next round
    right: "TreeNode | None" = None  # transmitters of the next round

    @property
    def is_leaf(self) -> bool:
        return self.left is None and self.right is None


@dataclass
class TransmissionTree:
    root: TreeNode
    height: int
    deepest: tuple | None  # (TreeNode, depth) of the deepest non-singleton node
    findings: tuple = ()


def build_transmission_tree(A, views, policy, k: int, depth_cap: int) -> TransmissionTree:
    """Split the candidate set round by round into receivers (left) and
    transmitters (right) under the shared views. Children partition their
    parent; empty sides are elided (a one-sided node is retained, not pruned).
    Non-singleton leaves at the cap and all-budget-exhausted groups are
    returned as findings: they witness that the policy cannot finish
    broadcasting when that group forms a layer."""
    ids = sorted(set(A))
    if not ids:
        raise ValueError("candidate set must be nonempty")
    sims = {v: CandidateSim(v, views, policy, k) for v in ids}
    root = TreeNode(frozenset(ids), 0)
    findings = []
    height = 0
    deepest = (root, 0) if len(ids) >= 2 else None
    frontier = [root] if len(ids) >= 2 else []
    t = 0
    while frontier and t < depth_cap:
        t += 1
        next_frontier = []
        for node in frontier:
            tx = frozenset(v for v in node.ids if sims[v].transmitted_at(t))
            rx = node.ids - tx
            children = []
            if rx:
                node.left = TreeNode(rx, t)
                children.append(node.left)
            if tx:
                node.right = TreeNode(tx, t)
                children.append(node.right)
            for child in children:
                height = max(height, t)
                if len(child.ids) < 2:
                    continue
                if deepest is None or t > deepest[1]:
                    deepest = (child, t)
                if all(sims[v].shots_at(t) >= k for v in child.ids):
                    findings.append(("PolicyBudgetDeadlock", tuple(sorted(child.ids)), t))
                else:
                    next_frontier.append(child)
        frontier = next_frontier
    for node in frontier:
        findings.append(("PolicyNeverSeparates", tuple(sorted(node.ids)), depth_cap))
    return TransmissionTree(root, height, deepest, tuple(findings))


def tree_invariants_ok(tree: TransmissionTree, k: int) -> bool:
    """Exhaustive check: children partition the parent and no root-to-leaf path
    carries more than k right children."""

    def walk(node, rights):
        if rights > k:
            return False
        if node.left is None and node.right is None:
            return True
        got = frozenset()
        for child, extra in ((node.left, 0), (node.right, 1)):
            if child is None:
                continue
            if child.ids & got:
                return False
            got |= child.ids
            if not walk(child, rights + extra):
                return False
        return got == node.ids

    return walk(tree.root, 0)


def deepest_pair(tree: TransmissionTree):
    """Two smallest labels of the deepest non-singleton tree node, plus its depth."""
    if tree.deepest is None:
        raise NoPair("tree root is a singleton")
    node, depth = tree.deepest
    v1, v2 = sorted(node.ids)[:2]
    return v1, v2, depth


# --- brute-force oracle -----------------------------------------------------------

def min_tree_height_bruteforce(a: int, k: int) -> int:
    """Minimum height over all legal transmission trees on an a-element set with
    budget k, by exhaustive recursion over split shapes (labels are symmetric,
    so only sizes matter; one-sided left chains only ever add height)."""
    if a < 1 or k < 1:
        raise ValueError("need a >= 1 and k >= 1")
    if a > 12 or k > 3:
        raise TooLarge(f"exhaustive search limited to a <= 12, k <= 3; got a={a}, k={k}")

    @lru_cache(maxsize=None)
    def f(size, budget):
        if size == 1:
            return 0
        if budget == 0:
            return None  # cannot split without a transmission
        best = None
        for s in range(1, size + 1):
            r = size - s
            left = f(r, budget) if r >= 1 else 0
            right = f(s, budget - 1)
            if left is None or right is None:
                continue
            h = 1 + max(left, right)
            if best is None or h < best:
                best = h
        return best

    return f(a, k)


def counting_min_height(a: int, k: int) -> int:
    """Smallest h whose trees can even name a leaves: sum_{i<=k} C(h,i) >= a."""
    h = 0
    while sum(comb(h, i) for i in range(0, min(k, h) + 1)) < a:
        h += 1
    return h


# --- the layered construction -----------------------------------------------------

@dataclass(frozen=True)
class LayerEntry:
    layer_index: int
    pair: tuple
    bound: int  # relay into the next layer cannot happen before this round
    gain: int   # what this layer adds beyond the previous bound


@dataclass
class LayeredAdversaryCertificate:
    spec: LayeredSpec
    layers: tuple  # LayerEntry per assigned middle layer
    claimed_delay: int
    replay_completed_at: int | None = None
    replayed: bool = False

    @property
    def replay_ok(self) -> bool:
        if not self.replayed:
            return False
        if self.replay_completed_at is None:
            return True
        return self.replay_completed_at >= self.claimed_delay


def build_adversarial_layered(n: int, k: int, policy, depth_cap: int | None = None,
                              verify: bool = True):
    """Assign ids layer by layer so the policy relays as late as possible.

    The source takes the smallest label; each middle layer takes the deepest
    surviving pair of the transmission tree over the ids still unassigned; the
    final layer takes the leftovers. Per-layer gains sum to the final tree
    bound, which the emitted network can provably not beat.
    """
    if n < 3:
        raise ValueError("layered construction needs n >= 3")
    if depth_cap is None:
        depth_cap = default_horizon(n)
    num_layers = n // 2 + 1
    layers = [[1]]
    unassigned = list(range(2, n + 1))
    entries = []
    prev_bound = 0
    for i in range(1, num_layers - 1):
        views = LazyViews(layers, policy, k, depth_cap)
        tree = build_transmission_tree(unassigned, views, policy, k, depth_cap)
        if tree.findings:
            kind = tree.findings[0][0]
            raise PolicyFinding(kind, tree.findings,
                                f"policy {policy.name} cannot broadcast past layer {i}: "
                                f"{tree.findings[0]}")
        v1, v2, depth = deepest_pair(tree)
        bound = depth + 1
        entries.append(LayerEntry(i + 1, (v1, v2), bound, max(0, bound - prev_bound)))
        prev_bound = max(prev_bound, bound)
        layers.append([v1, v2])
        unassigned = [v for v in unassigned if v not in (v1, v2)]
    layers.append(sorted(unassigned))
    spec = LayeredSpec(tuple(tuple(layer) for layer in layers))
    network = build_layered(spec)
    cert = LayeredAdversaryCertificate(spec, tuple(entries), prev_bound)
    if verify:
        horizon = max(default_horizon(n), depth_cap)
        trace = run_adaptive(network, policy, k, horizon=horizon, record_steps=False)
        cert.replay_completed_at = trace.completed_at
        cert.replayed = True
    return cert, network


def save_layered_certificate(cert: LayeredAdversaryCertificate, path) -> None:
    lines = []
    for entry in cert.layers:
        v1, v2 = entry.pair
        lines.append(f"layer i={entry.layer_index} pair={v1},{v2} height={entry.gain}")
    lines.append(f"claimed_delay={cert.claimed_delay}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# --- direct budget-1 chain refinement ---------------------------------------------

@dataclass
class CollisionWitness:
    """Two candidates transmitting together, wired to a shared sink they can
    then never inform (each has a single shot)."""

    step: int
    pair: tuple
    network: Network


@dataclass
class RefinementCertificate:
    chain: Chain
    segment_bounds: tuple  # ((stage, first-transmit step, labels), ...)
    claimed_delay: int
    stage_floors: tuple  # ((stage, measured, floor), ...)
    replay_completed_at: int | None = None
    replayed: bool = False

    @property
    def replay_ok(self) -> bool:
        if not self.replayed:
            return False
        if self.replay_completed_at is None:
            return True
        return self.replay_completed_at >= self.claimed_delay


def _collision_witness(chain, pair, unused, step, n) -> CollisionWitness:
    tip = chain[-1]
    others = [v for v in unused if v not in pair]
    sink = max(others)
    edges = [(chain[i], chain[i + 1]) for i in range(len(chain) - 1)]
    edges += [(tip, pair[0]), (tip, pair[1]), (pair[0], sink), (pair[1], sink)]
    edges += [(sink, v) for v in others if v != sink]
    return CollisionWitness(step, pair, Network(n, edges, source=chain[0]))


def build_1shot_chain_refinement(n: int, policy, horizon: int | None = None,
                                 source: int = 1, verify: bool = True):
    """Directly grow a slow chain against a budget-1 policy.

    Every stage attaches all remaining candidates (in thought) to the chain
    tip, which hands them one shared view: the tip's own history, delivered at
    the tip's first transmit step. At most one candidate may transmit per
    subsequent step (two together are a collision witness and the policy is
    not a broadcasting protocol); excluding them one per step leaves the
    slowest candidate as the next chain node.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if horizon is None:
        horizon = default_horizon(n)
    if n == 1:
        cert = RefinementCertificate(Chain((source,)), ((0, 0, (source,)),), 0, ())
        return cert, build_chain([source], n)

    chain = [source]
    tip_sim = CandidateSim(source, _MappedViews({}), policy, 1, is_source=True)
    T = tip_sim.first_transmit(0, horizon)
    if T is None:
        raise PolicyFinding("PolicyIncomplete", source,
                            f"source {source} never transmits within horizon {horizon}")
    segments = [(0, T, (source,))]
    floors = []

    for stage in range(1, max(n - 2, 1)):
        unused = [v for v in range(1, n + 1) if v not in chain]
        if len(unused) <= 2:
            break
        tip_msg = Message(chain[-1], tip_sim.hist_at(T - 1))
        sims = {w: CandidateSim(w, _MappedViews({T: tip_msg}), policy, 1) for w in unused}
        first_tx = {w: sims[w].first_transmit(T, horizon) for w in unused}
        alive = list(unused)
        while len(alive) > 1:
            finite = [w for w in alive if first_tx[w] is not None]
            if not finite:
                raise PolicyFinding("RefinementStuck", tuple(alive),
                                    f"{len(alive)} candidates never transmit after step {T}")
            m = min(first_tx[w] for w in finite)
            txs = sorted(w for w in finite if first_tx[w] == m)
            if len(txs) >= 2:
                witness = _collision_witness(chain, (txs[0], txs[1]), unused, m, n)
                raise PolicyFinding("CollisionGraph", witness,
                                    f"candidates {txs[0]} and {txs[1]} both transmit at "
                                    f"step {m}; the witness sink never hears the message")
            alive.remove(txs[0])
        survivor = alive[0]
        t_new = first_tx[survivor]
        if t_new is None:
            raise PolicyFinding("PolicyIncomplete", survivor,
                                f"chain candidate {survivor} never transmits within horizon")
        floors.append((stage, t_new, T + (n - len(chain))))
        chain.append(survivor)
        tip_sim = sims[survivor]
        T = t_new
        segments.append((stage, T, (survivor,)))

    # final one or two nodes: hang the slower responder first
    leftovers = [v for v in range(1, n + 1) if v not in chain]
    if leftovers:
        tip_msg = Message(chain[-1], tip_sim.hist_at(T - 1))
        sims = {w: CandidateSim(w, _MappedViews({T: tip_msg}), policy, 1) for w in leftovers}
        first_tx = {w: sims[w].first_transmit(T, horizon) for w in leftovers}
        order = sorted(leftovers, key=lambda w: (-(first_tx[w] or horizon + 1), w))
        chain.extend(order)
        segments.append((len(segments), T, tuple(order)))
    claimed = T + 1 if len(leftovers) >= 2 else T
    network = build_chain(chain, n)
    cert = RefinementCertificate(Chain(tuple(chain)), tuple(segments), claimed, tuple(floors))
    if verify:
        trace = run_adaptive(network, policy, 1, horizon=horizon, record_steps=False)
        cert.replay_completed_at = trace.completed_at
        cert.replayed = True
    return cert, network
