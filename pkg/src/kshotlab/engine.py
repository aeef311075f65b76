"""Synchronous collision-model radio engine.

Per step, every node acts as transmitter or receiver (half-duplex). A node
receives a message exactly when a single in-neighbor transmits; two or more
simultaneous in-transmissions collide and are indistinguishable from silence.
Nodes never transmit before holding the broadcast message under schedule-driven
runs, and each node transmits at most k times in any run.

Step numbering: the source is informed at step 0, simulation steps start at 1,
and "after step t" always means strictly greater than t.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .errors import InvalidNode, PolicyError

TRANSMIT = "transmit"
RECEIVE = "receive"

BROADCAST_PAYLOAD = b"m"


def default_horizon(n: int) -> int:
    """Comfortably above every completion bound exercised at desk scale."""
    return 8 * n * n


@dataclass(frozen=True)
class Message:
    """What a transmission carries: the broadcast payload, or the sender's history."""

    sender: int
    payload: object

    def informs(self) -> bool:
        if isinstance(self.payload, History):
            return self.payload.informed
        return self.payload is not None


class History:
    """A node's full view: one event per elapsed step plus the initial value.

    Stored as an immutable linked list so message payloads can snapshot a
    history in O(1). Derived facts (informed / wake / shots) are cached on
    every link, which keeps policy decisions O(1).
    """

    __slots__ = ("step", "own_action", "incoming", "prev", "informed", "wake", "shots_used")

    def __init__(self, step, own_action, incoming, prev, informed, wake, shots_used):
        self.step = step
        self.own_action = own_action
        self.incoming = incoming
        self.prev = prev
        self.informed = informed
        self.wake = wake
        self.shots_used = shots_used

    @classmethod
    def initial(cls, is_source: bool) -> "History":
        # the initial value is (empty, broadcast payload) for the source and
        # (empty, nothing) otherwise; the informed flag carries the distinction
        return cls(0, None, None, None, is_source, 0 if is_source else None, 0)

    def extend(self, own_action: str, incoming: Message | None) -> "History":
        informed = self.informed or (incoming is not None and incoming.informs())
        wake = self.wake
        if wake is None and informed:
            wake = self.step + 1
        shots = self.shots_used + (1 if own_action == "transmitted" else 0)
        return History(self.step + 1, own_action, incoming, self, informed, wake, shots)

    def events(self):
        """Events for steps 1..step, oldest first."""
        out = []
        node = self
        while node.prev is not None:
            out.append(ViewEvent(node.step, node.own_action, node.incoming))
            node = node.prev
        out.reverse()
        return out

    def __repr__(self):
        return f"History(step={self.step}, informed={self.informed}, shots={self.shots_used})"


@dataclass(frozen=True)
class ViewEvent:
    """One step of a node's view: its own action plus what it heard.

    A collision step and a no-transmission step both show incoming None;
    nodes cannot tell them apart.
    """

    step: int
    own_action: str
    incoming: Message | None


@dataclass(frozen=True)
class StepRecord:
    step: int
    tx: tuple
    delivered: tuple  # ((receiver, sender), ...)
    collisions: tuple
    suppressed: tuple = ()


@dataclass
class SimTrace:
    """Everything one run produced: per-step records (optional), wake times,
    per-node shot counts and the completion step (None if the horizon ran out)."""

    protocol: str
    n: int
    k: int
    horizon: int
    wake: dict
    shots_used: dict
    completed_at: int | None
    steps: list | None = None
    warnings: tuple = ()

    @property
    def last_step(self) -> int:
        return self.completed_at if self.completed_at is not None else self.horizon

    def max_shots(self) -> int:
        return max(self.shots_used.values(), default=0)


def resolve_step(network, transmitters) -> dict:
    """Per-node outcome of one step: ("delivered", u), ("collision",) or ("silence",).

    Transmitters hear nothing that step regardless of their in-neighborhood.
    """
    tx = set(transmitters)
    for v in tx:
        if not 1 <= v <= network.n:
            raise InvalidNode(f"transmitter {v} outside 1..{network.n}")
    counts = {}
    senders = {}
    for u in tx:
        for w in network.out_edges[u]:
            counts[w] = counts.get(w, 0) + 1
            senders[w] = u
    outcomes = {}
    for v in network.nodes:
        c = counts.get(v, 0)
        if v in tx or c == 0:
            outcomes[v] = ("silence",)
        elif c == 1:
            outcomes[v] = ("delivered", senders[v])
        else:
            outcomes[v] = ("collision",)
    return outcomes


def run_oblivious(network, schedule, k: int, horizon: int | None = None,
                  record_steps: bool = True) -> SimTrace:
    """Drive a schedule over a network: an informed node transmits at the first
    k steps strictly after its wake step in which the schedule names it.

    Stops early once every node is informed; running out of horizon is reported
    in the trace (completed_at=None), not raised.
    """
    if k < 1:
        raise ValueError("shot budget k must be >= 1")
    n = network.n
    if horizon is None:
        horizon = default_horizon(n)
    source = network.source
    out = network.out_edges
    pending = [0] * (n + 1)  # shots left; > 0 only for informed nodes
    shots = [0] * (n + 1)
    wake = {source: 0}
    pending[source] = k
    informed_count = 1
    completed_at = 0 if n == 1 else None
    steps = [] if record_steps else None
    warnings = (schedule.warning,) if schedule.warning else ()

    t = 0
    while completed_at is None and t < horizon:
        t += 1
        members = schedule.set(t)
        tx = [v for v in members if v <= n and pending[v] > 0]
        counts = {}
        senders = {}
        for u in tx:
            pending[u] -= 1
            shots[u] += 1
            for w in out[u]:
                counts[w] = counts.get(w, 0) + 1
                senders[w] = u
        delivered = []
        collisions = []
        txset = set(tx)
        for w, c in counts.items():
            if w in txset:
                continue
            if c == 1:
                delivered.append((w, senders[w]))
                if w not in wake:
                    wake[w] = t
                    pending[w] = k
                    informed_count += 1
            else:
                collisions.append(w)
        if informed_count == n:
            completed_at = t
        if record_steps:
            steps.append(StepRecord(t, tuple(sorted(tx)), tuple(sorted(delivered)),
                                    tuple(sorted(collisions))))
    return SimTrace(
        protocol=schedule.descriptor(),
        n=n, k=k, horizon=horizon,
        wake=dict(sorted(wake.items())),
        shots_used={v: shots[v] for v in range(1, n + 1)},
        completed_at=completed_at,
        steps=steps,
        warnings=warnings,
    )


def run_adaptive(network, policy, k: int, horizon: int | None = None,
                 record_steps: bool = True, stop_on_complete: bool = True) -> SimTrace:
    """Drive a history-driven policy. Each step, every node asks
    policy.decide(v, t, H_{t-1}(v)); transmitters send their identity plus
    their whole view. Nodes may transmit before holding the broadcast message;
    all transmissions count against the k budget, and requests beyond the
    budget are suppressed to silence (visible in the trace).
    """
    if k < 1:
        raise ValueError("shot budget k must be >= 1")
    n = network.n
    if horizon is None:
        horizon = default_horizon(n)
    source = network.source
    out = network.out_edges
    hist = {v: History.initial(v == source) for v in network.nodes}
    wake = {source: 0}
    informed_count = 1
    completed_at = 0 if n == 1 else None
    steps = [] if record_steps else None

    t = 0
    while t < horizon and not (stop_on_complete and completed_at is not None):
        t += 1
        tx = []
        suppressed = []
        for v in network.nodes:
            d1 = policy.decide(v, t, hist[v])
            d2 = policy.decide(v, t, hist[v])
            if d1 != d2:
                raise PolicyError(f"policy {policy.name} nondeterministic at (v={v}, t={t})")
            if d1 == TRANSMIT:
                if hist[v].shots_used < k:
                    tx.append(v)
                else:
                    suppressed.append(v)
        messages = {u: Message(u, hist[u]) for u in tx}
        counts = {}
        senders = {}
        for u in tx:
            for w in out[u]:
                counts[w] = counts.get(w, 0) + 1
                senders[w] = u
        txset = set(tx)
        delivered = []
        collisions = []
        new_hist = {}
        for v in network.nodes:
            if v in txset:
                new_hist[v] = hist[v].extend("transmitted", None)
                continue
            c = counts.get(v, 0)
            incoming = None
            if c == 1:
                incoming = messages[senders[v]]
                delivered.append((v, senders[v]))
            elif c >= 2:
                collisions.append(v)
            new_hist[v] = hist[v].extend("silent", incoming)
            if incoming is not None and new_hist[v].informed and v not in wake:
                wake[v] = t
                informed_count += 1
        hist = new_hist
        if completed_at is None and informed_count == n:
            completed_at = t
        if record_steps:
            steps.append(StepRecord(t, tuple(sorted(tx)), tuple(sorted(delivered)),
                                    tuple(sorted(collisions)), tuple(sorted(suppressed))))
    return SimTrace(
        protocol=f"policy:{policy.name}",
        n=n, k=k, horizon=horizon,
        wake=dict(sorted(wake.items())),
        shots_used={v: hist[v].shots_used for v in network.nodes},
        completed_at=completed_at,
        steps=steps,
    )


# --- progress bookkeeping ---------------------------------------------------------

@dataclass
class ProgressCurve:
    """Progress over time: one unit when a node is informed, one more when all
    of an informed node's out-neighbors are informed. The source's two units
    are counted once jointly (granted at step 0), so a completed broadcast
    scores exactly 2n-1.
    """

    n: int
    wake_steps: list
    second_unit_steps: list
    final_step: int

    def at(self, t: int) -> int:
        return bisect_right(self.wake_steps, t) + bisect_right(self.second_unit_steps, t)

    def values(self):
        return [self.at(t) for t in range(self.final_step + 1)]

    @property
    def final(self) -> int:
        return self.at(self.final_step)


def progress_curve(trace: SimTrace, network) -> ProgressCurve:
    wake = trace.wake
    second = []
    for v in network.nodes:
        if v == network.source or v not in wake:
            continue
        outs = network.out_edges[v]
        if all(w in wake for w in outs):
            step = max([wake[v]] + [wake[w] for w in outs])
            second.append(step)
    return ProgressCurve(
        n=network.n,
        wake_steps=sorted(wake.values()),
        second_unit_steps=sorted(second),
        final_step=trace.last_step,
    )


def active_set(trace: SimTrace, network, t: int) -> frozenset:
    """Informed nodes that still have an uninformed out-neighbor at step t."""
    wake = trace.wake
    return frozenset(
        v for v in network.nodes
        if wake.get(v, None) is not None and wake[v] <= t
        and any(wake.get(w, t + 1) > t for w in network.out_edges[v])
    )


def peak_active(trace: SimTrace, network) -> int:
    """Maximum active-set size over the run, evaluated after each wake event."""
    wake = trace.wake
    events = sorted({t for t in wake.values()})
    best = 0
    for t in events:
        best = max(best, len(active_set(trace, network, t)))
    return best


@dataclass
class BudgetReport:
    ok: bool
    violator: int | None = None
    count: int | None = None

    def __bool__(self):
        return self.ok


def verify_shot_budget(trace: SimTrace, k: int) -> BudgetReport:
    """Check shots_used[v] <= k for every node; recounts from step records when present."""
    counts = dict(trace.shots_used)
    if trace.steps:
        recount = {}
        for rec in trace.steps:
            for v in rec.tx:
                recount[v] = recount.get(v, 0) + 1
        for v, c in recount.items():
            counts[v] = max(counts.get(v, 0), c)
    for v in sorted(counts):
        if counts[v] > k:
            return BudgetReport(False, v, counts[v])
    return BudgetReport(True)


# --- runtime monitors -------------------------------------------------------------

def check_stage_progress(trace: SimTrace, network, schedule, k: int | None = None) -> list:
    """Hard monitor: at any stage boundary where the active set has size f with
    2f <= k, the next 2f stages must gain at least f progress units, unless the
    run completes inside that window. Violations are returned, not raised."""
    if schedule.stage_len is None:
        return []
    if k is None:
        k = trace.k
    sl = schedule.stage_len
    curve = progress_curve(trace, network)
    completed = trace.completed_at
    last = trace.last_step
    violations = []
    s = 0
    while s * sl <= last:
        t0 = s * sl
        f = len(active_set(trace, network, t0))
        if f >= 1 and 2 * f <= k:
            t1 = (s + 2 * f) * sl
            if completed is not None and completed <= t1:
                pass
            elif completed is None and t1 > last:
                pass  # horizon truncated the window; nothing to evaluate
            else:
                gain = curve.at(t1) - curve.at(t0)
                if gain < f:
                    violations.append({
                        "kind": "stage-progress", "boundary": t0, "active": f,
                        "window_end": t1, "gain": gain, "required": f,
                    })
        s += 1
    return violations


def check_sweep_progress(trace: SimTrace, network, schedule, k: int | None = None) -> list:
    """Soft monitor: at any stage boundary where the active set exceeds k/2, one
    full round-robin pass should gain at least k/2 progress units. Returned as
    flags, never as failures (the constant hidden in the claim is implicit)."""
    if schedule.stage_len is None:
        return []
    if k is None:
        k = trace.k
    sl = schedule.stage_len
    window = schedule.rr_pass_len
    curve = progress_curve(trace, network)
    completed = trace.completed_at
    last = trace.last_step
    flags = []
    s = 0
    while s * sl <= last:
        t0 = s * sl
        f = len(active_set(trace, network, t0))
        if 2 * f > k:
            t1 = t0 + window
            if completed is not None and completed <= t1:
                pass
            elif completed is None and t1 > last:
                pass
            else:
                gain = curve.at(t1) - curve.at(t0)
                if 2 * gain < k:
                    flags.append({
                        "kind": "sweep-progress", "boundary": t0, "active": f,
                        "window_end": t1, "gain": gain, "required": k / 2,
                    })
        s += 1
    return flags


# --- trace file I/O ---------------------------------------------------------------

def save_trace(trace: SimTrace, path) -> None:
    proto = trace.protocol.replace(" ", ";")
    lines = [
        f"# kshotlab trace protocol={proto} n={trace.n} k={trace.k} horizon={trace.horizon}"
    ]
    for rec in trace.steps or ():
        parts = [
            f"step {rec.step}",
            "tx=" + ",".join(map(str, rec.tx)),
            "delivered=" + ",".join(f"{v}:{u}" for v, u in rec.delivered),
            "collisions=" + ",".join(map(str, rec.collisions)),
        ]
        if rec.suppressed:
            parts.append("suppressed=" + ",".join(map(str, rec.suppressed)))
        lines.append(" ".join(parts))
    for v, t in trace.wake.items():
        lines.append(f"wake {v}={t}")
    for v in sorted(trace.shots_used):
        lines.append(f"shots {v}={trace.shots_used[v]}")
    lines.append(f"completed_at={trace.completed_at if trace.completed_at is not None else 'none'}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_trace(path) -> SimTrace:
    from .errors import FormatError

    protocol, n, k, horizon = "unknown", 0, 0, 0
    steps = []
    wake = {}
    shots = {}
    completed_at = None
    saw_completed = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = dict(p.split("=", 1) for p in line.split() if "=" in p)
                protocol = fields.get("protocol", protocol).replace(";", " ")
                n = int(fields.get("n", n))
                k = int(fields.get("k", k))
                horizon = int(fields.get("horizon", horizon))
                continue
            parts = line.split()
            try:
                if parts[0] == "step":
                    fields = dict(p.split("=", 1) for p in parts[2:])
                    tx = tuple(int(x) for x in fields.get("tx", "").split(",") if x)
                    delivered = tuple(
                        tuple(int(y) for y in pair.split(":"))
                        for pair in fields.get("delivered", "").split(",") if pair
                    )
                    collisions = tuple(int(x) for x in fields.get("collisions", "").split(",") if x)
                    suppressed = tuple(int(x) for x in fields.get("suppressed", "").split(",") if x)
                    steps.append(StepRecord(int(parts[1]), tx, delivered, collisions, suppressed))
                elif parts[0] == "wake":
                    v, t = parts[1].split("=")
                    wake[int(v)] = int(t)
                elif parts[0] == "shots":
                    v, c = parts[1].split("=")
                    shots[int(v)] = int(c)
                elif parts[0].startswith("completed_at="):
                    val = parts[0].split("=", 1)[1]
                    completed_at = None if val == "none" else int(val)
                    saw_completed = True
                else:
                    raise ValueError(f"unknown record {parts[0]!r}")
            except (ValueError, IndexError) as exc:
                raise FormatError(f"bad trace line {line!r}: {exc}", lineno) from exc
    if not saw_completed:
        raise FormatError("missing completed_at footer")
    n = n or (max(shots) if shots else 0)
    return SimTrace(protocol=protocol, n=n, k=k, horizon=horizon, wake=wake,
                    shots_used=shots, completed_at=completed_at, steps=steps or None)
