"""Built-in adaptive policies: deterministic functions (v, t, history) -> action.

Policies are supplied in-process; `complete` marks the ones that finish
broadcasting on every reachable graph (the heuristics deliberately do not,
and exist to exercise the failure-witness machinery).
"""

from __future__ import annotations

from .engine import RECEIVE, TRANSMIT


class Policy:
    name = "policy"
    complete = False

    def decide(self, v: int, t: int, history) -> str:
        raise NotImplementedError


class RoundRobinEchoPolicy(Policy):
    """Informed nodes transmit at their first k round-robin slots (mod n) after waking."""

    complete = True

    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        self.name = f"rr-echo(n={n},k={k})"

    def decide(self, v, t, history):
        if not history.informed or history.shots_used >= self.k:
            return RECEIVE
        if (t - 1) % self.n + 1 != v:
            return RECEIVE
        return TRANSMIT if t > history.wake else RECEIVE


class ScheduleEchoPolicy(Policy):
    """Wrap an oblivious schedule as an adaptive policy: transmit at the first
    k scheduled appearances after waking."""

    complete = True

    def __init__(self, schedule, k: int):
        self.schedule = schedule
        self.k = k
        self.name = f"schedule-echo({schedule.descriptor()},k={k})"

    def decide(self, v, t, history):
        if not history.informed or history.shots_used >= self.k:
            return RECEIVE
        if t <= history.wake or v not in self.schedule.set(t):
            return RECEIVE
        return TRANSMIT


class FirstSilencePolicy(Policy):
    """Heuristic: once informed, transmit whenever the previous step was silent.

    Collides whenever two nodes wake together, so it is not a complete
    broadcasting protocol on branching graphs.
    """

    def __init__(self, k: int):
        self.k = k
        self.name = f"first-silence(k={k})"

    def decide(self, v, t, history):
        if not history.informed or history.shots_used >= self.k:
            return RECEIVE
        if history.step <= history.wake:
            return RECEIVE
        return TRANSMIT if history.incoming is None else RECEIVE


class EchoOncePolicy(Policy):
    """Transmit exactly once, on the step right after waking (source: step 1).

    Complete on chains; collides on any graph where two nodes wake together.
    """

    def __init__(self, k: int = 1):
        self.k = k
        self.name = f"echo-once(k={k})"

    def decide(self, v, t, history):
        if history.wake is None or history.shots_used >= self.k:
            return RECEIVE
        return TRANSMIT if t == history.wake + 1 else RECEIVE


class NeverTransmitPolicy(Policy):
    """Stays silent forever; completes only on a single-node network."""

    name = "never-transmit"

    def decide(self, v, t, history):
        return RECEIVE


class LabelSweepPolicy(Policy):
    """History-free sweep: node v transmits exactly at step v - offset.

    Sheds one label per round regardless of views, which makes its trees
    match the brute-force minimum for budget 1.
    """

    def __init__(self, offset: int = 1):
        self.offset = offset
        self.name = f"label-sweep(offset={offset})"

    def decide(self, v, t, history):
        return TRANSMIT if t == v - self.offset else RECEIVE


def builtin_policies(n: int, k: int) -> dict:
    """Name -> policy instance for the standard built-ins at a given (n, k)."""
    from .schedules import oblivious_kshot_schedule, round_robin_schedule

    return {
        "rr-echo": RoundRobinEchoPolicy(n, k),
        "schedule-echo": ScheduleEchoPolicy(round_robin_schedule(n), k),
        "schedule-echo-kshot": ScheduleEchoPolicy(oblivious_kshot_schedule(n, k), k),
        "first-silence": FirstSilencePolicy(k),
        "echo-once": EchoOncePolicy(k),
        "never-transmit": NeverTransmitPolicy(),
    }


def correct_policies(n: int, k: int) -> dict:
    return {name: pol for name, pol in builtin_policies(n, k).items() if pol.complete}
