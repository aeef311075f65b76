"""Transmission schedules: round-robin, prime-grid line multiplexing, verifiers, file I/O.

A schedule is an eventually periodic sequence of transmission sets over the
labels 1..n. The budget-aware generator maps labels onto a p x p grid (p the
smallest prime >= ceil(sqrt(n))) and interleaves whole-line transmission steps
with runs of single-node round-robin steps.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import FormatError, InvalidLabel, InvalidLine, InvalidPrime


def smallest_prime_geq(m: int) -> int:
    """Smallest prime p >= m (trial division; desk-scale inputs)."""
    if m < 2:
        return 2
    p = m
    while True:
        if all(p % d for d in range(2, math.isqrt(p) + 1)):
            return p
        p += 1


def grid_prime(n: int) -> int:
    """Prime grid side used for an n-node schedule: smallest prime >= ceil(sqrt(n))."""
    s = math.isqrt(n)
    if s * s < n:
        s += 1
    return smallest_prime_geq(s)


def point_of_label(i: int, p: int) -> tuple:
    """Grid point of label i.

    Labels are shifted down by one before div/mod so that all of 1..p*p lands
    inside the p x p grid (the unshifted map would push label p*p off-grid).
    """
    if not 1 <= i <= p * p:
        raise InvalidLabel(f"label {i} outside 1..{p * p}")
    return ((i - 1) // p, (i - 1) % p)


def label_of_point(x: int, y: int, p: int) -> int:
    return x * p + y + 1


@dataclass(frozen=True)
class Line:
    """A grid line: direction a in 0..p (a=p is vertical), offset b in 0..p-1."""

    a: int
    b: int
    p: int
    members: frozenset


def line_points(a: int, b: int, p: int) -> set:
    if not (0 <= a <= p and 0 <= b < p):
        raise InvalidLine(f"direction {a} or offset {b} out of range for p={p}")
    if a == p:
        return {(b, y) for y in range(p)}
    return {(x, (a * x + b) % p) for x in range(p)}


def line_members(a: int, b: int, p: int, n: int) -> Line:
    """Labels 1..n whose grid points lie on line (a, b)."""
    members = frozenset(
        label_of_point(x, y, p) for (x, y) in line_points(a, b, p) if label_of_point(x, y, p) <= n
    )
    return Line(a, b, p, members)


@dataclass
class GeometryReport:
    p: int
    line_count: int
    properties: dict

    @property
    def ok(self) -> bool:
        return all(self.properties.values())


def verify_line_properties(p: int) -> GeometryReport:
    """Exhaustively check the five grid-line properties over the full p*p grid:
    p(p+1) distinct lines; each point on exactly p+1 lines, one per direction;
    the lines of each direction partition the grid; two lines of different
    directions meet in exactly one point; two distinct points share exactly
    one line. These genuinely require p prime."""
    if p < 2 or any(p % d == 0 for d in range(2, p)):
        raise InvalidPrime(f"{p} is not prime")
    grid = {(x, y) for x in range(p) for y in range(p)}
    lines = {(a, b): frozenset(line_points(a, b, p)) for a in range(p + 1) for b in range(p)}

    props = {}
    props["distinct_line_count"] = len(set(lines.values())) == p * (p + 1)

    lines_of_point = {pt: [] for pt in grid}
    for key, pts in lines.items():
        for pt in pts:
            lines_of_point[pt].append(key)
    props["point_on_p_plus_1_lines"] = all(
        len(ls) == p + 1 and len({a for a, _ in ls}) == p + 1 for ls in lines_of_point.values()
    )

    partition_ok = True
    for a in range(p + 1):
        covered = [pt for b in range(p) for pt in lines[(a, b)]]
        partition_ok &= len(covered) == p * p and set(covered) == grid
    props["directions_partition_grid"] = partition_ok

    cross_ok = True
    keys = sorted(lines)
    for i, k1 in enumerate(keys):
        for k2 in keys[i + 1:]:
            if k1[0] != k2[0]:
                cross_ok &= len(lines[k1] & lines[k2]) == 1
    props["cross_direction_single_intersection"] = cross_ok

    pair_ok = True
    pts = sorted(grid)
    point_line_sets = {pt: set(ls) for pt, ls in lines_of_point.items()}
    for i, p1 in enumerate(pts):
        for p2 in pts[i + 1:]:
            pair_ok &= len(point_line_sets[p1] & point_line_sets[p2]) == 1
    props["two_points_one_common_line"] = pair_ok

    return GeometryReport(p=p, line_count=len(set(lines.values())), properties=props)


class Schedule:
    """Eventually periodic sequence of transmission sets with an O(1) accessor.

    kind is one of "round_robin", "oblivious_kshot" or "explicit"; `set(t)`
    returns the transmission set of step t >= 1 (labels above n are dropped,
    so empty sets are legal steps).
    """

    def __init__(self, kind, n, period, *, p=None, k=None, K=None, sets=None, warning=None):
        self.kind = kind
        self.n = n
        self.period = period
        self.p = p
        self.k = k
        self.K = K
        self.warning = warning
        self._explicit_sets = sets
        self._index = None
        if kind == "oblivious_kshot" and K is not None:
            self._lines = [
                line_members(a, b, p, n).members for a in range(p + 1) for b in range(p)
            ]
        else:
            self._lines = None

    # --- structure exposed for monitors and verifiers -------------------------------
    @property
    def stage_len(self):
        """Steps per stage (one direction sweep of line steps with its round-robin runs)."""
        if self.K is None:
            return None
        return self.p * (self.K + 1)

    @property
    def rr_pass_len(self):
        """Steps spanning one full round-robin pass of the grid, counted globally."""
        if self.K is None:
            return None
        return math.ceil(self.p * self.p / self.K) * (self.K + 1)

    def descriptor(self) -> str:
        if self.kind == "round_robin":
            return f"round_robin n={self.n}"
        if self.kind == "oblivious_kshot":
            return f"oblivious_kshot n={self.n} k={self.k}"
        return f"explicit n={self.n} period={self.period}"

    def set(self, t: int) -> frozenset:
        if t < 1:
            raise ValueError(f"step index must be >= 1, got {t}")
        if self._explicit_sets is not None:
            return self._explicit_sets[(t - 1) % self.period]
        if self.kind == "round_robin" or self.K is None:
            v = (t - 1) % (self.p * self.p) + 1
            return frozenset((v,)) if v <= self.n else frozenset()
        block, pos = divmod(t - 1, self.K + 1)
        if pos == 0:
            return self._lines[block % len(self._lines)]
        v = (block * self.K + (pos - 1)) % (self.p * self.p) + 1
        return frozenset((v,)) if v <= self.n else frozenset()

    def index(self) -> "ScheduleIndex":
        if self._index is None:
            self._index = ScheduleIndex(self)
        return self._index

    def __repr__(self):
        return f"Schedule({self.descriptor()})"


class ScheduleIndex:
    """Per-node appearance positions over one period, for fast occurrence queries."""

    def __init__(self, schedule: Schedule):
        self.schedule = schedule
        self.period = schedule.period
        steps = {v: [] for v in range(1, schedule.n + 1)}
        alone = {v: [] for v in range(1, schedule.n + 1)}
        for t in range(1, schedule.period + 1):
            members = schedule.set(t)
            solo = len(members) == 1
            for v in members:
                steps[v].append(t)
                alone[v].append(solo)
        self.steps = steps
        self.alone = alone

    def count_upto(self, v: int, step: int) -> int:
        """Appearances of v at steps <= step (step >= 0)."""
        lst = self.steps[v]
        if not lst:
            return 0
        q, r = divmod(step, self.period)
        return q * len(lst) + bisect_right(lst, r)

    def count_between(self, v: int, after: int, upto: int) -> int:
        return self.count_upto(v, upto) - self.count_upto(v, after)

    def nth_after(self, v: int, after: int, i: int):
        """Step of the i-th appearance of v strictly after `after` (1-based), or None."""
        lst = self.steps[v]
        if not lst or i < 1:
            return None
        idx = self.count_upto(v, after) + i - 1
        q, pos = divmod(idx, len(lst))
        return q * self.period + lst[pos]

    def next_after(self, v: int, after: int):
        return self.nth_after(v, after, 1)

    def window_alone(self, v: int, start_idx: int, k: int) -> bool:
        """True if any of the k appearances of v starting at periodic index start_idx is solo."""
        flags = self.alone[v]
        return any(flags[(start_idx + d) % len(flags)] for d in range(k))


@dataclass
class ValidityReport:
    n: int
    k: int
    horizon: int
    ok: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.ok


def round_robin_schedule(n: int) -> Schedule:
    """Single transmitters 1..p*p cycling forever (labels above n give empty steps)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = grid_prime(n)
    return Schedule("round_robin", n, p * p, p=p)


def oblivious_kshot_schedule(n: int, k: int) -> Schedule:
    """One line step followed by K = ceil(p/(k-2)) round-robin steps, repeating.

    The round-robin position advances persistently across blocks (one global
    round-robin, not restarted per block). For k < 3 the K formula is undefined
    and the schedule falls back to plain round-robin with a warning flag; that
    is still a valid budget-1 protocol.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = grid_prime(n)
    if k < 3:
        sched = Schedule(
            "oblivious_kshot", n, p * p, p=p, k=k,
            warning=f"k={k} < 3: falling back to plain round-robin",
        )
        return sched
    K = math.ceil(p / (k - 2))
    num_lines = p * (p + 1)
    rr_cycle_blocks = (p * p) // math.gcd(K, p * p)
    period_blocks = math.lcm(num_lines, rr_cycle_blocks)
    period = period_blocks * (K + 1)
    return Schedule("oblivious_kshot", n, period, p=p, k=k, K=K)


def verify_validity(schedule: Schedule, k: int | None = None, horizon: int | None = None) -> ValidityReport:
    """Check that from any wake step, a node's first k scheduled appearances
    include at least one step where it is the only transmitter in the network.

    The schedule is periodic, so every wake step maps to one of the appearance
    windows inside a single period; each window is checked once.
    """
    if k is None:
        k = schedule.k
    if k is None or k < 1:
        raise ValueError("a positive shot budget k is required")
    if horizon is None:
        horizon = 8 * schedule.n * schedule.n
    idx = schedule.index()
    for v in range(1, schedule.n + 1):
        apps = idx.steps[v]
        if not apps:
            return ValidityReport(schedule.n, k, horizon, False, (v, 0))
        for j, step in enumerate(apps):
            if step - 1 >= horizon:
                break
            if not idx.window_alone(v, j, k):
                return ValidityReport(schedule.n, k, horizon, False, (v, step - 1))
    return ValidityReport(schedule.n, k, horizon, True)


def explicit_schedule(n: int, sets) -> Schedule:
    """Wrap a concrete list of transmission sets as a periodic schedule."""
    frozen = [frozenset(s) for s in sets]
    for i, s in enumerate(frozen, start=1):
        for v in s:
            if not 1 <= v <= n:
                raise ValueError(f"set {i} contains label {v} outside 1..{n}")
    return Schedule("explicit", n, len(frozen), sets=frozen)


def save_schedule(schedule: Schedule, path, materialize: bool | None = None) -> None:
    """Write a schedule file: a descriptor header, plus the first period when materialized.

    Explicit schedules always carry their body; generated ones carry it by
    default so the file is inspectable, but load only needs the header.
    """
    if materialize is None:
        materialize = True
    explicit = schedule.kind == "explicit"
    lines = [f"schedule n={schedule.n} period={schedule.period} kind={schedule.descriptor().split()[0]}"]
    if schedule.kind == "oblivious_kshot":
        lines[0] += f" k={schedule.k}"
    if explicit or materialize:
        for t in range(1, schedule.period + 1):
            lines.append(f"t={t}: " + ",".join(str(v) for v in sorted(schedule.set(t))))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_schedule(path) -> Schedule:
    """Read a schedule file; descriptor kinds reconstruct their generator directly."""
    header = None
    body = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("schedule"):
                if header is not None:
                    raise FormatError("duplicate schedule header", lineno)
                try:
                    fields = dict(p.split("=", 1) for p in line.split()[1:])
                    header = {k: v for k, v in fields.items()}
                    header["n"] = int(header["n"])
                    header["period"] = int(header["period"])
                except (ValueError, KeyError) as exc:
                    raise FormatError(f"bad schedule header: {exc}", lineno) from exc
            elif line.startswith("t="):
                if header is None:
                    raise FormatError("body before schedule header", lineno)
                left, _, right = line.partition(":")
                try:
                    t = int(left[2:])
                except ValueError as exc:
                    raise FormatError(f"bad step index {left!r}", lineno) from exc
                labels = [s for s in right.strip().split(",") if s]
                try:
                    members = frozenset(int(s) for s in labels)
                except ValueError as exc:
                    raise FormatError(f"non-integer label in {right!r}", lineno) from exc
                for v in members:
                    if not 1 <= v <= header["n"]:
                        raise FormatError(f"label {v} outside 1..{header['n']}", lineno)
                body[t] = members
            else:
                raise FormatError(f"unknown record {line!r}", lineno)
    if header is None:
        raise FormatError("missing schedule header")
    kind = header.get("kind")
    if kind == "round_robin":
        return round_robin_schedule(header["n"])
    if kind == "oblivious_kshot":
        try:
            k = int(header["k"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"oblivious_kshot header needs k=<int>: {exc}") from exc
        return oblivious_kshot_schedule(header["n"], k)
    if kind == "explicit":
        period = header["period"]
        missing = [t for t in range(1, period + 1) if t not in body]
        if missing:
            raise FormatError(f"explicit schedule missing steps {missing[:5]}")
        return explicit_schedule(header["n"], [body[t] for t in range(1, period + 1)])
    raise FormatError(f"unknown schedule kind {kind!r}")
