"""Command-line front end: single runs, worst-case generators, experiment
sweeps with CSV output, and structural verifiers.

Exit status is nonzero whenever any check fails or a finding is emitted. All
randomness flows from explicit seeds recorded in the output headers, and the
KSHOT_HORIZON environment variable overrides the default step horizon.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import __version__
from .adaptive_adversary import (
    build_1shot_chain_refinement,
    build_adversarial_layered,
    save_layered_certificate,
)
from .engine import (
    check_stage_progress,
    check_sweep_progress,
    default_horizon,
    load_trace,
    peak_active,
    run_adaptive,
    run_oblivious,
    save_trace,
    verify_shot_budget,
)
from .errors import KshotError, PolicyFinding
from .oblivious_adversary import build_adversarial_chain, save_chain_certificate
from .policies import builtin_policies
from .schedules import (
    load_schedule,
    oblivious_kshot_schedule,
    round_robin_schedule,
    save_schedule,
    verify_line_properties,
    verify_validity,
)
from .topology import (
    build_chain,
    eccentricity,
    load_network,
    random_reachable_digraph,
    save_network,
)

CSV_COLUMNS = "n,k,protocol,graph_id,steps,max_shots,peak_active,flags"


@dataclass
class SweepConfig:
    n_values: tuple
    k_values: tuple
    protocol: str
    graphs: tuple  # (("random", count), ("chains", count), ("adversarial", count))
    seed: int
    horizon: int | None
    out: str
    summary: str | None = None
    jobs: int = 1

    def validate(self):
        if not self.n_values or not self.k_values:
            raise ValueError("need at least one n and one k")
        if any(n < 1 for n in self.n_values) or any(k < 1 for k in self.k_values):
            raise ValueError("all n and k values must be positive")
        for n in self.n_values:
            for k in self.k_values:
                if k > n:
                    raise ValueError(f"k={k} exceeds n={n}")


@dataclass
class RunRecord:
    n: int
    k: int
    protocol: str
    graph_id: str
    steps: int | None
    max_shots: int
    peak_active: int
    flags: str

    def csv_row(self) -> str:
        steps = "none" if self.steps is None else str(self.steps)
        return f"{self.n},{self.k},{self.protocol},{self.graph_id},{steps},{self.max_shots},{self.peak_active},{self.flags}"


def _resolve_horizon(args, n: int) -> int:
    if getattr(args, "horizon", None):
        return args.horizon
    env = os.environ.get("KSHOT_HORIZON")
    if env:
        return int(env)
    return default_horizon(n)


def _make_schedule(selector: str, n: int, k: int):
    if selector == "round_robin":
        return round_robin_schedule(n)
    if selector == "oblivious_kshot":
        return oblivious_kshot_schedule(n, k)
    if os.path.exists(selector):
        return load_schedule(selector)
    raise KshotError(f"unknown schedule selector {selector!r} (not a builtin, not a file)")


def _record_from_trace(trace, network, schedule, graph_id: str) -> RunRecord:
    flags = []
    if schedule is not None:
        violations = check_stage_progress(trace, network, schedule)
        soft = check_sweep_progress(trace, network, schedule)
        if violations:
            flags.append(f"stage-progress={len(violations)}")
        if soft:
            flags.append(f"sweep-progress={len(soft)}")
    for w in trace.warnings:
        flags.append("fallback")
    if not verify_shot_budget(trace, trace.k):
        flags.append("budget")
    if trace.completed_at is not None and trace.completed_at < eccentricity(network):
        flags.append("ecc-floor")
    return RunRecord(
        n=network.n, k=trace.k, protocol=trace.protocol, graph_id=graph_id,
        steps=trace.completed_at, max_shots=trace.max_shots(),
        peak_active=peak_active(trace, network), flags=";".join(flags),
    )


def _record_failed(record: RunRecord) -> bool:
    return record.steps is None or "stage-progress" in record.flags or "budget" in record.flags


def cmd_simulate(args) -> int:
    network = load_network(args.graph)
    horizon = _resolve_horizon(args, network.n)
    if args.policy:
        policy = builtin_policies(network.n, args.k)[args.policy]
        trace = run_adaptive(network, policy, args.k, horizon)
        schedule = None
    else:
        schedule = _make_schedule(args.schedule, network.n, args.k)
        trace = run_oblivious(network, schedule, args.k, horizon)
    record = _record_from_trace(trace, network, schedule, args.graph)
    if args.out:
        save_trace(trace, args.out)
    print(CSV_COLUMNS)
    print(record.csv_row())
    return 1 if _record_failed(record) else 0


def cmd_adversary(args) -> int:
    horizon = _resolve_horizon(args, args.n)
    try:
        if args.kind == "oblivious":
            schedule = _make_schedule(args.schedule, args.n, args.k)
            cert, network = build_adversarial_chain(
                args.n, args.k, schedule, horizon, source=args.source)
            claimed, ok = cert.claimed_delay, cert.replay_ok
            completed = cert.replay_completed_at
            if args.out_cert:
                save_chain_certificate(cert, args.out_cert)
            findings = cert.findings
        else:
            budget = args.k if args.kind == "adaptive" else 1
            policy = builtin_policies(args.n, budget)[args.policy]
            if args.kind == "adaptive":
                cert, network = build_adversarial_layered(args.n, args.k, policy, horizon)
                if args.out_cert:
                    save_layered_certificate(cert, args.out_cert)
            else:  # 1shot-chain
                cert, network = build_1shot_chain_refinement(args.n, policy, horizon)
                if args.out_cert:
                    save_chain_certificate(cert, args.out_cert)
            claimed, ok = cert.claimed_delay, cert.replay_ok
            completed = cert.replay_completed_at
            findings = ()
    except PolicyFinding as finding:
        print(f"FINDING {finding.kind}: {finding}")
        return 1
    if args.out_graph:
        save_network(network, args.out_graph)
    for note in findings:
        print(f"FINDING schedule: {note}")
    verdict = "PASS" if ok else "FAIL"
    print(f"replay {verdict} claimed_delay={claimed} completed_at={completed}")
    return 0 if ok and not findings else 1


def _corpus(n: int, k: int, schedule, graphs, seed: int, horizon: int):
    """Deterministic graph corpus for one (n, k) cell."""
    out = []
    for kind, count in graphs:
        if kind == "random":
            for i in range(count):
                out.append((f"random:{seed + i}", random_reachable_digraph(n, seed + i)))
        elif kind == "chains":
            for i in range(count):
                if i == 0:
                    out.append(("chain:asc", build_chain(list(range(1, n + 1)))))
                elif i == 1:
                    out.append(("chain:desc", build_chain(list(range(n, 0, -1)))))
                else:
                    rng = random.Random(seed + i)
                    ids = list(range(1, n + 1))
                    rng.shuffle(ids)
                    out.append((f"chain:shuf{seed + i}", build_chain(ids)))
        elif kind == "adversarial":
            for s in range(1, count + 1):
                cert, network = build_adversarial_chain(
                    n, k, schedule, horizon, source=s, verify=False)
                out.append((f"adv:src{s}", network))
        else:
            raise KshotError(f"unknown corpus kind {kind!r}")
    return out


def _sweep_cell(task):
    (n, k, protocol, graphs, seed, horizon) = task
    schedule = _make_schedule(protocol, n, k)
    horizon = horizon or default_horizon(n)
    rows = []
    for graph_id, network in _corpus(n, k, schedule, graphs, seed, horizon):
        trace = run_oblivious(network, schedule, k, horizon, record_steps=False)
        rows.append(_record_from_trace(trace, network, schedule, graph_id))
    return (n, k), rows


def run_sweep(config: SweepConfig):
    """Execute a sweep; returns (records, summary_lines, failed)."""
    config.validate()
    tasks = [
        (n, k, config.protocol, config.graphs, config.seed, config.horizon)
        for n in config.n_values
        for k in config.k_values
    ]
    results = {}
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for key, rows in pool.map(_sweep_cell, tasks):
                results[key] = rows
    else:
        for task in tasks:
            key, rows = _sweep_cell(task)
            results[key] = rows
    records = []
    summary = []
    failed = False
    for n in config.n_values:
        for k in config.k_values:
            rows = results[(n, k)]
            records.extend(rows)
            failed |= any(_record_failed(r) for r in rows)
            done = [r.steps for r in rows if r.steps is not None]
            adv = [r.steps for r in rows if r.steps is not None and r.graph_id.startswith("adv:")]
            c_all = max(done) * k / (n * n) if done else float("nan")
            c_adv = max(adv) * k / (n * n) if adv else float("nan")
            summary.append(
                f"# tradeoff n={n} k={k} runs={len(rows)} max_steps={max(done) if done else 'none'} "
                f"steps_k_over_n2={c_all:.4f} adversarial={c_adv:.4f}"
            )
    return records, summary, failed


def cmd_sweep(args) -> int:
    graphs = []
    for part in args.graphs.split(","):
        kind, _, count = part.partition(":")
        graphs.append((kind.strip(), int(count or 0)))
    config = SweepConfig(
        n_values=tuple(int(x) for x in args.n.split(",")),
        k_values=tuple(int(x) for x in args.k.split(",")),
        protocol=args.protocol,
        graphs=tuple(graphs),
        seed=args.seed,
        horizon=args.horizon or (int(os.environ["KSHOT_HORIZON"]) if os.environ.get("KSHOT_HORIZON") else None),
        out=args.out,
        summary=args.summary,
        jobs=args.jobs,
    )
    records, summary, failed = run_sweep(config)
    header = [
        f"# kshotlab {__version__} sweep protocol={config.protocol} seed={config.seed} "
        f"horizon={config.horizon if config.horizon else 'default'} graphs={args.graphs}",
        CSV_COLUMNS,
    ]
    lines = header + [r.csv_row() for r in records]
    with open(config.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in summary:
        print(line)
    if config.summary:
        with open(config.summary, "w", encoding="utf-8") as fh:
            fh.write("\n".join(summary) + "\n")
    print(f"wrote {len(records)} rows to {config.out}")
    return 1 if failed else 0


def cmd_verify(args) -> int:
    if args.target == "geometry":
        report = verify_line_properties(args.p)
        for name, ok in report.properties.items():
            print(f"{'PASS' if ok else 'FAIL'} geometry p={args.p} {name}")
        print(f"{'PASS' if report.ok else 'FAIL'} geometry p={args.p} lines={report.line_count}")
        return 0 if report.ok else 1
    if args.target == "validity":
        schedule = _make_schedule(args.schedule, args.n, args.k)
        horizon = _resolve_horizon(args, args.n)
        report = verify_validity(schedule, args.k, horizon)
        if report.ok:
            print(f"PASS validity n={args.n} k={args.k} horizon={report.horizon}")
            return 0
        v, t = report.counterexample
        print(f"FAIL validity n={args.n} k={args.k}: node {v} waking at step {t} "
              f"never transmits alone within its first {args.k} appearances")
        return 1
    if args.target == "budgets":
        trace = load_trace(args.trace)
        k = trace.k if args.k is None else args.k
        report = verify_shot_budget(trace, k)
        if report.ok:
            print(f"PASS budgets k={k} max_shots={trace.max_shots()}")
            return 0
        print(f"FAIL budgets k={k}: node {report.violator} transmitted {report.count} times")
        return 1
    raise KshotError(f"unknown verify target {args.target!r}")


def cmd_schedule(args) -> int:
    schedule = _make_schedule(args.kind, args.n, args.k)
    save_schedule(schedule, args.out, materialize=not args.header_only)
    if schedule.warning:
        print(f"warning: {schedule.warning}")
    print(f"wrote {schedule.descriptor()} period={schedule.period} to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kshot",
        description="Budget-limited broadcasting laboratory: simulate, attack, verify.",
    )
    parser.add_argument("--version", action="version", version=f"kshotlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one schedule or policy over a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--schedule", default="oblivious_kshot",
                   help="round_robin, oblivious_kshot, or a schedule file path")
    p.add_argument("--policy", default=None, help="builtin adaptive policy name")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None, help="trace file to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adversary", help="emit a worst-case graph plus delay certificate")
    p.add_argument("--kind", choices=["oblivious", "adaptive", "1shot-chain"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--schedule", default="oblivious_kshot")
    p.add_argument("--policy", default="rr-echo")
    p.add_argument("--source", type=int, default=1)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out-graph", default=None)
    p.add_argument("--out-cert", default=None)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("sweep", help="run a corpus of graphs over (n, k) grids, emit CSV")
    p.add_argument("--n", required=True, help="comma-separated node counts")
    p.add_argument("--k", required=True, help="comma-separated shot budgets")
    p.add_argument("--protocol", default="oblivious_kshot")
    p.add_argument("--graphs", default="random:5,chains:3,adversarial:2")
    p.add_argument("--seed", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--summary", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="structural verifiers: geometry, validity, budgets")
    p.add_argument("target", choices=["geometry", "validity", "budgets"])
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--schedule", default="oblivious_kshot")
    p.add_argument("--trace", default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("schedule", help="emit a schedule file (descriptor plus first period)")
    p.add_argument("--kind", default="oblivious_kshot")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--header-only", action="store_true",
                   help="write just the descriptor header, no materialized body")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schedule)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify" and args.target == "validity" and args.k is None:
        args.k = 3
    try:
        return args.func(args)
    except KshotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
