#!/usr/bin/env python3
"""Tour of the collision radio model.

Walks through single-step resolution, a full schedule-driven run with its
trace, and the fact that makes the whole problem hard: a collision is
indistinguishable from silence.
"""

from kshotlab import (
    Network,
    build_chain,
    progress_curve,
    resolve_step,
    round_robin_schedule,
    run_oblivious,
)


def main():
    print("=== one step of the radio model ===")
    diamond = Network(4, [(1, 2), (1, 3), (2, 4), (3, 4)], source=1)
    print("graph: 1 -> {2,3} -> 4")
    for tx in ({2}, {2, 3}):
        outcomes = resolve_step(diamond, tx)
        print(f"  transmitters {sorted(tx)} -> node 4 sees {outcomes[4]}")
    print("  two simultaneous in-transmissions collide; node 4 hears nothing,")
    print("  exactly as if nobody had transmitted at all\n")

    print("=== a full run on a chain ===")
    n = 6
    chain = build_chain(list(range(1, n + 1)))
    sched = round_robin_schedule(n)
    trace = run_oblivious(chain, sched, k=1)
    print(f"round-robin over the chain 1->2->...->{n}, budget 1")
    for rec in trace.steps:
        if rec.tx:
            print(f"  step {rec.step:3d}: {rec.tx} transmit, deliveries {list(rec.delivered)}")
    print(f"completed at step {trace.completed_at}; wake times {trace.wake}")
    print(f"shots used: {trace.shots_used} (each node transmits at most once)\n")

    print("=== progress bookkeeping ===")
    curve = progress_curve(trace, chain)
    print("progress gains one unit per newly informed node and one more when")
    print("all of a node's out-neighbors are informed; 2n-1 means done")
    marks = sorted(set([0] + list(trace.wake.values())))
    for t in marks:
        print(f"  t={t:3d}: progress {curve.at(t):2d} / {2 * n - 1}")


if __name__ == "__main__":
    main()
