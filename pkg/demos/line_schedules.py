#!/usr/bin/env python3
"""The prime-grid line schedule and why it is a legal budget-k protocol.

Labels map to points of a p x p grid (p the smallest prime >= ceil(sqrt(n))).
Transmission sets alternate between whole grid lines and runs of single-node
round-robin steps; the grid structure guarantees every node a solo slot
within its first k scheduled appearances, whatever its wake step.
"""

from kshotlab import (
    line_members,
    oblivious_kshot_schedule,
    point_of_label,
    verify_line_properties,
    verify_validity,
)


def main():
    p, n, k = 5, 25, 3
    print(f"=== grid geometry, p={p} ===")
    report = verify_line_properties(p)
    for name, ok in report.properties.items():
        print(f"  {'PASS' if ok else 'FAIL'} {name}")
    print(f"  {report.line_count} distinct lines = p(p+1) = {p * (p + 1)}\n")

    print("=== label -> point mapping and one line ===")
    for i in (1, 7, 25):
        print(f"  label {i:2d} -> point {point_of_label(i, p)}")
    line = line_members(2, 1, p, n)
    print(f"  line (direction 2, offset 1) holds labels {sorted(line.members)}\n")

    sched = oblivious_kshot_schedule(n, k)
    print(f"=== the multiplexed schedule, n={n} k={k} ===")
    print(f"  p={sched.p}, K=ceil(p/(k-2))={sched.K}, period {sched.period} steps,")
    print(f"  stage length p(K+1)={sched.stage_len} steps")
    print("  first two blocks (one line step, then K round-robin steps):")
    for t in range(1, 2 * (sched.K + 1) + 1):
        print(f"    step {t:2d}: {sorted(sched.set(t))}")
    print()

    print("=== solo-slot validity ===")
    result = verify_validity(sched, k)
    print(f"  every node, every wake step up to {result.horizon}: "
          f"{'PASS' if result.ok else f'FAIL at {result.counterexample}'}")
    print("  (a node transmitting only in line steps would need more round-robin")
    print("   steps to pass than the interleave contains, so one of its first k")
    print("   appearances is always a singleton)")


if __name__ == "__main__":
    main()
