#!/usr/bin/env python3
"""The shots-times-steps plateau.

Sweeps the line schedule over random graphs, plain chains and synthesized
worst-case chains for several (n, k) cells and tabulates max(steps) * k / n^2.
Up to k ~ sqrt(n) the statistic hugs a constant: halving the budget doubles
the worst completion time, and extra budget beyond sqrt(n) buys nothing.
"""

from kshotlab.cli import SweepConfig, run_sweep


def main():
    cells_n = (25, 49, 100)
    cells_k = (3, 5, 7)
    config = SweepConfig(
        n_values=cells_n,
        k_values=cells_k,
        protocol="oblivious_kshot",
        graphs=(("random", 8), ("chains", 3), ("adversarial", 2)),
        seed=1000,
        horizon=None,
        out="",
    )
    records, summary, failed = run_sweep(config)
    assert not failed

    print("worst completion steps, scaled by k/n^2 (plateau expected):\n")
    print("   n \\ k |" + "".join(f"  {k:5d}  " for k in cells_k))
    print("  -------+" + "---------" * len(cells_k))
    for n in cells_n:
        row = [f"  {n:5d}  |"]
        for k in cells_k:
            steps = max(r.steps for r in records
                        if r.n == n and r.k == k and r.steps is not None)
            row.append(f"  {steps * k / (n * n):6.3f} ")
        print("".join(row))
    print("\nper-cell summaries (adversarial column is the certified-slow subset):")
    for line in summary:
        print(" " + line.lstrip("# "))


if __name__ == "__main__":
    main()
