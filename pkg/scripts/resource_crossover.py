#!/usr/bin/env python3
"""Sweep the auxiliary-qubit cost of both methods over message counts and
agent counts, and print where the entangling protocol starts to win."""

import argparse

from teleportnet import crossover_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-m", type=int, default=12)
    parser.add_argument("--agents", type=int, nargs="+", default=[1, 2, 3, 4])
    args = parser.parse_args()

    for n in args.agents:
        table = crossover_table(n, range(1, args.max_m + 1))
        print(f"\nagents n={n}  (first dominating m: {table.first_dominating_m})")
        print(f"{'m':>3} {'aux new':>8} {'aux base':>9} {'gap':>5}")
        for row in table.rows:
            gap = row.aux_baseline - row.aux_entangling
            marker = " <-" if row.m == table.first_dominating_m else ""
            print(f"{row.m:>3} {row.aux_entangling:>8} {row.aux_baseline:>9} {gap:>5}{marker}")


if __name__ == "__main__":
    main()
