#!/usr/bin/env python3
"""Scan message-amplitude skew and report how well a receiver can do against
a defecting agent: the no-recovery fidelity |a|^4 + |b|^4 and the best
single-qubit-unitary recovery found by the search grid."""

import argparse

import numpy as np

from teleportnet import (
    BellOutcome,
    MessageSpec,
    NetworkShape,
    analyze_defection,
    recovery_unitaries,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=9)
    parser.add_argument("--agents", type=int, default=1)
    parser.add_argument("--random-unitaries", type=int, default=1000)
    args = parser.parse_args()

    grid = recovery_unitaries(num_random=args.random_unitaries, seed=7)
    shape = NetworkShape.single(1, args.agents)
    print(f"{'|a|^2':>6} {'no recovery':>12} {'grid best':>10} {'ceiling max(a,b)':>17}")
    for w in np.linspace(0.05, 0.5, args.steps):
        alpha, beta = np.sqrt(w), np.sqrt(1 - w) * 1j
        spec = MessageSpec(((alpha, beta),))
        reports = analyze_defection(spec, shape, 0, unitaries=grid)
        report = next(r for r in reports if r.bell_outcomes[0] is BellOutcome.PHI_PLUS)
        no_recovery = w**2 + (1 - w) ** 2
        print(
            f"{w:>6.3f} {no_recovery:>12.6f} {report.max_fidelity[0]:>10.6f} "
            f"{max(w, 1 - w):>17.6f}"
        )


if __name__ == "__main__":
    main()
