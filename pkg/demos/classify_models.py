"""Classify two-queue models by the drift vectors of their induced chains.

Removing both boundaries of a 2d-QBD leaves a finite phase process whose
stationary drift vector says where the process is pushed deep in the
interior; removing one boundary leaves a one-dimensional QBD whose drift
says what happens along the other axis.  The classifier combines the signs
of these vectors into a verdict: PositiveRecurrent, Transient, or
Inconclusive when a drift sits on a zero boundary where the sign test has
no power.

This script walks the priority-setup model through its regimes by raising
the low-priority arrival rate across the critical value, then shows an
always-unstable variant and a boundary case.
"""

from __future__ import annotations

from qbd2d import build_priority_setup, classify, drift_axis, drift_plus


def report(model) -> None:
    interior = drift_plus(model)
    axis2 = drift_axis(model, 2)
    result = classify(model)
    axis_text = "undefined" if axis2 is None else f"({axis2.a1:+.4f}, {axis2.a2:+.4f})"
    print(f"  interior drift = ({interior.a1:+.4f}, {interior.a2:+.4f})   "
          f"axis-2 drift = {axis_text}")
    print(f"  -> {result.describe()}")


def main() -> None:
    # the critical lambda2 for lambda1 = 0.1 is about 0.8219: queue 1 is
    # lightly loaded, so stability hinges on the axis-2 chain's drift
    for lam2 in (0.5, 0.82, 0.8219008264, 0.83):
        print(f"priority setup, lambda1 = 0.1, lambda2 = {lam2}")
        report(build_priority_setup(0.1, lam2, 1.0, 1.0, 2.0, 2.0))
        print()

    print("priority setup, lambda1 = 1.2 (high-priority queue overloaded)")
    report(build_priority_setup(1.2, 0.3, 1.0, 1.0, 2.0, 2.0))
    print()

    print("priority setup, lambda1 = 1.0 (high-priority queue critical)")
    report(build_priority_setup(1.0, 0.3, 1.0, 1.0, 2.0, 2.0))


if __name__ == "__main__":
    main()
