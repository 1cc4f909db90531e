"""Critical arrival rates and efficiency of the two bundled model families.

Fix one arrival rate and raise the other until the classifier's verdict
flips from PositiveRecurrent to Transient: the flip point ``lambda2*`` is a
zero of the axis-2 drift, found by bisection.  The efficiency

    rho* = (lambda1 / mu1 + lambda2* / mu2) / servers

measures how much of the raw service capacity the model actually converts
into throughput at its stability boundary.  Sweeping the fixed rate shows
where each family wastes capacity: the priority setup loses the most when
both queues matter (setup times burn server time on every switch), while
the additional-server model approaches full efficiency as the dedicated
servers saturate.
"""

from __future__ import annotations

from qbd2d import additional_server_family, priority_setup_family, table_sweep


def print_table(title: str, family, grid: list[float]) -> None:
    print(title)
    print("  lambda1   lambda2*   rho*")
    for row in table_sweep(family, grid):
        assert row.result is not None, row.error
        print(f"  {row.fixed_rate:<8.1f}  {row.result.lambda_star:<9.3f}  "
              f"{row.result.rho_star:.3f}")
    print()


def main() -> None:
    print_table(
        "priority setup with setup times (one server, mu = 1, gamma = 2):",
        priority_setup_family(mu1=1.0, mu2=1.0, gamma1=2.0, gamma2=2.0, lambda1=0.1),
        [round(0.1 * i, 1) for i in range(1, 10)],
    )
    print_table(
        "two dedicated servers plus one shared helper (mu = 1):",
        additional_server_family(mu1=1.0, mu2=1.0, lambda1=1.1),
        [round(1.0 + 0.1 * i, 1) for i in range(1, 10)],
    )


if __name__ == "__main__":
    main()
