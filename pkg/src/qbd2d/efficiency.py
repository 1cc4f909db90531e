"""Saturation throughput and efficiency of two-queue models.

Fix all rates of a two-queue model except one arrival rate and raise that
rate until the stability classification flips: the flip happens where the
relevant axis drift crosses zero.  The root ``lambda*`` is the saturation
arrival rate, and the efficiency

    rho* = (lambda1 * h1 + lambda2 * h2) / c

measures how much of the total service capacity (``c`` servers, mean service
times ``h1``, ``h2``) the model manages to use at that point; ``rho* = 1``
would be a perfectly efficient system.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping

from scipy.optimize import bisect

from .ctmc import AssumptionViolation
from .model import (
    QbdModel,
    build_additional_server,
    build_independent_pair,
    build_priority_setup,
)
from .qbd import NullRecurrenceError
from .stability import drift_axis, drift_plus

_ARRIVALS = ("lambda1", "lambda2")


@dataclass(frozen=True)
class ModelFamily:
    """A one-parameter family of models scanned along one arrival rate.

    ``builder(**fixed, **{scanned: value})`` produces the model at a scan
    point; ``service_means`` and ``servers`` describe the total service
    capacity used to convert the saturation rate into an efficiency.
    """

    builder: Callable[..., QbdModel]
    scanned: str
    fixed: Mapping[str, float]
    service_means: tuple[float, float]
    servers: float
    name: str = "family"

    def __post_init__(self) -> None:
        if self.scanned not in _ARRIVALS:
            raise ValueError(f"scanned must be one of {_ARRIVALS}, got {self.scanned!r}")
        if self.scanned in self.fixed:
            raise ValueError(f"{self.scanned} is scanned and cannot also be fixed")
        object.__setattr__(self, "fixed", MappingProxyType(dict(self.fixed)))

    @property
    def fixed_arrival(self) -> str:
        """Name of the arrival rate held fixed during the scan."""
        return _ARRIVALS[1 - _ARRIVALS.index(self.scanned)]

    def build(self, value: float) -> QbdModel:
        """Model at scan value ``value``."""
        return self.builder(**{**self.fixed, self.scanned: value})

    def with_fixed_rate(self, value: float) -> "ModelFamily":
        """Same family with the fixed arrival rate replaced by ``value``."""
        return replace(self, fixed={**self.fixed, self.fixed_arrival: value})

    def default_bracket(self) -> tuple[float, float]:
        """Scan bracket from just above zero to just below capacity saturation.

        The workload offered at the root can never exceed the raw capacity
        ``c``, so ``(c - lambda_fixed * h_fixed) / h_scanned`` bounds the root
        from above whenever the drift is meaningful.
        """
        h1, h2 = self.service_means
        if self.scanned == "lambda2":
            h_fixed, h_scanned = h1, h2
        else:
            h_fixed, h_scanned = h2, h1
        saturation = (self.servers - self.fixed[self.fixed_arrival] * h_fixed) / h_scanned
        lo, hi = 1e-4, saturation - 1e-4
        if not hi > lo:
            raise ValueError(
                f"no usable scan bracket: fixed rate {self.fixed[self.fixed_arrival]:.6g} "
                "already exhausts the service capacity"
            )
        return lo, hi


@dataclass(frozen=True)
class EfficiencyResult:
    """Saturation rate, efficiency and the drift residual left at the root."""

    lambda_star: float
    rho_star: float
    throughput_vector: tuple[float, float]
    drift_at_root: float


@dataclass(frozen=True)
class TableRow:
    """One sweep point: the fixed rate with its result or the failure reason."""

    fixed_rate: float
    result: EfficiencyResult | None = None
    error: str | None = field(default=None)


def drift_of_lambda(family: ModelFamily, value: float) -> float:
    """The scan-relevant axis drift coordinate at one scan point.

    Scanning ``lambda2`` reads the second coordinate of the axis-2 drift
    (how fast queue 2 grows while queue 1 stays stable); scanning ``lambda1``
    is symmetric.  Positive values mean the scanned queue is unstable.

    Raises
    ------
    ValueError
        If the drift is undefined at this point, naming which precondition
        failed: the free coordinate's interior drift must be negative and the
        axis chain must have exactly one irreducible class.
    """
    model = family.build(value)
    axis = 2 if family.scanned == "lambda2" else 1
    drift = drift_axis(model, axis)
    if drift is None:
        interior = drift_plus(model)
        transverse = interior.a1 if axis == 2 else interior.a2
        if not transverse < 0:
            raise ValueError(
                f"axis-{axis} drift undefined at {family.scanned}={value:.6g}: the "
                f"free coordinate's interior drift is {transverse:.6g}, not negative"
            )
        raise ValueError(
            f"axis-{axis} drift undefined at {family.scanned}={value:.6g}: the axis "
            "chain does not have exactly one irreducible class"
        )
    return drift.a2 if axis == 2 else drift.a1


def find_lambda_star(
    family: ModelFamily,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-8,
) -> EfficiencyResult:
    """Saturation arrival rate of the scanned queue, by bisection.

    Locates the zero of :func:`drift_of_lambda` in ``bracket`` (default: the
    family's capacity bracket) to within ``tol``, then converts it into the
    efficiency ``rho* = (lambda1 h1 + lambda2 h2) / c`` at the root.

    Raises
    ------
    ValueError
        If the drift has the same sign at both bracket ends, or is undefined
        somewhere in the bracket.
    """
    lo, hi = bracket if bracket is not None else family.default_bracket()
    drift_lo = drift_of_lambda(family, lo)
    drift_hi = drift_of_lambda(family, hi)
    if not (drift_lo < 0.0 < drift_hi or drift_hi < 0.0 < drift_lo):
        raise ValueError(
            f"drift does not change sign on [{lo:.6g}, {hi:.6g}]: "
            f"{drift_lo:.6g} at the left end, {drift_hi:.6g} at the right"
        )
    root = float(
        bisect(lambda value: drift_of_lambda(family, value), lo, hi, xtol=tol)
    )
    if family.scanned == "lambda2":
        throughput = (family.fixed["lambda1"], root)
    else:
        throughput = (root, family.fixed["lambda2"])
    h1, h2 = family.service_means
    rho_star = (throughput[0] * h1 + throughput[1] * h2) / family.servers
    return EfficiencyResult(
        lambda_star=root,
        rho_star=rho_star,
        throughput_vector=throughput,
        drift_at_root=drift_of_lambda(family, root),
    )


def table_sweep(
    family: ModelFamily,
    grid: list[float],
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-8,
) -> list[TableRow]:
    """Saturation scan over a grid of values of the fixed arrival rate.

    Each grid point replaces the family's fixed rate and solves for
    ``lambda*`` independently; failures are recorded in their row and the
    sweep continues.
    """
    rows: list[TableRow] = []
    for value in grid:
        point = family.with_fixed_rate(value)
        try:
            rows.append(TableRow(value, result=find_lambda_star(point, bracket, tol)))
        except (ValueError, ArithmeticError, AssumptionViolation, NullRecurrenceError) as exc:
            rows.append(TableRow(value, error=str(exc)))
    return rows


def priority_setup_family(
    *,
    mu1: float,
    mu2: float,
    gamma1: float,
    gamma2: float,
    lambda1: float | None = None,
    lambda2: float | None = None,
    scan: str = "lambda2",
) -> ModelFamily:
    """Scan family for the priority queue with setup times (one server)."""
    fixed = {"mu1": mu1, "mu2": mu2, "gamma1": gamma1, "gamma2": gamma2}
    _set_fixed_arrival(fixed, scan, lambda1, lambda2)
    return ModelFamily(
        build_priority_setup, scan, fixed, (1.0 / mu1, 1.0 / mu2), 1.0,
        name="priority-setup",
    )


def additional_server_family(
    *,
    mu1: float,
    mu2: float,
    lambda1: float | None = None,
    lambda2: float | None = None,
    scan: str = "lambda2",
) -> ModelFamily:
    """Scan family for the two queues sharing a third server (three servers)."""
    fixed = {"mu1": mu1, "mu2": mu2}
    _set_fixed_arrival(fixed, scan, lambda1, lambda2)
    return ModelFamily(
        build_additional_server, scan, fixed, (1.0 / mu1, 1.0 / mu2), 3.0,
        name="additional-server",
    )


def independent_pair_family(
    *,
    mu1: float,
    mu2: float,
    lambda1: float | None = None,
    lambda2: float | None = None,
    scan: str = "lambda2",
) -> ModelFamily:
    """Scan family for two uncoupled single-server queues (two servers)."""
    fixed = {"mu1": mu1, "mu2": mu2}
    _set_fixed_arrival(fixed, scan, lambda1, lambda2)
    return ModelFamily(
        build_independent_pair, scan, fixed, (1.0 / mu1, 1.0 / mu2), 2.0,
        name="independent-pair",
    )


def _set_fixed_arrival(
    fixed: dict[str, float], scan: str, lambda1: float | None, lambda2: float | None
) -> None:
    if scan not in _ARRIVALS:
        raise ValueError(f"scan must be one of {_ARRIVALS}, got {scan!r}")
    value = lambda1 if scan == "lambda2" else lambda2
    other = "lambda1" if scan == "lambda2" else "lambda2"
    if value is None:
        raise ValueError(f"{other} must be given when scanning {scan}")
    fixed[other] = value
