"""Matrix-analytic solver for one-dimensional quasi-birth-and-death processes.

A 1d-QBD is a CTMC on levels ``0, 1, 2, ...`` with a phase at every level,
whose generator is block tridiagonal: a boundary level with its own phase set
and a level-homogeneous interior.  The stationary distribution is matrix
geometric, ``pi_l = pi_1 @ R**(l-1)``, where ``R`` is the minimal nonnegative
solution of the quadratic matrix equation

    R**2 @ Adown + R @ A0 + Aup = 0.

The two-dimensional analysis reduces to chains of this form: each axis of a
2d-QBD induces one, with the axis's own blocks on the boundary level and the
interior blocks above it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ctmc import AssumptionViolation, closed_classes, stationary


class NullRecurrenceError(RuntimeError):
    """The rate-matrix iteration reached the stability boundary.

    Raised when the minimal solution of the quadratic equation has spectral
    radius at (or numerically indistinguishable from) one, so the chain has
    no normalizable stationary distribution: it is null recurrent, transient,
    or too close to that boundary to decide in floating point.
    """


@dataclass(frozen=True)
class QbdSpec:
    """Blocks of a 1d-QBD generator.

    ``b0`` (boundary within-level), ``bup`` (boundary to level 1) and
    ``bdown`` (level 1 to boundary) describe the boundary level, whose phase
    count may differ from the interior's; ``aup``, ``a0``, ``adown`` are the
    level-homogeneous interior blocks.  Row-sum conventions: ``b0.1 + bup.1 =
    0``, ``bdown.1 + a0.1 + aup.1 = 0`` and ``(adown + a0 + aup).1 = 0``.
    """

    b0: np.ndarray
    bup: np.ndarray
    bdown: np.ndarray
    aup: np.ndarray
    a0: np.ndarray
    adown: np.ndarray

    def __post_init__(self) -> None:
        arrays = {
            name: np.array(getattr(self, name), dtype=float, ndmin=2)
            for name in ("b0", "bup", "bdown", "aup", "a0", "adown")
        }
        boundary = arrays["b0"].shape[0]
        interior = arrays["a0"].shape[0]
        expected = {
            "b0": (boundary, boundary),
            "bup": (boundary, interior),
            "bdown": (interior, boundary),
            "aup": (interior, interior),
            "a0": (interior, interior),
            "adown": (interior, interior),
        }
        for name, array in arrays.items():
            if array.shape != expected[name]:
                raise ValueError(
                    f"{name} must have shape {expected[name]}, got {array.shape}"
                )
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    def max_rate(self) -> float:
        """Largest absolute entry over the six blocks."""
        return max(
            np.abs(getattr(self, name)).max(initial=0.0)
            for name in ("b0", "bup", "bdown", "aup", "a0", "adown")
        )

    def row_sum_residual(self) -> float:
        """Largest violation of the three row-sum conventions."""
        residuals = [
            self.b0.sum(axis=1) + self.bup.sum(axis=1),
            self.bdown.sum(axis=1) + self.a0.sum(axis=1) + self.aup.sum(axis=1),
            (self.adown + self.a0 + self.aup).sum(axis=1),
        ]
        return max(np.abs(r).max() for r in residuals)


def minimal_rate_matrix(
    aup: np.ndarray,
    a0: np.ndarray,
    adown: np.ndarray,
    tol: float = 1e-14,
    max_iter: int = 10**6,
) -> np.ndarray:
    """Minimal nonnegative solution ``R`` of ``R^2 Adown + R A0 + Aup = 0``.

    Computed by the monotone fixed-point iteration ``R_0 = 0``,
    ``R_{n+1} = (Aup + R_n^2 Adown) @ (-A0)^{-1}``, which increases
    entrywise to the minimal solution.  ``R[i, j]`` is the expected sojourn
    rate in phase ``j`` one level up per unit time in phase ``i``, so the
    chain is positive recurrent exactly when the spectral radius of ``R`` is
    below one.

    Parameters
    ----------
    aup, a0, adown : ndarray
        Square interior blocks of equal size; ``adown + a0 + aup`` must be a
        generator and ``a0`` must have a negative diagonal.
    tol : float
        Iteration stops when successive iterates differ by at most ``tol``
        in max norm.
    max_iter : int
        Iteration cap.

    Returns
    -------
    ndarray
        The minimal nonnegative solution.

    Raises
    ------
    NullRecurrenceError
        If the iterates' spectral radius reaches ``1 - 1e-9`` or the cap is
        hit, both of which signal a chain at or beyond the stability
        boundary.
    ValueError
        If ``a0`` is singular or shapes disagree.
    """
    aup = np.array(aup, dtype=float, ndmin=2)
    a0 = np.array(a0, dtype=float, ndmin=2)
    adown = np.array(adown, dtype=float, ndmin=2)
    if not (aup.shape == a0.shape == adown.shape) or a0.shape[0] != a0.shape[1]:
        raise ValueError("aup, a0, adown must be square matrices of equal shape")
    try:
        inv_neg_a0 = np.linalg.inv(-a0)
    except np.linalg.LinAlgError as exc:
        raise ValueError("a0 must be nonsingular") from exc
    rate = np.zeros_like(a0)
    for iteration in range(max_iter):
        rate_next = (aup + rate @ rate @ adown) @ inv_neg_a0
        diff = np.abs(rate_next - rate).max()
        rate = rate_next
        if diff <= tol:
            break
        if iteration % 64 == 63 and _spectral_radius(rate) >= 1.0 - 1e-9:
            raise NullRecurrenceError(
                "rate-matrix iteration reached spectral radius "
                f"{_spectral_radius(rate):.12f}; the chain is not positive recurrent"
            )
    else:
        raise NullRecurrenceError(
            f"rate-matrix iteration did not converge within {max_iter} steps; "
            "the chain is at or beyond the stability boundary"
        )
    if _spectral_radius(rate) >= 1.0 - 1e-9:
        raise NullRecurrenceError(
            "rate matrix has spectral radius "
            f"{_spectral_radius(rate):.12f}; the chain is not positive recurrent"
        )
    return rate


def _spectral_radius(matrix: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(matrix)).max())


def quadratic_residual(
    rate: np.ndarray, aup: np.ndarray, a0: np.ndarray, adown: np.ndarray
) -> float:
    """Max-norm residual ``||R^2 Adown + R A0 + Aup||_inf`` of a candidate R."""
    residual = rate @ rate @ adown + rate @ a0 + aup
    return float(np.abs(residual).sum(axis=1).max())


@dataclass(frozen=True)
class QbdSolution:
    """Stationary distribution of a 1d-QBD in matrix-geometric form.

    ``pi0`` is the boundary-level subvector, ``pi1``/``pi2`` the level-1 and
    level-2 subvectors, ``R`` the rate matrix and ``N = (-A0 - R Adown)^{-1}``
    the fundamental matrix.  Levels beyond 1 follow ``pi_l = pi1 @ R**(l-1)``;
    use :func:`level_distribution`.
    """

    pi0: np.ndarray
    pi1: np.ndarray
    pi2: np.ndarray
    R: np.ndarray
    N: np.ndarray


def solve_qbd(spec: QbdSpec) -> QbdSolution:
    """Stationary distribution of a positive recurrent 1d-QBD.

    The boundary subvector solves the censored balance equation ``pi0 @ (B0 +
    Bup N Bdown) = 0`` — the generator of the chain watched only on the
    boundary level — normalized so that the total mass over all levels,
    ``pi0.1 + pi0 Bup N (I-R)^{-1}.1``, equals one.  Level subvectors then
    follow as ``pi1 = pi0 Bup N`` and ``pi_l = pi1 R**(l-1)``.

    Parameters
    ----------
    spec : QbdSpec

    Returns
    -------
    QbdSolution

    Raises
    ------
    NullRecurrenceError
        If the rate matrix has spectral radius at or above one (chain not
        positive recurrent).
    AssumptionViolation
        With ``assumption == 3`` if the censored boundary chain does not have
        exactly one closed communicating class, so the stationary
        distribution would not be unique.
    """
    rate = minimal_rate_matrix(spec.aup, spec.a0, spec.adown)
    fundamental = np.linalg.inv(-spec.a0 - rate @ spec.adown)
    censored = spec.b0 + spec.bup @ fundamental @ spec.bdown
    atol = 1e-12 * max(spec.max_rate(), 1.0)
    n_closed = len(closed_classes(censored, atol=atol))
    if n_closed != 1:
        raise AssumptionViolation(
            3,
            f"censored boundary chain has {n_closed} closed communicating "
            "classes; the axis chain must have exactly one irreducible class",
        )
    pi0 = stationary(censored, atol=atol)
    interior_weight = spec.bup @ fundamental
    tail_mass = interior_weight @ np.linalg.inv(np.eye(rate.shape[0]) - rate)
    total = pi0.sum() + pi0 @ tail_mass.sum(axis=1)
    pi0 = pi0 / total
    pi1 = pi0 @ interior_weight
    pi2 = pi1 @ rate
    return QbdSolution(pi0=pi0, pi1=pi1, pi2=pi2, R=rate, N=fundamental)


def level_distribution(solution: QbdSolution, level: int) -> np.ndarray:
    """Stationary subvector of one level: ``pi0`` or ``pi1 @ R**(level-1)``."""
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    if level == 0:
        return solution.pi0
    return solution.pi1 @ np.linalg.matrix_power(solution.R, level - 1)


def truncated_generator(spec: QbdSpec, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense generator of the chain truncated to levels ``0..levels``.

    Up-transitions from the top level are suppressed and their rate returned
    to the diagonal (reflecting truncation), keeping row sums zero.  Serves
    as a finite oracle for the matrix-geometric solution and for class
    structure analysis.

    Returns
    -------
    (ndarray, ndarray)
        The generator, states ordered boundary first then levels ``1..levels``
        with interior phases contiguous per level, and the level index of
        each state.
    """
    if levels < 2:
        raise ValueError(f"need at least two levels, got {levels}")
    boundary = spec.b0.shape[0]
    interior = spec.a0.shape[0]
    n = boundary + levels * interior
    generator = np.zeros((n, n))
    level_index = np.zeros(n, dtype=int)

    def span(level: int) -> slice:
        if level == 0:
            return slice(0, boundary)
        start = boundary + (level - 1) * interior
        return slice(start, start + interior)

    generator[span(0), span(0)] = spec.b0
    generator[span(0), span(1)] = spec.bup
    generator[span(1), span(0)] = spec.bdown
    for level in range(1, levels + 1):
        level_index[span(level)] = level
        generator[span(level), span(level)] = spec.a0
        if level >= 2:
            generator[span(level), span(level - 1)] = spec.adown
        if level < levels:
            generator[span(level), span(level + 1)] = spec.aup
    top = span(levels)
    generator[top, top] += np.diag(spec.aup.sum(axis=1))
    return generator, level_index
