"""Drift-based stability classification of 2d-QBD processes.

Away from the axes, a 2d-QBD behaves like three simpler chains: the free
interior chain (phase process only, both level coordinates unconstrained) and
two induced axis chains, each a 1d-QBD that keeps one level coordinate and
lets the other run free.  Each of these chains, when it has a stationary
phase distribution, yields a mean velocity vector for the level pair.  The
sign pattern of these velocities decides positive recurrence or transience of
the full process; sign patterns on the zero boundary are genuinely open and
reported as inconclusive.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ctmc import AssumptionViolation, closed_classes, stationary
from .model import STEPS, BlockKey, QbdModel
from .qbd import (
    NullRecurrenceError,
    QbdSpec,
    solve_qbd,
    truncated_generator,
)

_UP = (0, 1)


@dataclass(frozen=True)
class DriftVector:
    """Mean level velocity ``(a1, a2)``, in level steps per unit time."""

    a1: float
    a2: float

    def __iter__(self):
        return iter((self.a1, self.a2))

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2])


class Verdict(Enum):
    """Outcome of the stability classification."""

    POSITIVE_RECURRENT = "PositiveRecurrent"
    TRANSIENT = "Transient"
    INCONCLUSIVE = "Inconclusive"


class AxisChainStructure(Enum):
    """Closed-class structure of an induced axis chain."""

    NO_IRREDUCIBLE_CLASS = "NoIrreducibleClass"
    ONE_IRREDUCIBLE_CLASS = "OneIrreducibleClass"
    VIOLATES_ASSUMPTION_3 = "ViolatesAssumption3"


@dataclass(frozen=True)
class Classification:
    """Stability verdict with the governing case and the drifts behind it.

    ``case_tag`` is one of the four decisive sign-pattern cases ``i``-``iv``
    or one of the boundary labels ``a-1``, ``a-2``, ``b``, ``c``, ``d`` for
    which no conclusion is available.  ``a_axis1``/``a_axis2`` hold the axis
    drifts that the decision actually consulted (``None`` where undefined or
    not needed).
    """

    verdict: Verdict
    case_tag: str
    a_plus: DriftVector
    a_axis1: DriftVector | None
    a_axis2: DriftVector | None

    def describe(self) -> str:
        return f"{self.verdict.value} (case {self.case_tag})"


def induced_plus(model: QbdModel) -> np.ndarray:
    """Generator of the free chain's phase process: all interior blocks summed."""
    total = np.zeros((model.layout.splus, model.layout.splus))
    for k1 in STEPS:
        for k2 in STEPS:
            total += model.block("+", k1, k2)
    return total


def drift_plus(model: QbdModel) -> DriftVector:
    """Mean velocity of the free chain, the 2d-QBD with both boundaries removed.

    The phase process alone is Markov with generator :func:`induced_plus`;
    weighting each interior block's rates by its level step against the
    stationary phase distribution ``pi`` gives

        a1 = pi @ (A_{1,*} - A_{-1,*}) @ 1,
        a2 = pi @ (A_{*,1} - A_{*,-1}) @ 1,

    where ``A_{k,*}``/``A_{*,k}`` sum the interior blocks over the other
    coordinate's step.

    Raises
    ------
    AssumptionViolation
        With ``assumption == 2`` if the phase process has zero or several
        closed classes, so its stationary distribution is not unique.
    """
    pi = stationary(induced_plus(model))
    a1 = 0.0
    a2 = 0.0
    for k1 in STEPS:
        for k2 in STEPS:
            mass = float(pi @ model.block("+", k1, k2).sum(axis=1))
            a1 += k1 * mass
            a2 += k2 * mass
    return DriftVector(a1, a2)


def induced_axis(model: QbdModel, axis: int) -> QbdSpec:
    """1d-QBD obtained by keeping one level coordinate and freeing the other.

    For ``axis == 1`` the chain retains ``l2`` as its level (the ``l1``
    boundary is removed): the boundary level uses the ``l2 = 0`` axis blocks
    summed over the free coordinate's step ``k1``, the interior the summed
    interior blocks.  ``axis == 2`` is symmetric with ``l1`` as the level.
    """
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    region = "1" if axis == 1 else "2"

    def summed(block_region: str, level_step: int) -> np.ndarray:
        keys = [
            BlockKey(
                block_region,
                free_step if axis == 1 else level_step,
                level_step if axis == 1 else free_step,
            )
            for free_step in STEPS
        ]
        return sum(model.blocks[key] for key in keys)

    return QbdSpec(
        b0=summed(region, 0),
        bup=summed(region, 1),
        bdown=summed(region, -1),
        aup=summed("+", 1),
        a0=summed("+", 0),
        adown=summed("+", -1),
    )


def classify_axis_chain(
    model: QbdModel, axis: int, levels: int = 40
) -> AxisChainStructure:
    """Closed-class structure of an induced axis chain.

    Analyzed on a reflecting truncation to ``levels`` levels.  The reflection
    can manufacture closed classes pinned to the top level (states whose only
    escape was upward), so a class only counts if it reaches the boundary
    level or stays clear of the truncation edge; a conforming chain's
    irreducible class spans every level and always counts.
    """
    spec = induced_axis(model, axis)
    generator, level_index = truncated_generator(spec, levels)
    atol = 1e-12 * max(spec.max_rate(), 1.0)
    genuine = 0
    for members in closed_classes(generator, atol=atol):
        touches_boundary = bool((level_index[members] == 0).any())
        touches_edge = bool((level_index[members] == levels).any())
        if touches_boundary or not touches_edge:
            genuine += 1
    if genuine == 0:
        return AxisChainStructure.NO_IRREDUCIBLE_CLASS
    if genuine == 1:
        return AxisChainStructure.ONE_IRREDUCIBLE_CLASS
    return AxisChainStructure.VIOLATES_ASSUMPTION_3


def _step_weighted_velocity(
    model: QbdModel,
    weights: np.ndarray,
    keys: list[BlockKey],
    coordinate: int,
) -> float:
    """Sum of ``weights @ block @ 1`` times the block's step along a coordinate."""
    total = 0.0
    for key in keys:
        step = key.k1 if coordinate == 1 else key.k2
        if step != 0:
            total += step * float(weights @ model.blocks[key].sum(axis=1))
    return total


def drift_axis(model: QbdModel, axis: int, levels: int = 40) -> DriftVector | None:
    """Mean velocity of an induced axis chain, or ``None`` where undefined.

    The axis chain has a stationary distribution only when the free
    coordinate's interior drift is negative (so the retained level does not
    escape) and the chain has exactly one irreducible class; otherwise the
    velocity is undefined and ``None`` is returned.  When defined, the
    velocity averages the level steps of every transition over the stationary
    distribution, split over the boundary level, level 1 and the geometric
    tail:

        a = pi0 . (boundary moves) + pi1 . (level-1 moves)
            + pi2 (I-R)^{-1} . (interior moves).

    The component along the retained level must vanish (the chain is
    stationary in that coordinate); it is evaluated anyway and returned as a
    consistency witness.

    Raises
    ------
    AssumptionViolation
        Propagated from the free chain's phase process (assumption 2) or the
        boundary solve (assumption 3).
    NullRecurrenceError
        If the free coordinate's drift is negative but so close to zero that
        the rate-matrix solve hits the stability boundary.
    ArithmeticError
        If the retained-level component fails to vanish, indicating an
        inconsistent model or a numerical breakdown.
    """
    interior = drift_plus(model)
    transverse = interior.a2 if axis == 1 else interior.a1
    if not transverse < 0:
        return None
    structure = classify_axis_chain(model, axis, levels=levels)
    if structure is not AxisChainStructure.ONE_IRREDUCIBLE_CLASS:
        return None
    spec = induced_axis(model, axis)
    solution = solve_qbd(spec)
    region = "1" if axis == 1 else "2"

    def keys_from_boundary() -> list[BlockKey]:
        if axis == 1:
            return [BlockKey(region, k1, k2) for k1 in STEPS for k2 in _UP]
        return [BlockKey(region, k1, k2) for k1 in _UP for k2 in STEPS]

    def keys_from_level1() -> list[BlockKey]:
        if axis == 1:
            down = [BlockKey(region, k1, -1) for k1 in STEPS]
            stay = [BlockKey("+", k1, k2) for k1 in STEPS for k2 in _UP]
        else:
            down = [BlockKey(region, -1, k2) for k2 in STEPS]
            stay = [BlockKey("+", k1, k2) for k1 in _UP for k2 in STEPS]
        return down + stay

    interior_keys = [BlockKey("+", k1, k2) for k1 in STEPS for k2 in STEPS]
    tail = solution.pi2 @ np.linalg.inv(np.eye(solution.R.shape[0]) - solution.R)

    def velocity(coordinate: int) -> float:
        return (
            _step_weighted_velocity(model, solution.pi0, keys_from_boundary(), coordinate)
            + _step_weighted_velocity(model, solution.pi1, keys_from_level1(), coordinate)
            + _step_weighted_velocity(model, tail, interior_keys, coordinate)
        )

    along_free = velocity(1 if axis == 1 else 2)
    along_level = velocity(2 if axis == 1 else 1)
    if abs(along_level) > 1e-8 * max(model.max_rate(), 1.0):
        raise ArithmeticError(
            f"axis-{axis} chain has nonzero velocity {along_level:.3e} along its "
            "own level, which is impossible for a stationary chain; the model "
            "blocks are inconsistent or the solve lost precision"
        )
    if axis == 1:
        return DriftVector(along_free, along_level)
    return DriftVector(along_level, along_free)


def _band_sign(value: float, eps: float) -> int:
    if value < -eps:
        return -1
    if value > eps:
        return 1
    return 0


def classify(model: QbdModel, eps: float = 1e-9, levels: int = 40) -> Classification:
    """Positive recurrence / transience of a 2d-QBD from its drift vectors.

    Signs are taken with a zero band of ``eps`` after normalizing drifts by
    the model's largest rate, so the verdict is invariant under rescaling
    time; ``levels`` bounds the truncation used by the axis-chain structure
    checks.  The decision runs on the interior drift ``a_plus`` first:

    * both components negative (case ``i``): positive recurrent when both
      axis drifts point inward, transient when either points outward;
    * exactly one component negative (cases ``ii``/``iii``): decided by the
      axis drift along the non-negative direction;
    * both components non-negative, not both zero (case ``iv``): transient.

    Any decisive quantity falling in the zero band — or an axis drift being
    undefined where it is needed — yields ``Inconclusive`` with the label of
    the matching excluded boundary case (``a-1``, ``a-2``, ``b``, ``c`` or
    ``d``); these boundaries are genuinely open, and null recurrence is never
    claimed.

    Raises
    ------
    AssumptionViolation
        Propagated from the underlying solves (assumptions 2 and 3).
    """
    scale = max(model.max_rate(), np.finfo(float).tiny)
    a_plus = drift_plus(model)
    sign1 = _band_sign(a_plus.a1 / scale, eps)
    sign2 = _band_sign(a_plus.a2 / scale, eps)
    computed: dict[int, DriftVector | None] = {}

    def axis_drift(axis: int) -> DriftVector | None:
        if axis not in computed:
            try:
                computed[axis] = drift_axis(model, axis, levels=levels)
            except NullRecurrenceError:
                computed[axis] = None
        return computed[axis]

    def axis_sign(axis: int) -> int | None:
        drift = axis_drift(axis)
        if drift is None:
            return None
        value = drift.a1 if axis == 1 else drift.a2
        return _band_sign(value / scale, eps)

    def result(verdict: Verdict, tag: str) -> Classification:
        return Classification(
            verdict=verdict,
            case_tag=tag,
            a_plus=a_plus,
            a_axis1=computed.get(1),
            a_axis2=computed.get(2),
        )

    if sign1 == 0 and sign2 == 0:
        return result(Verdict.INCONCLUSIVE, "d")
    if sign1 >= 0 and sign2 >= 0:
        return result(Verdict.TRANSIENT, "iv")
    if sign1 < 0 and sign2 < 0:
        d1 = axis_sign(1)
        if d1 == 1:
            return result(Verdict.TRANSIENT, "i")
        d2 = axis_sign(2)
        if d2 == 1:
            return result(Verdict.TRANSIENT, "i")
        if d1 == -1 and d2 == -1:
            return result(Verdict.POSITIVE_RECURRENT, "i")
        if d1 in (None, 0):
            return result(Verdict.INCONCLUSIVE, "a-1")
        return result(Verdict.INCONCLUSIVE, "a-2")
    if sign2 < 0:  # a_plus points inward along l2 only: decided by axis 1
        d1 = axis_sign(1)
        if d1 == -1:
            return result(Verdict.POSITIVE_RECURRENT, "ii")
        if d1 == 1:
            return result(Verdict.TRANSIENT, "ii")
        return result(Verdict.INCONCLUSIVE, "b")
    d2 = axis_sign(2)  # symmetric: inward along l1 only, decided by axis 2
    if d2 == -1:
        return result(Verdict.POSITIVE_RECURRENT, "iii")
    if d2 == 1:
        return result(Verdict.TRANSIENT, "iii")
    return result(Verdict.INCONCLUSIVE, "c")
