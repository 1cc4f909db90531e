"""Block-structured generators for two-dimensional quasi-birth-and-death processes.

A 2d-QBD process is a continuous-time Markov chain on states ``((l1, l2), j)``
where the level pair ``(l1, l2)`` ranges over the quarter plane and the phase
``j`` ranges over a finite set that depends on which boundary the level pair
sits on: the origin, the ``l2 = 0`` axis, the ``l1 = 0`` axis, or the interior.
Transitions change each level coordinate by at most one (skip-free), with
rates that are homogeneous away from the axes.  The generator is therefore
fully described by 36 rate blocks, one per (boundary region, level step) pair.

This module holds the model container, shape/sign/row-sum validation, the
built-in example families, and helpers to assemble finite truncations and to
read/write models as JSON.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping

import numpy as np

REGIONS = ("0", "1", "2", "+")
STEPS = (-1, 0, 1)

#: Tolerance factor for row-sum and sign checks, relative to the largest rate.
ROWSUM_RTOL = 1e-12


class ModelError(ValueError):
    """Raised when block data does not describe a valid 2d-QBD generator."""


@dataclass(frozen=True)
class PhaseLayout:
    """Phase-set sizes for the four boundary regions.

    Parameters
    ----------
    s0 : int
        Number of phases at the origin ``(0, 0)``.
    s1 : int
        Number of phases on the ``l2 = 0`` axis (``l1 >= 1``).
    s2 : int
        Number of phases on the ``l1 = 0`` axis (``l2 >= 1``).
    splus : int
        Number of phases in the interior (``l1, l2 >= 1``).
    """

    s0: int
    s1: int
    s2: int
    splus: int

    def __post_init__(self) -> None:
        for name in ("s0", "s1", "s2", "splus"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ModelError(f"phase count {name} must be a positive integer, got {value!r}")

    def region_size(self, region: str) -> int:
        """Phase count of ``region`` (one of ``"0"``, ``"1"``, ``"2"``, ``"+"``)."""
        return {"0": self.s0, "1": self.s1, "2": self.s2, "+": self.splus}[region]


@dataclass(frozen=True)
class BlockKey:
    """Identifies one of the 36 generator blocks.

    ``region`` names the block family (``"0"`` origin, ``"1"`` the ``l2 = 0``
    axis, ``"2"`` the ``l1 = 0`` axis, ``"+"`` interior) and ``(k1, k2)`` is the
    level step the block applies to.
    """

    region: str
    k1: int
    k2: int

    def __post_init__(self) -> None:
        if self.region not in REGIONS:
            raise ModelError(f"unknown block region {self.region!r}")
        if self.k1 not in STEPS or self.k2 not in STEPS:
            raise ModelError(f"block steps must lie in {{-1, 0, 1}}, got ({self.k1}, {self.k2})")

    def __str__(self) -> str:
        return f"{self.region}:{self.k1},{self.k2}"

    @classmethod
    def from_string(cls, text: str) -> "BlockKey":
        """Parse a ``"<region>:<k1>,<k2>"`` key, the format used in model files."""
        try:
            region, steps = text.split(":")
            k1, k2 = (int(part) for part in steps.split(","))
        except ValueError as exc:
            raise ModelError(f"malformed block key {text!r}") from exc
        return cls(region, k1, k2)


ALL_BLOCK_KEYS: tuple[BlockKey, ...] = tuple(
    BlockKey(region, k1, k2) for region in REGIONS for k1 in STEPS for k2 in STEPS
)

# Source and destination regions of each block.  Rows of a block are indexed by
# the source region's phases and columns by the destination region's phases.
_ORIGIN_ENDPOINTS = {
    (0, 0): ("0", "0"), (1, 0): ("0", "1"), (0, 1): ("0", "2"), (1, 1): ("0", "+"),
    (-1, 0): ("1", "0"), (0, -1): ("2", "0"), (-1, -1): ("+", "0"),
    (-1, 1): ("1", "2"), (1, -1): ("2", "1"),
}


def block_endpoints(key: BlockKey) -> tuple[str, str]:
    """Return ``(source_region, destination_region)`` for a block key."""
    if key.region == "+":
        return ("+", "+")
    if key.region == "1":
        if key.k2 == -1:
            return ("+", "1")
        return ("1", "1" if key.k2 == 0 else "+")
    if key.region == "2":
        if key.k1 == -1:
            return ("+", "2")
        return ("2", "2" if key.k1 == 0 else "+")
    return _ORIGIN_ENDPOINTS[(key.k1, key.k2)]


def block_shape(key: BlockKey, layout: PhaseLayout) -> tuple[int, int]:
    """Expected ``(rows, cols)`` of the block ``key`` under ``layout``."""
    src, dst = block_endpoints(key)
    return (layout.region_size(src), layout.region_size(dst))


class Archetype(Enum):
    """The nine position classes with distinct outgoing transition structure.

    The outgoing blocks of a state depend on its level pair only through
    ``(min(l1, 2), min(l2, 2))``: whether each coordinate is on its axis, one
    step off it, or deeper inside.
    """

    ORIGIN = (0, 0)
    AXIS1_EDGE = (1, 0)
    AXIS1_DEEP = (2, 0)
    AXIS2_EDGE = (0, 1)
    AXIS2_DEEP = (0, 2)
    CORNER = (1, 1)
    NEAR_AXIS2 = (1, 2)
    NEAR_AXIS1 = (2, 1)
    INTERIOR = (2, 2)

    @classmethod
    def of(cls, l1: int, l2: int) -> "Archetype":
        """Archetype of the state position ``(l1, l2)``."""
        if l1 < 0 or l2 < 0:
            raise ModelError(f"levels must be nonnegative, got ({l1}, {l2})")
        return cls((min(l1, 2), min(l2, 2)))

    @property
    def region(self) -> str:
        """Region whose phase set applies at this position."""
        c1, c2 = self.value
        if c1 == 0 and c2 == 0:
            return "0"
        if c2 == 0:
            return "1"
        if c1 == 0:
            return "2"
        return "+"


def _build_active_blocks() -> dict[Archetype, tuple[BlockKey, ...]]:
    up = (0, 1)
    full = (-1, 0, 1)
    table = {
        Archetype.ORIGIN: [("0", k1, k2) for k1 in up for k2 in up],
        Archetype.AXIS1_EDGE: [("1", k1, k2) for k1 in up for k2 in up]
        + [("0", -1, 0), ("0", -1, 1)],
        Archetype.AXIS1_DEEP: [("1", k1, k2) for k1 in full for k2 in up],
        Archetype.AXIS2_EDGE: [("2", k1, k2) for k1 in up for k2 in up]
        + [("0", 0, -1), ("0", 1, -1)],
        Archetype.AXIS2_DEEP: [("2", k1, k2) for k1 in up for k2 in full],
        Archetype.CORNER: [("+", k1, k2) for k1 in up for k2 in up]
        + [("1", 0, -1), ("1", 1, -1), ("2", -1, 0), ("2", -1, 1), ("0", -1, -1)],
        Archetype.NEAR_AXIS2: [("+", k1, k2) for k1 in up for k2 in full]
        + [("2", -1, k2) for k2 in full],
        Archetype.NEAR_AXIS1: [("+", k1, k2) for k1 in full for k2 in up]
        + [("1", k1, -1) for k1 in full],
        Archetype.INTERIOR: [("+", k1, k2) for k1 in full for k2 in full],
    }
    return {arch: tuple(BlockKey(*spec) for spec in specs) for arch, specs in table.items()}


_ACTIVE_BLOCKS = _build_active_blocks()


def active_blocks(archetype: Archetype) -> tuple[BlockKey, ...]:
    """Block keys governing outgoing transitions from states of ``archetype``.

    Each key's ``(k1, k2)`` is the level increment of the move; the block's
    rows are indexed by the phases of the archetype's region.
    """
    return _ACTIVE_BLOCKS[archetype]


@dataclass(frozen=True, eq=False)
class QbdModel:
    """Immutable 2d-QBD model: a phase layout plus all 36 rate blocks.

    Blocks omitted from ``blocks`` are filled with zeros of the correct shape;
    supplied blocks are copied, coerced to float and made read-only.
    """

    layout: PhaseLayout
    blocks: Mapping[BlockKey, np.ndarray]
    name: str = "model"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        full: dict[BlockKey, np.ndarray] = {}
        for key in ALL_BLOCK_KEYS:
            shape = block_shape(key, self.layout)
            given = self.blocks.get(key)
            if given is None:
                block = np.zeros(shape)
            else:
                block = np.array(given, dtype=float)
                if block.shape != shape:
                    raise ModelError(
                        f"block {key} must have shape {shape}, got {block.shape}"
                    )
            block.flags.writeable = False
            full[key] = block
        unknown = set(self.blocks) - set(full)
        if unknown:
            raise ModelError(f"unknown block keys: {sorted(map(str, unknown))}")
        object.__setattr__(self, "blocks", MappingProxyType(full))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def block(self, region: str, k1: int, k2: int) -> np.ndarray:
        """The rate block for ``region`` and level step ``(k1, k2)``."""
        return self.blocks[BlockKey(region, k1, k2)]

    def max_rate(self) -> float:
        """Largest absolute entry over all blocks; the model's rate scale."""
        return max(np.abs(block).max(initial=0.0) for block in self.blocks.values())


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: hard errors and advisory warnings."""

    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(model: QbdModel) -> ValidationReport:
    """Check that a model's blocks form a proper 2d-QBD generator.

    Four checks are run:

    1. every block has the shape implied by the layout (always true for
       models built through :class:`QbdModel`, re-checked for completeness);
    2. sign pattern: the four within-level blocks ``(region, 0, 0)`` have
       nonnegative off-diagonal and strictly negative diagonal entries, and
       every other block is nonnegative;
    3. for each of the nine position archetypes, the outgoing rates summed
       over all active blocks cancel row-wise (generator rows sum to zero);
    4. the small truncation with levels ``0..6`` in each coordinate is
       irreducible (warning only; reducibility is legitimate for some models
       but usually indicates a typo in hand-entered blocks).

    Returns
    -------
    ValidationReport
        ``errors`` from checks 1-3 and ``warnings`` from check 4.
    """
    errors: list[str] = []
    warnings: list[str] = []
    layout = model.layout
    scale = model.max_rate()
    tol = ROWSUM_RTOL * max(scale, 1.0)

    for key in ALL_BLOCK_KEYS:
        expected = block_shape(key, layout)
        if model.blocks[key].shape != expected:
            errors.append(f"block {key} has shape {model.blocks[key].shape}, expected {expected}")

    for region in REGIONS:
        diag_block = model.block(region, 0, 0)
        off = diag_block - np.diag(np.diag(diag_block))
        if off.min(initial=0.0) < -tol:
            errors.append(f"block {region}:0,0 has negative off-diagonal entries")
        if np.diag(diag_block).max(initial=-np.inf) >= 0.0:
            errors.append(f"block {region}:0,0 has a nonnegative diagonal entry")
    for key in ALL_BLOCK_KEYS:
        if (key.k1, key.k2) == (0, 0):
            continue
        if model.blocks[key].min(initial=0.0) < -tol:
            errors.append(f"block {key} has negative entries")

    for archetype in Archetype:
        rows = layout.region_size(archetype.region)
        total = np.zeros(rows)
        for key in active_blocks(archetype):
            total += model.blocks[key].sum(axis=1)
        worst = np.abs(total).max()
        if worst > tol:
            errors.append(
                f"outgoing rates from archetype {archetype.name} do not cancel "
                f"(worst row-sum residual {worst:.3e})"
            )

    if not errors:
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components

        generator = assemble_truncated_generator(model, 6, 6)
        adjacency = csr_matrix((np.abs(generator) > tol).astype(np.int8))
        n_components, _ = connected_components(adjacency, directed=True, connection="strong")
        if n_components > 1:
            warnings.append(
                f"7x7-level truncation is reducible ({n_components} strongly "
                "connected components); stationary analysis will restrict to a "
                "closed class"
            )

    return ValidationReport(tuple(errors), tuple(warnings))


# --------------------------------------------------------------------------
# Kronecker helpers


def kron_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def kron_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker sum ``a (+) b = a x I + I x b`` of two square matrices.

    The generator of two independent Markov chains run jointly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] != a.shape[1] or b.shape[0] != b.shape[1]:
        raise ModelError("kron_sum requires square matrices")
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


# --------------------------------------------------------------------------
# Finite truncations


def _truncated_states(layout: PhaseLayout, n1: int, n2: int) -> list[tuple[int, int, int]]:
    states: list[tuple[int, int, int]] = []
    for l1 in range(n1 + 1):
        for l2 in range(n2 + 1):
            region = Archetype.of(l1, l2).region
            states.extend((l1, l2, j) for j in range(layout.region_size(region)))
    return states


def assemble_truncated_generator(model: QbdModel, n1: int, n2: int) -> np.ndarray:
    """Dense generator of the truncation to levels ``0..n1`` times ``0..n2``.

    Transitions that would leave the rectangle are suppressed and their rate
    returned to the diagonal (reflecting truncation), so rows sum to zero.
    States are ordered lexicographically by ``(l1, l2, phase)``.

    Parameters
    ----------
    model : QbdModel
    n1, n2 : int
        Largest retained level in each coordinate; both must be at least 2 so
        that every archetype is represented.

    Returns
    -------
    numpy.ndarray
        Square generator of dimension
        ``s0 + n1*s1 + n2*s2 + n1*n2*splus``.
    """
    if n1 < 2 or n2 < 2:
        raise ModelError("truncation needs n1 >= 2 and n2 >= 2")
    states = _truncated_states(model.layout, n1, n2)
    index = {state: i for i, state in enumerate(states)}
    n = len(states)
    generator = np.zeros((n, n))
    for l1 in range(n1 + 1):
        for l2 in range(n2 + 1):
            arch = Archetype.of(l1, l2)
            rows = model.layout.region_size(arch.region)
            for key in active_blocks(arch):
                d1, d2 = l1 + key.k1, l2 + key.k2
                if d1 < 0 or d1 > n1 or d2 < 0 or d2 > n2:
                    continue
                block = model.blocks[key]
                for j in range(rows):
                    row = index[(l1, l2, j)]
                    for jd in range(block.shape[1]):
                        rate = block[j, jd]
                        if rate != 0.0:
                            generator[row, index[(d1, d2, jd)]] += rate
    off_diagonal_sums = generator.sum(axis=1) - np.diag(generator)
    np.fill_diagonal(generator, -off_diagonal_sums)
    return generator


# --------------------------------------------------------------------------
# Built-in families


def build_independent_pair(
    lambda1: float, lambda2: float, mu1: float, mu2: float
) -> QbdModel:
    """Two independent M/M/1 queues, as one 2d-QBD with a single phase everywhere.

    The smallest nontrivial model: each coordinate is a birth-death chain with
    arrival rate ``lambda_i`` and service rate ``mu_i``.  Useful as a fixture
    because every quantity of interest has a closed form.
    """
    _require_positive(lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2)
    lam = lambda1 + lambda2
    one = np.ones((1, 1))
    blocks = {
        BlockKey("+", 1, 0): lambda1 * one,
        BlockKey("+", -1, 0): mu1 * one,
        BlockKey("+", 0, 1): lambda2 * one,
        BlockKey("+", 0, -1): mu2 * one,
        BlockKey("+", 0, 0): -(lam + mu1 + mu2) * one,
        BlockKey("1", 1, 0): lambda1 * one,
        BlockKey("1", -1, 0): mu1 * one,
        BlockKey("1", 0, 1): lambda2 * one,
        BlockKey("1", 0, -1): mu2 * one,
        BlockKey("1", 0, 0): -(lam + mu1) * one,
        BlockKey("2", 0, 1): lambda2 * one,
        BlockKey("2", 0, -1): mu2 * one,
        BlockKey("2", 1, 0): lambda1 * one,
        BlockKey("2", -1, 0): mu1 * one,
        BlockKey("2", 0, 0): -(lam + mu2) * one,
        BlockKey("0", 1, 0): lambda1 * one,
        BlockKey("0", 0, 1): lambda2 * one,
        BlockKey("0", -1, 0): mu1 * one,
        BlockKey("0", 0, -1): mu2 * one,
        BlockKey("0", 0, 0): -lam * one,
    }
    return QbdModel(
        PhaseLayout(1, 1, 1, 1),
        blocks,
        name="independent-pair",
        params={"lambda1": lambda1, "lambda2": lambda2, "mu1": mu1, "mu2": mu2},
    )


def build_priority_setup(
    lambda1: float,
    lambda2: float,
    mu1: float,
    mu2: float,
    gamma1: float,
    gamma2: float,
) -> QbdModel:
    """Single-server two-class non-preemptive priority queue with setup times.

    Class-1 customers (rate ``lambda1``, service rate ``mu1``) have
    non-preemptive priority over class-2 customers (rate ``lambda2``, service
    rate ``mu2``).  Whenever the server starts serving a class whose service
    it was not just performing -- after idling, or when switching classes --
    it first undergoes an exponential setup with rate ``gamma1`` or
    ``gamma2`` for the class about to be served.

    Phases encode the server activity.  Origin: idle.  On the ``l2 = 0``
    axis: 1 = serving class 1, 2 = setup for class 1.  On the ``l1 = 0``
    axis: 1 = serving class 2, 2 = setup for class 2.  Interior: 1 = serving
    class 1, 2 = setup for class 1, 3 = serving class 2, 4 = setup for
    class 2.
    """
    _require_positive(
        lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2, gamma1=gamma1, gamma2=gamma2
    )
    lam = lambda1 + lambda2
    plus_00 = np.array(
        [
            [-(lam + mu1), 0, 0, 0],
            [gamma1, -(lam + gamma1), 0, 0],
            [0, 0, -(lam + mu2), 0],
            [0, 0, gamma2, -(lam + gamma2)],
        ]
    )
    plus_0m1 = np.zeros((4, 4))
    plus_0m1[2, 1] = mu2  # class-2 service done, class 1 waiting: set up for class 1
    one_0m1 = np.zeros((4, 2))
    one_0m1[2, 1] = mu2
    two_m10 = np.zeros((4, 2))
    two_m10[0, 1] = mu1  # class-1 service done, queue 1 empty: set up for class 2
    blocks = {
        BlockKey("+", -1, 0): np.diag([mu1, 0.0, 0.0, 0.0]),
        BlockKey("+", 0, 0): plus_00,
        BlockKey("+", 0, -1): plus_0m1,
        BlockKey("+", 1, 0): lambda1 * np.eye(4),
        BlockKey("+", 0, 1): lambda2 * np.eye(4),
        BlockKey("1", -1, 0): np.array([[mu1, 0.0], [0.0, 0.0]]),
        BlockKey("1", 0, 0): np.array([[-(lam + mu1), 0.0], [gamma1, -(lam + gamma1)]]),
        BlockKey("1", 0, 1): lambda2 * np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]]),
        BlockKey("1", 1, 0): lambda1 * np.eye(2),
        BlockKey("1", 0, -1): one_0m1,
        BlockKey("2", 0, 0): np.array([[-(lam + mu2), 0.0], [gamma2, -(lam + gamma2)]]),
        BlockKey("2", 0, -1): np.array([[mu2, 0.0], [0.0, 0.0]]),
        BlockKey("2", 1, 0): lambda1 * np.array([[0, 0, 1.0, 0], [0, 0, 0, 1.0]]),
        BlockKey("2", 0, 1): lambda2 * np.eye(2),
        BlockKey("2", -1, 0): two_m10,
        BlockKey("0", -1, 0): np.array([[mu1], [0.0]]),
        BlockKey("0", 0, 0): np.array([[-lam]]),
        BlockKey("0", 0, -1): np.array([[mu2], [0.0]]),
        BlockKey("0", 1, 0): lambda1 * np.array([[0.0, 1.0]]),
        BlockKey("0", 0, 1): lambda2 * np.array([[0.0, 1.0]]),
    }
    return QbdModel(
        PhaseLayout(1, 2, 2, 4),
        blocks,
        name="priority-setup",
        params={
            "lambda1": lambda1,
            "lambda2": lambda2,
            "mu1": mu1,
            "mu2": mu2,
            "gamma1": gamma1,
            "gamma2": gamma2,
        },
    )


def build_additional_server(
    lambda1: float, lambda2: float, mu1: float, mu2: float
) -> QbdModel:
    """Two M/M/1 queues plus a shared third server preferring class 1.

    Each queue has its own dedicated server (rates ``mu1``, ``mu2``); a third
    server serves either queue at the corresponding rate and, after every
    completion, picks a waiting class-1 customer if any, then a waiting
    class-2 customer, else idles.  The level ``l_i`` counts class-``i``
    customers beyond the first, so the interior means both queues hold at
    least two customers.

    Phases encode the triple (queue-1 server, queue-2 server, shared server).
    Interior: 1 = shared server on class 1, 2 = shared server on class 2.
    On the ``l2 = 0`` axis: 1 = (busy, idle, class 1), 2 = (busy, busy,
    class 1), 3 = (busy, idle, class 2).  On the ``l1 = 0`` axis: 1 = (idle,
    busy, class 2), 2 = (busy, busy, class 2), 3 = (idle, busy, class 1).
    Origin phases enumerate the eight reachable server triples.
    """
    _require_positive(lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2)
    lam = lambda1 + lambda2
    one_00 = np.array(
        [
            [-(lam + 2 * mu1), lambda2, 0],
            [mu2, -(lam + 2 * mu1 + mu2), 0],
            [mu2, 0, -(lam + mu1 + mu2)],
        ]
    )
    two_00 = np.array(
        [
            [-(lam + 2 * mu2), lambda1, 0],
            [mu1, -(lam + mu1 + 2 * mu2), 0],
            [mu1, 0, -(lam + mu1 + mu2)],
        ]
    )
    # Origin phases (queue-1 server, queue-2 server, shared server):
    # 1 (0,0,0), 2 (1,0,0), 3 (0,0,1), 4 (0,2,0), 5 (0,0,2), 6 (1,2,0),
    # 7 (0,2,1), 8 (1,0,2); 0 = idle, 1/2 = serving that class.
    origin_00 = np.zeros((8, 8))
    origin_00[0, 1] = lambda1
    origin_00[0, 3] = lambda2
    origin_00[1, 0] = mu1
    origin_00[1, 5] = lambda2
    origin_00[2, 0] = mu1
    origin_00[2, 6] = lambda2
    origin_00[3, 0] = mu2
    origin_00[3, 5] = lambda1
    origin_00[4, 0] = mu2
    origin_00[4, 7] = lambda1
    origin_00[5, 1] = mu2
    origin_00[5, 3] = mu1
    origin_00[6, 2] = mu2
    origin_00[6, 3] = mu1
    origin_00[7, 1] = mu2
    origin_00[7, 4] = mu1
    origin_00 -= np.diag(
        [
            lam,
            lam + mu1,
            lam + mu1,
            lam + mu2,
            lam + mu2,
            lam + mu1 + mu2,
            lam + mu1 + mu2,
            lam + mu1 + mu2,
        ]
    )
    origin_10 = np.zeros((8, 3))
    origin_10[[1, 2], 0] = lambda1
    origin_10[[5, 6], 1] = lambda1
    origin_10[7, 2] = lambda1
    origin_01 = np.zeros((8, 3))
    origin_01[[3, 4], 0] = lambda2
    origin_01[[5, 7], 1] = lambda2
    origin_01[6, 2] = lambda2
    origin_m10 = np.zeros((3, 8))
    origin_m10[0, [1, 2]] = mu1
    origin_m10[1, [5, 6]] = mu1
    origin_m10[2, 7] = mu1
    origin_0m1 = np.zeros((3, 8))
    origin_0m1[0, [3, 4]] = mu2
    origin_0m1[1, [5, 7]] = mu2
    origin_0m1[2, 6] = mu2
    blocks = {
        BlockKey("+", -1, 0): np.diag([2 * mu1, mu1]),
        BlockKey("+", 0, 0): np.diag([-(lam + 2 * mu1 + mu2), -(lam + mu1 + 2 * mu2)]),
        BlockKey("+", 0, -1): np.array([[mu2, 0.0], [mu2, mu2]]),
        BlockKey("+", 1, 0): lambda1 * np.eye(2),
        BlockKey("+", 0, 1): lambda2 * np.eye(2),
        BlockKey("1", 0, 0): one_00,
        BlockKey("1", 0, 1): np.array([[0.0, 0.0], [lambda2, 0.0], [0.0, lambda2]]),
        BlockKey("1", -1, 0): np.diag([2 * mu1, 2 * mu1, mu1]),
        BlockKey("1", 0, -1): np.array([[0.0, mu2, 0.0], [0.0, mu2, mu2]]),
        BlockKey("1", 1, 0): lambda1 * np.eye(3),
        BlockKey("2", 0, 0): two_00,
        BlockKey("2", 1, 0): np.array([[0.0, 0.0], [0.0, lambda1], [lambda1, 0.0]]),
        BlockKey("2", 0, -1): np.diag([2 * mu2, 2 * mu2, mu2]),
        BlockKey("2", -1, 0): np.array([[0.0, mu1, mu1], [0.0, mu1, 0.0]]),
        BlockKey("2", 0, 1): lambda2 * np.eye(3),
        BlockKey("0", 0, 0): origin_00,
        BlockKey("0", 1, 0): origin_10,
        BlockKey("0", 0, 1): origin_01,
        BlockKey("0", -1, 0): origin_m10,
        BlockKey("0", 0, -1): origin_0m1,
    }
    return QbdModel(
        PhaseLayout(8, 3, 3, 2),
        blocks,
        name="additional-server",
        params={"lambda1": lambda1, "lambda2": lambda2, "mu1": mu1, "mu2": mu2},
    )


def build_priority_setup_mapph(
    map1: tuple[np.ndarray, np.ndarray],
    map2: tuple[np.ndarray, np.ndarray],
    ph1: tuple[np.ndarray, np.ndarray],
    ph2: tuple[np.ndarray, np.ndarray],
    set1: tuple[np.ndarray, np.ndarray],
    set2: tuple[np.ndarray, np.ndarray],
) -> QbdModel:
    """Priority queue with setup times, with Markovian arrivals and phase-type work.

    Generalizes :func:`build_priority_setup`: class-``i`` arrivals follow the
    Markovian arrival process ``map_i = (C_i, D_i)``, service durations the
    phase-type law ``ph_i = (U_i, beta_i)`` and setup durations the phase-type
    law ``set_i = (Uset_i, betaset_i)``.

    The phase is the triple (arrival-1 phase, arrival-2 phase, server
    component), ordered lexicographically with the server component fastest.
    In the interior the server component runs over serving-1, setup-1,
    serving-2 and setup-2 sub-phases, in that order; on each axis only that
    class's serving and setup sub-phases remain; at the origin the server is
    a single idle state.

    Parameters
    ----------
    map1, map2 : (ndarray, ndarray)
        MAP representations ``(C, D)``: ``C`` holds phase transitions without
        an arrival (negative diagonal), ``D`` the arrival rates; ``C + D``
        must have zero row sums.
    ph1, ph2, set1, set2 : (ndarray, ndarray)
        Phase-type representations ``(U, beta)``: ``U`` is the transient
        generator part (nonpositive row sums) and ``beta`` the entry
        distribution.
    """
    c1, d1 = _check_map("map1", *map1)
    c2, d2 = _check_map("map2", *map2)
    u1, beta1 = _check_ph("ph1", *ph1)
    u2, beta2 = _check_ph("ph2", *ph2)
    us1, betas1 = _check_ph("set1", *set1)
    us2, betas2 = _check_ph("set2", *set2)
    exit1 = -u1.sum(axis=1, keepdims=True)
    exit2 = -u2.sum(axis=1, keepdims=True)
    exits1 = -us1.sum(axis=1, keepdims=True)
    exits2 = -us2.sum(axis=1, keepdims=True)
    n1, n2 = u1.shape[0], u2.shape[0]
    ns1, ns2 = us1.shape[0], us2.shape[0]
    m1, m2 = c1.shape[0], c2.shape[0]
    arrivals = m1 * m2
    eye = np.eye

    # Server sub-phase spans, in storage order.
    plus_server = [n1, ns1, n2, ns2]  # serving 1, setup 1, serving 2, setup 2
    one_server = [n1, ns1]
    two_server = [n2, ns2]
    idle_server = [1]

    def server_matrix(
        row_spans: list[int],
        col_spans: list[int],
        pieces: dict[tuple[int, int], np.ndarray],
    ) -> np.ndarray:
        """Assemble the server component from sub-phase blocks."""
        out = np.zeros((sum(row_spans), sum(col_spans)))
        row_starts = np.concatenate(([0], np.cumsum(row_spans)))
        col_starts = np.concatenate(([0], np.cumsum(col_spans)))
        for (i, j), piece in pieces.items():
            out[row_starts[i]:row_starts[i + 1], col_starts[j]:col_starts[j + 1]] = piece
        return out

    def with_idle_arrivals(server: np.ndarray) -> np.ndarray:
        """Lift a server-only move to the full phase: arrival phases unchanged."""
        return kron_product(eye(arrivals), server)

    work_plus = server_matrix(
        plus_server, plus_server,
        {(0, 0): u1, (1, 0): exits1 @ beta1, (1, 1): us1,
         (2, 2): u2, (3, 2): exits2 @ beta2, (3, 3): us2},
    )
    work_one = server_matrix(
        one_server, one_server, {(0, 0): u1, (1, 0): exits1 @ beta1, (1, 1): us1}
    )
    work_two = server_matrix(
        two_server, two_server, {(0, 0): u2, (1, 0): exits2 @ beta2, (1, 1): us2}
    )
    blocks = {
        # interior: departures within a class restart its service directly;
        # a class-2 departure with class-1 work present triggers a class-1 setup
        BlockKey("+", 0, 0): kron_sum(kron_sum(c1, c2), work_plus),
        BlockKey("+", -1, 0): with_idle_arrivals(
            server_matrix(plus_server, plus_server, {(0, 0): exit1 @ beta1})
        ),
        BlockKey("+", 0, -1): with_idle_arrivals(
            server_matrix(plus_server, plus_server, {(2, 1): exit2 @ betas1})
        ),
        BlockKey("+", 1, 0): kron_product(d1, eye(m2 * sum(plus_server))),
        BlockKey("+", 0, 1): kron_product(eye(m1), kron_product(d2, eye(sum(plus_server)))),
        # l2 = 0 axis: only class-1 server states exist
        BlockKey("1", 0, 0): kron_sum(kron_sum(c1, c2), work_one),
        BlockKey("1", -1, 0): with_idle_arrivals(
            server_matrix(one_server, one_server, {(0, 0): exit1 @ beta1})
        ),
        BlockKey("1", 1, 0): kron_product(d1, eye(m2 * sum(one_server))),
        BlockKey("1", 0, 1): kron_product(
            eye(m1),
            kron_product(d2, server_matrix(
                one_server, plus_server, {(0, 0): eye(n1), (1, 1): eye(ns1)}
            )),
        ),
        BlockKey("1", 0, -1): with_idle_arrivals(
            server_matrix(plus_server, one_server, {(2, 1): exit2 @ betas1})
        ),
        # l1 = 0 axis: only class-2 server states exist
        BlockKey("2", 0, 0): kron_sum(kron_sum(c1, c2), work_two),
        BlockKey("2", 0, -1): with_idle_arrivals(
            server_matrix(two_server, two_server, {(0, 0): exit2 @ beta2})
        ),
        BlockKey("2", 0, 1): kron_product(eye(m1), kron_product(d2, eye(sum(two_server)))),
        BlockKey("2", 1, 0): kron_product(
            d1,
            kron_product(eye(m2), server_matrix(
                two_server, plus_server, {(0, 2): eye(n2), (1, 3): eye(ns2)}
            )),
        ),
        BlockKey("2", -1, 0): with_idle_arrivals(
            server_matrix(plus_server, two_server, {(0, 1): exit1 @ betas2})
        ),
        # origin: server idle; an arrival to the empty system triggers a setup
        BlockKey("0", 0, 0): kron_sum(c1, c2),
        BlockKey("0", -1, 0): with_idle_arrivals(
            server_matrix(one_server, idle_server, {(0, 0): exit1})
        ),
        BlockKey("0", 0, -1): with_idle_arrivals(
            server_matrix(two_server, idle_server, {(0, 0): exit2})
        ),
        BlockKey("0", 1, 0): kron_product(
            d1,
            kron_product(eye(m2), server_matrix(idle_server, one_server, {(0, 1): betas1})),
        ),
        BlockKey("0", 0, 1): kron_product(
            eye(m1),
            kron_product(d2, server_matrix(idle_server, two_server, {(0, 1): betas2})),
        ),
    }
    layout = PhaseLayout(
        arrivals,
        arrivals * sum(one_server),
        arrivals * sum(two_server),
        arrivals * sum(plus_server),
    )
    return QbdModel(layout, blocks, name="priority-setup-mapph")


def _require_positive(**rates: float) -> None:
    for name, value in rates.items():
        if not value > 0:
            raise ModelError(f"rate {name} must be positive, got {value!r}")


def _check_map(name: str, c: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = np.array(c, dtype=float, ndmin=2)
    d = np.array(d, dtype=float, ndmin=2)
    if c.shape != d.shape or c.shape[0] != c.shape[1]:
        raise ModelError(f"{name}: C and D must be square matrices of equal size")
    tol = ROWSUM_RTOL * max(np.abs(c).max(), np.abs(d).max(), 1.0)
    if np.diag(c).max() >= 0:
        raise ModelError(f"{name}: C must have negative diagonal entries")
    if (c - np.diag(np.diag(c))).min() < -tol or d.min() < -tol:
        raise ModelError(f"{name}: off-diagonal rates must be nonnegative")
    if np.abs((c + d).sum(axis=1)).max() > tol:
        raise ModelError(f"{name}: C + D must have zero row sums")
    return c, d


def _check_ph(name: str, u: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u = np.array(u, dtype=float, ndmin=2)
    beta = np.array(beta, dtype=float, ndmin=2).reshape(1, -1)
    if u.shape[0] != u.shape[1] or beta.shape[1] != u.shape[0]:
        raise ModelError(f"{name}: U must be square and beta of matching length")
    tol = ROWSUM_RTOL * max(np.abs(u).max(), 1.0)
    if np.diag(u).max() >= 0:
        raise ModelError(f"{name}: U must have negative diagonal entries")
    if (u - np.diag(np.diag(u))).min() < -tol:
        raise ModelError(f"{name}: off-diagonal rates must be nonnegative")
    if u.sum(axis=1).max() > tol:
        raise ModelError(f"{name}: U must have nonpositive row sums")
    if beta.min() < 0 or abs(beta.sum() - 1.0) > 1e-12:
        raise ModelError(f"{name}: beta must be a probability vector")
    return u, beta


# --------------------------------------------------------------------------
# Serialization


def model_to_dict(model: QbdModel) -> dict:
    """JSON-ready dict with the layout, name, parameters and all 36 blocks."""
    return {
        "name": model.name,
        "layout": {
            "s0": model.layout.s0,
            "s1": model.layout.s1,
            "s2": model.layout.s2,
            "splus": model.layout.splus,
        },
        "params": dict(model.params),
        "blocks": {str(key): model.blocks[key].tolist() for key in ALL_BLOCK_KEYS},
    }


def model_from_dict(data: dict) -> QbdModel:
    """Inverse of :func:`model_to_dict`."""
    try:
        layout = PhaseLayout(**{k: int(v) for k, v in data["layout"].items()})
        blocks = {
            BlockKey.from_string(key): np.array(value, dtype=float, ndmin=2)
            for key, value in data["blocks"].items()
        }
        name = data.get("name", "model")
        params = data.get("params", {})
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model data: {exc}") from exc
    return QbdModel(layout, blocks, name=name, params=params)


def save_model(model: QbdModel, path: str) -> None:
    """Write a model to ``path`` as JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(model), handle, indent=1)


def load_model(path: str) -> QbdModel:
    """Read a model written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path} is not valid JSON: {exc}") from exc
    return model_from_dict(data)
