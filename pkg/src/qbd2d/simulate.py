"""Uniformized simulation of 2d-QBD processes and empirical drift estimates.

The CTMC is converted to a discrete-time chain by uniformization: pick a rate
``nu`` at least as large as every state's total outflow rate; at each step
the chain moves with probability (rate / nu) per available transition and
otherwise stays put.  Time averages of the discrete chain, multiplied back by
``nu``, estimate continuous-time rates.  This gives an oracle for the drift
vectors that is independent of the matrix-analytic machinery: simulate the
free chain or an induced axis chain, average the level increments, and
compare.

Simulating the induced chains directly (variants ``plus``, ``axis1``,
``axis2``) keeps the removed coordinate as a running increment that may go
negative; the ``full`` variant simulates the actual process, whose levels
stay nonnegative.
"""
from __future__ import annotations

import bisect as _bisect
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import STEPS, Archetype, BlockKey, QbdModel, active_blocks
from .stability import DriftVector

VARIANTS = ("full", "plus", "axis1", "axis2")
_UP = (0, 1)


@dataclass(frozen=True)
class SimState:
    """One state of the simulated chain: level pair and phase."""

    l1: int
    l2: int
    phase: int


@dataclass(frozen=True)
class EmpiricalDrift:
    """Monte-Carlo drift estimate: per-coordinate mean and standard error.

    ``mean`` is in continuous-time units (level steps per unit time): the
    per-trial average increment per uniformized step, rescaled by the
    uniformization rate ``nu`` and averaged over ``trials`` independent
    trajectories of ``k`` steps each.
    """

    mean: DriftVector
    stderr: tuple[float, float]
    k: int
    trials: int
    nu: float


@dataclass(frozen=True)
class _TransitionTable:
    """Precomputed uniformized kernel rows, one per (context, phase).

    ``cum[r]`` holds the cumulative move probabilities of row ``r`` padded
    with 2.0; a uniform draw ``u`` selects slot ``(cum[r] <= u).sum()``, with
    the slot one past the real moves meaning "stay".  ``dl1``/``dl2``/``dph``
    give each slot's level increments and destination phase.
    """

    nu: float
    variant: str
    base: np.ndarray
    cum: np.ndarray
    dl1: np.ndarray
    dl2: np.ndarray
    dph: np.ndarray
    context_sizes: tuple[int, ...]
    cum_rows: tuple[tuple[float, ...], ...]

    def rows(self, l1: np.ndarray, l2: np.ndarray, phase: np.ndarray) -> np.ndarray:
        if self.variant == "full":
            context = np.minimum(l1, 2) * 3 + np.minimum(l2, 2)
        elif self.variant == "axis1":
            context = np.minimum(l2, 2)
        elif self.variant == "axis2":
            context = np.minimum(l1, 2)
        else:
            context = np.zeros_like(phase)
        return self.base[context] + phase


def _uniformization_rate(model: QbdModel) -> float:
    worst = max(
        np.abs(np.diag(model.block(region, 0, 0))).max() for region in ("0", "1", "2", "+")
    )
    return 1.05 * worst


def _context_blocks(variant: str) -> list[tuple[str, list[BlockKey]]]:
    """Per context: the source region and the outgoing block keys."""
    plus_all = [BlockKey("+", k1, k2) for k1 in STEPS for k2 in STEPS]
    if variant == "full":
        return [
            (arch.region, list(active_blocks(arch)))
            for arch in (Archetype((c1, c2)) for c1 in range(3) for c2 in range(3))
        ]
    if variant == "plus":
        return [("+", plus_all)]
    if variant == "axis1":
        return [
            ("1", [BlockKey("1", k1, k2) for k1 in STEPS for k2 in _UP]),
            ("+", [BlockKey("1", k1, -1) for k1 in STEPS]
             + [BlockKey("+", k1, k2) for k1 in STEPS for k2 in _UP]),
            ("+", plus_all),
        ]
    if variant == "axis2":
        return [
            ("2", [BlockKey("2", k1, k2) for k1 in _UP for k2 in STEPS]),
            ("+", [BlockKey("2", -1, k2) for k2 in STEPS]
             + [BlockKey("+", k1, k2) for k1 in _UP for k2 in STEPS]),
            ("+", plus_all),
        ]
    raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


@lru_cache(maxsize=64)
def _transition_table(model: QbdModel, variant: str) -> _TransitionTable:
    nu = _uniformization_rate(model)
    contexts = _context_blocks(variant)
    sizes = tuple(model.layout.region_size(region) for region, _ in contexts)
    base = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    moves: list[list[tuple[float, int, int, int]]] = []
    for region, keys in contexts:
        for j in range(model.layout.region_size(region)):
            row: list[tuple[float, int, int, int]] = []
            for key in keys:
                block = model.blocks[key]
                for jd in np.flatnonzero(block[j] > 0.0):
                    if (key.k1, key.k2) == (0, 0) and jd == j:
                        continue
                    row.append((block[j, jd] / nu, key.k1, key.k2, int(jd)))
            moves.append(row)
    width = max(len(row) for row in moves)
    n_rows = len(moves)
    cum = np.full((n_rows, width), 2.0)
    dl1 = np.zeros((n_rows, width + 1), dtype=np.int64)
    dl2 = np.zeros((n_rows, width + 1), dtype=np.int64)
    dph = np.zeros((n_rows, width + 1), dtype=np.int64)
    row_index = 0
    for context_index, (region, _) in enumerate(contexts):
        for j in range(sizes[context_index]):
            row = moves[row_index]
            running = 0.0
            for slot, (prob, k1, k2, jd) in enumerate(row):
                running += prob
                cum[row_index, slot] = running
                dl1[row_index, slot] = k1
                dl2[row_index, slot] = k2
                dph[row_index, slot] = jd
            dph[row_index, len(row):] = j
            row_index += 1
    cum_rows = tuple(
        tuple(float(c) for c in cum[r] if c <= 1.0) for r in range(n_rows)
    )
    return _TransitionTable(
        nu=nu, variant=variant, base=base, cum=cum, dl1=dl1, dl2=dl2, dph=dph,
        context_sizes=sizes, cum_rows=cum_rows,
    )


def _check_state(table: _TransitionTable, state: SimState, variant: str) -> int:
    """Context index of a state, validating levels and phase range."""
    if state.l1 < 0 or state.l2 < 0:
        raise ValueError(f"levels must be nonnegative, got ({state.l1}, {state.l2})")
    if variant == "full":
        context = min(state.l1, 2) * 3 + min(state.l2, 2)
    elif variant == "axis1":
        context = min(state.l2, 2)
    elif variant == "axis2":
        context = min(state.l1, 2)
    else:
        context = 0
    size = table.context_sizes[context]
    if not 0 <= state.phase < size:
        raise ValueError(
            f"phase {state.phase} out of range for a position with {size} phases"
        )
    return context


def step(model: QbdModel, state: SimState, rng: np.random.Generator) -> SimState:
    """One uniformized step of the full 2d-QBD from ``state``.

    Consumes exactly one uniform draw from ``rng``; the uniformization rate
    is fixed by the model (1.05 times its largest total outflow rate), so
    steps from different states are comparable in time.  Levels stay
    nonnegative because boundary positions have no outgoing blocks pointing
    off the lattice.
    """
    table = _transition_table(model, "full")
    context = _check_state(table, state, "full")
    row = int(table.base[context]) + state.phase
    u = rng.random()
    choice = _bisect.bisect_right(table.cum_rows[row], u)
    return SimState(
        l1=state.l1 + int(table.dl1[row, choice]),
        l2=state.l2 + int(table.dl2[row, choice]),
        phase=int(table.dph[row, choice]),
    )


def empirical_drift(
    model: QbdModel,
    start: SimState,
    variant: str = "plus",
    k: int = 100_000,
    trials: int = 200,
    seed: int = 0,
) -> EmpiricalDrift:
    """Monte-Carlo estimate of a drift vector from ``trials`` trajectories.

    Runs ``trials`` independent trajectories of ``k`` uniformized steps of
    the chosen chain variant (``plus`` for the free chain, ``axis1``/``axis2``
    for the induced axis chains, ``full`` for the actual process), each from
    ``start``, and averages the per-step level increments rescaled to
    continuous time.  Trial ``t`` draws from ``numpy.random.default_rng((seed,
    t))``, so results are reproducible and trials could be distributed.

    For the induced variants the estimate converges (in ``k``) to the
    corresponding drift vector whenever that drift is defined and the start
    is far enough from the retained boundary to be forgotten.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if k < 1:
        raise ValueError(f"need at least one step, got k={k}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got trials={trials}")
    table = _transition_table(model, variant)
    _check_state(table, start, variant)
    rngs = [np.random.default_rng((seed, trial)) for trial in range(trials)]
    l1 = np.full(trials, start.l1, dtype=np.int64)
    l2 = np.full(trials, start.l2, dtype=np.int64)
    phase = np.full(trials, start.phase, dtype=np.int64)
    start_l1, start_l2 = l1.copy(), l2.copy()
    chunk = 4096
    done = 0
    draws = np.empty((trials, chunk))
    while done < k:
        m = min(chunk, k - done)
        for trial, rng in enumerate(rngs):
            draws[trial, :m] = rng.random(m)
        for s in range(m):
            rows = table.rows(l1, l2, phase)
            choice = (table.cum[rows] <= draws[:, s, None]).sum(axis=1)
            l1 += table.dl1[rows, choice]
            l2 += table.dl2[rows, choice]
            phase = table.dph[rows, choice]
        done += m
    factor = table.nu / k
    per_trial = np.stack([(l1 - start_l1), (l2 - start_l2)], axis=1) * factor
    mean = per_trial.mean(axis=0)
    if trials > 1:
        stderr = per_trial.std(axis=0, ddof=1) / np.sqrt(trials)
    else:
        stderr = np.zeros(2)
    return EmpiricalDrift(
        mean=DriftVector(float(mean[0]), float(mean[1])),
        stderr=(float(stderr[0]), float(stderr[1])),
        k=k,
        trials=trials,
        nu=table.nu,
    )


def occupancy_probe(
    model: QbdModel, n: int, burn_in: int = 0, seed: int = 0
) -> dict[str, float]:
    """Occupancy statistics of one long trajectory of the full process.

    Simulates ``n`` uniformized steps from the empty state and averages over
    the steps after ``burn_in``: the mean of each level coordinate and the
    fraction of time at the origin level pair.  A cheap qualitative check
    that a model classified positive recurrent keeps returning to the origin
    and a transient one escapes.
    """
    if burn_in < 0 or n <= burn_in:
        raise ValueError(f"need n > burn_in >= 0, got n={n}, burn_in={burn_in}")
    table = _transition_table(model, "full")
    rng = np.random.default_rng(seed)
    l1 = 0
    l2 = 0
    phase = 0
    base = table.base
    cum_rows = table.cum_rows
    dl1, dl2, dph = table.dl1, table.dl2, table.dph
    total_l1 = 0
    total_l2 = 0
    at_origin = 0
    chunk = 65536
    done = 0
    while done < n:
        m = min(chunk, n - done)
        draws = rng.random(m)
        for s in range(m):
            context = min(l1, 2) * 3 + min(l2, 2)
            row = int(base[context]) + phase
            choice = _bisect.bisect_right(cum_rows[row], draws[s])
            l1 += int(dl1[row, choice])
            l2 += int(dl2[row, choice])
            phase = int(dph[row, choice])
            if done + s >= burn_in:
                total_l1 += l1
                total_l2 += l2
                at_origin += l1 == 0 and l2 == 0
        done += m
    samples = n - burn_in
    return {
        "mean_l1": total_l1 / samples,
        "mean_l2": total_l2 / samples,
        "origin_fraction": at_origin / samples,
    }
