"""Finite continuous-time Markov chain kernels.

Communicating-class analysis, stationary distributions and uniformization for
dense generators of modest size (up to a few hundred states).  These are the
scalar building blocks under the induced-chain analysis: the phase process of
the interior chain, censored boundary chains, and truncated level chains all
pass through here.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


class AssumptionViolation(RuntimeError):
    """A structural assumption required by the analysis fails for this model.

    The numbered assumptions are: (1) the process is irreducible; (2) the
    phase process of the interior chain has exactly one closed communicating
    class; (3) each induced axis chain has at most one irreducible class.

    Attributes
    ----------
    assumption : int
        Which assumption (1, 2 or 3) was violated.
    """

    def __init__(self, assumption: int, message: str) -> None:
        super().__init__(message)
        self.assumption = assumption


def _as_generator(generator: np.ndarray) -> np.ndarray:
    g = np.asarray(generator, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"generator must be square, got shape {g.shape}")
    return g


def closed_classes(generator: np.ndarray, atol: float | None = None) -> list[np.ndarray]:
    """Closed communicating classes of a finite generator.

    A closed class is a strongly connected component of the transition graph
    (edge ``i -> j`` iff ``G[i, j] > atol``, ``i != j``) with no edges leaving
    it.  States of a CTMC are recurrent exactly when they belong to a closed
    class.

    Parameters
    ----------
    generator : ndarray
        Square rate matrix.
    atol : float, optional
        Rates at or below this threshold count as absent.  Defaults to
        ``1e-12`` times the largest absolute entry.

    Returns
    -------
    list of ndarray
        Index arrays of the closed classes, ordered by smallest member.
    """
    g = _as_generator(generator)
    n = g.shape[0]
    if atol is None:
        atol = 1e-12 * max(np.abs(g).max(initial=0.0), 1.0)
    adjacency = g > atol
    np.fill_diagonal(adjacency, False)
    _, labels = connected_components(
        csr_matrix(adjacency), directed=True, connection="strong"
    )
    classes: list[np.ndarray] = []
    for label in range(labels.max() + 1):
        members = np.flatnonzero(labels == label)
        outside = np.setdiff1d(np.arange(n), members, assume_unique=True)
        if outside.size == 0 or not adjacency[np.ix_(members, outside)].any():
            classes.append(members)
    classes.sort(key=lambda members: members[0])
    return classes


def stationary(generator: np.ndarray, atol: float | None = None) -> np.ndarray:
    """Stationary distribution of a generator with one closed class.

    Solves ``pi @ G = 0`` with ``pi . 1 = 1`` by restricting to the unique
    closed communicating class (where the solution is supported) and replacing
    one balance equation by the normalization.  States outside the closed
    class receive exactly zero mass.

    Parameters
    ----------
    generator : ndarray
        Square rate matrix with zero row sums.
    atol : float, optional
        Edge threshold passed to :func:`closed_classes`.

    Returns
    -------
    ndarray
        Probability vector of the same length as the generator dimension.

    Raises
    ------
    AssumptionViolation
        If the generator has zero or two or more closed classes, so that the
        stationary distribution is not unique.
    """
    g = _as_generator(generator)
    classes = closed_classes(g, atol)
    if len(classes) != 1:
        raise AssumptionViolation(
            2,
            f"generator has {len(classes)} closed communicating classes; "
            "a unique stationary distribution requires exactly one",
        )
    support = classes[0]
    sub = g[np.ix_(support, support)]
    m = support.size
    system = sub.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    pi_sub = np.linalg.solve(system, rhs)
    pi_sub = np.clip(pi_sub, 0.0, None)
    pi_sub /= pi_sub.sum()
    pi = np.zeros(g.shape[0])
    pi[support] = pi_sub
    return pi


def uniformize(generator: np.ndarray, nu: float | None = None) -> np.ndarray:
    """Uniformized transition matrix ``P = I + G / nu``.

    The discrete-time chain with kernel ``P``, observed at the events of a
    rate-``nu`` Poisson clock, is distributed like the CTMC with generator
    ``G``; in particular both share stationary distributions.

    Parameters
    ----------
    generator : ndarray
        Square rate matrix with zero row sums.
    nu : float, optional
        Uniformization rate; must be at least the largest absolute diagonal
        entry of ``G``.  Defaults to 1.05 times that maximum (or 1.0 for the
        zero generator).

    Returns
    -------
    ndarray
        Stochastic matrix of the same shape.
    """
    g = _as_generator(generator)
    bound = np.abs(np.diag(g)).max(initial=0.0)
    if nu is None:
        nu = 1.05 * bound if bound > 0 else 1.0
    if nu <= 0 or nu < bound:
        raise ValueError(
            f"uniformization rate must be positive and at least {bound:.6g}, got {nu!r}"
        )
    return np.eye(g.shape[0]) + g / nu
