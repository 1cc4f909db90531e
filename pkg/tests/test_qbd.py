"""Tests for the level-independent QBD solver."""

from __future__ import annotations

import numpy as np
import pytest

from qbd2d import (
    AssumptionViolation,
    NullRecurrenceError,
    QbdSpec,
    level_distribution,
    minimal_rate_matrix,
    quadratic_residual,
    solve_qbd,
    truncated_generator,
)
from qbd2d.stability import induced_axis

from conftest import make_parity_toggle_model


def mm1_spec(lam: float, mu: float) -> QbdSpec:
    return QbdSpec(
        b0=[[-lam]],
        bup=[[lam]],
        bdown=[[mu]],
        adown=[[mu]],
        a0=[[-(lam + mu)]],
        aup=[[lam]],
    )


def test_spec_rejects_mismatched_shapes() -> None:
    with pytest.raises(ValueError):
        QbdSpec(
            b0=[[-1.0]],
            bup=[[1.0, 0.0]],
            bdown=[[2.0]],
            adown=[[2.0], [1.0]],
            a0=[[-3.0]],
            aup=[[1.0]],
        )


def test_spec_arrays_are_read_only() -> None:
    spec = mm1_spec(1.0, 2.0)
    with pytest.raises(ValueError):
        spec.a0[0, 0] = 0.0


def test_mm1_rate_matrix_is_rho() -> None:
    rate = minimal_rate_matrix([[1.0]], [[-3.0]], [[2.0]])
    assert rate[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_quadratic_residual_small_at_fixed_point() -> None:
    spec = mm1_spec(1.0, 2.0)
    rate = minimal_rate_matrix(spec.aup, spec.a0, spec.adown)
    assert quadratic_residual(rate, spec.aup, spec.a0, spec.adown) < 1e-12


def test_rate_matrix_raises_at_stability_boundary() -> None:
    # lambda == mu puts the spectral radius at one: the iteration creeps
    # toward it and must give up at the cap rather than return silently
    with pytest.raises(NullRecurrenceError):
        minimal_rate_matrix([[1.0]], [[-2.0]], [[1.0]], max_iter=20_000)


def test_rate_matrix_raises_on_transient_chain() -> None:
    # upward rate twice the downward rate: R converges toward 2
    with pytest.raises(NullRecurrenceError):
        minimal_rate_matrix([[2.0]], [[-3.0]], [[1.0]])


def test_solve_mm1_geometric_levels() -> None:
    solution = solve_qbd(mm1_spec(1.0, 2.0))
    assert solution.pi0[0] == pytest.approx(0.5, abs=1e-12)
    for level in range(6):
        mass = level_distribution(solution, level).sum()
        assert mass == pytest.approx(0.5 * 0.5**level, abs=1e-12)


def test_solve_priority_axis2_matches_reference_masses(priority_model) -> None:
    spec = induced_axis(priority_model, 2)
    solution = solve_qbd(spec)
    assert solution.pi0 == pytest.approx(
        [0.743801652892561, 0.037190082644628], abs=1e-12
    )
    reference_masses = [
        0.7809917355371889,
        0.1844408837915329,
        0.0298675050142414,
        0.0041123382801126,
        0.0005178729524668,
        6.169502432276e-05,
    ]
    for level, expected in enumerate(reference_masses):
        mass = level_distribution(solution, level).sum()
        assert mass == pytest.approx(expected, abs=1e-12)


def test_solution_mass_sums_to_one(priority_model, additional_server_model) -> None:
    for model in (priority_model, additional_server_model):
        spec = induced_axis(model, 2)
        solution = solve_qbd(spec)
        inv = np.linalg.inv(np.eye(solution.R.shape[0]) - solution.R)
        total = solution.pi0.sum() + (solution.pi1 @ inv).sum()
        assert total == pytest.approx(1.0, abs=1e-10)


def test_solve_rejects_split_boundary_chain() -> None:
    model = make_parity_toggle_model(0.3, 0.25, 1.0, 0.5)
    spec = induced_axis(model, 1)
    with pytest.raises(AssumptionViolation) as excinfo:
        solve_qbd(spec)
    assert excinfo.value.assumption == 3


def test_truncated_generator_reflects_at_top() -> None:
    spec = mm1_spec(1.0, 2.0)
    generator, level_index = truncated_generator(spec, 4)
    assert generator.shape == (5, 5)
    assert np.allclose(generator.sum(axis=1), 0.0, atol=1e-12)
    assert list(level_index) == [0, 1, 2, 3, 4]


def test_truncated_generator_matches_geometric_solution() -> None:
    from qbd2d import stationary

    spec = mm1_spec(1.0, 2.0)
    generator, _ = truncated_generator(spec, 40)
    pi = stationary(generator)
    solution = solve_qbd(spec)
    for level in range(6):
        assert pi[level] == pytest.approx(
            level_distribution(solution, level).sum(), abs=1e-10
        )


def test_truncated_generator_needs_two_levels() -> None:
    with pytest.raises(ValueError):
        truncated_generator(mm1_spec(1.0, 2.0), 1)
