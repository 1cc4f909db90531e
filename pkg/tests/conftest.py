"""Shared fixtures: builtin model instances and two hand-crafted families.

The floor-service family is an independent pair whose service rates change on
the boundary: queue 1 is served at ``mu1_floor`` while queue 2 is empty (and
symmetrically for queue 2).  Because each queue's free-coordinate marginal is
a plain M/M/1, its axis drifts have closed forms,

    a1_axis1 = (1 - rho2) (lambda1 - mu1_floor) + rho2 (lambda1 - mu1),

with ``rho2 = lambda2 / mu2``, which makes every branch of the classifier
reachable with exact expected values.

The parity-toggle family flips its phase on every vertical level step, so the
truncated axis-1 chain splits into two full-height communicating classes (one
per parity) while the phase process itself stays irreducible.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from qbd2d import (
    BlockKey,
    ModelFamily,
    PhaseLayout,
    QbdModel,
    build_additional_server,
    build_priority_setup,
    priority_setup_family,
)


def make_floor_service_model(
    lambda1: float,
    lambda2: float,
    mu1: float,
    mu2: float,
    mu1_floor: float | None = None,
    mu2_floor: float | None = None,
) -> QbdModel:
    """Independent pair with boundary-dependent service rates (one phase)."""
    m1f = mu1 if mu1_floor is None else mu1_floor
    m2f = mu2 if mu2_floor is None else mu2_floor
    total = lambda1 + lambda2

    def one_by_one(value: float) -> np.ndarray:
        return np.array([[value]])

    blocks = {
        BlockKey("+", 1, 0): one_by_one(lambda1),
        BlockKey("+", 0, 1): one_by_one(lambda2),
        BlockKey("+", -1, 0): one_by_one(mu1),
        BlockKey("+", 0, -1): one_by_one(mu2),
        BlockKey("+", 0, 0): one_by_one(-(total + mu1 + mu2)),
        BlockKey("1", 1, 0): one_by_one(lambda1),
        BlockKey("1", 0, 1): one_by_one(lambda2),
        BlockKey("1", -1, 0): one_by_one(m1f),
        BlockKey("1", 0, -1): one_by_one(mu2),  # drop onto the l2 = 0 axis
        BlockKey("1", 0, 0): one_by_one(-(total + m1f)),
        BlockKey("2", 1, 0): one_by_one(lambda1),
        BlockKey("2", 0, 1): one_by_one(lambda2),
        BlockKey("2", 0, -1): one_by_one(m2f),
        BlockKey("2", -1, 0): one_by_one(mu1),  # drop onto the l1 = 0 axis
        BlockKey("2", 0, 0): one_by_one(-(total + m2f)),
        BlockKey("0", 1, 0): one_by_one(lambda1),
        BlockKey("0", 0, 1): one_by_one(lambda2),
        BlockKey("0", -1, 0): one_by_one(m1f),  # edge state drops to the origin
        BlockKey("0", 0, -1): one_by_one(m2f),
        BlockKey("0", 0, 0): one_by_one(-total),
    }
    return QbdModel(
        PhaseLayout(1, 1, 1, 1),
        blocks,
        name="floor-service",
        params={
            "lambda1": lambda1,
            "lambda2": lambda2,
            "mu1": mu1,
            "mu2": mu2,
            "mu1_floor": m1f,
            "mu2_floor": m2f,
        },
    )


def floor_axis_drift(
    lambda_own: float,
    mu_own: float,
    mu_own_floor: float,
    rho_other: float,
) -> float:
    """Closed-form own-coordinate axis drift of the floor-service model."""
    empty = 1.0 - rho_other
    return empty * (lambda_own - mu_own_floor) + rho_other * (lambda_own - mu_own)


def make_parity_toggle_model(
    lambda1: float, lambda2: float, mu1: float, mu2: float
) -> QbdModel:
    """Independent pair on two phases where every vertical step flips phase."""
    eye = np.eye(2)
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    total = lambda1 + lambda2

    blocks = {
        BlockKey("+", 1, 0): lambda1 * eye,
        BlockKey("+", 0, 1): lambda2 * flip,
        BlockKey("+", -1, 0): mu1 * eye,
        BlockKey("+", 0, -1): mu2 * flip,
        BlockKey("+", 0, 0): -(total + mu1 + mu2) * eye,
        BlockKey("1", 1, 0): lambda1 * eye,
        BlockKey("1", 0, 1): lambda2 * flip,
        BlockKey("1", -1, 0): mu1 * eye,
        BlockKey("1", 0, -1): mu2 * flip,
        BlockKey("1", 0, 0): -(total + mu1) * eye,
        BlockKey("2", 1, 0): lambda1 * eye,
        BlockKey("2", 0, 1): lambda2 * flip,
        BlockKey("2", 0, -1): mu2 * flip,
        BlockKey("2", -1, 0): mu1 * eye,
        BlockKey("2", 0, 0): -(total + mu2) * eye,
        BlockKey("0", 1, 0): lambda1 * eye,
        BlockKey("0", 0, 1): lambda2 * flip,
        BlockKey("0", -1, 0): mu1 * eye,
        BlockKey("0", 0, -1): mu2 * flip,
        BlockKey("0", 0, 0): -total * eye,
    }
    return QbdModel(
        PhaseLayout(2, 2, 2, 2),
        blocks,
        name="parity-toggle",
        params={"lambda1": lambda1, "lambda2": lambda2, "mu1": mu1, "mu2": mu2},
    )


def make_two_class_phase_model() -> QbdModel:
    """Interior phase process with two closed classes (no phase coupling)."""
    eye = np.eye(2)
    blocks = {
        BlockKey("+", 1, 0): 0.5 * eye,
        BlockKey("+", -1, 0): 1.0 * eye,
        BlockKey("+", 0, 1): 0.25 * eye,
        BlockKey("+", 0, -1): 0.25 * eye,
        BlockKey("+", 0, 0): -2.0 * eye,
        BlockKey("1", 1, 0): 0.5 * eye,
        BlockKey("1", -1, 0): 1.0 * eye,
        BlockKey("1", 0, 1): 0.25 * eye,
        BlockKey("1", 0, -1): 0.25 * eye,
        BlockKey("1", 0, 0): -1.75 * eye,
        BlockKey("2", 1, 0): 0.5 * eye,
        BlockKey("2", 0, 1): 0.25 * eye,
        BlockKey("2", 0, -1): 0.25 * eye,
        BlockKey("2", -1, 0): 1.0 * eye,
        BlockKey("2", 0, 0): -1.0 * eye,
        BlockKey("0", 1, 0): 0.5 * eye,
        BlockKey("0", 0, 1): 0.25 * eye,
        BlockKey("0", -1, 0): 1.0 * eye,
        BlockKey("0", 0, -1): 0.25 * eye,
        BlockKey("0", 0, 0): -0.75 * eye,
    }
    return QbdModel(PhaseLayout(2, 2, 2, 2), blocks, name="two-class-phases")


@pytest.fixture
def priority_model() -> QbdModel:
    return build_priority_setup(0.1, 0.5, 1.0, 1.0, 2.0, 2.0)


@pytest.fixture
def additional_server_model() -> QbdModel:
    return build_additional_server(1.5, 1.0, 1.0, 1.0)


@pytest.fixture
def floor_model_builder() -> Callable[..., QbdModel]:
    return make_floor_service_model


@pytest.fixture
def parity_model() -> QbdModel:
    return make_parity_toggle_model(0.3, 0.25, 1.0, 0.5)


@pytest.fixture
def two_class_model() -> QbdModel:
    return make_two_class_phase_model()


@pytest.fixture
def priority_family() -> ModelFamily:
    return priority_setup_family(
        mu1=1.0, mu2=1.0, gamma1=2.0, gamma2=2.0, lambda1=0.1
    )
