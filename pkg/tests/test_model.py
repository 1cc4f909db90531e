"""Tests for the block-structured model container, builders and validation."""

from __future__ import annotations

import numpy as np
import pytest

from qbd2d import (
    Archetype,
    BlockKey,
    ModelError,
    PhaseLayout,
    QbdModel,
    active_blocks,
    assemble_truncated_generator,
    build_additional_server,
    build_independent_pair,
    build_priority_setup,
    build_priority_setup_mapph,
    kron_product,
    kron_sum,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate,
)

from conftest import make_floor_service_model


def test_phase_layout_rejects_nonpositive_counts() -> None:
    with pytest.raises(ModelError):
        PhaseLayout(0, 1, 1, 1)
    with pytest.raises(ModelError):
        PhaseLayout(1, 1, -2, 1)


def test_block_key_string_round_trip() -> None:
    key = BlockKey("+", -1, 1)
    assert str(key) == "+:-1,1"
    assert BlockKey.from_string(str(key)) == key
    with pytest.raises(ModelError):
        BlockKey.from_string("nonsense")
    with pytest.raises(ModelError):
        BlockKey("q", 0, 0)
    with pytest.raises(ModelError):
        BlockKey("+", 2, 0)


def test_archetype_of_covers_all_level_pairs() -> None:
    assert Archetype.of(0, 0) is Archetype.ORIGIN
    assert Archetype.of(1, 0) is Archetype.AXIS1_EDGE
    assert Archetype.of(7, 0) is Archetype.AXIS1_DEEP
    assert Archetype.of(0, 1) is Archetype.AXIS2_EDGE
    assert Archetype.of(0, 9) is Archetype.AXIS2_DEEP
    assert Archetype.of(1, 1) is Archetype.CORNER
    assert Archetype.of(1, 5) is Archetype.NEAR_AXIS2
    assert Archetype.of(4, 1) is Archetype.NEAR_AXIS1
    assert Archetype.of(3, 3) is Archetype.INTERIOR


def test_active_blocks_interior_has_all_nine_plus_steps() -> None:
    keys = active_blocks(Archetype.INTERIOR)
    assert len(keys) == 9
    assert all(key.region == "+" for key in keys)


def test_active_blocks_origin_cannot_step_down() -> None:
    keys = active_blocks(Archetype.ORIGIN)
    assert all(key.k1 >= 0 and key.k2 >= 0 for key in keys)


def test_model_fills_missing_blocks_with_zeros() -> None:
    layout = PhaseLayout(1, 1, 1, 1)
    model = QbdModel(layout, {BlockKey("0", 0, 0): np.array([[-1.0]])})
    assert len(model.blocks) == 36
    assert model.block("+", 1, 1).shape == (1, 1)
    assert model.block("+", 1, 1)[0, 0] == 0.0


def test_model_blocks_are_read_only() -> None:
    model = build_independent_pair(0.2, 0.3, 1.0, 1.0)
    with pytest.raises(ValueError):
        model.block("+", 1, 0)[0, 0] = 5.0


def test_model_rejects_wrong_block_shape() -> None:
    layout = PhaseLayout(1, 2, 1, 1)
    with pytest.raises(ModelError):
        QbdModel(layout, {BlockKey("1", 0, 0): np.zeros((3, 3))})


def test_validate_accepts_all_builtin_models() -> None:
    models = [
        build_priority_setup(0.1, 0.5, 1.0, 1.0, 2.0, 2.0),
        build_additional_server(1.5, 1.0, 1.0, 1.0),
        build_independent_pair(0.4, 0.3, 1.0, 1.0),
        make_floor_service_model(0.7, 0.25, 1.0, 0.5, mu1_floor=0.4),
    ]
    for model in models:
        report = validate(model)
        assert report.ok, report.errors


def test_validate_flags_unbalanced_rows() -> None:
    model = make_floor_service_model(0.5, 0.5, 1.0, 1.0)
    broken = dict(model.blocks)
    broken[BlockKey("+", 1, 0)] = np.array([[0.75]])
    report = validate(QbdModel(model.layout, broken))
    assert not report.ok
    assert any("archetype" in message for message in report.errors)


def test_validate_flags_negative_off_diagonal() -> None:
    model = make_floor_service_model(0.5, 0.5, 1.0, 1.0)
    broken = dict(model.blocks)
    broken[BlockKey("+", 1, 0)] = np.array([[-0.5]])
    broken[BlockKey("+", 0, 1)] = np.array([[1.5]])
    report = validate(QbdModel(model.layout, broken))
    assert not report.ok


def test_priority_setup_block_entries() -> None:
    lam1, lam2, mu1, mu2, g1, g2 = 0.1, 0.5, 1.0, 1.0, 2.0, 2.0
    model = build_priority_setup(lam1, lam2, mu1, mu2, g1, g2)
    assert model.layout == PhaseLayout(1, 2, 2, 4)
    # interior phase order: serve-1, setup-1, serve-2, setup-2
    plus_stay = model.block("+", 0, 0)
    assert plus_stay[1, 0] == pytest.approx(g1)
    assert plus_stay[3, 2] == pytest.approx(g2)
    assert model.block("+", -1, 0)[0, 0] == pytest.approx(mu1)
    assert model.block("+", 0, -1)[2, 1] == pytest.approx(mu2)
    report = validate(model)
    assert report.ok, report.errors


def test_additional_server_origin_row_balance() -> None:
    model = build_additional_server(1.5, 1.0, 1.0, 1.0)
    origin_out = sum(
        model.blocks[key].sum(axis=1)
        for key in active_blocks(Archetype.ORIGIN)
    )
    assert np.allclose(origin_out, 0.0, atol=1e-12)


def test_kron_sum_matches_definition() -> None:
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    expected = np.kron(a, np.eye(3)) + np.kron(np.eye(2), b)
    assert np.allclose(kron_sum(a, b), expected)
    assert np.allclose(kron_product(a, b), np.kron(a, b))


def test_mapph_builder_degenerates_to_exponential_blocks() -> None:
    lam1, lam2, mu1, mu2, g1, g2 = 0.3, 0.7, 1.1, 0.9, 2.2, 1.7
    base = build_priority_setup(lam1, lam2, mu1, mu2, g1, g2)
    staged = build_priority_setup_mapph(
        (np.array([[-lam1]]), np.array([[lam1]])),
        (np.array([[-lam2]]), np.array([[lam2]])),
        (np.array([[-mu1]]), np.array([[1.0]])),
        (np.array([[-mu2]]), np.array([[1.0]])),
        (np.array([[-g1]]), np.array([[1.0]])),
        (np.array([[-g2]]), np.array([[1.0]])),
    )
    for key, block in base.blocks.items():
        assert np.allclose(staged.blocks[key], block, atol=1e-14), str(key)


def test_mapph_builder_erlang_components_validate() -> None:
    def erlang(order: int, rate: float) -> tuple[np.ndarray, np.ndarray]:
        stage = order * rate
        matrix = np.diag(np.full(order, -stage)) + np.diag(np.full(order - 1, stage), 1)
        entry = np.zeros((1, order))
        entry[0, 0] = 1.0
        return matrix, entry

    model = build_priority_setup_mapph(
        (np.array([[-0.1]]), np.array([[0.1]])),
        (np.array([[-0.5]]), np.array([[0.5]])),
        erlang(3, 1.0),
        erlang(2, 1.0),
        erlang(2, 2.0),
        erlang(3, 2.0),
    )
    report = validate(model)
    assert report.ok, report.errors


def test_mapph_builder_rejects_bad_components() -> None:
    good = (np.array([[-1.0]]), np.array([[1.0]]))
    with pytest.raises(ModelError):
        build_priority_setup_mapph(
            (np.array([[-1.0]]), np.array([[2.0]])),  # rows do not cancel
            good, good, good, good, good,
        )


def test_save_and_load_round_trip(tmp_path) -> None:
    model = build_priority_setup(0.1, 0.5, 1.0, 1.0, 2.0, 2.0)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.layout == model.layout
    assert loaded.name == model.name
    assert dict(loaded.params) == dict(model.params)
    for key, block in model.blocks.items():
        assert np.array_equal(loaded.blocks[key], block)


def test_model_dict_round_trip() -> None:
    model = build_independent_pair(0.4, 0.3, 1.0, 2.0)
    raw = model_to_dict(model)
    assert set(raw["blocks"]) == {str(key) for key in model.blocks}
    again = model_from_dict(raw)
    for key, block in model.blocks.items():
        assert np.array_equal(again.blocks[key], block)


def test_truncated_generator_rows_cancel() -> None:
    model = build_priority_setup(0.1, 0.5, 1.0, 1.0, 2.0, 2.0)
    generator = assemble_truncated_generator(model, 5, 5)
    assert np.allclose(generator.sum(axis=1), 0.0, atol=1e-12)
    assert np.all(generator - np.diag(np.diag(generator)) >= 0.0)


def test_truncated_generator_needs_two_levels() -> None:
    model = build_independent_pair(0.4, 0.3, 1.0, 1.0)
    with pytest.raises(ValueError):
        assemble_truncated_generator(model, 1, 5)
