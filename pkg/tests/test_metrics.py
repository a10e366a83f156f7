import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import ShapeError, ValidationError
from core.types import LABEL_GRID
from evaluation.metrics import binary_classes, compute_metrics, weak_mask

LABELS = [0.8, -0.6, 0.0, 0.2]
PREDICTIONS = [0.6, -0.4, 0.1, -0.2]


def test_hand_computed_fixture():
    report = compute_metrics(PREDICTIONS, LABELS)
    assert report.mae == pytest.approx(0.225)
    assert report.acc2 == 75.0
    assert report.acc2_weak == 50.0
    assert report.n_weak == 2 and report.n_instances == 4


def test_perfect_predictions():
    labels = [0.8, -0.6, 0.0, 0.2, -1.0]
    report = compute_metrics(labels, labels)
    assert report.acc2 == 100.0 and report.f1 == 100.0
    assert report.mae == 0.0
    assert report.corr == pytest.approx(100.0)
    assert report.r_square == pytest.approx(100.0)


def test_mean_predictor_has_zero_r_square():
    labels = np.array([0.8, -0.6, 0.0, 0.2, -1.0])
    report = compute_metrics(np.full(5, labels.mean()), labels)
    assert report.r_square == pytest.approx(0.0, abs=1e-9)
    assert report.corr is None


def test_undefined_metrics_are_absent():
    report = compute_metrics([0.5, 0.9], [0.8, 1.0])
    assert report.acc2_weak is None and report.n_weak == 0
    constant = compute_metrics([0.1, 0.3], [0.6, 0.6])
    assert constant.r_square is None and constant.corr is None
    assert constant.to_dict()["r_square"] is None


def test_zero_label_is_non_negative():
    assert binary_classes([-0.2, 0.0, 0.2]).tolist() == [0, 1, 1]
    assert weak_mask([-0.4, 0.4, 0.6, -0.6]).tolist() == [True, True, False, False]


def test_input_errors():
    with pytest.raises(ValidationError):
        compute_metrics([], [])
    with pytest.raises(ShapeError):
        compute_metrics([0.1, 0.2], [0.1])
    with pytest.raises(ValidationError):
        compute_metrics([np.nan], [0.2])


def test_to_dict_rounds_percent_fields_only():
    out = compute_metrics(PREDICTIONS, LABELS).to_dict()
    assert out["mae"] == pytest.approx(0.225)
    assert set(out) == {"acc2", "f1", "acc2_weak", "mae", "corr", "r_square", "n_instances", "n_weak",
                        "task", "label_source"}
    assert out["corr"] == round(out["corr"], 2)


labels_strategy = st.lists(st.sampled_from(LABEL_GRID), min_size=3, max_size=30)


@settings(max_examples=100, deadline=None)
@given(labels_strategy, st.integers(0, 2**32 - 1))
def test_metrics_are_permutation_invariant(labels, seed):
    rng = np.random.default_rng(seed)
    y = np.asarray(labels)
    p = np.clip(y + rng.normal(0, 0.3, size=len(y)), -1, 1)
    order = rng.permutation(len(y))
    a, b = compute_metrics(p, y), compute_metrics(p[order], y[order])
    assert a.acc2 == b.acc2 and a.acc2_weak == b.acc2_weak and a.n_weak == b.n_weak
    assert a.mae == pytest.approx(b.mae)
    assert a.f1 == pytest.approx(b.f1)
    assert (a.corr is None) == (b.corr is None)
    if a.corr is not None:
        assert a.corr == pytest.approx(b.corr)


@settings(max_examples=100, deadline=None)
@given(labels_strategy, st.integers(0, 2**32 - 1))
def test_metric_bounds_and_transforms(labels, seed):
    rng = np.random.default_rng(seed)
    y = np.asarray(labels)
    p = rng.uniform(-1, 1, size=len(y))
    report = compute_metrics(p, y)
    assert 0.0 <= report.mae <= np.max(np.abs(p - y)) + 1e-12
    assert 0.0 <= report.acc2 <= 100.0 and 0.0 <= report.f1 <= 100.0

    scaled = compute_metrics(2.0 * p + 0.5, y)
    if report.corr is not None:
        assert scaled.corr == pytest.approx(report.corr, abs=1e-9)
    # sign-preserving monotone transform
    assert compute_metrics(p ** 3, y).acc2 == report.acc2

    weak = np.abs(y) <= 0.4
    if weak.any():
        subset = compute_metrics(p[weak], y[weak])
        assert report.acc2_weak == pytest.approx(subset.acc2)
