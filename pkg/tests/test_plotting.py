import pandas as pd

from core.plotting import (
    history_frame, plot_label_histogram, plot_loss_curves, plot_metric_curves, plot_prediction_scatter,
)
from tests.helpers import make_dataset

HISTORY = [
    {"epoch": 1, "phase1": {"loss": 1.2, "loss_r": 1.0, "loss_mix": 0.2},
     "phase2": {"loss": 0.9, "loss_r": 0.9, "loss_mix": 0.0}, "valid": {"mae": 0.6, "acc2": 55.0}},
    {"epoch": 2, "phase1": {"loss": 1.0, "loss_r": 0.85, "loss_mix": 0.15},
     "phase2": {"loss": 0.8, "loss_r": 0.8, "loss_mix": 0.0}, "valid": {"mae": 0.5, "acc2": 60.0}},
]


def test_history_frame_flattens_records():
    frame = history_frame(HISTORY)
    assert {"phase1.loss", "phase2.loss_r", "valid.mae"} <= set(frame.columns)
    assert history_frame([]).empty


def test_loss_curves_one_trace_per_series():
    fig = plot_loss_curves(history_frame(HISTORY))
    assert len(fig.data) == 6


def test_loss_curves_supervised_history():
    supervised = [{k: v for k, v in r.items() if k != "phase2"} for r in HISTORY]
    assert len(plot_loss_curves(history_frame(supervised)).data) == 3


def test_metric_curves_mark_best_epoch():
    fig = plot_metric_curves(history_frame(HISTORY), metrics=("mae",))
    assert [t.name for t in fig.data] == ["mae", "best"]
    assert list(fig.data[1].x) == [2]


def test_label_histogram_groups_by_split():
    frame = make_dataset(n_train=6, n_valid=3).labels_frame()
    fig = plot_label_histogram(frame)
    assert [t.name for t in fig.data] == ["train", "valid"]
    assert sum(fig.data[0].y) == 6


def test_prediction_scatter():
    frame = pd.DataFrame({"id": ["a", "b"], "prediction": [0.1, -0.3], "label": [0.2, -0.4]})
    fig = plot_prediction_scatter(frame)
    assert len(fig.data) == 2
