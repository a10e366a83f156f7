import logging

import numpy as np
import pandas as pd
import torch

from core.errors import ValidationError
from core.fileio import write_csv_atomic, write_json_atomic
from core.types import TASKS, ModalityKind, Split
from data.batching import batch_iterator
from evaluation.metrics import LABEL_SOURCES, compute_metrics
from training.checkpoint import load_checkpoint

log = logging.getLogger(__name__)

PREDICTION_COLUMNS = ["id", "prediction", "label"]


@torch.no_grad()
def predict(model, dataset, splits, batch_size=256):
    """
    Eval-mode predictions for every instance of `splits`, in manifest order.
    Columns: id, split, pred_<task>, label_<task> (NaN where no label).
    """
    was_training = model.training
    model.eval()
    dtype = next(model.parameters()).dtype
    split_of = {inst.id: inst.split.value for inst in dataset.select(splits)}
    rows = []
    try:
        for batch in batch_iterator(dataset, splits, batch_size, shuffle=False):
            out = model(batch.to(dtype=dtype))
            preds = {t.code: out.predictions[t].cpu().numpy() for t in TASKS}
            for n, inst_id in enumerate(batch.ids):
                row = {"id": inst_id, "split": split_of[inst_id]}
                for task in TASKS:
                    row[f"pred_{task.code}"] = float(preds[task.code][n])
                    present = batch.task_mask(task)[n].item() > 0
                    # float32 labels back onto the exact 0.2 grid
                    row[f"label_{task.code}"] = round(float(batch.labels[task][n]) * 5) / 5 if present else np.nan
                rows.append(row)
    finally:
        model.train(was_training)
    columns = ["id", "split"] + [f"pred_{t.code}" for t in TASKS] + [f"label_{t.code}" for t in TASKS]
    return pd.DataFrame(rows, columns=columns)


def _label_column(task, label_source):
    if label_source not in LABEL_SOURCES:
        raise ValidationError(f"label source must be one of {LABEL_SOURCES}, got {label_source!r}")
    if label_source == "multimodal" or task is ModalityKind.MULTIMODAL:
        return "label_m"
    return f"label_{task.code}"


def _load_model(model_or_checkpoint, dataset):
    if isinstance(model_or_checkpoint, torch.nn.Module):
        return model_or_checkpoint
    return load_checkpoint(model_or_checkpoint, specs=dataset.specs).model


def evaluate(model_or_checkpoint, dataset, split="test", tasks=("m",), label_sources=("multimodal",),
             batch_size=256, frame=None):
    """
    Metrics for every requested (task, label_source) pair on one labeled split.
    A precomputed prediction frame may be passed to skip the forward pass.
    """
    split = Split.parse(split)
    if not split.is_labeled:
        raise ValidationError(f"split {split.value} carries no labels")
    tasks = [ModalityKind.parse(t) for t in tasks]
    # the multimodal task has no unimodal annotation
    pairs = [(t, s) for t in tasks for s in label_sources
             if not (t is ModalityKind.MULTIMODAL and s == "unimodal")]
    if not pairs:
        raise ValidationError("nothing to evaluate: task m has no unimodal labels")
    if "unimodal" in label_sources and not dataset.has_unimodal_labels \
            and any(t is not ModalityKind.MULTIMODAL for t in tasks):
        raise ValidationError("archive has no unimodal labels; use --label-source multimodal")

    if frame is None:
        model = _load_model(model_or_checkpoint, dataset)
        frame = predict(model, dataset, split, batch_size)
    if frame.empty:
        raise ValidationError(f"split {split.value} is empty")

    reports = []
    for task, source in pairs:
        column = _label_column(task, source)
        effective = "multimodal" if column == "label_m" else "unimodal"
        reports.append(compute_metrics(frame[f"pred_{task.code}"].to_numpy(), frame[column].to_numpy(),
                                       task=task, label_source=effective))
    return reports


def prediction_file(frame, task="m", label_source="multimodal"):
    """The id,prediction,label view of one task of a `predict` frame."""
    task = ModalityKind.parse(task)
    return pd.DataFrame({
        "id": frame["id"],
        "prediction": frame[f"pred_{task.code}"],
        "label": frame[_label_column(task, label_source)],
    }, columns=PREDICTION_COLUMNS)


def write_predictions(frame, path):
    write_csv_atomic(frame[PREDICTION_COLUMNS], path)


def read_predictions(path):
    df = pd.read_csv(path, dtype={"id": str})
    missing = [c for c in PREDICTION_COLUMNS if c not in df.columns]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")
    if df["id"].duplicated().any():
        raise ValidationError(f"{path}: duplicate id {df['id'][df['id'].duplicated()].iloc[0]}")
    values = df[["prediction", "label"]].to_numpy(dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValidationError(f"{path}: non-finite prediction or label")
    return df


def write_reports(reports, path):
    write_json_atomic([r.to_dict() for r in reports], path)


def summary_line(report):
    def fmt(value, spec=".2f"):
        return "n/a" if value is None else format(value, spec)
    return (f"{report.task}[{report.label_source}] n={report.n_instances} "
            f"Acc2={fmt(report.acc2)} F1={fmt(report.f1)} Acc2_weak={fmt(report.acc2_weak)} "
            f"MAE={fmt(report.mae, '.4f')} Corr={fmt(report.corr)} R_square={fmt(report.r_square)}")


def reports_frame(reports):
    return pd.DataFrame([r.to_dict() for r in reports])
