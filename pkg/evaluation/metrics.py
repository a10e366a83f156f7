from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from sklearn.metrics import accuracy_score, f1_score, r2_score

from core.errors import ShapeError, ValidationError
from core.types import ModalityKind

WEAK_BOUND = 0.4
# labels arrive as float32; 0.4f is slightly above 0.4
_WEAK_TOL = 1e-6
PERCENT_FIELDS = ("acc2", "f1", "acc2_weak", "corr", "r_square")
LABEL_SOURCES = ("multimodal", "unimodal")


@dataclass(frozen=True)
class MetricsReport:
    """
    Percent metrics are full precision here; `to_dict` rounds them to 2
    decimals. acc2_weak / corr / r_square are None when undefined.
    """
    acc2: float
    f1: float
    acc2_weak: Optional[float]
    mae: float
    corr: Optional[float]
    r_square: Optional[float]
    n_instances: int
    n_weak: int
    task: str = "multimodal"
    label_source: str = "multimodal"

    def to_dict(self, decimals=2):
        out = asdict(self)
        for name in PERCENT_FIELDS:
            if out[name] is not None:
                out[name] = round(out[name], decimals)
        return out


def binary_classes(values):
    """1 = non-negative (zero included), 0 = negative."""
    return (np.asarray(values) >= 0).astype(np.int64)


def weak_mask(labels):
    labels = np.asarray(labels, dtype=np.float64)
    return np.abs(labels) <= WEAK_BOUND + _WEAK_TOL


def pearson(predictions, labels):
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    pc, yc = p - p.mean(), y - y.mean()
    denom = np.sqrt((pc ** 2).sum() * (yc ** 2).sum())
    if denom == 0.0:
        return None
    return float(np.clip((pc * yc).sum() / denom, -1.0, 1.0))


def compute_metrics(predictions, labels, task="multimodal", label_source="multimodal"):
    """
    Acc2 / weighted F1 / Acc2_weak / MAE / Corr / R_square for one
    prediction-label collection. Binary classes: negative vs non-negative.
    """
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ShapeError(f"{len(p)} predictions vs {len(y)} labels")
    if p.size == 0:
        raise ValidationError("cannot compute metrics on an empty set")
    if not (np.isfinite(p).all() and np.isfinite(y).all()):
        raise ValidationError("predictions and labels must be finite")

    p_cls, y_cls = binary_classes(p), binary_classes(y)
    acc2 = accuracy_score(y_cls, p_cls) * 100.0
    f1 = f1_score(y_cls, p_cls, average="weighted", labels=[0, 1], zero_division=0) * 100.0

    weak = weak_mask(y)
    n_weak = int(weak.sum())
    acc2_weak = accuracy_score(y_cls[weak], p_cls[weak]) * 100.0 if n_weak else None

    mae = float(np.mean(np.abs(p - y)))
    corr = pearson(p, y)
    r_square = None
    if np.var(y) > 0:
        r_square = float(r2_score(y, p)) * 100.0

    return MetricsReport(
        acc2=float(acc2), f1=float(f1), acc2_weak=None if acc2_weak is None else float(acc2_weak),
        mae=mae, corr=None if corr is None else corr * 100.0, r_square=r_square,
        n_instances=int(p.size), n_weak=n_weak,
        task=ModalityKind.parse(task).value, label_source=label_source,
    )
