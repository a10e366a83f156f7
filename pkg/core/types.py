from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from core.errors import ConfigError, ShapeError, ValidationError


class ModalityKind(str, Enum):
    TEXT = "text"
    ACOUSTIC = "acoustic"
    VISUAL = "visual"
    MULTIMODAL = "multimodal"

    @property
    def code(self):
        return _CODES[self]

    @property
    def is_feature(self):
        # multimodal is a task / label key only
        return self is not ModalityKind.MULTIMODAL

    @classmethod
    def parse(cls, value):
        """Accept a ModalityKind, its name ("text") or its one-letter code ("t")."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, _CODES[kind]):
                return kind
        raise ValidationError(f"Unknown modality/task: {value!r}")


_CODES = {
    ModalityKind.TEXT: "t",
    ModalityKind.ACOUSTIC: "a",
    ModalityKind.VISUAL: "v",
    ModalityKind.MULTIMODAL: "m",
}

FEATURE_MODALITIES = (ModalityKind.TEXT, ModalityKind.ACOUSTIC, ModalityKind.VISUAL)
TASKS = (ModalityKind.MULTIMODAL, ModalityKind.TEXT, ModalityKind.ACOUSTIC, ModalityKind.VISUAL)
MIXUP_MODALITIES = (ModalityKind.ACOUSTIC, ModalityKind.VISUAL)

# 11-value annotation grid: -1.0, -0.8, ..., 1.0
LABEL_GRID = tuple(round(k / 5.0, 1) for k in range(-5, 6))


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"
    UNLABELED = "unlabeled"

    @property
    def is_labeled(self):
        return self is not Split.UNLABELED

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(
                f"Unknown split {value!r}; expected one of {[s.value for s in cls]}"
            ) from None


@dataclass(frozen=True)
class FeatureSpec:
    modality: ModalityKind
    seq_len: int
    feat_dim: int

    def __post_init__(self):
        object.__setattr__(self, "modality", ModalityKind.parse(self.modality))
        if not self.modality.is_feature:
            raise ValidationError("multimodal is not a feature modality")
        if int(self.seq_len) < 1:
            raise ValidationError(f"{self.modality.value}: seq_len must be >= 1")
        if int(self.feat_dim) < 1:
            raise ValidationError(f"{self.modality.value}: feat_dim must be >= 1")

    @property
    def shape(self):
        return (self.seq_len, self.feat_dim)

    def to_dict(self):
        return {"seq_len": self.seq_len, "feat_dim": self.feat_dim}


CANONICAL_SPECS = {
    ModalityKind.TEXT: FeatureSpec(ModalityKind.TEXT, 50, 768),
    ModalityKind.ACOUSTIC: FeatureSpec(ModalityKind.ACOUSTIC, 925, 25),
    ModalityKind.VISUAL: FeatureSpec(ModalityKind.VISUAL, 232, 177),
}


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """
    One modality's [seq_len x feat_dim] float32 matrix for one instance.
    Rows at index >= valid_len are zero padding. The array is made read-only.
    """
    spec: FeatureSpec
    values: np.ndarray
    valid_len: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.shape != self.spec.shape:
            raise ShapeError(
                f"{self.spec.modality.value}: expected shape {self.spec.shape}, got {values.shape}"
            )
        if not 0 <= int(self.valid_len) <= self.spec.seq_len:
            raise ValidationError(
                f"{self.spec.modality.value}: valid_len {self.valid_len} outside [0, {self.spec.seq_len}]"
            )
        if not np.isfinite(values).all():
            raise ValidationError(f"{self.spec.modality.value}: non-finite feature values")
        if np.any(values[int(self.valid_len):] != 0.0):
            raise ValidationError(f"{self.spec.modality.value}: padding rows must be zero")
        if values.flags.writeable:
            values = values.copy() if values is self.values else values
            values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid_len", int(self.valid_len))

    def __eq__(self, other):
        if not isinstance(other, FeatureSequence):
            return NotImplemented
        return (self.spec == other.spec and self.valid_len == other.valid_len
                and np.array_equal(self.values, other.values))

    __hash__ = None


def snap_label(value, what="label"):
    """Validate that value is on the 11-value grid and return the exact grid value."""
    units = float(value) * 5.0
    k = round(units)
    if abs(units - k) > 1e-4 or not -5 <= k <= 5:
        raise ValidationError(f"{what} {value!r} is not a multiple of 0.2 within [-1, 1]")
    return LABEL_GRID[k + 5]


@dataclass(frozen=True)
class LabelSet:
    """
    Multimodal + unimodal sentiment labels of one instance.
    t/a/v may be jointly absent for archives without unimodal annotation.
    """
    multimodal: float
    text: Optional[float] = None
    acoustic: Optional[float] = None
    visual: Optional[float] = None

    def __post_init__(self):
        uni = (self.text, self.acoustic, self.visual)
        if any(v is None for v in uni) and not all(v is None for v in uni):
            raise ValidationError("unimodal labels must be all present or all absent")
        for kind in TASKS:
            raw = getattr(self, kind.value)
            if raw is not None:
                object.__setattr__(self, kind.value, snap_label(raw, f"{kind.value} label"))

    @property
    def has_unimodal(self):
        return self.text is not None

    def get(self, task):
        return getattr(self, ModalityKind.parse(task).value)

    def to_dict(self):
        if not self.has_unimodal:
            return {"m": self.multimodal}
        return {k.code: getattr(self, k.value) for k in TASKS}

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return None
        values = {ModalityKind.parse(k).value: v for k, v in d.items()}
        if ModalityKind.MULTIMODAL.value not in values:
            raise ValidationError("label set is missing the multimodal label")
        return cls(**values)


@dataclass(frozen=True)
class Instance:
    id: str
    split: Split
    features: Dict[ModalityKind, FeatureSequence]
    labels: Optional[LabelSet] = None

    def __post_init__(self):
        object.__setattr__(self, "split", Split.parse(self.split))
        if set(self.features) != set(FEATURE_MODALITIES):
            raise ValidationError(f"{self.id}: features must hold exactly text, acoustic and visual")
        if self.split.is_labeled and self.labels is None:
            raise ValidationError(f"{self.id}: {self.split.value} instance needs labels")
        if not self.split.is_labeled and self.labels is not None:
            raise ValidationError(f"{self.id}: unlabeled instance must not carry labels")

    @property
    def is_supervised(self):
        return self.labels is not None


ACTIVATIONS = ("relu", "tanh", "gelu", "sigmoid", "identity")
HEAD_TYPES = ("mlp", "affine")
DEFAULT_HIDDEN_DIMS = {"t": 128, "a": 32, "v": 64}


@dataclass
class ModelConfig:
    hidden_dims: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_HIDDEN_DIMS))
    lstm_layers: int = 1
    # None -> h_k // 2 per direction
    lstm_hidden: Optional[int] = None
    # None -> (in // 2, in // 4) per head, at least 2 each
    classifier_hidden: Optional[Tuple[int, int]] = None
    activation: str = "relu"
    dropout: float = 0.0
    head: str = "mlp"

    def __post_init__(self):
        # partial maps (e.g. one dotted override) fill in from the defaults
        dims = dict(DEFAULT_HIDDEN_DIMS)
        for key, value in dict(self.hidden_dims).items():
            kind = ModalityKind.parse(key)
            if not kind.is_feature:
                raise ConfigError(f"model.hidden_dims.{key}: only t/a/v allowed")
            if int(value) < 1:
                raise ConfigError(f"model.hidden_dims.{key} must be a positive integer")
            dims[kind.code] = int(value)
        self.hidden_dims = dims
        if int(self.lstm_layers) < 1:
            raise ConfigError("model.lstm_layers must be >= 1")
        if self.lstm_hidden is not None and int(self.lstm_hidden) < 1:
            raise ConfigError("model.lstm_hidden must be a positive integer")
        if self.classifier_hidden is not None:
            widths = tuple(int(w) for w in self.classifier_hidden)
            if len(widths) != 2 or min(widths) < 1:
                raise ConfigError("model.classifier_hidden must be two positive integers")
            self.classifier_hidden = widths
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"model.activation must be one of {ACTIVATIONS}")
        if not 0.0 <= float(self.dropout) < 1.0:
            raise ConfigError("model.dropout must be in [0, 1)")
        if self.head not in HEAD_TYPES:
            raise ConfigError(f"model.head must be one of {HEAD_TYPES}")

    def hidden_dim(self, kind):
        kind = ModalityKind.parse(kind)
        if kind is ModalityKind.MULTIMODAL:
            return self.fused_dim
        return self.hidden_dims[kind.code]

    @property
    def fused_dim(self):
        return self.hidden_dims["t"] + self.hidden_dims["a"] + self.hidden_dims["v"]

    def lstm_hidden_for(self, kind):
        if self.lstm_hidden is not None:
            return int(self.lstm_hidden)
        return max(1, self.hidden_dim(kind) // 2)

    def classifier_widths(self, in_dim):
        if self.classifier_hidden is not None:
            return self.classifier_hidden
        # width 1 ReLU layers die for every input
        return (max(2, in_dim // 2), max(2, in_dim // 4))

    def to_dict(self):
        return {
            "hidden_dims": dict(self.hidden_dims),
            "lstm_layers": self.lstm_layers,
            "lstm_hidden": self.lstm_hidden,
            "classifier_hidden": list(self.classifier_hidden) if self.classifier_hidden else None,
            "activation": self.activation,
            "dropout": self.dropout,
            "head": self.head,
        }


@dataclass
class LossWeights:
    alpha: Dict[str, float] = field(default_factory=lambda: {"m": 1.0, "t": 1.0, "a": 1.0, "v": 1.0})
    beta: Dict[str, float] = field(default_factory=lambda: {"a": 1.0, "v": 1.0})

    def __post_init__(self):
        alpha = {"m": 1.0, "t": 1.0, "a": 1.0, "v": 1.0}
        for key, value in dict(self.alpha).items():
            alpha[ModalityKind.parse(key).code] = float(value)
        beta = {"a": 1.0, "v": 1.0}
        for key, value in dict(self.beta).items():
            code = ModalityKind.parse(key).code
            if code not in beta:
                raise ConfigError(f"train.loss_weights.beta.{key}: only a/v allowed")
            beta[code] = float(value)
        for name, table in (("alpha", alpha), ("beta", beta)):
            for code, value in table.items():
                if value < 0:
                    raise ConfigError(f"train.loss_weights.{name}.{code} must be >= 0")
        if not any(v > 0 for v in alpha.values()):
            raise ConfigError("train.loss_weights.alpha: at least one weight must be positive")
        self.alpha = alpha
        self.beta = beta

    def to_dict(self):
        return {"alpha": dict(self.alpha), "beta": dict(self.beta)}


@dataclass
class MixupConfig:
    beta_alpha: float = 0.5
    granularity: str = "per_batch"
    target_stop_gradient: bool = True

    def __post_init__(self):
        if not float(self.beta_alpha) > 0:
            raise ConfigError("train.mixup.beta_alpha must be > 0")
        self.beta_alpha = float(self.beta_alpha)
        if self.granularity != "per_batch":
            raise ConfigError("train.mixup.granularity: only 'per_batch' is supported")

    def to_dict(self):
        return {
            "beta_alpha": self.beta_alpha,
            "granularity": self.granularity,
            "target_stop_gradient": self.target_stop_gradient,
        }
