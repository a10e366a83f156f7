from dataclasses import dataclass, field
from typing import Tuple

from core.errors import ConfigError
from core.types import LossWeights, MixupConfig

MODES = ("supervised", "semi")

# command-line ablation names -> TrainConfig flag
ABLATIONS = {
    "mixup-a": ("disable_mixup_a",),
    "mixup-v": ("disable_mixup_v",),
    "mixup-av": ("disable_mixup_a", "disable_mixup_v"),
    "unimodal": ("disable_unimodal_tasks",),
}


@dataclass
class OptimizerConfig:
    name: str = "adam"
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    betas: Tuple[float, float] = (0.9, 0.999)
    grad_clip: float = 5.0

    def __post_init__(self):
        if self.name not in ("adam", "adamw", "sgd"):
            raise ConfigError("train.optimizer.name must be adam, adamw or sgd")
        if not float(self.learning_rate) > 0:
            raise ConfigError("train.optimizer.learning_rate must be > 0")
        if float(self.weight_decay) < 0:
            raise ConfigError("train.optimizer.weight_decay must be >= 0")
        if self.grad_clip is not None and float(self.grad_clip) <= 0:
            raise ConfigError("train.optimizer.grad_clip must be > 0 (or null to disable)")
        self.betas = tuple(float(b) for b in self.betas)

    def to_dict(self):
        return {"name": self.name, "learning_rate": self.learning_rate,
                "weight_decay": self.weight_decay, "betas": list(self.betas),
                "grad_clip": self.grad_clip}


@dataclass
class TrainConfig:
    """
    Training hyper-parameters. The ablation flags and the loss weights are kept
    consistent: a disabled task has weight 0 and a zero weight disables its task.
    """
    batch_size: int = 32
    max_epochs: int = 50
    early_stop_patience: int = 8
    mode: str = "supervised"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    loss_weights: LossWeights = field(default_factory=LossWeights)
    mixup: MixupConfig = field(default_factory=MixupConfig)
    disable_mixup_a: bool = False
    disable_mixup_v: bool = False
    disable_unimodal_tasks: bool = False
    eval_batch_size: int = 256
    progress: bool = False

    def __post_init__(self):
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerConfig(**self.optimizer)
        if isinstance(self.loss_weights, dict):
            self.loss_weights = LossWeights(**self.loss_weights)
        if isinstance(self.mixup, dict):
            self.mixup = MixupConfig(**self.mixup)
        if self.mode not in MODES:
            raise ConfigError(f"train.mode must be one of {MODES}")
        if int(self.batch_size) < 1:
            raise ConfigError("train.batch_size must be >= 1")
        if int(self.max_epochs) < 1:
            raise ConfigError("train.max_epochs must be >= 1")
        if int(self.early_stop_patience) < 1:
            raise ConfigError("train.early_stop_patience must be >= 1")
        if int(self.eval_batch_size) < 1:
            raise ConfigError("train.eval_batch_size must be >= 1")
        self._sync_flags()
        if self.mixup_enabled and self.batch_size < 2:
            raise ConfigError("train.batch_size must be >= 2 when mixup is enabled")

    def _sync_flags(self):
        alpha, beta = self.loss_weights.alpha, self.loss_weights.beta
        if self.disable_unimodal_tasks:
            for code in ("t", "a", "v"):
                alpha[code] = 0.0
        self.disable_unimodal_tasks = all(alpha[c] == 0.0 for c in ("t", "a", "v"))
        if self.disable_mixup_a:
            beta["a"] = 0.0
        if self.disable_mixup_v:
            beta["v"] = 0.0
        self.disable_mixup_a = beta["a"] == 0.0
        self.disable_mixup_v = beta["v"] == 0.0
        if alpha["m"] == 0.0 and self.disable_unimodal_tasks:
            raise ConfigError("train.loss_weights.alpha: at least one weight must be positive")

    @property
    def mixup_enabled(self):
        return not (self.disable_mixup_a and self.disable_mixup_v)

    def with_ablations(self, names):
        """Copy with the named ablations (mixup-a, mixup-v, mixup-av, unimodal) applied."""
        data = self.to_dict()
        for name in names:
            key = name.strip().lower()
            if key not in ABLATIONS:
                raise ConfigError(f"--ablate: unknown ablation {name!r}; expected one of {sorted(ABLATIONS)}")
            for flag in ABLATIONS[key]:
                data[flag] = True
        return TrainConfig.from_dict(data)

    def to_dict(self):
        return {
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "early_stop_patience": self.early_stop_patience,
            "mode": self.mode,
            "optimizer": self.optimizer.to_dict(),
            "loss_weights": self.loss_weights.to_dict(),
            "mixup": self.mixup.to_dict(),
            "disable_mixup_a": self.disable_mixup_a,
            "disable_mixup_v": self.disable_mixup_v,
            "disable_unimodal_tasks": self.disable_unimodal_tasks,
            "eval_batch_size": self.eval_batch_size,
            "progress": self.progress,
        }

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigError(f"train.{key}: unknown key")
        return cls(**data)
