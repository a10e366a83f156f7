import copy
import dataclasses
import json
from dataclasses import dataclass, field

from core.errors import ConfigError
from core.types import LossWeights, MixupConfig, ModelConfig
from training.config import OptimizerConfig, TrainConfig

TOP_LEVEL_KEYS = ("archive", "output_dir", "seed", "model", "train")


@dataclass
class RunConfig:
    archive: str
    output_dir: str = "runs/avmc"
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self):
        return {"archive": self.archive, "output_dir": self.output_dir, "seed": self.seed,
                "model": self.model.to_dict(), "train": self.train.to_dict()}


def _parse_value(text):
    try:
        return json.loads(text)
    except ValueError:
        return text


def apply_overrides(data, overrides):
    """Apply `a.b.c=value` overrides (JSON values, falling back to strings) to a nested dict."""
    data = copy.deepcopy(data)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, value = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ConfigError(f"--set {item!r}: empty key")
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise ConfigError(f"{key}: {part} is not a section")
            node = child
        node[parts[-1]] = _parse_value(value)
    return data


def _check_keys(section, allowed, prefix):
    if not isinstance(section, dict):
        raise ConfigError(f"{prefix}: expected an object")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}: unknown key" if prefix else f"{key}: unknown key")


def _fields(cls):
    return [f.name for f in dataclasses.fields(cls) if f.init]


def _build(cls, section, prefix):
    _check_keys(section, _fields(cls), prefix)
    try:
        return cls(**section)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix}: {exc}") from None


def build_run_config(data):
    _check_keys(data, TOP_LEVEL_KEYS, "")
    if not data.get("archive"):
        raise ConfigError("archive: required")
    model = _build(ModelConfig, data.get("model", {}), "model")

    train = dict(data.get("train", {}))
    _check_keys(train, _fields(TrainConfig), "train")
    if "optimizer" in train:
        train["optimizer"] = _build(OptimizerConfig, train["optimizer"], "train.optimizer")
    if "loss_weights" in train:
        weights = train["loss_weights"]
        _check_keys(weights, ("alpha", "beta"), "train.loss_weights")
        for name in ("alpha", "beta"):
            if name in weights:
                _check_keys(weights[name], ("m", "t", "a", "v") if name == "alpha" else ("a", "v"),
                            f"train.loss_weights.{name}")
        train["loss_weights"] = _build(LossWeights, weights, "train.loss_weights")
    if "mixup" in train:
        train["mixup"] = _build(MixupConfig, train["mixup"], "train.mixup")
    train = _build(TrainConfig, train, "train")

    try:
        seed = int(data.get("seed", 0))
    except (TypeError, ValueError):
        raise ConfigError("seed: must be an integer") from None
    return RunConfig(archive=str(data["archive"]), output_dir=str(data.get("output_dir", "runs/avmc")),
                     seed=seed, model=model, train=train)


def load_run_config(path, overrides=()):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path} ({exc.strerror})") from None
    except ValueError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc})") from None
    return build_run_config(apply_overrides(data, overrides))
