"""
Checkpoint container: a zip holding meta.json (configs, epoch, seed, history,
tensor shapes) and one little-endian blob per named tensor.
"""
import json
import logging
import zipfile
from datetime import datetime, timezone

import numpy as np
import torch

from core.errors import FormatError, ValidationError
from core.fileio import atomic_path
from core.rng import seeded_rng
from core.types import FEATURE_MODALITIES, FeatureSpec, ModalityKind, ModelConfig
from model.backbone import build_model
from training.config import TrainConfig
from training.state import TrainState, build_optimizer

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = "avmc-checkpoint/1"
META = "meta.json"
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)

_DTYPES = {
    torch.float32: "<f4",
    torch.float64: "<f8",
    torch.int64: "<i8",
}
_TORCH_DTYPES = {v: k for k, v in _DTYPES.items()}


def _entry(name):
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    return info


def _tensor_bytes(t):
    t = t.detach().cpu().contiguous()
    if t.dtype not in _DTYPES:
        raise ValidationError(f"cannot store tensor of dtype {t.dtype}")
    return _DTYPES[t.dtype], np.ascontiguousarray(t.numpy(), dtype=_DTYPES[t.dtype]).tobytes()


def _flatten_optimizer(optimizer):
    state_dict = optimizer.state_dict()
    tensors, scalars = {}, {}
    for idx, entries in state_dict["state"].items():
        for key, value in entries.items():
            name = f"optimizer/{idx}/{key}"
            if torch.is_tensor(value):
                tensors[name] = value
            else:
                scalars[name] = value
    return tensors, scalars, state_dict["param_groups"]


def save_checkpoint(state, path, params=None, include_optimizer=True, include_best=False):
    """
    Write `state` to `path`. `params` overrides the model parameters stored
    (fit stores the best-validation parameters this way).
    """
    params = params if params is not None else state.model.state_dict()
    tensors = {f"params/{name}": value for name, value in params.items()}
    optimizer_meta = None
    if include_optimizer:
        opt_tensors, opt_scalars, groups = _flatten_optimizer(state.optimizer)
        tensors.update(opt_tensors)
        optimizer_meta = {"scalars": opt_scalars, "param_groups": groups}
    if include_best and state.best_params is not None:
        tensors.update({f"best/{name}": value for name, value in state.best_params.items()})

    blobs, table = {}, {}
    for name, value in tensors.items():
        dtype, blob = _tensor_bytes(value)
        blobs[name] = blob
        table[name] = {"shape": list(value.shape), "dtype": dtype}

    meta = {
        "version": CHECKPOINT_VERSION,
        "saved_at": datetime.now(timezone.utc).isoformat(),
        "model_config": state.model.config.to_dict(),
        "specs": {k.value: state.model.specs[k].to_dict() for k in FEATURE_MODALITIES},
        "train_config": state.train_config.to_dict(),
        "loss_weights": state.train_config.loss_weights.to_dict(),
        "mixup": state.train_config.mixup.to_dict(),
        "epoch": state.epoch,
        "global_step": state.global_step,
        "seed": state.seed,
        "best_valid_mae": state.best_valid_mae if np.isfinite(state.best_valid_mae) else None,
        "best_epoch": state.best_epoch,
        "history": state.history,
        "rng_state": state.rng.get_state(),
        "optimizer": optimizer_meta,
        "tensors": table,
    }

    with atomic_path(path) as tmp:
        with zipfile.ZipFile(tmp, "w") as zf:
            zf.writestr(_entry(META), json.dumps(meta, indent=1))
            for name in sorted(blobs):
                zf.writestr(_entry(f"tensors/{name}.bin"), blobs[name])
    log.info("Saved checkpoint (epoch %d) to %s", state.epoch, path)
    return path


def read_meta(path):
    try:
        with zipfile.ZipFile(path, "r") as zf:
            return json.loads(zf.read(META).decode("utf-8"))
    except (zipfile.BadZipFile, KeyError, ValueError) as exc:
        raise FormatError(f"{path}: corrupt checkpoint ({exc})") from None


def _read_tensors(zf, table):
    out = {}
    for name, info in table.items():
        try:
            blob = zf.read(f"tensors/{name}.bin")
        except KeyError:
            raise FormatError(f"checkpoint is missing tensor {name}") from None
        dtype = info["dtype"]
        if dtype not in _TORCH_DTYPES:
            raise FormatError(f"tensor {name}: unsupported dtype {dtype}")
        shape = tuple(info["shape"])
        expected = int(np.prod(shape, dtype=np.int64)) * np.dtype(dtype).itemsize
        if len(blob) != expected:
            raise FormatError(f"tensor {name}: {len(blob)} bytes, expected {expected}")
        # astype to the native-order type also makes the array writable
        array = np.frombuffer(blob, dtype=dtype).astype(np.dtype(dtype).type).reshape(shape)
        out[name] = torch.from_numpy(array)
    return out


def _check_specs(stored, specs):
    for kind in FEATURE_MODALITIES:
        want = specs[kind]
        have = stored[kind]
        if (have.seq_len, have.feat_dim) != (want.seq_len, want.feat_dim):
            raise ValidationError(
                f"{kind.value}: checkpoint expects features {have.shape}, archive has {want.shape}"
            )


def _load_params(model, params, prefix):
    expected = model.state_dict()
    for name, value in expected.items():
        key = f"{prefix}{name}"
        if key not in params:
            raise ValidationError(f"checkpoint is missing tensor {name}")
        if tuple(params[key].shape) != tuple(value.shape):
            raise ValidationError(
                f"tensor {name}: checkpoint shape {tuple(params[key].shape)} "
                f"does not match model shape {tuple(value.shape)}"
            )
    extra = [k[len(prefix):] for k in params if k.startswith(prefix) and k[len(prefix):] not in expected]
    if extra:
        raise ValidationError(f"checkpoint has unexpected tensor {extra[0]}")
    return {name: params[f"{prefix}{name}"] for name in expected}


def load_checkpoint(path, specs=None, model_config=None):
    """
    Rebuild a TrainState from `path`. `specs` (from the archive being used)
    and `model_config` are checked against what was stored.
    """
    meta = read_meta(path)
    if meta.get("version") != CHECKPOINT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {meta.get('version')!r}")
    try:
        stored_specs = {
            ModalityKind.parse(k): FeatureSpec(ModalityKind.parse(k), v["seq_len"], v["feat_dim"])
            for k, v in meta["specs"].items()
        }
        config = model_config or ModelConfig(**meta["model_config"])
        train_config = TrainConfig.from_dict(meta["train_config"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: incomplete checkpoint meta ({exc})") from None
    if specs is not None:
        specs = {ModalityKind.parse(k): v for k, v in specs.items()}
        _check_specs(stored_specs, specs)

    with zipfile.ZipFile(path, "r") as zf:
        tensors = _read_tensors(zf, meta["tensors"])

    model = build_model(config, stored_specs)
    model.load_state_dict(_load_params(model, tensors, "params/"))
    optimizer = build_optimizer(model, train_config.optimizer)
    if meta.get("optimizer"):
        optimizer.load_state_dict(_optimizer_state(meta["optimizer"], tensors))

    rng = seeded_rng(meta["seed"])
    if meta.get("rng_state"):
        rng.set_state(meta["rng_state"])
    best = meta.get("best_valid_mae")
    state = TrainState(
        model=model, optimizer=optimizer, train_config=train_config, rng=rng, seed=int(meta["seed"]),
        epoch=int(meta.get("epoch", 0)), global_step=int(meta.get("global_step", 0)),
        best_valid_mae=float("inf") if best is None else float(best),
        best_epoch=int(meta.get("best_epoch", 0)), history=list(meta.get("history", [])),
    )
    if any(k.startswith("best/") for k in tensors):
        state.best_params = _load_params(model, tensors, "best/")
    return state


def _optimizer_state(opt_meta, tensors):
    state = {}
    for name, value in list(tensors.items()) + list(opt_meta.get("scalars", {}).items()):
        if not name.startswith("optimizer/"):
            continue
        _, idx, key = name.split("/", 2)
        state.setdefault(int(idx), {})[key] = value
    return {"state": state, "param_groups": opt_meta["param_groups"]}
