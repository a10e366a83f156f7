import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import torch
from tqdm import tqdm

from core.errors import ConfigError
from core.types import MIXUP_MODALITIES, TASKS, ModalityKind, Split
from data.batching import batch_iterator, num_batches
from evaluation.evaluate import evaluate, predict
from model.mixup import draw_mixup, mixup_batch
from training.checkpoint import load_checkpoint, save_checkpoint
from training.losses import (
    consistency_loss, regression_loss, total_consistency_loss, total_regression_loss,
)
from training.state import init_state

log = logging.getLogger(__name__)

BEST_CHECKPOINT = "best.ckpt"
LAST_CHECKPOINT = "last.ckpt"
HISTORY_FILE = "history.jsonl"


@dataclass
class StepLosses:
    regression: Dict[ModalityKind, torch.Tensor]
    consistency: Dict[ModalityKind, torch.Tensor]
    total_regression: torch.Tensor
    total_consistency: torch.Tensor

    @property
    def total(self):
        return self.total_regression + self.total_consistency


@dataclass
class PhaseMeter:
    """Running means of one phase's losses."""
    steps: int = 0
    sums: Dict[str, float] = field(default_factory=dict)

    def add(self, losses):
        self.steps += 1
        values = {f"loss_r_{k.code}": v for k, v in losses.regression.items()}
        values.update({f"loss_mix_{k.code}": v for k, v in losses.consistency.items()})
        values["loss_r"] = losses.total_regression
        values["loss_mix"] = losses.total_consistency
        values["loss"] = losses.total
        for key, value in values.items():
            if torch.is_tensor(value):
                value = value.detach()
            self.sums[key] = self.sums.get(key, 0.0) + float(value)

    def summary(self):
        out = {key: value / max(self.steps, 1) for key, value in self.sums.items()}
        out["steps"] = self.steps
        return out


def compute_objective(model, batch, weights, draw=None, mixup_config=None):
    """
    Losses of one mini-batch: masked L1 regression per task and, when a mixup
    draw is given, the acoustic/visual interpolation-consistency losses.
    Modalities whose beta is 0 skip the mixed forward pass entirely.
    """
    out = model(batch)
    regression = {
        task: regression_loss(out.predictions[task], batch.labels[task], batch.task_mask(task), task)
        for task in TASKS
    }
    total_r = total_regression_loss(regression, weights)

    zero = out.predictions[ModalityKind.MULTIMODAL].sum() * 0.0
    consistency = {kind: zero for kind in MIXUP_MODALITIES}
    active = [k for k in MIXUP_MODALITIES if weights.beta[k.code] > 0]
    if draw is not None and active:
        stop_gradient = mixup_config.target_stop_gradient if mixup_config is not None else True
        mixed = mixup_batch({k: out.representations[k] for k in active},
                            {k: out.predictions[k] for k in active}, draw)
        for kind in active:
            mixed_pred = model.classify(mixed.representations[kind], kind)
            consistency[kind] = consistency_loss(mixed_pred, mixed.targets[kind], kind, stop_gradient)
    total_mix = total_consistency_loss(consistency, weights)
    return StepLosses(regression=regression, consistency=consistency,
                      total_regression=total_r, total_consistency=total_mix)


def optimizer_step(state, losses):
    optimizer = state.optimizer
    optimizer.zero_grad(set_to_none=True)
    losses.total.backward()
    clip = state.train_config.optimizer.grad_clip
    if clip:
        torch.nn.utils.clip_grad_norm_(state.model.parameters(), clip)
    optimizer.step()
    state.global_step += 1
    state.loss_trace.append(float(losses.total.detach()))


def _run_phase(state, dataset, splits, with_mixup, desc):
    config = state.train_config
    model = state.model
    weights = config.loss_weights
    dtype = next(model.parameters()).dtype
    meter = PhaseMeter()
    model.train()

    n = len(dataset.select(splits))
    batches = batch_iterator(dataset, splits, config.batch_size, shuffle=True, rng=state.rng)
    for batch in tqdm(batches, total=num_batches(n, config.batch_size), desc=desc,
                      disable=not config.progress, leave=False):
        draw = None
        if with_mixup and config.mixup_enabled:
            draw = draw_mixup(len(batch), config.mixup, state.rng)
        losses = compute_objective(model, batch.to(dtype=dtype), weights, draw, config.mixup)
        optimizer_step(state, losses)
        meter.add(losses)
    return meter.summary()


def _require_supervised(dataset):
    if not dataset.select(Split.TRAIN):
        raise ConfigError("dataset has no supervised training instances")


def train_epoch_semi(state, dataset):
    """
    One semi-supervised epoch: phase 1 over train + unlabeled optimizing
    L_r + L_mix, then phase 2 over train only optimizing L_r.
    """
    if state.train_config.mode != "semi":
        raise ConfigError("train.mode must be 'semi' for train_epoch_semi")
    _require_supervised(dataset)
    epoch = state.epoch + 1
    torch.manual_seed(state.rng.child_seed())
    phase1 = _run_phase(state, dataset, [Split.TRAIN, Split.UNLABELED], True, f"epoch {epoch} phase 1")
    phase2 = _run_phase(state, dataset, [Split.TRAIN], False, f"epoch {epoch} phase 2")
    state.epoch = epoch
    return {"phase1": phase1, "phase2": phase2}


def train_supervised(state, dataset):
    """One supervised epoch over the train split optimizing L_r + L_mix."""
    if state.train_config.mode != "supervised":
        raise ConfigError("train.mode must be 'supervised' for train_supervised")
    _require_supervised(dataset)
    epoch = state.epoch + 1
    torch.manual_seed(state.rng.child_seed())
    phase1 = _run_phase(state, dataset, [Split.TRAIN], True, f"epoch {epoch}")
    state.epoch = epoch
    return {"phase1": phase1}


def run_epoch(state, dataset):
    if state.train_config.mode == "semi":
        return train_epoch_semi(state, dataset)
    return train_supervised(state, dataset)


class EarlyStopping:
    """Stop once `patience` epochs pass without a new best validation MAE."""

    def __init__(self, patience, best=math.inf, best_epoch=0):
        self.patience = patience
        self.best = best
        self.best_epoch = best_epoch

    def update(self, epoch, value):
        improved = value < self.best
        if improved:
            self.best, self.best_epoch = value, epoch
        return improved

    def should_stop(self, epoch):
        return epoch - self.best_epoch >= self.patience


@dataclass
class FitResult:
    state: object
    checkpoint: Optional[str]
    history_path: Optional[str]


def validate(state, dataset):
    frame = predict(state.model, dataset, Split.VALID, state.train_config.eval_batch_size)
    return evaluate(None, dataset, Split.VALID, tasks=("m",), frame=frame)[0]


def fit(dataset, train_config, model_config, seed=0, output_dir=None, resume_from=None):
    """
    Train until max_epochs or early stopping on multimodal validation MAE.
    The returned state's model holds the best-validation parameters; with an
    output_dir, best.ckpt / last.ckpt / history.jsonl are written there.
    """
    _require_supervised(dataset)
    if not dataset.select(Split.VALID):
        raise ConfigError("dataset has no validation instances")

    if resume_from is not None:
        state = load_checkpoint(resume_from, specs=dataset.specs, model_config=model_config)
        state.train_config = train_config
        log.info("Resuming from %s at epoch %d", resume_from, state.epoch)
    else:
        state = init_state(model_config, dataset.specs, train_config, seed)

    stopper = EarlyStopping(train_config.early_stop_patience, state.best_valid_mae, state.best_epoch)
    history_path = os.path.join(output_dir, HISTORY_FILE) if output_dir else None
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)
        if resume_from is None and os.path.exists(history_path):
            os.remove(history_path)

    log.info("Training (%s) on %d supervised / %d unsupervised instances",
             train_config.mode, dataset.stats.n_supervised, dataset.stats.n_unsupervised)
    while state.epoch < train_config.max_epochs:
        phases = run_epoch(state, dataset)
        report = validate(state, dataset)
        improved = stopper.update(state.epoch, report.mae)
        state.record_best(state.epoch, report.mae)

        record = {"epoch": state.epoch, "mode": train_config.mode, "global_step": state.global_step}
        record.update(phases)
        record["valid"] = report.to_dict(decimals=6)
        record["best_valid_mae"] = state.best_valid_mae
        state.history.append(record)
        log.info("epoch %d: loss %.4f valid MAE %.4f%s", state.epoch, phases["phase1"]["loss"],
                 report.mae, " (best)" if improved else "")

        if output_dir:
            with open(history_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")
            save_checkpoint(state, os.path.join(output_dir, LAST_CHECKPOINT), include_best=True)

        if stopper.should_stop(state.epoch):
            log.info("Early stopping at epoch %d (best epoch %d, MAE %.4f)",
                     state.epoch, stopper.best_epoch, stopper.best)
            break

    state.restore_best()
    checkpoint = None
    if output_dir:
        checkpoint = save_checkpoint(state, os.path.join(output_dir, BEST_CHECKPOINT), include_optimizer=False)
    return FitResult(state=state, checkpoint=checkpoint, history_path=history_path)
