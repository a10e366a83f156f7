from dataclasses import dataclass
from typing import Dict

import numpy as np
import torch

from core.errors import ShapeError, ValidationError
from core.types import ModalityKind


@dataclass(frozen=True)
class MixupDraw:
    lam: float
    permutation: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(len(perm))):
            raise ValidationError("mixup permutation must be a bijection on batch indices")
        if not 0.0 <= float(self.lam) <= 1.0:
            raise ValidationError(f"mixup lambda {self.lam} outside [0, 1]")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def size(self):
        return len(self.permutation)


@dataclass
class MixedBatch:
    """Mixed representations F'' and mixed targets y' per modality (acoustic, visual)."""
    representations: Dict[ModalityKind, torch.Tensor]
    targets: Dict[ModalityKind, torch.Tensor]


def sample_lambda(config, rng):
    """One Beta(beta_alpha, beta_alpha) draw, shared by the whole batch and both modalities."""
    return float(rng.beta(config.beta_alpha, config.beta_alpha))


def shuffle_pairing(n, rng):
    if n < 1:
        raise ValidationError("shuffle_pairing needs n >= 1")
    return np.asarray(rng.permutation(n), dtype=np.int64)


def draw_mixup(n, config, rng):
    # lambda first, then the permutation: the draw order is part of replay determinism
    lam = sample_lambda(config, rng)
    return MixupDraw(lam=lam, permutation=shuffle_pairing(n, rng))


def mix(values, draw):
    """lam * x_i + (1 - lam) * x_perm(i) along the batch axis."""
    if values.shape[0] != draw.size:
        raise ShapeError(f"batch of {values.shape[0]} does not match a permutation of {draw.size}")
    index = torch.as_tensor(draw.permutation, device=values.device)
    return draw.lam * values + (1.0 - draw.lam) * values.index_select(0, index)


def mixup_batch(reps, targets, draw):
    """
    Interpolate each modality's representations and targets with one shared
    lambda and permutation.
    """
    reps = {ModalityKind.parse(k): v for k, v in reps.items()}
    targets = {ModalityKind.parse(k): v for k, v in targets.items()}
    if set(reps) != set(targets):
        raise ShapeError("representations and targets must cover the same modalities")
    mixed_reps, mixed_targets = {}, {}
    for kind in reps:
        if reps[kind].shape[0] != targets[kind].shape[0]:
            raise ShapeError(f"{kind.value}: representation and target batch sizes differ")
        mixed_reps[kind] = mix(reps[kind], draw)
        mixed_targets[kind] = mix(targets[kind], draw)
    return MixedBatch(representations=mixed_reps, targets=mixed_targets)
