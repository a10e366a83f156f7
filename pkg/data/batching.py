from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import torch

from core.errors import ValidationError
from core.types import FEATURE_MODALITIES, TASKS, ModalityKind


@dataclass
class Batch:
    """
    Stacked mini-batch.
      features[k]  [B, seq_len, feat_dim] float32
      lengths[k]   [B] int64 valid_len per instance
      labels[task] [B] float32, zero where unsupervised
      mask         [B] 1.0 = labeled instance
      unimodal_mask [B] 1.0 = unimodal labels present
    """
    ids: List[str]
    features: Dict[ModalityKind, torch.Tensor]
    lengths: Dict[ModalityKind, torch.Tensor]
    labels: Dict[ModalityKind, torch.Tensor]
    mask: torch.Tensor
    unimodal_mask: torch.Tensor

    def __len__(self):
        return len(self.ids)

    @property
    def n_supervised(self):
        return int(self.mask.sum().item())

    def task_mask(self, task):
        task = ModalityKind.parse(task)
        if task is ModalityKind.MULTIMODAL:
            return self.mask
        return self.unimodal_mask

    def to(self, dtype=None, device=None):
        """Copy with feature/label tensors cast (e.g. to float64 for gradient checks)."""
        def cast(t):
            return t.to(device=device, dtype=dtype) if t.is_floating_point() else t.to(device=device)
        return Batch(
            ids=list(self.ids),
            features={k: cast(v) for k, v in self.features.items()},
            lengths={k: v.to(device=device) for k, v in self.lengths.items()},
            labels={k: cast(v) for k, v in self.labels.items()},
            mask=cast(self.mask),
            unimodal_mask=cast(self.unimodal_mask),
        )


def collate(instances):
    if not instances:
        raise ValidationError("cannot collate an empty batch")
    features, lengths = {}, {}
    for kind in FEATURE_MODALITIES:
        features[kind] = torch.from_numpy(np.stack([inst.features[kind].values for inst in instances]))
        lengths[kind] = torch.tensor([inst.features[kind].valid_len for inst in instances], dtype=torch.long)

    labels = {}
    for task in TASKS:
        column = []
        for inst in instances:
            value = inst.labels.get(task) if inst.labels is not None else None
            column.append(0.0 if value is None else value)
        labels[task] = torch.tensor(column, dtype=torch.float32)

    mask = torch.tensor([1.0 if inst.labels is not None else 0.0 for inst in instances])
    unimodal_mask = torch.tensor(
        [1.0 if inst.labels is not None and inst.labels.has_unimodal else 0.0 for inst in instances]
    )
    return Batch(ids=[inst.id for inst in instances], features=features, lengths=lengths,
                 labels=labels, mask=mask, unimodal_mask=unimodal_mask)


def batch_iterator(dataset, splits, batch_size, shuffle=False, rng=None):
    """
    Yield Batches covering every selected instance exactly once.
    Without shuffle the manifest order is kept; the last batch may be short.
    """
    if int(batch_size) < 1:
        raise ValidationError("batch_size must be >= 1")
    selected = dataset.select(splits)
    if not selected:
        return
    order = np.arange(len(selected))
    if shuffle:
        if rng is None:
            raise ValidationError("shuffle requires a RandomSource")
        order = rng.permutation(len(selected))
    for start in range(0, len(selected), batch_size):
        yield collate([selected[i] for i in order[start:start + batch_size]])


def num_batches(n, batch_size):
    return -(-int(n) // int(batch_size))
