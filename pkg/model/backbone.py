from dataclasses import dataclass
from typing import Dict

import torch
import torch.nn as nn

from core.errors import ShapeError
from core.types import FEATURE_MODALITIES, TASKS, ModalityKind, ModelConfig
from model.encoders import SequenceEncoder, TextEncoder
from model.heads import build_head


@dataclass(frozen=True)
class UnimodalRepresentation:
    modality: ModalityKind
    vector: torch.Tensor


@dataclass(frozen=True)
class FusedRepresentation:
    vector: torch.Tensor


@dataclass(frozen=True)
class PredictionSet:
    id: str
    values: Dict[str, float]

    def __getitem__(self, task):
        return self.values[ModalityKind.parse(task).code]


@dataclass
class ModelOutput:
    """Per-task predictions [B] plus the unimodal representations [B, h_k]."""
    predictions: Dict[ModalityKind, torch.Tensor]
    representations: Dict[ModalityKind, torch.Tensor]
    fused: torch.Tensor

    def prediction_sets(self, ids):
        cols = {task.code: self.predictions[task].detach().cpu().tolist() for task in TASKS}
        return [PredictionSet(id=i, values={code: cols[code][n] for code in cols})
                for n, i in enumerate(ids)]


def fuse(F_t, F_a, F_v, config=None):
    """Concatenate [F_t ; F_a ; F_v] along the last axis, in that order."""
    parts = []
    for kind, rep in zip(FEATURE_MODALITIES, (F_t, F_a, F_v)):
        if isinstance(rep, UnimodalRepresentation):
            if rep.modality is not kind:
                raise ShapeError(f"fuse expects {kind.value} in this position, got {rep.modality.value}")
            rep = rep.vector
        rep = torch.as_tensor(rep)
        if config is not None and rep.shape[-1] != config.hidden_dim(kind):
            raise ShapeError(f"{kind.value} representation has length {rep.shape[-1]}, "
                             f"expected {config.hidden_dim(kind)}")
        parts.append(rep)
    if len({p.shape[:-1] for p in parts}) != 1:
        raise ShapeError("representations disagree on batch shape")
    return torch.cat(parts, dim=-1)


class AVMCModel(nn.Module):
    """
    Multitask late-fusion backbone: text FFN encoder, acoustic/visual BiLSTM
    encoders, concatenation fusion and four independent sentiment heads.
    """

    def __init__(self, config: ModelConfig, specs):
        super().__init__()
        self.config = config
        self.specs = {ModalityKind.parse(k): v for k, v in specs.items()}
        t, a, v = FEATURE_MODALITIES

        self.encoders = nn.ModuleDict({
            t.code: TextEncoder(self.specs[t], config.hidden_dim(t), config.activation),
            a.code: SequenceEncoder(self.specs[a], config.hidden_dim(a), config.lstm_hidden_for(a),
                                    config.lstm_layers, config.activation),
            v.code: SequenceEncoder(self.specs[v], config.hidden_dim(v), config.lstm_hidden_for(v),
                                    config.lstm_layers, config.activation),
        })
        self.heads = nn.ModuleDict({
            task.code: build_head(config, config.hidden_dim(task)) for task in TASKS
        })

    def encode(self, kind, x, lengths=None):
        kind = ModalityKind.parse(kind)
        return self.encoders[kind.code](x, lengths)

    def classify(self, rep, task):
        return self.heads[ModalityKind.parse(task).code](rep)

    def forward(self, batch):
        reps = {kind: self.encode(kind, batch.features[kind], batch.lengths[kind])
                for kind in FEATURE_MODALITIES}
        fused = fuse(*(reps[k] for k in FEATURE_MODALITIES), config=self.config)
        predictions = {ModalityKind.MULTIMODAL: self.classify(fused, ModalityKind.MULTIMODAL)}
        for kind in FEATURE_MODALITIES:
            predictions[kind] = self.classify(reps[kind], kind)
        return ModelOutput(predictions=predictions, representations=reps, fused=fused)


def _single(seq):
    x = torch.from_numpy(seq.values.copy()).unsqueeze(0)
    lengths = torch.tensor([seq.valid_len], dtype=torch.long)
    return x, lengths


def encode_text(model, seq):
    x, lengths = _single(seq)
    vec = model.encode(ModalityKind.TEXT, x, lengths)[0]
    return UnimodalRepresentation(ModalityKind.TEXT, vec)


def encode_sequence(model, seq, modality):
    modality = ModalityKind.parse(modality)
    if modality not in (ModalityKind.ACOUSTIC, ModalityKind.VISUAL):
        raise ShapeError("encode_sequence handles acoustic or visual sequences only")
    x, lengths = _single(seq)
    vec = model.encode(modality, x, lengths)[0]
    return UnimodalRepresentation(modality, vec)


def classify(rep, task, model):
    """Scalar prediction of one head for one representation vector (or a [B, h] batch)."""
    vector = rep.vector if isinstance(rep, (UnimodalRepresentation, FusedRepresentation)) else rep
    vector = torch.as_tensor(vector)
    single = vector.dim() == 1
    out = model.classify(vector.unsqueeze(0) if single else vector, task)
    return out[0] if single else out


def build_model(config, specs, seed=None):
    if seed is not None:
        torch.manual_seed(seed)
    return AVMCModel(config, specs)
