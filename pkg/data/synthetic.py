import logging

import numpy as np

from core.rng import seeded_rng
from core.types import (
    FEATURE_MODALITIES, LABEL_GRID, FeatureSequence, FeatureSpec, Instance, LabelSet, ModalityKind, Split,
)
from data.dataset import Dataset

log = logging.getLogger(__name__)

# desk-scale stand-ins for the (50, 768) / (925, 25) / (232, 177) release shapes
SYNTHETIC_SPECS = {
    ModalityKind.TEXT: FeatureSpec(ModalityKind.TEXT, 8, 32),
    ModalityKind.ACOUSTIC: FeatureSpec(ModalityKind.ACOUSTIC, 24, 8),
    ModalityKind.VISUAL: FeatureSpec(ModalityKind.VISUAL, 16, 12),
}

# train / valid / test proportions of the supervised release (2722 / 647 / 1034)
RELEASE_SPLIT = (2722, 647, 1034)

# visual carries the clearest sentiment signal, acoustic the weakest
SIGNAL_STRENGTH = {ModalityKind.TEXT: 1.0, ModalityKind.ACOUSTIC: 0.6, ModalityKind.VISUAL: 1.4}
LABEL_NOISE = {ModalityKind.TEXT: 0.25, ModalityKind.ACOUSTIC: 0.3, ModalityKind.VISUAL: 0.2}
FEATURE_NOISE = 0.5


def split_sizes(n_labeled, proportions=RELEASE_SPLIT):
    """Integer train/valid/test counts in the given proportions, summing to n_labeled."""
    total = float(sum(proportions))
    n_valid = int(round(n_labeled * proportions[1] / total))
    n_test = int(round(n_labeled * proportions[2] / total))
    if n_labeled >= 3:
        n_valid, n_test = max(n_valid, 1), max(n_test, 1)
    n_train = n_labeled - n_valid - n_test
    return n_train, n_valid, n_test


def _quantize(value):
    units = int(np.clip(np.round(value * 5.0), -5, 5))
    return LABEL_GRID[units + 5]


def _sequence(spec, sentiment, probe, strength, rng):
    seq_len, feat_dim = spec.shape
    if spec.modality is ModalityKind.TEXT:
        valid_len = int(rng.integers(1, seq_len + 1))
    else:
        valid_len = int(rng.integers(max(1, seq_len // 2), seq_len + 1))
    values = np.zeros(spec.shape, dtype=np.float32)
    noise = rng.normal(0.0, FEATURE_NOISE, size=(valid_len, feat_dim))
    values[:valid_len] = (strength * sentiment * probe[None, :] + noise).astype(np.float32)
    return FeatureSequence(spec=spec, values=values, valid_len=valid_len)


def generate_synthetic(n_labeled, n_unlabeled, specs=None, seed=0, proportions=RELEASE_SPLIT):
    """
    Synthetic dataset whose modalities all encode one latent grid sentiment s.

    Each modality adds s times a fixed random unit probe to every valid row,
    plus Gaussian noise. Multimodal labels equal s; unimodal labels are noisy
    quantizations of s. Deterministic in `seed`.
    """
    if n_labeled < 0 or n_unlabeled < 0:
        raise ValueError("instance counts must be >= 0")
    specs = {ModalityKind.parse(k): v for k, v in (specs or SYNTHETIC_SPECS).items()}
    rng = seeded_rng(seed)

    probes = {}
    for kind in FEATURE_MODALITIES:
        w = rng.normal(size=specs[kind].feat_dim)
        probes[kind] = w / np.linalg.norm(w) * np.sqrt(specs[kind].feat_dim) / 2.0

    n_train, n_valid, n_test = split_sizes(n_labeled, proportions)
    splits = [Split.TRAIN] * n_train + [Split.VALID] * n_valid + [Split.TEST] * n_test
    splits = [splits[i] for i in rng.permutation(n_labeled)] if n_labeled else []

    instances = []
    for i in range(n_labeled + n_unlabeled):
        sentiment = LABEL_GRID[int(rng.integers(0, len(LABEL_GRID)))]
        features = {
            kind: _sequence(specs[kind], sentiment, probes[kind], SIGNAL_STRENGTH[kind], rng)
            for kind in FEATURE_MODALITIES
        }
        unimodal = {
            kind.value: _quantize(sentiment + rng.normal(0.0, LABEL_NOISE[kind]))
            for kind in FEATURE_MODALITIES
        }
        if i < n_labeled:
            instances.append(Instance(
                id=f"s{i:06d}", split=splits[i], features=features,
                labels=LabelSet(multimodal=sentiment, **unimodal),
            ))
        else:
            instances.append(Instance(
                id=f"u{i - n_labeled:06d}", split=Split.UNLABELED, features=features,
            ))

    dataset = Dataset(instances=instances, specs=specs)
    log.info("Generated synthetic dataset: %s", dataset.stats.per_split)
    return dataset
