import numpy as np

from core.rng import seeded_rng
from core.types import (
    FEATURE_MODALITIES, LABEL_GRID, FeatureSequence, FeatureSpec, Instance, LabelSet, ModalityKind, Split,
)
from data.dataset import Dataset

TINY_SPECS = {
    ModalityKind.TEXT: FeatureSpec(ModalityKind.TEXT, 3, 5),
    ModalityKind.ACOUSTIC: FeatureSpec(ModalityKind.ACOUSTIC, 6, 4),
    ModalityKind.VISUAL: FeatureSpec(ModalityKind.VISUAL, 5, 3),
}


def random_sequence(spec, rng, valid_len=None):
    if valid_len is None:
        valid_len = int(rng.integers(1, spec.seq_len + 1))
    values = np.zeros(spec.shape, dtype=np.float32)
    values[:valid_len] = rng.normal(size=(valid_len, spec.feat_dim))
    return FeatureSequence(spec=spec, values=values, valid_len=valid_len)


def random_labels(rng, unimodal=True):
    def pick():
        return LABEL_GRID[int(rng.integers(0, len(LABEL_GRID)))]

    if not unimodal:
        return LabelSet(multimodal=pick())
    return LabelSet(multimodal=pick(), text=pick(), acoustic=pick(), visual=pick())


def make_dataset(n_train=8, n_valid=0, n_test=0, n_unlabeled=0, seed=0, unimodal=True, specs=None):
    """Random-feature dataset with ids x000, x001, ... in train/valid/test/unlabeled order."""
    specs = specs or TINY_SPECS
    rng = seeded_rng(seed)
    plan = ([Split.TRAIN] * n_train + [Split.VALID] * n_valid + [Split.TEST] * n_test
            + [Split.UNLABELED] * n_unlabeled)
    instances = []
    for i, split in enumerate(plan):
        features = {kind: random_sequence(specs[kind], rng) for kind in FEATURE_MODALITIES}
        labels = random_labels(rng, unimodal) if split.is_labeled else None
        instances.append(Instance(id=f"x{i:03d}", split=split, features=features, labels=labels))
    return Dataset(instances=instances, specs=specs)
