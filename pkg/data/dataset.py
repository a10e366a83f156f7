from dataclasses import dataclass, field
from typing import Dict, List

import pandas as pd

from core.errors import ValidationError
from core.types import FEATURE_MODALITIES, TASKS, FeatureSpec, Instance, ModalityKind, Split

# sentiment classes of the 11-value grid, keyed by grid units (label * 5)
SENTIMENT_CLASSES = (
    ("NEG", (-5, -4)),
    ("WNEG", (-3, -2, -1)),
    ("NEU", (0,)),
    ("WPOS", (1, 2, 3)),
    ("POS", (4, 5)),
)


@dataclass(frozen=True)
class DatasetStats:
    n_supervised: int
    n_unsupervised: int
    per_split: Dict[str, int]

    @classmethod
    def from_instances(cls, instances):
        per_split = {s.value: 0 for s in Split}
        for inst in instances:
            per_split[inst.split.value] += 1
        n_sup = per_split["train"] + per_split["valid"] + per_split["test"]
        return cls(n_supervised=n_sup, n_unsupervised=per_split["unlabeled"], per_split=per_split)


@dataclass
class Dataset:
    instances: List[Instance]
    specs: Dict[ModalityKind, FeatureSpec]
    stats: DatasetStats = field(init=False)

    def __post_init__(self):
        self.specs = {ModalityKind.parse(k): v for k, v in self.specs.items()}
        if set(self.specs) != set(FEATURE_MODALITIES):
            raise ValidationError("dataset specs must cover text, acoustic and visual")
        seen = set()
        for inst in self.instances:
            if inst.id in seen:
                raise ValidationError(f"duplicate instance id: {inst.id}")
            seen.add(inst.id)
            for kind, seq in inst.features.items():
                if seq.spec != self.specs[kind]:
                    raise ValidationError(
                        f"{inst.id}: {kind.value} spec {seq.spec.shape} does not match dataset spec "
                        f"{self.specs[kind].shape}"
                    )
        self.stats = DatasetStats.from_instances(self.instances)

    def __len__(self):
        return len(self.instances)

    def select(self, splits):
        """Instances of the given split(s), in manifest order."""
        if isinstance(splits, (str, Split)):
            splits = [splits]
        wanted = {Split.parse(s) for s in splits}
        return [inst for inst in self.instances if inst.split in wanted]

    def supervised(self):
        return [inst for inst in self.instances if inst.is_supervised]

    @property
    def has_unimodal_labels(self):
        labeled = self.supervised()
        return bool(labeled) and all(inst.labels.has_unimodal for inst in labeled)

    def labels_frame(self):
        """One row per labeled instance: id, split and one column per task code."""
        rows = []
        for inst in self.supervised():
            row = {"id": inst.id, "split": inst.split.value}
            for task in TASKS:
                row[task.code] = inst.labels.get(task)
            rows.append(row)
        return pd.DataFrame(rows, columns=["id", "split"] + [t.code for t in TASKS])


def sentiment_class(label):
    units = round(float(label) * 5)
    for name, members in SENTIMENT_CLASSES:
        if units in members:
            return name
    raise ValidationError(f"label {label!r} outside the annotation grid")


def dataset_statistics(dataset, task="m"):
    """
    Per-split counts of the five sentiment classes for one task's labels.
    Returns a DataFrame indexed by split with NEG..POS and Total columns.
    """
    task = ModalityKind.parse(task)
    class_names = [name for name, _ in SENTIMENT_CLASSES]
    table = {}
    for split in (Split.TRAIN, Split.VALID, Split.TEST):
        counts = dict.fromkeys(class_names, 0)
        for inst in dataset.select(split):
            value = inst.labels.get(task)
            if value is None:
                raise ValidationError(f"{inst.id}: no {task.value} label")
            counts[sentiment_class(value)] += 1
        counts["Total"] = sum(counts.values())
        table[split.value] = counts

    df = pd.DataFrame.from_dict(table, orient="index", columns=class_names + ["Total"])
    df.loc["all"] = df.sum(axis=0)
    df.index.name = "split"
    return df
