import dataclasses
import logging

import pandas as pd

from core.types import Split
from evaluation.evaluate import evaluate
from training.loop import fit

log = logging.getLogger(__name__)

# name -> (mode, ablations)
VARIANTS = {
    "av-mc": ("supervised", ()),
    "av-mc-semi": ("semi", ()),
    "w/o mixup-a": ("supervised", ("mixup-a",)),
    "w/o mixup-v": ("supervised", ("mixup-v",)),
    "w/o mixup-av": ("supervised", ("mixup-av",)),
    "w/o mixup-av & unimodal": ("supervised", ("mixup-av", "unimodal")),
}

METRIC_COLUMNS = ["acc2", "f1", "acc2_weak", "mae", "corr", "r_square"]


def variant_config(base, mode, ablations):
    config = base.with_ablations(ablations)
    return dataclasses.replace(config, mode=mode)


def run_experiments(dataset, base_config, model_config, variants=None, seeds=(0, 1, 2, 3, 4)):
    """
    Fit every variant once per seed and evaluate the multimodal head on the
    test split. Returns one row per (variant, seed).
    """
    variants = variants or VARIANTS
    rows = []
    for name, (mode, ablations) in variants.items():
        config = variant_config(base_config, mode, ablations)
        for seed in seeds:
            result = fit(dataset, config, model_config, seed=seed)
            report = evaluate(result.state.model, dataset, Split.TEST, tasks=("m",))[0]
            row = {"variant": name, "seed": seed, "epochs": result.state.epoch}
            row.update({k: getattr(report, k) for k in METRIC_COLUMNS})
            rows.append(row)
            log.info("%s seed %d: test MAE %.4f Acc2_weak %s", name, seed, report.mae, report.acc2_weak)
    return pd.DataFrame(rows, columns=["variant", "seed", "epochs"] + METRIC_COLUMNS)


def summarize(results):
    """Per-variant medians over seeds, in the order variants were run."""
    order = list(dict.fromkeys(results["variant"]))
    summary = results.groupby("variant")[METRIC_COLUMNS].median()
    return summary.loc[order]
