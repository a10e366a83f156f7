"""Analytic gradients of the full objective against central finite differences."""
import numpy as np
import torch

from core.types import LossWeights, MixupConfig, ModelConfig
from data.batching import collate
from model.backbone import build_model
from model.mixup import MixupDraw
from training.loop import compute_objective
from tests.helpers import make_dataset

EPS = 1e-4


def test_objective_gradients_match_finite_differences():
    config = ModelConfig(hidden_dims={"t": 4, "a": 4, "v": 4}, activation="tanh")
    dataset = make_dataset(n_train=2, n_unlabeled=1, seed=5)
    model = build_model(config, dataset.specs, seed=0).double()
    batch = collate(dataset.instances).to(dtype=torch.float64)
    draw = MixupDraw(lam=0.3, permutation=[1, 2, 0])
    weights = LossWeights(alpha={"m": 1.0, "t": 0.5, "a": 0.5, "v": 0.5})
    # the target is differentiated too, so finite differences see the same function
    mixup = MixupConfig(target_stop_gradient=False)

    def objective():
        return compute_objective(model, batch, weights, draw, mixup).total

    model.zero_grad()
    objective().backward()
    params = [p for p in model.parameters()]
    analytic = np.concatenate([p.grad.detach().numpy().ravel() for p in params])

    numeric = []
    with torch.no_grad():
        for p in params:
            flat = p.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + EPS
                up = objective().item()
                flat[i] = orig - EPS
                down = objective().item()
                flat[i] = orig
                numeric.append((up - down) / (2 * EPS))
    numeric = np.asarray(numeric)

    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    # floor keeps near-zero gradients from dominating the relative error
    rel = np.abs(analytic - numeric) / np.maximum(scale, 1e-3)
    assert rel.max() < 1e-3
