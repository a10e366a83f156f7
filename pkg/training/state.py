import copy
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import torch

from core.rng import RandomSource, seeded_rng
from model.backbone import AVMCModel, build_model
from training.config import TrainConfig


@dataclass
class TrainState:
    model: AVMCModel
    optimizer: torch.optim.Optimizer
    train_config: TrainConfig
    rng: RandomSource
    seed: int
    epoch: int = 0
    global_step: int = 0
    best_valid_mae: float = math.inf
    best_epoch: int = 0
    history: List[Dict[str, Any]] = field(default_factory=list)
    best_params: Optional[Dict[str, torch.Tensor]] = None
    # total loss of every optimizer step, in order
    loss_trace: List[float] = field(default_factory=list)

    def record_best(self, epoch, valid_mae):
        """Remember the current parameters if valid_mae improves on the best so far."""
        if valid_mae < self.best_valid_mae:
            self.best_valid_mae = float(valid_mae)
            self.best_epoch = epoch
            self.best_params = copy.deepcopy(self.model.state_dict())
            return True
        return False

    def restore_best(self):
        if self.best_params is not None:
            self.model.load_state_dict(self.best_params)


def build_optimizer(model, opt_config):
    params = model.parameters()
    if opt_config.name == "sgd":
        return torch.optim.SGD(params, lr=opt_config.learning_rate, weight_decay=opt_config.weight_decay)
    if opt_config.name == "adamw":
        return torch.optim.AdamW(params, lr=opt_config.learning_rate, betas=opt_config.betas,
                                 weight_decay=opt_config.weight_decay)
    return torch.optim.Adam(params, lr=opt_config.learning_rate, betas=opt_config.betas,
                            weight_decay=opt_config.weight_decay)


def init_state(model_config, specs, train_config, seed):
    """Fresh model + optimizer; parameter init and the data/mixup stream both derive from seed."""
    model = build_model(model_config, specs, seed=seed)
    optimizer = build_optimizer(model, train_config.optimizer)
    return TrainState(model=model, optimizer=optimizer, train_config=train_config,
                      rng=seeded_rng(seed), seed=int(seed))
