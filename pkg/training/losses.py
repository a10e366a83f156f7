import torch

from core.types import MIXUP_MODALITIES, TASKS, ModalityKind


def regression_loss(predictions, labels, mask, task=None):
    """
    Mean absolute error over masked-in instances. An empty mask gives a zero
    that stays attached to the graph.
    """
    predictions = torch.as_tensor(predictions)
    labels = torch.as_tensor(labels, dtype=predictions.dtype)
    mask = torch.as_tensor(mask, dtype=predictions.dtype)
    n = mask.sum()
    if n.item() == 0:
        return (predictions * 0.0).sum()
    return (torch.abs(predictions - labels) * mask).sum() / n


def total_regression_loss(losses, alpha):
    """sum_k alpha_k * L_r^(k) over m, t, a, v."""
    weights = alpha.alpha if hasattr(alpha, "alpha") else alpha
    losses = {ModalityKind.parse(k): v for k, v in losses.items()}
    return sum(weights[task.code] * losses[task] for task in TASKS)


def consistency_loss(mixed_predictions, mixed_targets, task=None, stop_gradient=True):
    """Mean |y'' - y'|; the mixed target y' is a constant when stop_gradient is set."""
    mixed_predictions = torch.as_tensor(mixed_predictions)
    mixed_targets = torch.as_tensor(mixed_targets, dtype=mixed_predictions.dtype)
    if stop_gradient:
        mixed_targets = mixed_targets.detach()
    if mixed_predictions.numel() == 0:
        return (mixed_predictions * 0.0).sum()
    return torch.abs(mixed_predictions - mixed_targets).mean()


def total_consistency_loss(losses, beta):
    """sum_k beta_k * L_mix^(k) over a, v."""
    weights = beta.beta if hasattr(beta, "beta") else beta
    losses = {ModalityKind.parse(k): v for k, v in losses.items()}
    return sum(weights[kind.code] * losses[kind] for kind in MIXUP_MODALITIES)
