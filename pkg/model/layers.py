import torch
import torch.nn as nn
import torch.nn.functional as F

from core.errors import ShapeError

_ACTIVATIONS = {
    "relu": F.relu,
    "tanh": torch.tanh,
    "gelu": F.gelu,
    "sigmoid": torch.sigmoid,
    "identity": lambda x: x,
}


def get_activation(name):
    try:
        return _ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"Unknown activation: {name}") from None


def ffn_layer(x, weight, bias, activation="relu"):
    """sigma(W x + b) for a vector or a [batch, in] matrix."""
    x = torch.as_tensor(x, dtype=weight.dtype)
    if x.shape[-1] != weight.shape[1]:
        raise ShapeError(f"FFN expects input width {weight.shape[1]}, got {x.shape[-1]}")
    return get_activation(activation)(F.linear(x, weight, bias))


class FFN(nn.Module):
    """One feed-forward layer: sigma(W x + b)."""

    def __init__(self, in_dim, out_dim, activation="relu"):
        super().__init__()
        self.linear = nn.Linear(in_dim, out_dim)
        self.activation = activation

    def forward(self, x):
        return ffn_layer(x, self.linear.weight, self.linear.bias, self.activation)
