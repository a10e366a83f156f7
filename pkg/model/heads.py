import torch.nn as nn
import torch.nn.functional as F

from core.errors import ShapeError
from model.layers import FFN


class SentimentHead(nn.Module):
    """BN -> FFN -> FFN -> FFN(width 1, identity); dropout between the FFN layers."""

    def __init__(self, in_dim, widths, activation="relu", dropout=0.0):
        super().__init__()
        self.in_dim = in_dim
        self.bn = nn.BatchNorm1d(in_dim)
        self.ffn1 = FFN(in_dim, widths[0], activation)
        self.ffn2 = FFN(widths[0], widths[1], activation)
        self.out = FFN(widths[1], 1, "identity")
        self.dropout = nn.Dropout(dropout)

    def normalize(self, x):
        if self.training and x.shape[0] == 1:
            # batch statistics of a single row are undefined
            return F.batch_norm(x, self.bn.running_mean, self.bn.running_var, self.bn.weight,
                                self.bn.bias, training=False, eps=self.bn.eps)
        return self.bn(x)

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"head expects width {self.in_dim}, got {x.shape[-1]}")
        x = self.normalize(x)
        x = self.dropout(self.ffn1(x))
        x = self.dropout(self.ffn2(x))
        return self.out(x).squeeze(-1)


class AffineHead(nn.Module):
    """Single affine map, no normalization."""

    def __init__(self, in_dim):
        super().__init__()
        self.in_dim = in_dim
        self.out = FFN(in_dim, 1, "identity")

    def forward(self, x):
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"head expects width {self.in_dim}, got {x.shape[-1]}")
        return self.out(x).squeeze(-1)


def build_head(config, in_dim):
    if config.head == "affine":
        return AffineHead(in_dim)
    return SentimentHead(in_dim, config.classifier_widths(in_dim), config.activation, config.dropout)
