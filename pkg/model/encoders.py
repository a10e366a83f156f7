import torch
import torch.nn as nn
from torch.nn.utils.rnn import pack_padded_sequence

from core.errors import ShapeError, ValidationError
from model.layers import FFN


def _check_input(x, spec):
    if tuple(x.shape[1:]) != spec.shape:
        raise ShapeError(
            f"{spec.modality.value} encoder expects [batch, {spec.seq_len}, {spec.feat_dim}], "
            f"got {list(x.shape)}"
        )


class TextEncoder(nn.Module):
    """FFN over the first time step (the sentence-level [CLS] position)."""

    def __init__(self, spec, hidden_dim, activation="relu"):
        super().__init__()
        self.spec = spec
        self.ffn = FFN(spec.feat_dim, hidden_dim, activation)

    def forward(self, x, lengths=None):
        _check_input(x, self.spec)
        return self.ffn(x[:, 0, :])


class SequenceEncoder(nn.Module):
    """
    Stacked BiLSTM over the valid rows, final forward and backward states
    concatenated and projected by one FFN layer.
    """

    def __init__(self, spec, hidden_dim, lstm_hidden, lstm_layers=1, activation="relu"):
        super().__init__()
        self.spec = spec
        self.lstm = nn.LSTM(spec.feat_dim, lstm_hidden, num_layers=lstm_layers,
                            bidirectional=True, batch_first=True)
        self.ffn = FFN(2 * lstm_hidden, hidden_dim, activation)

    def forward(self, x, lengths):
        _check_input(x, self.spec)
        lengths = torch.as_tensor(lengths, dtype=torch.long).cpu()
        if lengths.shape != (x.shape[0],):
            raise ShapeError(f"{self.spec.modality.value}: need one valid_len per instance")
        if (lengths < 1).any():
            raise ValidationError(f"{self.spec.modality.value}: valid_len must be >= 1")
        if (lengths > self.spec.seq_len).any():
            raise ValidationError(f"{self.spec.modality.value}: valid_len exceeds seq_len")

        # padded rows never reach the LSTM
        packed = pack_padded_sequence(x, lengths, batch_first=True, enforce_sorted=False)
        _, (h_n, _) = self.lstm(packed)
        summary = torch.cat([h_n[-2], h_n[-1]], dim=-1)
        return self.ffn(summary)
