import numpy as np

from core.errors import ShapeError, ValidationError
from core.types import FeatureSequence


def pad_or_truncate(raw, spec):
    """
    Fit a raw [n x d] feature matrix to spec.seq_len rows.
      n < seq_len: zero rows appended, valid_len = n
      n > seq_len: prefix of seq_len rows kept, valid_len = seq_len
    """
    raw = np.asarray(raw, dtype=np.float32)
    if raw.ndim != 2:
        raise ShapeError(f"{spec.modality.value}: expected a 2-d matrix, got {raw.ndim}-d")
    n, d = raw.shape
    if d != spec.feat_dim:
        raise ValidationError(
            f"{spec.modality.value}: feature dim {d} does not match spec feat_dim {spec.feat_dim}"
        )
    if n < 1:
        raise ValidationError(f"{spec.modality.value}: empty sequence")

    out = np.zeros(spec.shape, dtype=np.float32)
    valid_len = min(n, spec.seq_len)
    out[:valid_len] = raw[:valid_len]
    return FeatureSequence(spec=spec, values=out, valid_len=valid_len)
