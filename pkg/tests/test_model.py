import numpy as np
import pytest
import torch

from core.errors import ShapeError, ValidationError
from core.types import FEATURE_MODALITIES, TASKS, FeatureSequence, ModalityKind, ModelConfig
from data.batching import collate
from model.backbone import (
    UnimodalRepresentation, build_model, classify, encode_sequence, encode_text, fuse,
)
from model.heads import AffineHead, SentimentHead
from model.layers import FFN, ffn_layer, get_activation
from tests.helpers import make_dataset


# --- FFN layer ---

def test_ffn_layer_matches_formula():
    weight = torch.tensor([[1.0, -1.0], [0.5, 2.0]])
    bias = torch.tensor([0.0, -3.0])
    out = ffn_layer(torch.tensor([2.0, 1.0]), weight, bias, "relu")
    assert out.tolist() == [1.0, 0.0]


def test_ffn_layer_rejects_width_mismatch():
    layer = FFN(3, 2)
    with pytest.raises(ShapeError):
        layer(torch.zeros(4, 5))


def test_unknown_activation():
    with pytest.raises(ValueError):
        get_activation("swish")


# --- encoders ---

def test_text_encoder_reads_first_row_only(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=0).eval()
    spec = tiny_specs[ModalityKind.TEXT]
    values = np.zeros(spec.shape, dtype=np.float32)
    values[0] = 1.0
    other = values.copy()
    other[1:] = 5.0
    a = encode_text(model, FeatureSequence(spec, values, 1))
    b = encode_text(model, FeatureSequence(spec, other, spec.seq_len))
    assert a.vector.shape == (4,)
    assert torch.equal(a.vector, b.vector)


def test_sequence_encoder_ignores_padding_rows(tiny_config, tiny_specs):
    """Padding is never read: a shorter spec holding the same valid rows gives the same vector."""
    model = build_model(tiny_config, tiny_specs, seed=0).eval()
    spec = tiny_specs[ModalityKind.ACOUSTIC]
    values = np.zeros(spec.shape, dtype=np.float32)
    values[:3] = np.random.default_rng(0).normal(size=(3, spec.feat_dim))
    rep = encode_sequence(model, FeatureSequence(spec, values, 3), "acoustic")

    x = torch.from_numpy(values).unsqueeze(0)
    x_long = torch.cat([x[:, :3], torch.zeros(1, spec.seq_len - 3, spec.feat_dim)], dim=1)
    again = model.encode("a", x_long, torch.tensor([3]))[0]
    assert torch.allclose(rep.vector, again, atol=1e-6)


def test_sequence_encoder_rejects_empty_sequences(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=0)
    spec = tiny_specs[ModalityKind.VISUAL]
    with pytest.raises(ValidationError):
        model.encode("v", torch.zeros(1, *spec.shape), torch.tensor([0]))
    with pytest.raises(ShapeError):
        model.encode("v", torch.zeros(1, spec.seq_len + 1, spec.feat_dim), torch.tensor([1]))


def test_encode_sequence_rejects_text(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=0)
    spec = tiny_specs[ModalityKind.TEXT]
    with pytest.raises(ShapeError):
        encode_sequence(model, FeatureSequence(spec, np.zeros(spec.shape), 1), "text")


# --- fusion ---

def test_fuse_concatenates_in_t_a_v_order(tiny_config):
    t, a, v = torch.full((4,), 1.0), torch.full((4,), 2.0), torch.full((4,), 3.0)
    fused = fuse(t, a, v, config=tiny_config)
    assert fused.tolist() == [1.0] * 4 + [2.0] * 4 + [3.0] * 4


def test_fuse_checks_lengths_and_positions(tiny_config):
    with pytest.raises(ShapeError):
        fuse(torch.zeros(4), torch.zeros(3), torch.zeros(4), config=tiny_config)
    rep = UnimodalRepresentation(ModalityKind.VISUAL, torch.zeros(4))
    with pytest.raises(ShapeError):
        fuse(rep, torch.zeros(4), torch.zeros(4))


# --- heads ---

def test_sentiment_head_shapes():
    head = SentimentHead(12, (6, 3))
    assert head(torch.randn(5, 12)).shape == (5,)
    with pytest.raises(ShapeError):
        head(torch.randn(5, 10))


def test_sentiment_head_single_row_in_training_mode():
    head = SentimentHead(4, (2, 1)).train()
    out = head(torch.randn(1, 4))
    assert out.shape == (1,) and torch.isfinite(out).all()


def test_affine_head_is_linear():
    head = AffineHead(4)
    x, y = torch.randn(4), torch.randn(4)
    lam = 0.3
    mixed = head((lam * x + (1 - lam) * y).unsqueeze(0))
    expected = lam * head(x.unsqueeze(0)) + (1 - lam) * head(y.unsqueeze(0))
    assert torch.allclose(mixed, expected, atol=1e-6)


def test_classify_single_vector(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=0).eval()
    rep = UnimodalRepresentation(ModalityKind.TEXT, torch.randn(4))
    assert classify(rep, "t", model).dim() == 0


# --- backbone ---

def test_forward_outputs_every_task(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=0)
    batch = collate(make_dataset(n_train=3).instances)
    out = model(batch)
    assert set(out.predictions) == set(TASKS)
    assert all(out.predictions[t].shape == (3,) for t in TASKS)
    assert out.fused.shape == (3, tiny_config.fused_dim)
    assert all(out.representations[k].shape == (3, 4) for k in FEATURE_MODALITIES)
    sets = out.prediction_sets(batch.ids)
    assert sets[0].id == batch.ids[0] and set(sets[0].values) == {"m", "t", "a", "v"}


def test_batched_forward_matches_single_instances(tiny_config, tiny_specs):
    model = build_model(tiny_config, tiny_specs, seed=1).eval()
    instances = make_dataset(n_train=5, seed=2).instances
    with torch.no_grad():
        together = model(collate(instances)).predictions
        for n, inst in enumerate(instances):
            alone = model(collate([inst])).predictions
            for task in TASKS:
                assert abs(alone[task][0].item() - together[task][n].item()) < 1e-5


def test_build_model_seed_is_reproducible(tiny_config, tiny_specs):
    a = build_model(tiny_config, tiny_specs, seed=3).state_dict()
    b = build_model(tiny_config, tiny_specs, seed=3).state_dict()
    assert all(torch.equal(a[k], b[k]) for k in a)


def test_affine_head_option(tiny_specs):
    model = build_model(ModelConfig(hidden_dims={"t": 4, "a": 4, "v": 4}, head="affine"), tiny_specs, seed=0)
    assert all(isinstance(model.heads[t.code], AffineHead) for t in TASKS)
