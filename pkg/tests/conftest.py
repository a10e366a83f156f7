import logging

import pytest

from core.types import ModelConfig
from tests.helpers import TINY_SPECS, make_dataset


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    # handlers installed by cli.main point at the per-test capture stream
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)


@pytest.fixture
def tiny_specs():
    return dict(TINY_SPECS)


@pytest.fixture
def tiny_config():
    return ModelConfig(hidden_dims={"t": 4, "a": 4, "v": 4})


@pytest.fixture
def small_dataset():
    return make_dataset(n_train=8, n_valid=4, n_test=4, n_unlabeled=8)
