"""Pytest configuration and fixtures."""
import json

import pytest

from symnorm.config import SEED_ENV, LabScale
from symnorm.stream import StreamSpec, generate_stream


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    """Keep a SYMNORM_SEED from the caller's shell out of the tests."""
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def small_lab():
    """Lab scaling small enough for unit tests."""
    return LabScale.default().with_overrides(max_repetitions=128, max_width=64, max_depth=3)


@pytest.fixture
def tiny_lab():
    """Lab scaling for tests that only exercise plumbing."""
    return LabScale.default().with_overrides(max_repetitions=16, max_width=32, max_depth=3)


@pytest.fixture
def tiny_lab_json(tiny_lab):
    """The tiny lab scaling as a JSON string, the way the CLI takes it."""
    return json.dumps(tiny_lab.to_dict())


@pytest.fixture
def spike_stream():
    """A single coordinate of magnitude 100 in dimension 1024, built from split updates."""
    spec = StreamSpec("single-spike", {"n": 1024, "magnitude": 100, "index": 17, "splits": 3}, seed=11)
    return generate_stream(spec)


@pytest.fixture
def planted_spec():
    """Planted level counts at base 2 in dimension 512."""
    return StreamSpec("planted-levels", {"n": 512, "alpha": 2.0, "counts": [10, 0, 5, 3]}, seed=5)
