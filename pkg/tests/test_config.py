"""Tests for sizing constants, lab scaling and seeds."""
import json

import pytest

from symnorm.config import DEFAULT_SEED, SEED_ENV, LabScale, SketchConstants, load_json, root_seed
from symnorm.exceptions import ConfigError


class TestLabScale:
    """Test desk-scale shrinkage."""

    def test_caps(self):
        """Test default caps apply."""
        lab = LabScale.default()
        assert lab.repetitions(10**9) == 256
        assert lab.width(10**6) == 256
        assert lab.depth(40.2) == 5
        assert lab.block(7.5) == 2

    def test_floor_of_one(self):
        """Test positive sizes never shrink below one."""
        lab = LabScale.default().with_overrides(repetition_factor=0.001)
        assert lab.repetitions(10) == 1

    def test_zero_stays_zero(self):
        """Test a printed size of zero stays zero."""
        assert LabScale.default().repetitions(0) == 0
        assert LabScale.off().repetitions(0) == 0

    def test_off(self):
        """Test disabled scaling returns the ceiled printed size."""
        lab = LabScale.off()
        assert lab.repetitions(10**9) == 10**9
        assert lab.width(12.2) == 13
        assert lab.heaviness(0.001) == 0.001

    def test_heaviness_floor(self):
        """Test per-table heaviness is floored and capped."""
        lab = LabScale.default()
        assert lab.heaviness(0.001) == 0.02
        assert lab.heaviness(3.0) == 1.0

    def test_round_trip(self):
        """Test dict round trip."""
        lab = LabScale.default().with_overrides(max_width=64)
        assert LabScale.from_dict(lab.to_dict()) == lab
        assert LabScale.from_dict(None) == LabScale.default()

    def test_unknown_field(self):
        """Test unknown fields are config errors."""
        with pytest.raises(ConfigError, match="Unknown LabScale fields"):
            LabScale.from_dict({"max_widht": 64})


class TestSketchConstants:
    """Test sizing constants."""

    def test_magnitude_bound(self):
        """Test m = n ** 3 by default."""
        assert SketchConstants().magnitude_bound(10) == 1000
        assert SketchConstants(magnitude_exponent=2).magnitude_bound(10) == 100

    def test_from_dict(self):
        """Test partial records keep defaults."""
        constants = SketchConstants.from_dict({"c_R": 0})
        assert constants.c_R == 0
        assert constants.c_w == 8.0
        with pytest.raises(ConfigError):
            SketchConstants.from_dict({"c_x": 1})


class TestLoadJson:
    """Test JSON config sources."""

    def test_sources(self, tmp_path):
        """Test dicts, JSON strings and files."""
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"a": 1}))
        assert load_json({"a": 1}) == {"a": 1}
        assert load_json('{"a": 1}') == {"a": 1}
        assert load_json(str(path)) == {"a": 1}
        assert load_json(path) == {"a": 1}
        assert load_json(None) == {}

    def test_errors(self, tmp_path):
        """Test malformed and missing sources raise config errors."""
        with pytest.raises(ConfigError):
            load_json("{not json")
        with pytest.raises(ConfigError):
            load_json(str(tmp_path / "missing.json"))


class TestRootSeed:
    """Test root seed resolution."""

    def test_default_and_explicit(self):
        """Test the default and an explicit seed."""
        assert root_seed() == DEFAULT_SEED
        assert root_seed(42) == 42

    def test_env_override(self, monkeypatch):
        """Test the environment overrides an explicit seed."""
        monkeypatch.setenv(SEED_ENV, "0x10")
        assert root_seed(42) == 16

    def test_invalid_env(self, monkeypatch):
        """Test a non-integer environment seed is rejected."""
        monkeypatch.setenv(SEED_ENV, "seven")
        with pytest.raises(ConfigError, match=SEED_ENV):
            root_seed()
