"""Tests for parameter validation."""
import math

import pytest

from symnorm.exceptions import StreamError, ValidationError
from symnorm.validator import ParameterValidator


class TestDimensionValidation:
    """Test dimension and index checks."""

    def test_valid_dimension(self):
        """Test positive integers pass."""
        assert ParameterValidator.validate_dimension(1) is True
        assert ParameterValidator.validate_dimension(1 << 20) is True

    @pytest.mark.parametrize("n", [0, -3, 2.5, True, "8"])
    def test_invalid_dimension(self, n):
        """Test non-positive and non-integer dimensions fail."""
        with pytest.raises(ValidationError, match="Dimension"):
            ParameterValidator.validate_dimension(n)

    def test_index_range(self):
        """Test indices must lie in [0, n)."""
        assert ParameterValidator.validate_index(0, 4) is True
        assert ParameterValidator.validate_index(3, 4) is True
        with pytest.raises(StreamError, match="out of range"):
            ParameterValidator.validate_index(4, 4)
        with pytest.raises(StreamError):
            ParameterValidator.validate_index(-1, 4)


class TestNormParameters:
    """Test norm parameter checks."""

    def test_base(self):
        """Test level bases must exceed one."""
        assert ParameterValidator.validate_base(1.01) is True
        for alpha in (1.0, 0.5, math.inf, math.nan):
            with pytest.raises(ValidationError, match="Level base"):
                ParameterValidator.validate_base(alpha)

    def test_p(self):
        """Test p >= 1 and infinity."""
        assert ParameterValidator.validate_p(1.0) is True
        assert ParameterValidator.validate_p(math.inf) is True
        with pytest.raises(ValidationError):
            ParameterValidator.validate_p(0.99)
        with pytest.raises(ValidationError):
            ParameterValidator.validate_p(math.nan)

    def test_k(self):
        """Test k lies in [1, n]."""
        assert ParameterValidator.validate_k(5, 5) is True
        with pytest.raises(ValidationError, match=r"\[1, 5\]"):
            ParameterValidator.validate_k(6, 5)
        with pytest.raises(ValidationError):
            ParameterValidator.validate_k(0, 5)

    def test_box_theta(self):
        """Test the box ordering and the budget floor."""
        assert ParameterValidator.validate_box_theta(0.1, 0.5, 1.0, 10) is True
        with pytest.raises(ValidationError, match="0 < a < b <= c"):
            ParameterValidator.validate_box_theta(0.1, 2.0, 1.0, 4)
        with pytest.raises(ValidationError, match="floor"):
            ParameterValidator.validate_box_theta(0.1, 0.5, 1.0, 11)


class TestSketchParameters:
    """Test cover and level-base checks."""

    def test_cover_parameters(self):
        """Test delta < eps is required."""
        assert ParameterValidator.validate_cover_parameters(eps=0.2, delta=0.01) is True
        with pytest.raises(ValidationError, match="delta < eps"):
            ParameterValidator.validate_cover_parameters(eps=0.1, delta=0.1)
        with pytest.raises(ValidationError):
            ParameterValidator.validate_cover_parameters(eps=0.2, delta=0.0)
        with pytest.raises(ValidationError):
            ParameterValidator.validate_cover_parameters(eps=-1.0, delta=0.01)

    def test_randomized_base(self):
        """Test gamma in (0, 1) and x in [1/2, 1]."""
        assert ParameterValidator.validate_randomized_base(0.5, 0.5) is True
        assert ParameterValidator.validate_randomized_base(0.5, None) is True
        with pytest.raises(ValidationError, match="gamma"):
            ParameterValidator.validate_randomized_base(1.0, 0.75)
        with pytest.raises(ValidationError, match="x must"):
            ParameterValidator.validate_randomized_base(0.5, 0.4)

    def test_unit_interval_and_positive(self):
        """Test open-interval and positivity checks name the parameter."""
        with pytest.raises(ValidationError, match="beta"):
            ParameterValidator.validate_unit_interval("beta", 1.0)
        with pytest.raises(ValidationError, match="lam"):
            ParameterValidator.validate_positive("lam", 0.0)
        with pytest.raises(ValidationError):
            ParameterValidator.validate_positive("lam", math.inf)


class TestEstimatorParameters:
    """Test tradeoff and sampling checks."""

    def test_tradeoff_factor(self):
        """Test 1.1 <= D <= mmc."""
        assert ParameterValidator.validate_tradeoff_factor(2.0, 4.0) is True
        with pytest.raises(ValidationError, match=">= 1.1"):
            ParameterValidator.validate_tradeoff_factor(1.05, 4.0)
        with pytest.raises(ValidationError, match="exceeds"):
            ParameterValidator.validate_tradeoff_factor(5.0, 4.0)

    def test_samples(self):
        """Test the Monte-Carlo sample floor."""
        assert ParameterValidator.validate_samples(100) is True
        with pytest.raises(ValidationError, match="At least 100"):
            ParameterValidator.validate_samples(99)
        assert ParameterValidator.validate_samples(10, minimum=10) is True
