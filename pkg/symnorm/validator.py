"""symnorm parameter validation."""
import math
from typing import Optional

from symnorm.exceptions import ValidationError, StreamError


class ParameterValidator:
    """
    Validate sketch, norm and estimator parameters before any work is done.

    Every check returns True on success and raises ValidationError (or a
    subclass) with a message naming the offending value otherwise.

    Example:
        >>> ParameterValidator.validate_base(1.5)
        True
        >>> ParameterValidator.validate_cover_parameters(eps=0.2, delta=0.01)
        True
    """

    @staticmethod
    def validate_dimension(n: int) -> bool:
        """
        Validate the stream dimension.

        Args:
            n: Number of coordinates

        Returns:
            True if valid

        Raises:
            ValidationError: If n is not a positive integer
        """
        if not isinstance(n, (int,)) or isinstance(n, bool) or n < 1:
            raise ValidationError(f"Dimension must be a positive integer, got {n!r}")
        return True

    @staticmethod
    def validate_index(index: int, n: int) -> bool:
        """
        Validate a coordinate index against the dimension.

        Raises:
            StreamError: If index is outside [0, n)
        """
        if index < 0 or index >= n:
            raise StreamError(f"Index {index} out of range for dimension {n}")
        return True

    @staticmethod
    def validate_base(alpha: float) -> bool:
        """Validate a level base alpha > 1."""
        if not math.isfinite(alpha) or alpha <= 1.0:
            raise ValidationError(f"Level base must be > 1, got {alpha}")
        return True

    @staticmethod
    def validate_p(p: float) -> bool:
        """Validate an l_p exponent (p >= 1 or infinity)."""
        if math.isnan(p) or p < 1.0:
            raise ValidationError(f"l_p norm needs p >= 1, got {p}")
        return True

    @staticmethod
    def validate_k(k: int, n: int) -> bool:
        """Validate a top-k / k-support parameter against the dimension."""
        if k < 1 or k > n:
            raise ValidationError(f"k must lie in [1, {n}], got {k}")
        return True

    @staticmethod
    def validate_box_theta(a: float, b: float, c: float, n: int) -> bool:
        """
        Validate box-theta parameters.

        The budget c must cover the floor a on all n coordinates, otherwise
        the box is empty.

        Raises:
            ValidationError: If 0 < a < b <= c fails or n*a > c
        """
        if not (0.0 < a < b <= c):
            raise ValidationError(f"Box-theta needs 0 < a < b <= c, got a={a}, b={b}, c={c}")
        if n * a > c:
            raise ValidationError(
                f"Box-theta budget c={c} is below the floor n*a={n * a} for n={n}"
            )
        return True

    @staticmethod
    def validate_unit_interval(name: str, value: float) -> bool:
        """Validate a parameter that must lie strictly inside (0, 1)."""
        if not (0.0 < value < 1.0):
            raise ValidationError(f"{name} must lie in (0, 1), got {value}")
        return True

    @staticmethod
    def validate_positive(name: str, value: float) -> bool:
        """Validate a strictly positive finite parameter."""
        if not math.isfinite(value) or value <= 0.0:
            raise ValidationError(f"{name} must be positive, got {value}")
        return True

    @classmethod
    def validate_cover_parameters(cls, eps: float, delta: float) -> bool:
        """
        Validate CountSketch cover parameters.

        The cover analysis assumes delta < eps; such configurations are
        rejected instead of guessed at.
        """
        cls.validate_positive("eps", eps)
        cls.validate_unit_interval("delta", delta)
        if delta >= eps:
            raise ValidationError(f"Cover needs delta < eps, got delta={delta}, eps={eps}")
        return True

    @staticmethod
    def validate_randomized_base(gamma: float, x: Optional[float]) -> bool:
        """
        Validate the randomized level base alpha' = 1 + x*gamma.

        Raises:
            ValidationError: If gamma is not in (0, 1) or x is outside [1/2, 1]
        """
        if not (0.0 < gamma < 1.0):
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
        if x is not None and not (0.5 <= x <= 1.0):
            raise ValidationError(f"x must lie in [1/2, 1], got {x}")
        return True

    @staticmethod
    def validate_tradeoff_factor(D: float, mmc: float) -> bool:
        """Validate an approximation factor against 1.1 <= D <= mmc."""
        if D < 1.1:
            raise ValidationError(f"Approximation factor D must be >= 1.1, got {D}")
        if D > mmc:
            raise ValidationError(f"Approximation factor D={D} exceeds the mmc estimate {mmc:.4g}")
        return True

    @staticmethod
    def validate_samples(samples: int, minimum: int = 100) -> bool:
        """Validate a Monte-Carlo sample count."""
        if samples < minimum:
            raise ValidationError(f"At least {minimum} samples are required, got {samples}")
        return True
