"""symnorm configuration records.

Sketch sizes follow closed formulas with named constants. ``SketchConstants``
holds those constants; ``LabScale`` shrinks the resulting sizes so that
sketches fit desk-scale dimensions.

Example:
    >>> constants = SketchConstants()
    >>> lab = LabScale.default()
    >>> lab.repetitions(10**9)
    256
    >>> LabScale.off().repetitions(10**9)
    1000000000
"""
import json
import math
import os
from dataclasses import dataclass, asdict, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from symnorm.exceptions import ConfigError

SEED_ENV = "SYMNORM_SEED"
DEFAULT_SEED = 20240917


def _from_mapping(cls, data: Dict[str, Any]):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown {cls.__name__} fields: {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {cls.__name__}: {str(e)}") from e


@dataclass(frozen=True)
class SketchConstants:
    """
    Constants of the sizing formulas.

    Attributes:
        c_w: CountSketch width constant, w >= c_w / (eps^2 * beta)
        c_d: CountSketch depth constant, d >= c_d * ln(n / delta)
        c_R: Repetition constant, R = c_R * log(1/delta) * log^2 n / eps^2
        c_beta: Per-table heaviness constant, beta_cs = c_beta * beta / (t * log(1/delta))
        occupancy_divisor: Divisor in the occupancy threshold R*log(1/delta)/(divisor*log n)
        deflation: Multiplier of eps in the hit-rate deflation 1/(1 + deflation*eps)
        magnitude_exponent: Magnitude bound m = n ** magnitude_exponent
    """

    c_w: float = 8.0
    c_d: float = 3.0
    c_R: float = 1.0
    c_beta: float = 1.0
    occupancy_divisor: float = 100.0
    deflation: float = 1.0
    magnitude_exponent: int = 3

    def magnitude_bound(self, n: int) -> int:
        """Magnitude bound m for dimension n."""
        return max(int(n), 2) ** self.magnitude_exponent

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SketchConstants":
        return _from_mapping(cls, data)


def _clamp(printed: float, factor: float, cap: Optional[int]) -> int:
    if printed <= 0:
        return 0
    value = max(1, math.ceil(factor * printed))
    if cap is not None:
        value = min(cap, value)
    return int(value)


@dataclass(frozen=True)
class LabScale:
    """
    Desk-scale shrinkage of sketch sizes.

    Each size is ``min(cap, max(1, ceil(factor * printed)))``. Floors keep
    per-table heaviness and precision from reporting collision noise.
    ``occupancy_fraction`` replaces the occupancy threshold by a fixed
    fraction of R when set.

    Attributes:
        enabled: When False every size is the printed one
        repetition_factor: Factor on R
        max_repetitions: Cap on R
        block_factor: Factor on the one-pass block size
        max_block: Cap on the one-pass block size
        width_factor: Factor on CountSketch width
        max_width: Cap on CountSketch width
        depth_factor: Factor on CountSketch depth
        max_depth: Cap on CountSketch depth
        min_beta: Floor on per-table heaviness
        occupancy_fraction: Occupancy threshold as a fraction of R
        deflation: Absolute hit-rate deflation, overriding deflation*eps
    """

    enabled: bool = True
    repetition_factor: float = 1.0
    max_repetitions: Optional[int] = 256
    block_factor: float = 1.0
    max_block: Optional[int] = 2
    width_factor: float = 1.0
    max_width: Optional[int] = 256
    depth_factor: float = 1.0
    max_depth: Optional[int] = 5
    min_beta: float = 0.02
    occupancy_fraction: Optional[float] = 0.3
    deflation: Optional[float] = None

    @classmethod
    def default(cls) -> "LabScale":
        """Desk-scale configuration used by experiments and the acceptance suite."""
        return cls()

    @classmethod
    def off(cls) -> "LabScale":
        """Printed formulas, no shrinkage."""
        return cls(enabled=False)

    def repetitions(self, printed: float) -> int:
        if not self.enabled:
            return _clamp(printed, 1.0, None)
        return _clamp(printed, self.repetition_factor, self.max_repetitions)

    def block(self, printed: float) -> int:
        if not self.enabled:
            return _clamp(printed, 1.0, None)
        return _clamp(printed, self.block_factor, self.max_block)

    def width(self, printed: float) -> int:
        if not self.enabled:
            return _clamp(printed, 1.0, None)
        return _clamp(printed, self.width_factor, self.max_width)

    def depth(self, printed: float) -> int:
        if not self.enabled:
            return _clamp(printed, 1.0, None)
        return _clamp(printed, self.depth_factor, self.max_depth)

    def heaviness(self, printed: float) -> float:
        if not self.enabled:
            return printed
        return min(1.0, max(self.min_beta, printed))

    def with_overrides(self, **changes) -> "LabScale":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "LabScale":
        if data is None:
            return cls.default()
        return _from_mapping(cls, data)


def load_json(source: Union[str, Path, Dict[str, Any], None]) -> Dict[str, Any]:
    """
    Load a JSON document from a dict, a JSON string or a file path.

    Raises:
        ConfigError: If the document cannot be parsed
    """
    if source is None:
        return {}
    if isinstance(source, dict):
        return source
    text = str(source)
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return json.loads(Path(text).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot load JSON config {text[:60]!r}: {str(e)}") from e


def root_seed(seed: Optional[int] = None) -> int:
    """
    Resolve the root seed.

    The ``SYMNORM_SEED`` environment variable overrides everything else.
    """
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env.strip(), 0)
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from e
    return DEFAULT_SEED if seed is None else int(seed)
