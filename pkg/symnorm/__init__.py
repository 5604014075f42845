"""
symnorm - Python Implementation.

Streaming approximation of symmetric norms over turnstile streams,
from level-set sketches built on CountSketch.
"""

from symnorm.version import __version__, __version_info__
from symnorm.config import LabScale, SketchConstants, root_seed
from symnorm.stream import (
    FrequencyVector,
    LevelVector,
    StreamSpec,
    StreamUpdate,
    UpdateStream,
    apply_update,
    bucket,
    exact_level_vector,
    generate_stream,
    materialize,
    read_stream,
    write_stream,
)
from symnorm.norms import (
    SymmetricNormOracle,
    LpNorm,
    TopKNorm,
    KSupportNorm,
    norm_from_config,
    q_wrap,
    restrict,
)
from symnorm.concentration import ConcentrationProfile, compute_mmc
from symnorm.countsketch import CountSketchTable, HeavyHitterMap, is_cover
from symnorm.levels import (
    LevelEstimate,
    SampleLevelSketch,
    SketchPlan,
    estimate_levels_one_pass,
    estimate_levels_two_pass,
    level1_finalize,
    plan_sketch,
)
from symnorm.estimator import (
    EstimatorConfig,
    NormEstimate,
    TradeoffConfig,
    TradeoffEstimate,
    estimate_symmetric_norm,
    estimate_tradeoff,
    one_pass_symmetric_norm,
    tradeoff_estimate,
)
from symnorm.encoder import JSONEncoder, SketchEncoder
from symnorm.validator import ParameterValidator
from symnorm.exceptions import (
    SymnormException,
    ValidationError,
    StreamError,
    InfeasibleSpecError,
    SketchMismatchError,
    ConfigError,
    CalibrationError,
    EncodingError,
    DecodingError,
)

__all__ = [
    "__version__",
    "__version_info__",
    "LabScale",
    "SketchConstants",
    "root_seed",
    "FrequencyVector",
    "LevelVector",
    "StreamSpec",
    "StreamUpdate",
    "UpdateStream",
    "apply_update",
    "bucket",
    "exact_level_vector",
    "generate_stream",
    "materialize",
    "read_stream",
    "write_stream",
    "SymmetricNormOracle",
    "LpNorm",
    "TopKNorm",
    "KSupportNorm",
    "norm_from_config",
    "q_wrap",
    "restrict",
    "ConcentrationProfile",
    "compute_mmc",
    "CountSketchTable",
    "HeavyHitterMap",
    "is_cover",
    "LevelEstimate",
    "SampleLevelSketch",
    "SketchPlan",
    "estimate_levels_one_pass",
    "estimate_levels_two_pass",
    "level1_finalize",
    "plan_sketch",
    "EstimatorConfig",
    "NormEstimate",
    "TradeoffConfig",
    "TradeoffEstimate",
    "estimate_symmetric_norm",
    "estimate_tradeoff",
    "one_pass_symmetric_norm",
    "tradeoff_estimate",
    "JSONEncoder",
    "SketchEncoder",
    "ParameterValidator",
    "SymnormException",
    "ValidationError",
    "StreamError",
    "InfeasibleSpecError",
    "SketchMismatchError",
    "ConfigError",
    "CalibrationError",
    "EncodingError",
    "DecodingError",
]
