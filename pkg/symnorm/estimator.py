"""Streaming estimators of symmetric norms.

``one_pass_symmetric_norm`` estimates level counts in one pass over the
stream, materializes the estimated level vector V and evaluates the norm
oracle on it. ``tradeoff_estimate`` trades accuracy for space: it sums
h(xi^(b_i)) * l_2(V_i) over the recovered levels, where h caps the norm of
a flat vector by D times its value.

Example:
    >>> cfg = EstimatorConfig(eps=0.2, mmc=1.0)
    >>> l = LpNorm(4096, 1)
    >>> stream = generate_stream(StreamSpec("single-spike", {"n": 4096, "magnitude": 100}, 5))
    >>> 100 / 1.25 <= one_pass_symmetric_norm(stream, l, cfg, seed=1) <= 100
    True
"""
import logging
import math
from dataclasses import dataclass, asdict, field, replace
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from symnorm.concentration import ConcentrationProfile, compute_mmc, estimate_max, estimate_median
from symnorm.config import LabScale, SketchConstants, _from_mapping
from symnorm.exceptions import CalibrationError, ConfigError, ValidationError
from symnorm.hashing import derive_seed
from symnorm.levels import LevelEstimate, SketchPlan, level1_finalize, one_pass_sketch, plan_sketch
from symnorm.norms import SymmetricNormOracle, qnorm_tradeoff_norm, xi
from symnorm.stream import (
    LevelVector,
    as_update_stream,
    check_stream,
    is_contributing,
    is_important,
    materialize,
)
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

MMC_SAFETY = 2.0


def _log(n: int) -> float:
    return math.log(max(n, 2))


def _calibrated_mmc(profile: Optional[ConcentrationProfile], override: Optional[float],
                    safety: float) -> float:
    candidates = []
    if profile is not None:
        candidates.append(float(profile.mmc_estimate))
    if override is not None:
        candidates.append(float(override))
    if not candidates:
        raise CalibrationError("No mmc available: supply a concentration profile or an mmc bound")
    return max(candidates) * safety


def _profile_from(value) -> Optional[ConcentrationProfile]:
    if value is None or isinstance(value, ConcentrationProfile):
        return value
    return ConcentrationProfile.from_dict(value)


@dataclass(frozen=True)
class EstimatorConfig:
    """
    Parameters of the (1 +- eps) estimator.

    Derived parameters:
        eps' = c1 * eps^2 / ln n
        beta' = c2 * eps^5 / (mmc^2 * ln^5 n)
        gamma = c3 * eps
        delta = 0.01 * eps / n unless given

    ``mmc`` is the larger of the profiled and the supplied bound, times
    ``mmc_safety``.
    """

    eps: float = 0.2
    delta: Optional[float] = None
    mmc: Optional[float] = None
    profile: Optional[ConcentrationProfile] = None
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    mmc_safety: float = MMC_SAFETY
    x: Optional[float] = None
    constants: SketchConstants = field(default_factory=SketchConstants)
    lab: LabScale = field(default_factory=LabScale.default)

    def failure_budget(self, n: int) -> float:
        return self.delta if self.delta is not None else 0.01 * self.eps / n

    def calibrated_mmc(self) -> float:
        """
        Raises:
            CalibrationError: If neither a profile nor a bound is present
        """
        return _calibrated_mmc(self.profile, self.mmc, self.mmc_safety)

    def eps_prime(self, n: int) -> float:
        return self.c1 * self.eps ** 2 / _log(n)

    def beta_prime(self, n: int) -> float:
        mmc = self.calibrated_mmc()
        return min(1.0, self.c2 * self.eps ** 5 / (mmc * mmc * _log(n) ** 5))

    def gamma(self) -> float:
        return self.c3 * self.eps

    def derived(self, n: int) -> Dict[str, float]:
        """
        Derived parameters at dimension n.

        Raises:
            ValidationError: If eps' >= eps or gamma is outside (0, 1)
        """
        ParameterValidator.validate_unit_interval("eps", self.eps)
        eps_prime = self.eps_prime(n)
        if eps_prime >= self.eps:
            raise ValidationError(f"eps'={eps_prime:.4g} must be below eps={self.eps}")
        ParameterValidator.validate_randomized_base(self.gamma(), self.x)
        return {
            "eps": self.eps,
            "eps_prime": eps_prime,
            "beta_prime": self.beta_prime(n),
            "gamma": self.gamma(),
            "delta": self.failure_budget(n),
            "mmc": self.calibrated_mmc(),
        }

    def plan(self, n: int) -> SketchPlan:
        d = self.derived(n)
        return plan_sketch(n, d["beta_prime"], d["eps_prime"], d["delta"], gamma=d["gamma"],
                           passes=1, constants=self.constants, lab=self.lab)

    def with_profile(self, profile: ConcentrationProfile) -> "EstimatorConfig":
        return replace(self, profile=profile)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["profile"] = self.profile.to_dict() if self.profile is not None else None
        data["constants"] = self.constants.to_dict()
        data["lab"] = self.lab.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EstimatorConfig":
        body = dict(data)
        try:
            body["profile"] = _profile_from(body.get("profile"))
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Invalid concentration profile: {str(e)}") from e
        body["constants"] = SketchConstants.from_dict(body.get("constants") or {})
        body["lab"] = LabScale.from_dict(body.get("lab"))
        return _from_mapping(cls, body)


@dataclass(frozen=True)
class TradeoffConfig:
    """
    Parameters of the D-approximation estimator.

    Derived parameters:
        beta = c4 / ln n
        beta' = c5 * D^2 * beta^2 / (ln^2 n * mmc^2)

    Level counts run at the constant precision ``eps`` in (0, 1/2).
    ``lam`` is the recentring constant of the reported value.
    """

    D: float = 4.0
    eps: float = 0.25
    delta: float = 0.01
    mmc: Optional[float] = None
    profile: Optional[ConcentrationProfile] = None
    c4: float = 1.0
    c5: float = 1.0
    lam: float = 1.0
    mmc_safety: float = MMC_SAFETY
    x: Optional[float] = None
    constants: SketchConstants = field(default_factory=SketchConstants)
    lab: LabScale = field(default_factory=LabScale.default)

    def calibrated_mmc(self) -> float:
        return _calibrated_mmc(self.profile, self.mmc, self.mmc_safety)

    def beta(self, n: int) -> float:
        return min(1.0, self.c4 / _log(n))

    def beta_prime(self, n: int) -> float:
        mmc = self.calibrated_mmc()
        return min(1.0, self.c5 * self.D ** 2 * self.beta(n) ** 2 / (_log(n) ** 2 * mmc * mmc))

    def derived(self, n: int) -> Dict[str, float]:
        """
        Raises:
            ValidationError: If D is outside [1.1, mmc] or eps outside (0, 1/2)
        """
        ParameterValidator.validate_tradeoff_factor(self.D, self.calibrated_mmc())
        if not 0.0 < self.eps < 0.5:
            raise ValidationError(f"Tradeoff precision must lie in (0, 1/2), got {self.eps}")
        ParameterValidator.validate_randomized_base(self.eps, self.x)
        return {
            "D": self.D,
            "eps": self.eps,
            "gamma": self.eps,
            "beta": self.beta(n),
            "beta_prime": self.beta_prime(n),
            "delta": self.delta,
            "mmc": self.calibrated_mmc(),
        }

    def plan(self, n: int) -> SketchPlan:
        d = self.derived(n)
        return plan_sketch(n, d["beta_prime"], d["eps"], d["delta"], gamma=d["gamma"],
                           passes=1, constants=self.constants, lab=self.lab)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["profile"] = self.profile.to_dict() if self.profile is not None else None
        data["constants"] = self.constants.to_dict()
        data["lab"] = self.lab.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TradeoffConfig":
        body = dict(data)
        body["profile"] = _profile_from(body.get("profile"))
        body["constants"] = SketchConstants.from_dict(body.get("constants") or {})
        body["lab"] = LabScale.from_dict(body.get("lab"))
        return _from_mapping(cls, body)


@dataclass
class NormEstimate:
    """Output of the one-pass estimator with its level estimate and parameters."""

    estimate: float
    levels: LevelEstimate
    parameters: Dict[str, Any]
    counter_count: int
    nominal_counter_count: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate,
            "levels": self.levels.to_dict(),
            "parameters": self.parameters,
            "counter_count": self.counter_count,
            "nominal_counter_count": self.nominal_counter_count,
        }


def _prepare_stream(stream, l: SymmetricNormOracle, magnitude_bound: int):
    stream = as_update_stream(stream, l.n)
    if stream.n > l.n:
        raise ValidationError(f"Stream dimension {stream.n} exceeds the norm dimension {l.n}")
    check_stream(stream, l.n, magnitude_bound)
    return stream


def _run_level1(stream, n: int, plan_params: Dict[str, float], cfg,
                seed: int) -> Tuple[LevelEstimate, SketchPlan]:
    gamma, beta, eps, delta = (plan_params["gamma"], plan_params["beta_prime"],
                               plan_params["eps_level"], plan_params["delta"])
    sk = one_pass_sketch(n, gamma, beta, eps, delta, seed=derive_seed(seed, "estimator"),
                         constants=cfg.constants, lab=cfg.lab)
    sk.ingest(stream)
    return level1_finalize(sk, gamma, beta, eps, delta, cfg.x), sk.plan


def estimate_symmetric_norm(
    stream, l: SymmetricNormOracle, cfg: EstimatorConfig, seed: int = 0
) -> NormEstimate:
    """
    One-pass (1 +- eps) estimate of l(v) with diagnostics.

    The norm is evaluated on the lower level boundaries alpha'**(i-1), so
    underestimated counts never lift the estimate above l(v).

    Raises:
        StreamError: If the stream violates the magnitude bound
        CalibrationError: If no mmc is available
    """
    n = l.n
    params = cfg.derived(n)
    stream = _prepare_stream(stream, l, cfg.constants.magnitude_bound(n))
    params["eps_level"] = params["eps_prime"]
    levels, plan = _run_level1(stream, n, params, cfg, seed)
    view = materialize(levels.level_vector(n), n, lower=True)
    value = float(l.evaluate(view))
    params["base"] = levels.base
    logger.info("estimate of %s: %.6g (base %.4f, %d counters)", l.name, value, levels.base,
                plan.counter_count)
    return NormEstimate(value, levels, params, plan.counter_count, plan.nominal_counter_count)


def one_pass_symmetric_norm(stream, l: SymmetricNormOracle, cfg: EstimatorConfig, seed: int = 0) -> float:
    """
    One-pass (1 +- eps) approximation of l(v).

    Example:
        >>> one_pass_symmetric_norm([], LpNorm(64, 2), EstimatorConfig(mmc=1.0))
        0.0
    """
    return estimate_symmetric_norm(stream, l, cfg, seed).estimate


def h_xi(l: SymmetricNormOracle, n_prime: int, D: float) -> float:
    """
    h(xi^(n')) = min(D * l(xi^(n')), max of l^(n') on the unit sphere).

    Example:
        >>> h_xi(LpNorm(16, "inf"), 4, 4.0)
        1.0
    """
    if not 1 <= n_prime <= l.n:
        raise ValidationError(f"n' must lie in [1, {l.n}], got {n_prime}")
    ParameterValidator.validate_positive("D", D)
    peak = l.closed_form_max(n_prime)
    if peak is None:
        peak = estimate_max(l, n_prime, seed=derive_seed(0, "estimator", "h", n_prime))
    return float(min(D * l.evaluate(xi(n_prime)), peak))


@dataclass
class TradeoffEstimate:
    """Raw and recentred D-approximations with per-level terms."""

    raw: float
    recentred: float
    levels: LevelEstimate
    terms: List[Dict[str, float]]
    parameters: Dict[str, Any]
    counter_count: int
    nominal_counter_count: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["levels"] = self.levels.to_dict()
        return data


def level_terms(l: SymmetricNormOracle, lv: LevelVector, D: float) -> List[Dict[str, float]]:
    """Per-level h(xi^(b_i)) * l_2(V_i), with V_i at the lower level boundary."""
    terms = []
    lower = lv.values(lower=True)
    for i, count in enumerate(np.asarray(lv.counts).tolist(), start=1):
        b = int(round(count))
        if b < 1:
            continue
        b = min(b, l.n)
        h = h_xi(l, b, D)
        l2 = float(lower[i - 1] * math.sqrt(b))
        terms.append({"level": i, "count": b, "h": h, "l2": l2, "term": h * l2})
    return terms


def estimate_tradeoff(stream, l: SymmetricNormOracle, tcfg: TradeoffConfig,
                      seed: int = 0) -> TradeoffEstimate:
    """
    D-approximation of l(v) from one-pass level counts at constant precision.

    The raw value satisfies l(v) <= c * alpha' * H and H <= c' * D * ln n * l(v)
    for moderate constants; the recentred value is H / sqrt(D * lam * ln n).

    Raises:
        ValidationError: If D lies outside [1.1, mmc]
    """
    n = l.n
    params = tcfg.derived(n)
    stream = _prepare_stream(stream, l, tcfg.constants.magnitude_bound(n))
    params["eps_level"] = params["eps"]
    levels, plan = _run_level1(stream, n, params, tcfg, seed)
    terms = level_terms(l, levels.level_vector(n), tcfg.D)
    raw = float(sum(term["term"] for term in terms))
    recentred = raw / math.sqrt(tcfg.D * tcfg.lam * _log(n))
    params["base"] = levels.base
    logger.info("tradeoff estimate of %s at D=%.3g: raw %.6g, %d counters", l.name, tcfg.D, raw,
                plan.counter_count)
    return TradeoffEstimate(
        raw=raw,
        recentred=recentred,
        levels=levels,
        terms=terms,
        parameters=params,
        counter_count=plan.counter_count,
        nominal_counter_count=plan.nominal_counter_count,
        diagnostics={"support_slack": 2.0},
    )


def tradeoff_estimate(stream, l: SymmetricNormOracle, tcfg: TradeoffConfig, seed: int = 0) -> float:
    """Raw D-approximation sum over recovered levels."""
    return estimate_tradeoff(stream, l, tcfg, seed).raw


def qnorm_tradeoff_estimate(
    stream,
    l: SymmetricNormOracle,
    D: float,
    cfg: Optional[EstimatorConfig] = None,
    seed: int = 0,
    samples: int = 2000,
    grid_size: Optional[int] = None,
) -> NormEstimate:
    """
    D-approximation of a Q-norm through its capped surrogate.

    Profiles the median of l and the mmc of the surrogate
    max(D * M_l * l_2 / ln n, l), then runs the one-pass estimator on it.
    """
    cfg = cfg or EstimatorConfig()
    median = estimate_median(l, l.n, samples, derive_seed(seed, "tradeoff", "median"))
    surrogate = qnorm_tradeoff_norm(l, D, median)
    profile = compute_mmc(surrogate, grid_size=grid_size, samples=samples,
                          seed=derive_seed(seed, "tradeoff", "profile"))
    return estimate_symmetric_norm(stream, surrogate, cfg.with_profile(profile), seed)


def sketch_size(cfg: Union[EstimatorConfig, TradeoffConfig], n: int) -> Dict[str, float]:
    """
    Counters and bits of the one-pass sketch at the configured parameters.

    Each counter holds a value of magnitude at most n * m.
    """
    plan = cfg.plan(n)
    bits_per_counter = math.ceil(math.log2(2 * n * plan.magnitude_bound + 1))
    return {
        "counters": plan.counter_count,
        "bits": plan.counter_count * bits_per_counter,
        "nominal_counters": plan.nominal_counter_count,
        "nominal_bits": plan.nominal_counter_count * bits_per_counter,
        "repetitions": plan.repetitions,
        "width": plan.width,
        "depth": plan.depth,
        "beta_cs": plan.beta_cs,
    }


def check_importance_implication(
    l: SymmetricNormOracle, lv: LevelVector, beta: float, beta_prime: float
) -> List[int]:
    """
    Levels that are beta-contributing but not beta'-important.

    Each violation is logged as a calibration failure.
    """
    violations = []
    for i in range(1, lv.t + 1):
        if lv.counts[i - 1] <= 0 or not is_contributing(l, lv, i, beta):
            continue
        if not is_important(lv, i, beta_prime):
            logger.warning(
                "calibration failure: level %d of %s is %.3g-contributing but not %.3g-important",
                i, l.name, beta, beta_prime,
            )
            violations.append(i)
    return violations


def pruned_level_vector(l: SymmetricNormOracle, lv: LevelVector, beta: float) -> LevelVector:
    """V' holding only the beta-contributing levels of V."""
    counts = np.zeros_like(lv.counts)
    for i in range(1, lv.t + 1):
        if lv.counts[i - 1] > 0 and is_contributing(l, lv, i, beta):
            counts[i - 1] = lv.counts[i - 1]
    return LevelVector(lv.base, counts)
