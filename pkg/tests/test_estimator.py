"""Tests for the symmetric norm estimators."""
import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symnorm.concentration import compute_mmc
from symnorm.config import LabScale
from symnorm.estimator import (
    EstimatorConfig,
    TradeoffConfig,
    check_importance_implication,
    estimate_symmetric_norm,
    estimate_tradeoff,
    h_xi,
    level_terms,
    one_pass_symmetric_norm,
    pruned_level_vector,
    qnorm_tradeoff_estimate,
    sketch_size,
    tradeoff_estimate,
)
from symnorm.exceptions import CalibrationError, StreamError, ValidationError
from symnorm.norms import LpNorm, TopKNorm, norm_from_config, q_wrap
from symnorm.stream import (
    LevelVector,
    StreamSpec,
    UpdateStream,
    exact_level_vector,
    generate_stream,
    materialize,
)


class TestEstimatorConfig:
    """Test derived parameters and their checks."""

    def test_derived(self):
        """Test the derived parameter formulas."""
        d = EstimatorConfig(eps=0.2, mmc=1.0).derived(1024)
        assert d["eps_prime"] == pytest.approx(0.04 / math.log(1024))
        assert d["gamma"] == pytest.approx(0.2)
        assert d["delta"] == pytest.approx(0.01 * 0.2 / 1024)
        assert d["mmc"] == 2.0
        assert d["beta_prime"] == pytest.approx(0.2 ** 5 / (4.0 * math.log(1024) ** 5))

    def test_mmc_takes_larger_bound(self):
        """Test the profile and the supplied bound combine by maximum."""
        profile = compute_mmc(LpNorm(16, "inf"), samples=100, seed=1)
        cfg = EstimatorConfig(mmc=1.0, profile=profile)
        assert cfg.calibrated_mmc() == pytest.approx(2 * max(1.0, profile.mmc_estimate))

    def test_missing_calibration(self):
        """Test neither a profile nor a bound is an error."""
        with pytest.raises(CalibrationError):
            EstimatorConfig().derived(64)

    def test_eps_range(self):
        """Test eps outside (0, 1) and eps' >= eps are rejected."""
        with pytest.raises(ValidationError):
            EstimatorConfig(eps=1.5, mmc=1.0).derived(64)
        with pytest.raises(ValidationError, match="eps'"):
            EstimatorConfig(eps=0.2, c1=100.0, mmc=1.0).derived(64)

    def test_gamma_range(self):
        """Test gamma = c3 * eps must lie in (0, 1)."""
        with pytest.raises(ValidationError, match="gamma"):
            EstimatorConfig(eps=0.2, c3=10.0, mmc=1.0).derived(64)

    def test_round_trip(self, small_lab):
        """Test dict round trip."""
        cfg = EstimatorConfig(eps=0.3, mmc=1.5, x=0.75, lab=small_lab)
        assert EstimatorConfig.from_dict(cfg.to_dict()) == cfg


class TestOnePassEstimator:
    """Test the (1 +- eps) estimator."""

    def test_spike(self, spike_stream, small_lab):
        """Test a spike of 100 is reported at its lower level boundary."""
        cfg = EstimatorConfig(eps=0.2, mmc=1.0, x=0.75, lab=small_lab)
        est = estimate_symmetric_norm(spike_stream, LpNorm(1024, 1), cfg, seed=1)
        assert est.levels.base == pytest.approx(1.15)
        assert est.estimate == pytest.approx(1.15 ** 32)
        assert 80 <= est.estimate <= 100
        assert est.counter_count > 0
        assert est.parameters["base"] == est.levels.base

    def test_float_result(self, spike_stream, small_lab):
        """Test the plain call returns the estimate."""
        cfg = EstimatorConfig(eps=0.2, mmc=1.0, x=0.75, lab=small_lab)
        value = one_pass_symmetric_norm(spike_stream, LpNorm(1024, 2), cfg, seed=1)
        assert value == pytest.approx(1.15 ** 32)

    def test_empty_stream(self, small_lab):
        """Test an empty stream estimates zero."""
        assert one_pass_symmetric_norm([], LpNorm(64, 2), EstimatorConfig(mmc=1.0, lab=small_lab)) == 0.0

    def test_magnitude_violation(self, small_lab):
        """Test streams above m = n**3 are rejected."""
        with pytest.raises(StreamError):
            one_pass_symmetric_norm([(0, 65)], LpNorm(4, 1), EstimatorConfig(mmc=1.0, lab=small_lab))

    def test_stream_wider_than_norm(self, small_lab):
        """Test the stream dimension must fit the norm."""
        stream = UpdateStream.from_updates([(3, 1)], 128)
        with pytest.raises(ValidationError, match="exceeds"):
            one_pass_symmetric_norm(stream, LpNorm(64, 1), EstimatorConfig(mmc=1.0, lab=small_lab))

    def test_to_dict(self, spike_stream, small_lab):
        """Test the report record."""
        cfg = EstimatorConfig(eps=0.2, mmc=1.0, x=0.75, lab=small_lab)
        data = estimate_symmetric_norm(spike_stream, LpNorm(1024, 1), cfg, seed=1).to_dict()
        assert set(data) == {"estimate", "levels", "parameters", "counter_count", "nominal_counter_count"}
        assert data["levels"]["x"] == 0.75


class TestLevelTerms:
    """Test the capped flat-vector terms."""

    def test_h_xi(self):
        """Test h is the smaller of D * l(xi) and the sphere maximum."""
        assert h_xi(LpNorm(16, "inf"), 4, 4.0) == 1.0
        assert h_xi(LpNorm(16, 1), 4, 4.0) == pytest.approx(2.0)
        assert h_xi(LpNorm(16, 1), 9, 1.1) == pytest.approx(3.0)
        assert h_xi(TopKNorm(16, 2), 1, 4.0) == pytest.approx(1.0)

    def test_h_xi_range(self):
        """Test n' outside [1, n] is rejected."""
        with pytest.raises(ValidationError):
            h_xi(LpNorm(16, 1), 17, 2.0)
        with pytest.raises(ValidationError):
            h_xi(LpNorm(16, 1), 0, 2.0)

    def test_level_terms(self):
        """Test one term per nonempty level at the lower boundary."""
        terms = level_terms(LpNorm(16, 1), LevelVector(2.0, [0, 4]), 4.0)
        assert terms == [{"level": 2, "count": 4, "h": 2.0, "l2": 4.0, "term": 8.0}]


class TestTradeoff:
    """Test the D-approximation estimator."""

    def test_factor_range(self):
        """Test D must lie in [1.1, mmc]."""
        with pytest.raises(ValidationError, match="exceeds"):
            TradeoffConfig(D=5.0, mmc=2.0).derived(64)
        with pytest.raises(ValidationError, match="1.1"):
            TradeoffConfig(D=1.0, mmc=2.0).derived(64)
        with pytest.raises(ValidationError, match=r"\(0, 1/2\)"):
            TradeoffConfig(D=2.0, eps=0.6, mmc=2.0).derived(64)

    def test_spike(self, spike_stream, small_lab):
        """Test raw and recentred values on a spike."""
        tcfg = TradeoffConfig(D=2.0, eps=0.25, mmc=2.0, x=0.75, lab=small_lab)
        est = estimate_tradeoff(spike_stream, LpNorm(1024, 1), tcfg, seed=1)
        assert est.raw == pytest.approx(1.1875 ** 26)
        assert est.recentred == pytest.approx(est.raw / math.sqrt(2.0 * math.log(1024)))
        assert [t["level"] for t in est.terms] == [27]
        assert tradeoff_estimate(spike_stream, LpNorm(1024, 1), tcfg, seed=1) == est.raw

    def test_sketch_shrinks_with_D(self):
        """Test a larger D needs a smaller sketch."""
        lab = LabScale.off()
        small_D = sketch_size(TradeoffConfig(D=1.1, mmc=2.0, lab=lab), 1024)
        large_D = sketch_size(TradeoffConfig(D=4.0, mmc=2.0, lab=lab), 1024)
        assert large_D["counters"] / small_D["counters"] <= 0.375
        assert large_D["bits"] == large_D["counters"] * math.ceil(math.log2(2 * 1024 ** 4 + 1))

    def test_sketch_size_keys(self, small_lab):
        """Test the reported size fields."""
        size = sketch_size(EstimatorConfig(mmc=1.0, lab=small_lab), 256)
        assert size["repetitions"] == 128
        assert size["nominal_counters"] >= size["counters"]


class TestCalibrationChecks:
    """Test the contributing-implies-important check."""

    def test_violation_logged(self, caplog):
        """Test a contributing but unimportant level is reported."""
        with caplog.at_level(logging.WARNING, logger="symnorm.estimator"):
            violations = check_importance_implication(LpNorm(64, "inf"), LevelVector(2.0, [1, 10]), 0.05, 0.5)
        assert violations == [1]
        assert "calibration failure" in caplog.text

    def test_no_violation(self):
        """Test a single level is always important."""
        assert check_importance_implication(LpNorm(64, 1), LevelVector(2.0, [0, 10]), 0.05, 0.5) == []

    def test_pruned_level_vector(self):
        """Test levels below the contribution threshold are dropped."""
        pruned = pruned_level_vector(LpNorm(64, "inf"), LevelVector(2.0, [1, 10]), 0.6)
        assert pruned.counts.tolist() == [0, 10]


@pytest.mark.slow
def test_qnorm_tradeoff_spike(small_lab):
    """Test the surrogate estimate of a spike stays within the lower-boundary slack."""
    stream = generate_stream(StreamSpec("single-spike", {"n": 64, "magnitude": 50, "index": 3}, seed=2))
    l = q_wrap(TopKNorm(64, 8))
    est = qnorm_tradeoff_estimate(stream, l, 2.0, EstimatorConfig(eps=0.2, lab=small_lab), seed=4,
                                  samples=200, grid_size=3)
    assert 50 / 1.25 <= est.estimate <= 50


PRUNING_NORMS = [
    {"kind": "lp", "p": 1},
    {"kind": "lp", "p": 4},
    {"kind": "lp", "p": "inf"},
    {"kind": "topk", "k": 4},
    {"kind": "topk_dual", "k": 4},
    {"kind": "ksupport", "k": 4},
    {"kind": "boxtheta_dual", "a": 0.01, "b": 1.0, "c": 2.0},
    {"kind": "maxcombo"},
]


@pytest.mark.parametrize("config", PRUNING_NORMS, ids=lambda c: c["kind"])
@settings(max_examples=30, deadline=None)
@given(
    v=st.lists(st.integers(min_value=-4000, max_value=4000), min_size=16, max_size=16).map(np.array),
    beta=st.sampled_from([1e-3, 1e-2]),
)
def test_pruning_keeps_most_of_the_norm(config, v, beta):
    """Test dropping non-contributing levels keeps l(V') >= (1 - t*beta) l(V)."""
    l = norm_from_config(config, 16)
    lv = exact_level_vector(v, 2.0)
    full = l.evaluate(materialize(lv, 16))
    pruned = l.evaluate(materialize(pruned_level_vector(l, lv, beta), 16))
    assert pruned >= (1 - lv.t * beta) * full - 1e-9 * full
