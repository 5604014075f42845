"""Tests for symmetric norm oracles."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symnorm.exceptions import ConfigError, ValidationError
from symnorm.norms import (
    BoxThetaDualNorm,
    KSupportNorm,
    LpNorm,
    MaxComboNorm,
    TopKDualNorm,
    TopKNorm,
    dual_probe,
    eval_boxtheta_dual,
    eval_lp,
    norm_from_config,
    q_wrap,
    qnorm_tradeoff_norm,
    restrict,
    xi,
)

N = 16

NORM_CONFIGS = [
    {"kind": "lp", "p": 1},
    {"kind": "lp", "p": 2},
    {"kind": "lp", "p": 4},
    {"kind": "lp", "p": "inf"},
    {"kind": "topk", "k": 3},
    {"kind": "topk_dual", "k": "sqrt"},
    {"kind": "ksupport", "k": 4},
    {"kind": "boxtheta_dual", "a": 0.01, "b": 1.0, "c": 2.0},
    {"kind": "maxcombo"},
    {"kind": "qwrap", "inner": {"kind": "topk", "k": 2}},
    {"kind": "tradeoff_surrogate", "D": 2.0, "median": 1.5, "base": {"kind": "lp", "p": 1}},
]

vectors = st.lists(st.integers(min_value=-1000, max_value=1000), min_size=N, max_size=N).map(np.array)


@pytest.fixture(params=NORM_CONFIGS, ids=lambda c: c["kind"])
def norm(request):
    """Every norm kind at dimension 16."""
    return norm_from_config(request.param, N)


class TestNormalization:
    """Test every oracle is a normalized symmetric norm."""

    def test_unit_on_basis(self, norm):
        """Test l(e_i) = 1."""
        for i in (0, 7, N - 1):
            e = np.zeros(N)
            e[i] = 1.0
            assert norm.evaluate(e) == pytest.approx(1.0)

    def test_zero(self, norm):
        """Test l(0) = 0 and the empty view is zero."""
        assert norm.evaluate(np.zeros(N)) == 0.0
        assert norm.evaluate([]) == 0.0

    def test_too_long(self, norm):
        """Test vectors longer than n are rejected."""
        with pytest.raises(ValidationError):
            norm.evaluate(np.ones(N + 1))

    def test_rows_match_single(self, norm):
        """Test the batched path agrees with the single-vector path."""
        rows = np.random.default_rng(3).normal(size=(7, 5))
        expected = [norm.evaluate(row) for row in rows]
        assert np.allclose(norm.evaluate_rows(rows), expected)

    def test_config_roundtrip(self, norm):
        """Test an oracle rebuilds from its own config."""
        rebuilt = norm_from_config(norm.to_config(), N)
        x = np.arange(N) - 5.0
        assert rebuilt.evaluate(x) == pytest.approx(norm.evaluate(x))


@pytest.mark.parametrize("config", NORM_CONFIGS, ids=lambda c: c["kind"])
@settings(max_examples=40, deadline=None)
@given(x=vectors, y=vectors, seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_norm_axioms(config, x, y, seed):
    """Test symmetry, homogeneity and the triangle inequality."""
    l = norm_from_config(config, N)
    rng = np.random.default_rng(seed)
    value = l.evaluate(x)
    permuted = rng.permutation(x) * rng.choice([-1, 1], size=N)
    assert l.evaluate(permuted) == pytest.approx(value, rel=1e-9, abs=1e-9)
    assert l.evaluate(3 * x) == pytest.approx(3 * value, rel=1e-9, abs=1e-9)
    assert l.evaluate(x + y) <= value + l.evaluate(y) + 1e-7 * (1 + value)


class TestClosedForms:
    """Test specific values."""

    def test_lp_values(self):
        """Test l_p norms on small vectors."""
        assert eval_lp([3, 4], 2) == 5.0
        assert LpNorm(4, 1).evaluate([1, -2, 3, 0]) == 6.0
        assert LpNorm(4, "inf").evaluate([1, -7, 3, 0]) == 7.0

    def test_lp_large_p_no_overflow(self):
        """Test large exponents stay finite."""
        assert LpNorm(3, 400).evaluate([1e6, 1e6, 0]) == pytest.approx(1e6 * 2 ** (1 / 400))

    def test_lp_rejects_small_p(self):
        """Test p < 1 is rejected."""
        with pytest.raises(ValidationError):
            LpNorm(4, 0.5)

    def test_topk(self):
        """Test the top-k norm sums the largest magnitudes."""
        assert TopKNorm(4, 2).evaluate([3, 1, -2, 0]) == 5.0

    def test_topk_dual(self):
        """Test max(l_inf, l_1 / k)."""
        l = TopKDualNorm(8, 2)
        assert l.evaluate([1, 1, 1, 1, 1, 1]) == 3.0
        assert l.evaluate([5, 1]) == 5.0

    def test_ksupport_extremes(self):
        """Test k = 1 gives l_1 and k = n gives l_2."""
        x = np.array([3.0, -1.0, 2.0, 0.5, 0.0, 4.0])
        assert KSupportNorm(6, 1).evaluate(x) == pytest.approx(np.abs(x).sum())
        assert KSupportNorm(6, 6).evaluate(x) == pytest.approx(np.linalg.norm(x))

    def test_ksupport_between(self):
        """Test l_2 <= k-support <= l_1."""
        x = np.array([5.0, 4.0, 1.0, 1.0, 1.0, 0.2])
        value = KSupportNorm(6, 3).evaluate(x)
        assert np.linalg.norm(x) - 1e-9 <= value <= np.abs(x).sum() + 1e-9

    def test_boxtheta_validation(self):
        """Test box-theta parameters are checked."""
        with pytest.raises(ValidationError):
            BoxThetaDualNorm(4, 0.5, 0.2, 1.0)
        with pytest.raises(ValidationError, match="floor"):
            BoxThetaDualNorm(100, 0.1, 0.5, 1.0)

    def test_maxcombo(self):
        """Test max(l_inf, l_1 / sqrt(n))."""
        assert MaxComboNorm(16).evaluate(np.ones(16)) == 4.0

    def test_qwrap(self):
        """Test the Q-norm of l_1 is l_2."""
        assert q_wrap(LpNorm(2, 1)).evaluate([3, 4]) == 5.0

    def test_restrict(self):
        """Test the induced norm only takes k coordinates."""
        induced = restrict(LpNorm(16, 1), 4)
        assert induced.evaluate([1, 1, 1, 1]) == 4.0
        with pytest.raises(ValidationError):
            induced.evaluate(np.ones(5))

    def test_closed_form_max_matches_flat_vector(self):
        """Test the l_1 and top-k maxima sit at flat vectors."""
        assert LpNorm(64, 1).closed_form_max(16) == pytest.approx(LpNorm(64, 1).evaluate(xi(16)))
        assert TopKNorm(64, 4).closed_form_max(16) == pytest.approx(TopKNorm(64, 4).evaluate(xi(4)))
        assert LpNorm(64, 4).closed_form_max(16) == 1.0

    def test_surrogate_dominates_base(self):
        """Test the tradeoff surrogate is at least its base up to normalization."""
        base = LpNorm(64, 4)
        surrogate = qnorm_tradeoff_norm(base, 4.0, 0.5)
        x = np.ones(64)
        assert surrogate.evaluate(x) * surrogate._scale >= base.evaluate(x) - 1e-12

    def test_dual_probe_of_l1(self):
        """Test the probed dual of l_1 is l_inf."""
        x = np.array([0.5, -3.0, 2.0, 1.0])
        probe = dual_probe(LpNorm(4, 1), x, 50, np.random.default_rng(0))
        assert probe == pytest.approx(3.0)

    def test_xi(self):
        """Test xi is unit length."""
        assert np.linalg.norm(xi(9)) == pytest.approx(1.0)
        with pytest.raises(ValidationError):
            xi(0)


class TestNormFromConfig:
    """Test JSON norm records."""

    def test_wrapped_record(self):
        """Test the {"norm": {...}} wrapper is accepted."""
        l = norm_from_config({"norm": {"kind": "topk", "k": 2}}, n=4)
        assert l.evaluate([3, 1, -2, 0]) == 5.0

    def test_symbolic_k(self):
        """Test "sqrt" and "n/<d>" values of k."""
        assert norm_from_config({"kind": "topk", "k": "sqrt"}, 64).k == 8
        assert norm_from_config({"kind": "topk", "k": "n/8"}, 64).k == 8

    def test_unknown_kind(self):
        """Test unknown kinds are config errors."""
        with pytest.raises(ConfigError, match="Unknown norm kind"):
            norm_from_config({"kind": "schatten"}, 4)

    def test_missing_parameter(self):
        """Test missing parameters are config errors."""
        with pytest.raises(ConfigError, match="missing parameter"):
            norm_from_config({"kind": "topk"}, 4)

    def test_name(self):
        """Test names carry parameters."""
        assert norm_from_config({"kind": "lp", "p": 4}, 8).name == "lp(p=4.0)"
        assert math.isinf(norm_from_config({"kind": "lp", "p": "inf"}, 8).p)


def _ksupport_gauge(x):
    """
    Gauge of the k = 2 support ball at n = 3 by direct decomposition.

    x = u + v + w with u on {0, 1}, v on {0, 2} and w on {1, 2}; the free
    coordinates (u0, u1, v2) are searched on a shrinking grid.
    """
    m = np.abs(np.asarray(x, dtype=np.float64))
    if not m.any():
        return 0.0
    center = m / 2.0
    span = float(m.max())
    axis = np.linspace(-1.0, 1.0, 15)
    best = math.inf
    for _ in range(60):
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
        u0, u1, v2 = (center + span * grid).T
        cost = np.hypot(u0, u1) + np.hypot(m[0] - u0, v2) + np.hypot(m[1] - u1, m[2] - v2)
        j = int(np.argmin(cost))
        if cost[j] <= best:
            best = float(cost[j])
            center = np.array([u0[j], u1[j], v2[j]])
        span *= 0.6
    return best


class TestOracleChecks:
    """Test closed forms against brute-force oracles."""

    def test_ksupport_example(self):
        """Test (2, 1, 1) at k = 2."""
        assert KSupportNorm(3, 2).evaluate([2, 1, 1]) == pytest.approx(math.sqrt(8))
        assert _ksupport_gauge([2, 1, 1]) == pytest.approx(math.sqrt(8), rel=1e-3)

    def test_ksupport_matches_gauge(self):
        """Test the closed form on a five-point grid per coordinate."""
        l = KSupportNorm(3, 2)
        points = np.linspace(-1.0, 1.0, 5)
        gauges = {}
        for x in itertools.product(points, repeat=3):
            key = tuple(sorted(np.abs(x)))
            if key not in gauges:
                gauges[key] = _ksupport_gauge(key)
            assert l.evaluate(x) == pytest.approx(gauges[key], rel=1e-3, abs=1e-9)

    def test_boxtheta_example(self):
        """Test x = (1, 0) with a = 0.5, b = 1, c = 1.5."""
        assert eval_boxtheta_dual([1.0, 0.0], 0.5, 1.0, 1.5) == pytest.approx(1.0)

    @pytest.mark.parametrize("a,b,c", [(0.5, 1.0, 1.5), (0.2, 1.0, 1.5), (0.1, 0.4, 0.7)])
    def test_boxtheta_matches_grid_search(self, a, b, c):
        """Test the greedy maximizer against every theta on a grid."""
        rng = np.random.default_rng(7)
        n = 3
        axis = np.linspace(a, b, 81)
        thetas = np.stack(np.meshgrid(*[axis] * n, indexing="ij"), axis=-1).reshape(-1, n)
        thetas = thetas[thetas.sum(axis=1) <= c + 1e-12]
        step = (b - a) / 80
        for _ in range(10):
            x = rng.normal(size=n)
            brute = math.sqrt(float((thetas @ (x * x)).max()))
            greedy = eval_boxtheta_dual(x, a, b, c)
            assert brute <= greedy + 1e-9
            assert greedy <= math.sqrt(brute ** 2 + n * step * float((x * x).max())) + 1e-9

    @pytest.mark.parametrize("k", [1, 2, 3, 6])
    def test_topk_dual_duality(self, k):
        """Test the probed dual of top-k is the dual top-k norm at n = 6."""
        rng = np.random.default_rng(k)
        primal, dual = TopKNorm(6, k), TopKDualNorm(6, k)
        for _ in range(20):
            x = rng.normal(size=6)
            probe = dual_probe(primal, x, 200, rng)
            assert probe <= dual.evaluate(x) * (1 + 1e-9)
            assert probe >= 0.95 * dual.evaluate(x)
