"""Symmetric norm oracles.

Every oracle is normalized so that l(e_i) = 1 and accepts any coordinate
view: a numpy array, a FrequencyVector or a LevelVectorView. Vectors shorter
than the oracle's dimension are padded with implicit zeros.

Example:
    >>> l = norm_from_config({"norm": {"kind": "topk", "k": 2}}, n=4)
    >>> l.evaluate([3, 1, -2, 0])
    5.0
    >>> l.closed_form_max(4)
    1.4142135623730951
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Union

import numpy as np

from symnorm.exceptions import ConfigError, ValidationError
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

# rows per block when evaluating many vectors at once
_ROW_BLOCK_ELEMENTS = 1 << 22


def as_magnitudes(x) -> np.ndarray:
    """Absolute values of a vector-like, as float64."""
    if hasattr(x, "dense"):
        x = x.dense()
    return np.abs(np.asarray(x, dtype=np.float64)).ravel()


def xi(k: int) -> np.ndarray:
    """The l_2-normalized vector of k ones."""
    if k < 1:
        raise ValidationError(f"xi needs k >= 1, got {k}")
    return np.full(k, 1.0 / math.sqrt(k))


def _parse_p(p) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "max"):
            return math.inf
        p = float(p)
    return float(p)


def eval_lp(x, p: Union[float, str]) -> float:
    """
    The l_p norm; p = inf gives max |x_i|.

    Raises:
        ValidationError: If p < 1

    Example:
        >>> eval_lp([3, 4], 2)
        5.0
    """
    p = _parse_p(p)
    ParameterValidator.validate_p(p)
    m = as_magnitudes(x)
    if m.size == 0:
        return 0.0
    top = float(m.max())
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    # scaled to avoid overflow for large p
    return top * float(np.sum((m / top) ** p) ** (1.0 / p))


def eval_topk(x, k: int, n: Optional[int] = None) -> float:
    """Sum of the k largest magnitudes."""
    m = as_magnitudes(x)
    ParameterValidator.validate_k(k, n if n is not None else max(m.size, k))
    if k >= m.size:
        return float(m.sum())
    return float(np.partition(m, m.size - k)[m.size - k :].sum())


def eval_topk_dual(x, k: int, n: Optional[int] = None) -> float:
    """Dual of the top-k norm: max(l_inf, l_1 / k)."""
    m = as_magnitudes(x)
    ParameterValidator.validate_k(k, n if n is not None else max(m.size, k))
    if m.size == 0:
        return 0.0
    return float(max(m.max(), m.sum() / k))


def eval_ksupport(x, k: int, n: Optional[int] = None) -> float:
    """
    The k-support norm via its sorted-prefix closed form.

    With |x|_[1] >= |x|_[2] >= ..., find r in {0..k-1} such that
    |x|_[k-r-1] > T_r / (r+1) >= |x|_[k-r}, where T_r sums |x|_[i] for
    i >= k-r and |x|_[0] is +inf. The norm is
    sqrt(sum_{i<k-r} |x|_[i]^2 + T_r^2 / (r+1)).
    """
    m = as_magnitudes(x)
    ParameterValidator.validate_k(k, n if n is not None else max(m.size, k))
    z = np.sort(m)[::-1]
    if z.size < k:
        z = np.concatenate([z, np.zeros(k - z.size)])
    head = np.concatenate([[0.0], np.cumsum(z)])
    head_sq = np.concatenate([[0.0], np.cumsum(z * z)])
    r = np.arange(k)
    split = k - r - 1
    tail = head[-1] - head[split]
    avg = tail / (r + 1)
    upper = np.where(split >= 1, z[np.maximum(split - 1, 0)], np.inf)
    lower = z[split]
    tol = 1e-12 * max(1.0, float(z[0]) if z.size else 1.0)
    ok = (upper + tol >= avg) & (avg + tol >= lower)
    if ok.any():
        j = int(np.argmax(ok))
    else:
        violation = np.maximum(avg - upper, 0.0) + np.maximum(lower - avg, 0.0)
        j = int(np.argmin(violation))
        logger.debug("k-support split search fell back to r=%d", j)
    return float(math.sqrt(head_sq[split[j]] + tail[j] ** 2 / (j + 1)))


def eval_boxtheta_dual(x, a: float, b: float, c: float, n: Optional[int] = None) -> float:
    """
    Dual box-theta norm: max over theta of sqrt(sum theta_i x_i^2).

    theta ranges over the box a <= theta_i <= b with sum theta_i <= c. The
    maximizer starts from theta = a everywhere and spends the remaining
    budget c - n*a on the largest x_i^2 first, at most b - a each.
    """
    m = as_magnitudes(x)
    dim = n if n is not None else m.size
    ParameterValidator.validate_box_theta(a, b, c, dim)
    sq = np.sort(m * m)[::-1]
    budget = c - dim * a
    extra = np.clip(budget - (b - a) * np.arange(sq.size), 0.0, b - a)
    return float(math.sqrt(a * sq.sum() + float((extra * sq).sum())))


def eval_maxcombo(x, n: Optional[int] = None) -> float:
    """max(l_inf, l_1 / sqrt(n))."""
    m = as_magnitudes(x)
    dim = n if n is not None else m.size
    if m.size == 0:
        return 0.0
    return float(max(m.max(), m.sum() / math.sqrt(dim)))


class SymmetricNormOracle(ABC):
    """
    Base class for symmetric norms on R^n.

    Subclasses implement ``_raw`` on a nonnegative magnitude vector and
    call ``_normalize`` once their parameters are set.
    """

    kind = "abstract"

    def __init__(self, n: int):
        ParameterValidator.validate_dimension(n)
        self.n = n
        self._scale = 1.0

    def _normalize(self) -> None:
        self._scale = 1.0
        unit = self._raw(np.ones(1))
        if unit <= 0:
            raise ValidationError(f"{self.name} vanishes on the standard basis")
        self._scale = unit

    @property
    def name(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.kind}({params})" if params else self.kind

    def params(self) -> Dict[str, Any]:
        return {}

    @abstractmethod
    def _raw(self, mags: np.ndarray) -> float:
        """Unnormalized norm of a nonnegative vector of length <= n."""

    def _raw_rows(self, rows: np.ndarray) -> np.ndarray:
        return np.array([self._raw(row) for row in rows], dtype=np.float64)

    def evaluate(self, x) -> float:
        """Norm of a vector view; shorter vectors are zero-padded to n."""
        mags = as_magnitudes(x)
        if mags.size > self.n:
            raise ValidationError(f"Vector of length {mags.size} exceeds dimension {self.n}")
        return self._raw(mags) / self._scale

    __call__ = evaluate

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Norm of every row of a 2-D array."""
        rows = np.abs(np.asarray(rows, dtype=np.float64))
        if rows.ndim != 2 or rows.shape[1] > self.n:
            raise ValidationError(f"Rows must have shape (s, k) with k <= {self.n}")
        step = max(1, _ROW_BLOCK_ELEMENTS // max(1, rows.shape[1]))
        out = np.empty(rows.shape[0], dtype=np.float64)
        for start in range(0, rows.shape[0], step):
            out[start : start + step] = self._raw_rows(rows[start : start + step])
        return out / self._scale

    def closed_form_max(self, k: int) -> Optional[float]:
        """Maximum of the induced norm l^(k) on the unit sphere, if known."""
        return None

    def to_config(self) -> Dict[str, Any]:
        return {"kind": self.kind, **self.params()}

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} n={self.n}>"


class LpNorm(SymmetricNormOracle):
    """l_p norm, 1 <= p <= inf."""

    kind = "lp"

    def __init__(self, n: int, p: Union[float, str] = 2.0):
        super().__init__(n)
        self.p = _parse_p(p)
        ParameterValidator.validate_p(self.p)
        self._normalize()

    def params(self):
        return {"p": "inf" if math.isinf(self.p) else self.p}

    def _raw(self, mags):
        return eval_lp(mags, self.p)

    def _raw_rows(self, rows):
        top = rows.max(axis=1) if rows.shape[1] else np.zeros(rows.shape[0])
        if math.isinf(self.p):
            return top
        safe = np.where(top > 0, top, 1.0)
        return top * np.sum((rows / safe[:, None]) ** self.p, axis=1) ** (1.0 / self.p)

    def closed_form_max(self, k):
        inv = 0.0 if math.isinf(self.p) else 1.0 / self.p
        return float(k ** max(0.0, inv - 0.5))


class TopKNorm(SymmetricNormOracle):
    """Sum of the k largest magnitudes."""

    kind = "topk"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        ParameterValidator.validate_k(k, n)
        self.k = int(k)
        self._normalize()

    def params(self):
        return {"k": self.k}

    def _raw(self, mags):
        return eval_topk(mags, self.k, self.n)

    def _raw_rows(self, rows):
        cols = rows.shape[1]
        if self.k >= cols:
            return rows.sum(axis=1)
        return np.partition(rows, cols - self.k, axis=1)[:, cols - self.k :].sum(axis=1)

    def closed_form_max(self, k):
        return float(math.sqrt(min(k, self.k)))


class TopKDualNorm(SymmetricNormOracle):
    """max(l_inf, l_1 / k), the dual of the top-k norm."""

    kind = "topk_dual"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        ParameterValidator.validate_k(k, n)
        self.k = int(k)
        self._normalize()

    def params(self):
        return {"k": self.k}

    def _raw(self, mags):
        return eval_topk_dual(mags, self.k, self.n)

    def _raw_rows(self, rows):
        if rows.shape[1] == 0:
            return np.zeros(rows.shape[0])
        return np.maximum(rows.max(axis=1), rows.sum(axis=1) / self.k)

    def closed_form_max(self, k):
        return float(max(1.0, math.sqrt(k) / self.k))


class KSupportNorm(SymmetricNormOracle):
    """The k-support norm, gauge of conv{x : |supp x| <= k, l_2(x) <= 1}."""

    kind = "ksupport"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        ParameterValidator.validate_k(k, n)
        self.k = int(k)
        self._normalize()

    def params(self):
        return {"k": self.k}

    def _raw(self, mags):
        return eval_ksupport(mags, self.k, self.n)

    def closed_form_max(self, k):
        # dual is the l_2 norm of the k largest entries; extremal at the flat vector
        return float(math.sqrt(max(1.0, k / self.k)))


class BoxThetaDualNorm(SymmetricNormOracle):
    """Dual box-theta norm with parameters 0 < a < b <= c."""

    kind = "boxtheta_dual"

    def __init__(self, n: int, a: float, b: float, c: float):
        super().__init__(n)
        ParameterValidator.validate_box_theta(a, b, c, n)
        self.a, self.b, self.c = float(a), float(b), float(c)
        self._normalize()

    def params(self):
        return {"a": self.a, "b": self.b, "c": self.c}

    def _raw(self, mags):
        return eval_boxtheta_dual(mags, self.a, self.b, self.c, self.n)

    def closed_form_max(self, k):
        return 1.0


class QWrapNorm(SymmetricNormOracle):
    """Q-norm l(x) = Phi(x^2)^(1/2) built from a symmetric norm Phi."""

    kind = "qwrap"

    def __init__(self, inner: SymmetricNormOracle):
        super().__init__(inner.n)
        self.inner = inner
        self._normalize()

    def params(self):
        return {"inner": self.inner.to_config()}

    @property
    def name(self) -> str:
        return f"qwrap({self.inner.name})"

    def _raw(self, mags):
        return math.sqrt(self.inner.evaluate(mags * mags))

    def _raw_rows(self, rows):
        return np.sqrt(self.inner.evaluate_rows(rows * rows))

    def closed_form_max(self, k):
        # x^2 ranges over the simplex and Phi is convex, so the max sits at a vertex
        return 1.0


class MaxComboNorm(SymmetricNormOracle):
    """max(l_inf, l_1 / sqrt(n))."""

    kind = "maxcombo"

    def __init__(self, n: int):
        super().__init__(n)
        self._normalize()

    def _raw(self, mags):
        return eval_maxcombo(mags, self.n)

    def _raw_rows(self, rows):
        if rows.shape[1] == 0:
            return np.zeros(rows.shape[0])
        return np.maximum(rows.max(axis=1), rows.sum(axis=1) / math.sqrt(self.n))

    def closed_form_max(self, k):
        return 1.0


class InducedNorm(SymmetricNormOracle):
    """l^(k): the norm l evaluated on k-vectors padded with zeros."""

    kind = "induced"

    def __init__(self, base: SymmetricNormOracle, k: int):
        super().__init__(k)
        ParameterValidator.validate_k(k, base.n)
        self.base = base
        self._normalize()

    def params(self):
        return {"k": self.n, "base": self.base.to_config()}

    @property
    def name(self) -> str:
        return f"{self.base.name}^({self.n})"

    def _raw(self, mags):
        return self.base.evaluate(mags)

    def _raw_rows(self, rows):
        return self.base.evaluate_rows(rows)

    def closed_form_max(self, k):
        return self.base.closed_form_max(min(k, self.n))


class TradeoffSurrogateNorm(SymmetricNormOracle):
    """
    l_(D)(x) = max(D * M_l * l_2(x) / log n, l(x)), renormalized.

    Symmetric surrogate whose concentration is capped, used to trade
    approximation factor D for sketch size on Q-norms.
    """

    kind = "tradeoff_surrogate"

    def __init__(self, base: SymmetricNormOracle, D: float, median: float):
        super().__init__(base.n)
        ParameterValidator.validate_positive("D", D)
        ParameterValidator.validate_positive("median", median)
        self.base = base
        self.D = float(D)
        self.median = float(median)
        self.coefficient = self.D * self.median / math.log(max(base.n, 2))
        self._normalize()

    def params(self):
        return {"D": self.D, "median": self.median, "base": self.base.to_config()}

    def _raw(self, mags):
        l2 = float(np.sqrt(np.sum(mags * mags)))
        return max(self.coefficient * l2, self.base.evaluate(mags))

    def _raw_rows(self, rows):
        l2 = np.sqrt(np.sum(rows * rows, axis=1))
        return np.maximum(self.coefficient * l2, self.base.evaluate_rows(rows))

    def closed_form_max(self, k):
        inner = self.base.closed_form_max(k)
        if inner is None:
            return None
        return max(self.coefficient, inner) / self._scale


def q_wrap(phi: SymmetricNormOracle) -> QWrapNorm:
    """
    Wrap a symmetric norm Phi into the Q-norm Phi(x^2)^(1/2).

    Example:
        >>> q_wrap(LpNorm(2, 1)).evaluate([3, 4])
        5.0
    """
    return QWrapNorm(phi)


def restrict(l: SymmetricNormOracle, k: int) -> InducedNorm:
    """The induced norm l^(k)."""
    return InducedNorm(l, k)


def qnorm_tradeoff_norm(l: SymmetricNormOracle, D: float, median: float) -> TradeoffSurrogateNorm:
    """The surrogate max(D * M_l * l_2 / log n, l) for a D-approximation of a Q-norm."""
    return TradeoffSurrogateNorm(l, D, median)


def _resolve_k(value, n: int) -> int:
    if isinstance(value, str):
        text = value.strip().lower()
        if text == "sqrt":
            return max(1, int(round(math.sqrt(n))))
        if text.startswith("n/"):
            return max(1, n // int(text[2:]))
        return int(text)
    return int(value)


def norm_from_config(record: Dict[str, Any], n: int) -> SymmetricNormOracle:
    """
    Build an oracle from a JSON record.

    Accepts ``{"norm": {...}}`` or the inner record. ``k`` may be an integer,
    "sqrt" or "n/<d>".

    Raises:
        ConfigError: On unknown kinds or missing parameters
    """
    body = record.get("norm", record) if isinstance(record, dict) else None
    if not isinstance(body, dict) or "kind" not in body:
        raise ConfigError(f"Norm record needs a 'kind', got {record!r}")
    kind = body["kind"]
    try:
        if kind == "lp":
            return LpNorm(n, body.get("p", 2))
        if kind == "topk":
            return TopKNorm(n, _resolve_k(body["k"], n))
        if kind == "topk_dual":
            return TopKDualNorm(n, _resolve_k(body["k"], n))
        if kind == "ksupport":
            return KSupportNorm(n, _resolve_k(body["k"], n))
        if kind == "boxtheta_dual":
            return BoxThetaDualNorm(n, body["a"], body["b"], body["c"])
        if kind == "qwrap":
            return QWrapNorm(norm_from_config(body["inner"], n))
        if kind == "maxcombo":
            return MaxComboNorm(n)
        if kind == "induced":
            return InducedNorm(norm_from_config(body["base"], n), _resolve_k(body["k"], n))
        if kind == "tradeoff_surrogate":
            return TradeoffSurrogateNorm(
                norm_from_config(body["base"], n), body["D"], body["median"]
            )
    except KeyError as e:
        raise ConfigError(f"Norm {kind!r} is missing parameter {e}") from e
    raise ConfigError(f"Unknown norm kind {kind!r}")


def dual_probe(l: SymmetricNormOracle, x, samples: int, rng: np.random.Generator) -> float:
    """
    Randomized lower bound on the dual norm l'(x) = sup <x, y> / l(y).

    Probes every sorted indicator pattern aligned with |x| plus ``samples``
    random nonnegative vectors sorted the same way. Test probe only.
    """
    m = as_magnitudes(x)
    order = np.argsort(-m)
    best = 0.0
    for j in range(1, m.size + 1):
        y = np.zeros(m.size)
        y[order[:j]] = 1.0
        best = max(best, float(m @ y) / l.evaluate(y))
    for _ in range(samples):
        y = np.zeros(m.size)
        y[order] = np.sort(rng.exponential(size=m.size))[::-1]
        value = l.evaluate(y)
        if value > 0:
            best = max(best, float(m @ y) / value)
    return best
