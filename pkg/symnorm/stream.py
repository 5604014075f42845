"""Turnstile stream model, exact frequency oracle and level vectors.

A turnstile stream is a sequence of signed updates ``(index, delta)`` to an
n-dimensional integer vector. ``FrequencyVector`` replays a stream exactly
and enforces the magnitude bound m (default n**3) on every prefix.

A ``LevelVector`` is the succinct summary of a vector under base alpha:
level i (1-based) counts the coordinates with alpha**(i-1) <= |v_j| < alpha**i.
``materialize`` turns it back into a coordinate-query view holding b_i
copies of alpha**i.

Example:
    >>> v = FrequencyVector(4).apply_stream([(0, 1), (1, -2), (2, 4)])
    >>> exact_level_vector(v, 2.0).counts[:3].tolist()
    [1, 1, 1]
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from symnorm.exceptions import InfeasibleSpecError, StreamError, ValidationError
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

MAGNITUDE_EXPONENT = 3
STREAM_KINDS = ("planted-levels", "random-turnstile", "single-spike")


def default_magnitude_bound(n: int) -> int:
    """Default magnitude bound m = n**3 (at least 8)."""
    return max(int(n), 2) ** MAGNITUDE_EXPONENT


class StreamUpdate(NamedTuple):
    """A single turnstile update."""

    index: int
    delta: int


@dataclass(frozen=True, eq=False)
class UpdateStream:
    """
    An ordered sequence of updates held as two int64 arrays.

    Iterating yields ``StreamUpdate`` tuples; ``chunks`` yields array slices
    for vectorized ingestion.
    """

    n: int
    indices: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        deltas = np.ascontiguousarray(self.deltas, dtype=np.int64)
        if indices.shape != deltas.shape or indices.ndim != 1:
            raise ValidationError("indices and deltas must be 1-D arrays of equal length")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "deltas", deltas)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> Iterator[StreamUpdate]:
        for i, d in zip(self.indices.tolist(), self.deltas.tolist()):
            yield StreamUpdate(i, d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UpdateStream):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.deltas, other.deltas)
        )

    def chunks(self, size: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """Yield consecutive (indices, deltas) slices of at most ``size`` updates."""
        size = max(1, int(size))
        for start in range(0, len(self), size):
            yield self.indices[start : start + size], self.deltas[start : start + size]

    def tobytes(self) -> bytes:
        """Canonical byte rendering, used for determinism checks."""
        return self.indices.astype("<i8").tobytes() + self.deltas.astype("<i8").tobytes()

    def concat(self, other: "UpdateStream") -> "UpdateStream":
        return UpdateStream(
            max(self.n, other.n),
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.deltas, other.deltas]),
        )

    @classmethod
    def from_updates(cls, updates: Iterable, n: int) -> "UpdateStream":
        pairs = [(int(u[0]), int(u[1])) for u in updates]
        if not pairs:
            return cls(n, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        idx, dlt = zip(*pairs)
        return cls(n, np.array(idx, dtype=np.int64), np.array(dlt, dtype=np.int64))


def as_update_stream(stream, n: Optional[int] = None) -> UpdateStream:
    """Normalize an UpdateStream or an iterable of (index, delta) pairs."""
    if isinstance(stream, UpdateStream):
        return stream
    updates = list(stream)
    if n is None:
        n = 1 + max((int(u[0]) for u in updates), default=0)
    return UpdateStream.from_updates(updates, n)


def check_stream(stream: UpdateStream, n: int, m: int, initial: Optional[np.ndarray] = None) -> int:
    """
    Check indices and the magnitude bound on every prefix without building v.

    Memory is proportional to the stream length, not to n.

    Returns:
        The largest prefix magnitude

    Raises:
        StreamError: If an index is out of range or a prefix exceeds m
    """
    if len(stream) == 0:
        return 0
    idx, dlt = stream.indices, stream.deltas
    if int(idx.min()) < 0 or int(idx.max()) >= n:
        bad = idx[(idx < 0) | (idx >= n)][0]
        raise StreamError(f"Index {int(bad)} out of range for dimension {n}")
    order = np.argsort(idx, kind="stable")
    sidx, sdlt = idx[order], dlt[order]
    running = np.cumsum(sdlt)
    starts = np.flatnonzero(np.r_[True, sidx[1:] != sidx[:-1]])
    lengths = np.diff(np.r_[starts, sidx.size])
    base = np.repeat(running[starts] - sdlt[starts], lengths)
    prefix = running - base
    if initial is not None:
        prefix = prefix + initial[sidx]
    worst = int(np.abs(prefix).max())
    if worst > m:
        raise StreamError(f"Magnitude bound m={m} exceeded (prefix magnitude {worst})")
    return worst


class FrequencyVector:
    """
    Exact accumulator of a turnstile stream.

    Args:
        n: Dimension
        magnitude_bound: Bound m on every |v_i| after any prefix (default n**3)
        values: Optional initial values
    """

    def __init__(self, n: int, magnitude_bound: Optional[int] = None, values=None):
        ParameterValidator.validate_dimension(n)
        self.n = n
        self.m = int(magnitude_bound) if magnitude_bound is not None else default_magnitude_bound(n)
        if values is None:
            self.values = np.zeros(n, dtype=np.int64)
        else:
            self.values = np.array(values, dtype=np.int64)
            if self.values.shape != (n,):
                raise ValidationError(f"values must have shape ({n},), got {self.values.shape}")
            if self.values.size and int(np.abs(self.values).max()) > self.m:
                raise StreamError(f"Initial values exceed the magnitude bound m={self.m}")

    def apply(self, update: StreamUpdate) -> "FrequencyVector":
        index, delta = int(update[0]), int(update[1])
        ParameterValidator.validate_index(index, self.n)
        new_value = int(self.values[index]) + delta
        if abs(new_value) > self.m:
            raise StreamError(
                f"Magnitude bound m={self.m} exceeded at index {index} (value {new_value})"
            )
        self.values[index] = new_value
        return self

    def apply_stream(self, stream) -> "FrequencyVector":
        """
        Apply a whole stream, checking the magnitude bound on every prefix.

        Raises:
            StreamError: If an index is out of range or a prefix exceeds m
        """
        s = as_update_stream(stream, self.n)
        check_stream(s, self.n, self.m, initial=self.values)
        if len(s):
            np.add.at(self.values, s.indices, s.deltas)
        return self

    @classmethod
    def from_stream(cls, stream, n: int, magnitude_bound: Optional[int] = None):
        return cls(n, magnitude_bound).apply_stream(stream)

    def copy(self) -> "FrequencyVector":
        return FrequencyVector(self.n, self.m, self.values.copy())

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.values))

    def __getitem__(self, index: int) -> int:
        return int(self.values[index])

    def __len__(self) -> int:
        return self.n

    def dense(self) -> np.ndarray:
        return self.values


def apply_update(v: FrequencyVector, u: StreamUpdate) -> FrequencyVector:
    """
    Apply one update to a frequency vector in place.

    Raises:
        StreamError: If the index is out of range or |v_i| would exceed m

    Example:
        >>> apply_update(FrequencyVector(3), StreamUpdate(1, 5)).values.tolist()
        [0, 5, 0]
    """
    return v.apply(u)


# -- levels -------------------------------------------------------------------


def level_count(alpha: float, magnitude_bound: int) -> int:
    """Number of levels t = ceil(log_alpha m) + 1."""
    ParameterValidator.validate_base(alpha)
    return int(math.ceil(math.log(max(magnitude_bound, 2)) / math.log(alpha))) + 1


def level_powers(alpha: float, t: int) -> np.ndarray:
    """Boundaries alpha**0 .. alpha**t."""
    return np.power(float(alpha), np.arange(t + 1, dtype=np.float64))


def level_indices(magnitudes, alpha: float, t: int) -> np.ndarray:
    """
    Half-open level of each magnitude: i with alpha**(i-1) <= x < alpha**i.

    Zero magnitudes map to level 0 (no level).
    """
    mags = np.abs(np.asarray(magnitudes, dtype=np.float64))
    levels = np.searchsorted(level_powers(alpha, t), mags, side="right")
    levels[mags == 0] = 0
    return np.minimum(levels, t)


def level_index(magnitude: float, alpha: float, t: Optional[int] = None) -> int:
    """Level of a single magnitude; 0 for zero."""
    if t is None:
        t = level_count(alpha, int(max(abs(magnitude), 2)) + 1)
    return int(level_indices([magnitude], alpha, t)[0])


@dataclass(frozen=True, eq=False)
class LevelVector:
    """
    Level vector V(v): base alpha and counts b_1..b_t.

    ``counts[i - 1]`` is b_i.
    """

    base: float
    counts: np.ndarray

    def __post_init__(self):
        ParameterValidator.validate_base(self.base)
        counts = np.asarray(self.counts)
        if counts.ndim != 1:
            raise ValidationError("Level counts must be a 1-D array")
        if counts.size and float(counts.min()) < 0:
            raise ValidationError("Level counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @property
    def t(self) -> int:
        return int(self.counts.size)

    def total(self) -> float:
        return float(self.counts.sum())

    def values(self, lower: bool = False) -> np.ndarray:
        """Level representatives alpha**i (or alpha**(i-1) when ``lower``)."""
        exponents = np.arange(1, self.t + 1, dtype=np.float64) - (1.0 if lower else 0.0)
        return np.power(float(self.base), exponents)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LevelVector):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.counts, other.counts)

    def to_dict(self) -> Dict[str, Any]:
        return {"base": self.base, "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LevelVector":
        return cls(float(data["base"]), np.asarray(data["counts"]))


def exact_level_vector(
    v: Union[FrequencyVector, np.ndarray], alpha: float, magnitude_bound: Optional[int] = None
) -> LevelVector:
    """
    Level vector of a frequency vector under base alpha.

    Args:
        v: Frequency vector (or raw integer array)
        alpha: Level base, > 1
        magnitude_bound: m; defaults to the vector's own bound

    Returns:
        LevelVector with t = ceil(log_alpha m) + 1 levels

    Example:
        >>> exact_level_vector(np.array([1, -2, 4, 0]), 2.0).counts[:3].tolist()
        [1, 1, 1]
    """
    ParameterValidator.validate_base(alpha)
    if isinstance(v, FrequencyVector):
        values, m = v.values, v.m if magnitude_bound is None else magnitude_bound
    else:
        values = np.asarray(v, dtype=np.int64)
        m = magnitude_bound if magnitude_bound is not None else default_magnitude_bound(values.size)
    mags = np.abs(values)
    if mags.size and int(mags.max()) > m:
        raise StreamError(f"Vector exceeds the magnitude bound m={m}")
    t = level_count(alpha, m)
    levels = level_indices(mags, alpha, t)
    counts = np.bincount(levels[levels > 0] - 1, minlength=t)[:t].astype(np.int64)
    return LevelVector(float(alpha), counts)


class LevelVectorView:
    """
    Coordinate-query view of a materialized level vector.

    Bucket i holds b_i copies of alpha**i (alpha**(i-1) when ``lower``);
    remaining coordinates are zero. Only the nonzero prefix is ever built.
    """

    def __init__(self, lv: LevelVector, n: int, lower: bool = False):
        counts = np.rint(lv.counts).astype(np.int64)
        if int(counts.sum()) > n:
            raise ValidationError(f"Level counts sum to {int(counts.sum())}, more than n={n}")
        self.level_vector = lv
        self.n = n
        self.lower = lower
        self._counts = counts
        self._ends = np.cumsum(counts)
        self._values = lv.values(lower=lower)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> float:
        if j < 0 or j >= self.n:
            raise IndexError(f"coordinate {j} out of range for dimension {self.n}")
        level = int(np.searchsorted(self._ends, j, side="right"))
        if level >= self._counts.size:
            return 0.0
        return float(self._values[level])

    def nonzero(self) -> int:
        return int(self._ends[-1]) if self._ends.size else 0

    def dense(self) -> np.ndarray:
        """Nonzero prefix; the zero tail is implicit."""
        return np.repeat(self._values, self._counts)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.float64)
        prefix = self.dense()
        out[: prefix.size] = prefix
        return out


def materialize(lv: LevelVector, n: int, lower: bool = False) -> LevelVectorView:
    """
    Build V from a level vector as a coordinate-query view.

    Raises:
        ValidationError: If the counts exceed n

    Example:
        >>> materialize(LevelVector(2.0, np.array([1, 1, 1])), 5).to_array().tolist()
        [2.0, 4.0, 8.0, 0.0, 0.0]
    """
    return LevelVectorView(lv, n, lower=lower)


def bucket(lv: LevelVector, i: int) -> LevelVector:
    """V_i: the level vector holding only level i."""
    counts = np.zeros_like(lv.counts)
    counts[i - 1] = lv.counts[i - 1]
    return LevelVector(lv.base, counts)


def replace_level(lv: LevelVector, i: int, count) -> LevelVector:
    """V with level i replaced by ``count`` copies."""
    counts = lv.counts.astype(np.float64 if isinstance(count, float) else lv.counts.dtype).copy()
    counts[i - 1] = count
    return LevelVector(lv.base, counts)


def is_important(lv: LevelVector, i: int, beta: float) -> bool:
    """
    Whether level i is beta-important.

    b_i > beta * sum_{j>i} b_j and b_i * alpha**(2i) >= beta * sum_{j<=i} b_j * alpha**(2j).
    """
    b = lv.counts.astype(np.float64)
    if b[i - 1] <= 0:
        return False
    above = b[i:].sum()
    # rescale by alpha**(2i) to keep the weights bounded
    weights = np.power(float(lv.base), 2.0 * (np.arange(1, i + 1) - i))
    below = float((b[:i] * weights).sum())
    return bool(b[i - 1] > beta * above and b[i - 1] >= beta * below)


def is_contributing(l, lv: LevelVector, i: int, beta: float) -> bool:
    """Whether level i is beta-contributing under norm l: l(V_i) >= beta * l(V)."""
    part = l.evaluate(materialize(bucket(lv, i), l.n))
    return bool(part > 0 and part >= beta * l.evaluate(materialize(lv, l.n)))


def f2_tail(v: Union[FrequencyVector, np.ndarray], k: int) -> float:
    """F2 with the k largest magnitudes removed."""
    values = v.values if isinstance(v, FrequencyVector) else np.asarray(v)
    sq = np.sort(np.abs(values).astype(np.float64) ** 2)[::-1]
    return float(sq[k:].sum())


def is_detectable(lv: LevelVector, i: int, beta: float, v) -> bool:
    """Whether level i is beta-detectable: alpha**(2i) >= beta * F2 tail past floor(1/beta)."""
    return bool(float(lv.base) ** (2 * i) >= beta * f2_tail(v, int(math.floor(1.0 / beta))))


# -- generators ---------------------------------------------------------------


@dataclass(frozen=True)
class StreamSpec:
    """
    Reproducible synthetic stream description.

    ``kind`` is one of planted-levels, random-turnstile or single-spike.
    Identical (kind, params, seed) always produce the identical stream.
    """

    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def with_seed(self, seed: int) -> "StreamSpec":
        return StreamSpec(self.kind, dict(self.params), int(seed))

    def to_dict(self) -> Dict[str, Any]:
        return {"stream": {"kind": self.kind, "params": dict(self.params), "seed": self.seed}}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StreamSpec":
        body = data.get("stream", data)
        if "kind" not in body:
            raise ValidationError("Stream spec needs a 'kind'")
        return cls(str(body["kind"]), dict(body.get("params", {})), int(body.get("seed", 0)))


def _split(rng: np.random.Generator, value: int, parts: int) -> List[int]:
    if parts <= 1 or abs(value) < parts:
        return [value]
    sign = 1 if value > 0 else -1
    pieces = rng.multinomial(abs(value), [1.0 / parts] * parts)
    return [sign * int(p) for p in pieces if p]


def _level_magnitude(rng, alpha: float, level: int, powers: np.ndarray, t: int) -> int:
    lo = int(math.ceil(powers[level - 1]))
    while lo > 1 and level_indices([lo - 1], alpha, t)[0] == level:
        lo -= 1
    hi = int(math.ceil(powers[level])) if level < powers.size else lo
    while hi > lo and level_indices([hi], alpha, t)[0] != level:
        hi -= 1
    if level_indices([lo], alpha, t)[0] != level:
        raise InfeasibleSpecError(f"Level {level} at base {alpha} contains no integer magnitude")
    return int(rng.integers(lo, hi + 1))


def _emit(rng, index: int, value: int, splits: int, churn: bool, m: int, out: List[Tuple[int, int]]):
    for piece in _split(rng, value, splits):
        out.append((index, piece))
    if churn and value:
        room = min(abs(value), m - abs(value))
        if room > 0:
            e = int(rng.integers(1, room + 1)) * (1 if value > 0 else -1)
            out.append((index, e))
            out.append((index, -e))


def _planted(spec: StreamSpec, rng: np.random.Generator) -> UpdateStream:
    p = spec.params
    n = int(p["n"])
    alpha = float(p.get("alpha", 2.0))
    counts = [int(c) for c in p["counts"]]
    m = int(p.get("magnitude_bound", default_magnitude_bound(n)))
    magnitudes = p.get("magnitudes")
    ParameterValidator.validate_base(alpha)
    total = sum(counts)
    if any(c < 0 for c in counts) or total > n:
        raise InfeasibleSpecError(f"Planted counts sum to {total}, more than n={n}")
    t = level_count(alpha, m)
    if len(counts) > t:
        raise InfeasibleSpecError(f"{len(counts)} planted levels exceed t={t} for m={m}")
    powers = level_powers(alpha, t)
    positions = rng.permutation(n)[:total]
    updates: List[Tuple[int, int]] = []
    cursor = 0
    for level, count in enumerate(counts, start=1):
        for _ in range(count):
            if magnitudes is not None and magnitudes[level - 1]:
                mag = int(magnitudes[level - 1])
                if level_indices([mag], alpha, t)[0] != level:
                    raise InfeasibleSpecError(f"Magnitude {mag} does not lie in level {level}")
            else:
                mag = _level_magnitude(rng, alpha, level, powers, t)
            if mag > m:
                raise InfeasibleSpecError(f"Magnitude {mag} exceeds m={m}")
            sign = 1 if rng.random() < 0.5 else -1
            _emit(rng, int(positions[cursor]), sign * mag, int(p.get("splits", 1)),
                  bool(p.get("churn", False)), m, updates)
            cursor += 1
    order = rng.permutation(len(updates))
    return UpdateStream.from_updates([updates[j] for j in order], n)


def _random_turnstile(spec: StreamSpec, rng: np.random.Generator) -> UpdateStream:
    p = spec.params
    n = int(p["n"])
    count = int(p["updates"])
    max_delta = int(p.get("max_delta", 10))
    m = int(p.get("magnitude_bound", default_magnitude_bound(n)))
    if count < 0 or max_delta < 1:
        raise InfeasibleSpecError("random-turnstile needs updates >= 0 and max_delta >= 1")
    if count * max_delta > m:
        raise InfeasibleSpecError(f"{count} updates of size {max_delta} may exceed m={m}")
    indices = rng.integers(0, n, size=count)
    deltas = rng.integers(1, max_delta + 1, size=count) * rng.choice([-1, 1], size=count)
    return UpdateStream(n, indices, deltas)


def _single_spike(spec: StreamSpec, rng: np.random.Generator) -> UpdateStream:
    p = spec.params
    n = int(p["n"])
    magnitude = int(p["magnitude"])
    m = int(p.get("magnitude_bound", default_magnitude_bound(n)))
    if magnitude < 0 or magnitude > m:
        raise InfeasibleSpecError(f"Spike magnitude {magnitude} outside [0, {m}]")
    index = int(p["index"]) if "index" in p else int(rng.integers(0, n))
    if not 0 <= index < n:
        raise InfeasibleSpecError(f"Spike index {index} out of range for n={n}")
    updates: List[Tuple[int, int]] = []
    _emit(rng, index, magnitude, int(p.get("splits", 1)), bool(p.get("churn", False)), m, updates)
    return UpdateStream.from_updates(updates, n)


_GENERATORS = {
    "planted-levels": _planted,
    "random-turnstile": _random_turnstile,
    "single-spike": _single_spike,
}


def generate_stream(spec: StreamSpec) -> UpdateStream:
    """
    Generate the update sequence described by a spec.

    Args:
        spec: Stream specification

    Returns:
        UpdateStream, a pure function of (kind, params, seed)

    Raises:
        InfeasibleSpecError: If counts exceed n or a magnitude exceeds m
        ValidationError: If the kind is unknown

    Example:
        >>> spec = StreamSpec("planted-levels", {"n": 100, "alpha": 2, "counts": [10, 0, 5]}, 7)
        >>> generate_stream(spec) == generate_stream(spec)
        True
    """
    generator = _GENERATORS.get(spec.kind)
    if generator is None:
        raise ValidationError(f"Unknown stream kind {spec.kind!r}; expected one of {STREAM_KINDS}")
    if "n" not in spec.params:
        raise ValidationError("Stream spec params need 'n'")
    rng = np.random.default_rng(int(spec.seed) & ((1 << 64) - 1))
    stream = generator(spec, rng)
    logger.debug("generated %s stream: n=%d, %d updates", spec.kind, stream.n, len(stream))
    return stream


# -- stream files -------------------------------------------------------------


def read_stream(path: Union[str, Path], n: Optional[int] = None) -> UpdateStream:
    """
    Read a stream file: one ``<index> <delta>`` per line, ``#`` starts a comment.

    Args:
        path: File path
        n: Dimension; defaults to max index + 1

    Raises:
        StreamError: On unreadable or malformed files, indices outside [0, n)
            or values that do not fit 64-bit integers
    """
    indices: List[int] = []
    deltas: List[int] = []
    try:
        handle = open(path, "r", encoding="utf-8")
    except OSError as e:
        raise StreamError(f"Cannot read stream file {path}: {str(e)}") from e
    with handle:
        try:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise StreamError(f"{path}:{lineno}: expected '<index> <delta>', got {raw.strip()!r}")
                try:
                    indices.append(int(parts[0]))
                    deltas.append(int(parts[1]))
                except ValueError as e:
                    raise StreamError(f"{path}:{lineno}: {str(e)}") from e
        except UnicodeDecodeError as e:
            raise StreamError(f"{path}: not valid UTF-8 text: {e.reason}") from e
    dim = n if n is not None else (max(indices) + 1 if indices else 1)
    bad = [i for i in indices if i < 0 or i >= dim]
    if bad:
        raise StreamError(f"Index {bad[0]} out of range for dimension {dim}")
    try:
        return UpdateStream(dim, np.array(indices, dtype=np.int64), np.array(deltas, dtype=np.int64))
    except OverflowError as e:
        raise StreamError(f"{path}: index or delta outside the 64-bit integer range") from e


def write_stream(path: Union[str, Path], stream, header: Optional[str] = None) -> None:
    """Write a stream in the ``<index> <delta>`` text format."""
    s = as_update_stream(stream)
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.extend(f"{i} {d}" for i, d in zip(s.indices.tolist(), s.deltas.tolist()))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
