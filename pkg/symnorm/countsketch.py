"""CountSketch tables and (beta, eps)-cover extraction.

A ``CountSketchBank`` is a stack of independently seeded CountSketch tables
of equal depth and width, updated with (cell, index, delta) triples. The
subsampling grid keeps one bank for all of its cells; ``CountSketchTable``
is the single-table face used on its own.

Each table also keeps a bounded candidate tracker: every touched index is
(re)inserted with its current estimate and the tracker keeps the
``capacity`` largest estimates, ties broken by lower index.

Example:
    >>> t = CountSketchTable(depth=5, width=64, beta=0.1, seed=1)
    >>> cs_update(t, StreamUpdate(3, 5))
    >>> cs_query(t, 3)
    5.0
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from symnorm.config import LabScale, SketchConstants
from symnorm.exceptions import SketchMismatchError, ValidationError
from symnorm.hashing import bucket_and_sign, seed_family
from symnorm.stream import FrequencyVector, StreamUpdate, f2_tail
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

# pair ids pack (cell, index) into one int64; indices stay below 2**40
_INDEX_BITS = 40


def _pair_ids(cells: np.ndarray, keys: np.ndarray) -> np.ndarray:
    return (cells.astype(np.int64) << _INDEX_BITS) + keys.astype(np.int64)


def _group_ranks(groups: np.ndarray) -> np.ndarray:
    """Rank of each element inside its run of equal (sorted) group ids."""
    if groups.size == 0:
        return groups.astype(np.int64)
    first = np.searchsorted(groups, groups, side="left")
    return np.arange(groups.size) - first


@dataclass
class CoverEntries:
    """Flat cover output of a bank, sorted by (cell, value)."""

    cells: np.ndarray
    keys: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.cells.size)

    def for_cell(self, cell: int) -> "HeavyHitterMap":
        sel = self.cells == cell
        return HeavyHitterMap(dict(zip(self.keys[sel].tolist(), self.values[sel].tolist())))


class CountSketchBank:
    """
    A stack of independently seeded CountSketch tables.

    Args:
        row_seeds: uint64 array of shape (cells, depth), one hash seed per row
        width: Buckets per row
        capacity: Candidate tracker capacity per table
    """

    def __init__(self, row_seeds: np.ndarray, width: int, capacity: int):
        row_seeds = np.asarray(row_seeds, dtype=np.uint64)
        if row_seeds.ndim != 2:
            raise ValidationError("row_seeds must have shape (cells, depth)")
        if width < 1 or capacity < 1:
            raise ValidationError(f"width and capacity must be >= 1, got {width}, {capacity}")
        self.row_seeds = row_seeds
        self.cells, self.depth = row_seeds.shape
        self.width = int(width)
        self.capacity = int(capacity)
        self.counters = np.zeros((self.cells, self.depth, self.width), dtype=np.int64)
        self.tracker_keys = np.full((self.cells, self.capacity), -1, dtype=np.int64)
        self.tracker_est = np.zeros((self.cells, self.capacity), dtype=np.float64)

    @classmethod
    def create(cls, cells: int, depth: int, width: int, capacity: int, seed: int) -> "CountSketchBank":
        return cls(seed_family(seed, "countsketch", shape=(cells, depth)), width, capacity)

    @property
    def counter_count(self) -> int:
        return int(self.counters.size)

    def locate(self, cells: np.ndarray, keys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Buckets and signs of (cell, key) pairs, each of shape (pairs, depth)."""
        return bucket_and_sign(keys[:, None], self.row_seeds[cells], self.width)

    def _flat(self, cells: np.ndarray, buckets: np.ndarray) -> np.ndarray:
        rows = np.arange(self.depth, dtype=np.int64)[None, :]
        return (cells[:, None].astype(np.int64) * self.depth + rows) * self.width + buckets

    def add(self, cells, keys, deltas) -> None:
        """Route (cell, key, delta) triples into the counters and refresh trackers."""
        cells = np.asarray(cells, dtype=np.int64)
        keys = np.asarray(keys, dtype=np.int64)
        deltas = np.asarray(deltas, dtype=np.int64)
        if cells.size == 0:
            return
        buckets, signs = self.locate(cells, keys)
        np.add.at(self.counters.reshape(-1), self._flat(cells, buckets).ravel(),
                  (signs * deltas[:, None]).ravel())
        self._touch(cells, keys)

    def query(self, cells, keys) -> np.ndarray:
        """Median over rows of sign * counter for each (cell, key) pair."""
        cells = np.asarray(cells, dtype=np.int64)
        keys = np.asarray(keys, dtype=np.int64)
        if cells.size == 0:
            return np.zeros(0, dtype=np.float64)
        buckets, signs = self.locate(cells, keys)
        rows = np.arange(self.depth)[None, :]
        return np.median(signs * self.counters[cells[:, None], rows, buckets], axis=1)

    def _touch(self, cells: np.ndarray, keys: np.ndarray) -> None:
        ids, first = np.unique(_pair_ids(cells, keys), return_index=True)
        cells, keys = cells[first], keys[first]
        est = np.abs(self.query(cells, keys))
        touched = np.unique(cells)
        old_keys = self.tracker_keys[touched].ravel()
        old_est = self.tracker_est[touched].ravel()
        old_cells = np.repeat(touched, self.capacity)
        live = old_keys >= 0
        old_cells, old_keys, old_est = old_cells[live], old_keys[live], old_est[live]
        stale = np.isin(_pair_ids(old_cells, old_keys), ids)
        all_cells = np.concatenate([old_cells[~stale], cells])
        all_keys = np.concatenate([old_keys[~stale], keys])
        all_est = np.concatenate([old_est[~stale], est])
        self._store(touched, all_cells, all_keys, all_est)

    def _store(self, touched, cells, keys, est) -> None:
        order = np.lexsort((keys, -est, cells))
        cells, keys, est = cells[order], keys[order], est[order]
        ranks = _group_ranks(cells)
        keep = ranks < self.capacity
        self.tracker_keys[touched] = -1
        self.tracker_est[touched] = 0.0
        self.tracker_keys[cells[keep], ranks[keep]] = keys[keep]
        self.tracker_est[cells[keep], ranks[keep]] = est[keep]

    def candidates(self) -> Tuple[np.ndarray, np.ndarray]:
        """All tracked (cell, key) pairs."""
        cells = np.repeat(np.arange(self.cells), self.capacity)
        keys = self.tracker_keys.ravel()
        live = keys >= 0
        return cells[live], keys[live]

    def f2_estimate(self) -> np.ndarray:
        """Per-table F2 estimate: median over rows of the sum of squared counters."""
        squares = (self.counters.astype(np.float64) ** 2).sum(axis=2)
        return np.median(squares, axis=1)

    def tail_f2_estimate(self, cells, keys, signed_est, head: int) -> np.ndarray:
        """
        Per-table F2 estimate after removing each table's ``head`` largest candidates.

        The removed candidates are subtracted from a float copy of the
        counters at their estimated values.
        """
        residual = self.counters.astype(np.float64)
        if head > 0 and cells.size:
            order = np.lexsort((keys, -np.abs(signed_est), cells))
            ranks = _group_ranks(cells[order])
            top = order[ranks < head]
            buckets, signs = self.locate(cells[top], keys[top])
            np.add.at(residual.reshape(-1), self._flat(cells[top], buckets).ravel(),
                      -(signs * signed_est[top][:, None]).ravel())
        return np.median((residual ** 2).sum(axis=2), axis=1)

    def cover(self, beta: float, eps: float) -> CoverEntries:
        """
        Extract a (beta, eps)-cover from every table.

        Candidates are kept when est^2 >= (beta/2) * tail F2 estimate, at most
        floor(2/beta) per table by estimate order; reported values are
        |est| * (1 + eps/2).
        """
        ParameterValidator.validate_positive("beta", beta)
        ParameterValidator.validate_positive("eps", eps)
        cells, keys = self.candidates()
        est = self.query(cells, keys)
        candidates = cells.size
        mags = np.abs(est)
        tail = self.tail_f2_estimate(cells, keys, est, int(math.floor(1.0 / beta)))
        keep = (mags > 0) & (mags * mags >= 0.5 * beta * tail[cells])
        cells, keys, mags = cells[keep], keys[keep], mags[keep]
        order = np.lexsort((keys, -mags, cells))
        cells, keys, mags = cells[order], keys[order], mags[order]
        limit = max(1, int(math.floor(2.0 / beta)))
        keep = _group_ranks(cells) < limit
        logger.debug("cover: %d of %d candidates kept over %d tables",
                     int(keep.sum()), int(candidates), self.cells)
        cells, keys, values = cells[keep], keys[keep], mags[keep] * (1.0 + eps / 2.0)
        order = np.lexsort((keys, values, cells))
        return CoverEntries(cells[order], keys[order], values[order])

    def compatible(self, other: "CountSketchBank") -> bool:
        return (
            self.counters.shape == other.counters.shape
            and self.capacity == other.capacity
            and np.array_equal(self.row_seeds, other.row_seeds)
        )

    def merge(self, other: "CountSketchBank") -> "CountSketchBank":
        """
        Counter-wise sum of two identically seeded banks.

        Trackers are re-derived from the union of both trackers under the
        merged counters.

        Raises:
            SketchMismatchError: If seeds or shapes differ
        """
        if not self.compatible(other):
            raise SketchMismatchError("Cannot merge CountSketch banks with different seeds or shapes")
        merged = CountSketchBank(self.row_seeds, self.width, self.capacity)
        merged.counters = self.counters + other.counters
        c1, k1 = self.candidates()
        c2, k2 = other.candidates()
        cells = np.concatenate([c1, c2])
        keys = np.concatenate([k1, k2])
        if cells.size:
            _, first = np.unique(_pair_ids(cells, keys), return_index=True)
            cells, keys = cells[first], keys[first]
            merged._store(np.arange(self.cells), cells, keys, np.abs(merged.query(cells, keys)))
        return merged


@dataclass
class HeavyHitterMap:
    """Map index -> magnitude estimate; each index at most once."""

    entries: Dict[int, float] = field(default_factory=dict)

    def __contains__(self, index: int) -> bool:
        return index in self.entries

    def __getitem__(self, index: int) -> float:
        return self.entries[index]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def to_dict(self) -> Dict[str, float]:
        return {str(k): v for k, v in sorted(self.entries.items())}


class CountSketchTable:
    """
    A single CountSketch table with a candidate tracker.

    Args:
        depth: Rows d
        width: Buckets per row w
        beta: Heaviness; sets tracker capacity ceil(4/beta)
        capacity: Explicit tracker capacity, used when beta is None
        seed: Seed of the row hashes

    Example:
        >>> t = CountSketchTable.sized(n=200, beta=0.25, eps=0.2, delta=0.01, seed=3)
        >>> t.depth, t.capacity
        (5, 16)
    """

    def __init__(
        self,
        depth: int,
        width: int,
        beta: Optional[float] = None,
        capacity: Optional[int] = None,
        seed: int = 0,
    ):
        if depth < 1:
            raise ValidationError(f"depth must be >= 1, got {depth}")
        if beta is not None:
            ParameterValidator.validate_positive("beta", beta)
            capacity = int(math.ceil(4.0 / beta))
        elif capacity is None:
            raise ValidationError("Either beta or capacity is required")
        self.seed = seed
        self.bank = CountSketchBank.create(1, depth, width, capacity, seed)

    @classmethod
    def sized(
        cls,
        n: int,
        beta: float,
        eps: float,
        delta: float,
        seed: int = 0,
        constants: Optional[SketchConstants] = None,
        lab: Optional[LabScale] = None,
    ) -> "CountSketchTable":
        """
        Table sized for a (beta, eps)-cover with failure probability delta.

        Width is c_w / ((eps/2)^2 * beta), depth is c_d * ln(n / delta).

        Raises:
            ValidationError: If delta >= eps
        """
        constants = constants or SketchConstants()
        lab = lab or LabScale.default()
        ParameterValidator.validate_cover_parameters(eps, delta)
        width = lab.width(constants.c_w / ((eps / 2.0) ** 2 * beta))
        depth = lab.depth(constants.c_d * math.log(n / delta))
        return cls(depth, width, beta=beta, seed=seed)

    @property
    def depth(self) -> int:
        return self.bank.depth

    @property
    def width(self) -> int:
        return self.bank.width

    @property
    def capacity(self) -> int:
        return self.bank.capacity

    @property
    def counters(self) -> np.ndarray:
        return self.bank.counters[0]

    @property
    def counter_count(self) -> int:
        return self.bank.counter_count

    def tracked(self) -> Dict[int, float]:
        keys = self.bank.tracker_keys[0]
        live = keys >= 0
        return dict(zip(keys[live].tolist(), self.bank.tracker_est[0][live].tolist()))

    def update(self, index: int, delta: int) -> None:
        self.bank.add(np.zeros(1, np.int64), np.array([index]), np.array([delta]))

    def update_batch(self, indices, deltas) -> None:
        """Apply many updates at once; equal to applying them one by one on the counters."""
        keys, inverse = np.unique(np.asarray(indices, dtype=np.int64), return_inverse=True)
        totals = np.zeros(keys.size, dtype=np.int64)
        np.add.at(totals, inverse, np.asarray(deltas, dtype=np.int64))
        self.bank.add(np.zeros(keys.size, np.int64), keys, totals)

    def query(self, index: int) -> float:
        return float(self.bank.query(np.zeros(1, np.int64), np.array([index]))[0])

    def heavy_hitters(self, beta: float, eps: float) -> HeavyHitterMap:
        return self.bank.cover(beta, eps).for_cell(0)

    def f2_estimate(self) -> float:
        return float(self.bank.f2_estimate()[0])

    def merge(self, other: "CountSketchTable") -> "CountSketchTable":
        merged = CountSketchTable.__new__(CountSketchTable)
        merged.seed = self.seed
        merged.bank = self.bank.merge(other.bank)
        return merged


def cs_update(t: CountSketchTable, u: StreamUpdate) -> None:
    """Route one update into every row and refresh the tracker."""
    t.update(int(u[0]), int(u[1]))


def cs_query(t: CountSketchTable, i: int) -> float:
    """Median-of-rows estimate of v_i."""
    return t.query(i)


def cs_heavy_hitters(t: CountSketchTable, beta: float, eps: float) -> HeavyHitterMap:
    """
    (beta, eps)-cover of the stream seen by the table.

    Example:
        >>> t = CountSketchTable(depth=5, width=64, beta=1.0, seed=0)
        >>> len(cs_heavy_hitters(t, 1.0, 0.2)) <= 2
        True
    """
    return t.heavy_hitters(beta, eps)


def cs_merge(t1: CountSketchTable, t2: CountSketchTable) -> CountSketchTable:
    """Counter-wise sum of two identically seeded tables."""
    return t1.merge(t2)


def f2_estimate(t: CountSketchTable) -> float:
    """Median-over-rows estimate of F2 of the table's stream."""
    return t.f2_estimate()


def is_cover(D: HeavyHitterMap, v: FrequencyVector, beta: float, eps: float) -> bool:
    """
    Check the cover conditions exactly against a frequency vector.

    (a) every i with v_i^2 >= beta * F2 tail past floor(1/beta) is in D,
    (b) |v_j| <= D[j] <= (1 + eps)|v_j| for every entry,
    (c) |D| <= 2/beta.
    """
    values = v.values if isinstance(v, FrequencyVector) else np.asarray(v)
    tail = f2_tail(values, int(math.floor(1.0 / beta)))
    heavy = np.flatnonzero(values.astype(np.float64) ** 2 >= beta * tail)
    heavy = heavy[values[heavy] != 0]
    if any(int(i) not in D for i in heavy):
        return False
    for j, estimate in D.items():
        magnitude = abs(int(values[j]))
        if not (magnitude <= estimate * (1 + 1e-12) and estimate <= (1 + eps) * magnitude):
            return False
    return len(D) <= 2.0 / beta
