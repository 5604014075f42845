"""Level-count estimation over a subsampling grid of CountSketch tables.

The grid has one cell per (phi, r, b): subsampling depth phi in 0..Phi,
repetition r in 0..R-1 and block member b in 0..B-1 (B = 1 for the
two-pass estimator). Cell (phi, r, b) sees every index whose membership
hash under the cell's seed passes at rate 2**-phi, independently per cell.

After ingestion each cell yields a cover map. Counting, per level i and
depth phi, the repetitions whose map holds an item of level i gives the
occupancy A[phi, i]. The deepest depth q_i with enough occupancy turns
into a hit rate eta_i and then into the count estimate

    b_i = log(1 - eta_i) / log(1 - 2**-q_i)

Example:
    >>> spec = StreamSpec("planted-levels", {"n": 512, "alpha": 2.0, "counts": [0, 0, 0, 64]}, seed=1)
    >>> est = estimate_levels_two_pass(generate_stream(spec), 2.0, 0.05, 0.2, 0.01, seed=3)
    >>> est.counts[3] <= 64
    True
"""
import logging
import math
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from symnorm.config import LabScale, SketchConstants
from symnorm.countsketch import CountSketchBank, CountSketchTable, CoverEntries
from symnorm.exceptions import SketchMismatchError, StreamError, ValidationError
from symnorm.hashing import derive_seed, mix64, sampled, seed_family, uniform01
from symnorm.stream import (
    LevelVector,
    StreamUpdate,
    UpdateStream,
    as_update_stream,
    level_count,
    level_indices,
)
from symnorm.validator import ParameterValidator

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 1 << 16
# membership matrices are built in blocks of at most this many entries
_MEMBERSHIP_BLOCK = 1 << 20


def _log(x: float) -> float:
    return math.log(max(x, 2.0))


@dataclass(frozen=True)
class SketchPlan:
    """
    Sizes and per-table parameters of a SampleLevelSketch.

    ``nominal`` keeps the unclamped sizes of the printed formulas, so sketch
    size accounting is available even when lab scaling caps the real ones.
    """

    n: int
    magnitude_bound: int
    passes: int
    alpha: float
    beta: float
    eps: float
    delta: float
    levels: int
    phi_max: int
    repetitions: int
    block: int
    depth: int
    width: int
    capacity: int
    beta_cs: float
    eps_cs: float
    occupancy_threshold: float
    deflation: float
    nominal: Dict[str, float] = field(default_factory=dict)
    constants: SketchConstants = field(default_factory=SketchConstants)
    lab: LabScale = field(default_factory=LabScale.default)

    @property
    def cells_per_depth(self) -> int:
        return self.repetitions * self.block

    @property
    def cells(self) -> int:
        return (self.phi_max + 1) * self.cells_per_depth

    @property
    def counter_count(self) -> int:
        return self.cells * self.depth * self.width

    @property
    def nominal_counter_count(self) -> float:
        nom = self.nominal
        return (self.phi_max + 1) * nom["repetitions"] * nom["block"] * nom["depth"] * nom["width"]

    def layout(self) -> Tuple[int, int, int, int, int]:
        return (self.phi_max, self.repetitions, self.block, self.depth, self.width)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["constants"] = self.constants.to_dict()
        data["lab"] = self.lab.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SketchPlan":
        body = dict(data)
        body["constants"] = SketchConstants.from_dict(body.get("constants", {}))
        body["lab"] = LabScale.from_dict(body.get("lab"))
        body["nominal"] = dict(body.get("nominal", {}))
        return cls(**body)


def plan_sketch(
    n: int,
    beta: float,
    eps: float,
    delta: float,
    *,
    alpha: Optional[float] = None,
    gamma: Optional[float] = None,
    passes: int = 1,
    constants: Optional[SketchConstants] = None,
    lab: Optional[LabScale] = None,
) -> SketchPlan:
    """
    Size a SampleLevelSketch.

    Two-pass sketches take the level base ``alpha``; one-pass sketches take
    ``gamma`` and are sized for the smallest randomized base 1 + gamma/2.

    Sizes:
        R = c_R * ln(1/delta) * ln^2 n / eps^2
        Phi = ceil(log2 n)
        B = ceil(ln(n^2/delta)) for one pass, 1 for two passes
        beta_cs = c_beta * beta / (t * ln(1/delta))
        eps_cs = gamma^2 / (8 ln n) for one pass, eps for two passes
        w = c_w / (eps_cs^2 * beta_cs), d = c_d * ln(n/delta)

    The level analysis needs delta < eps. The one-pass table precision
    eps_cs is far smaller than any useful delta and is not held to it.

    Raises:
        ValidationError: On out-of-range parameters or delta >= eps
    """
    constants = constants or SketchConstants()
    lab = lab or LabScale.default()
    ParameterValidator.validate_dimension(n)
    ParameterValidator.validate_positive("beta", beta)
    ParameterValidator.validate_cover_parameters(eps, delta)
    if passes == 1:
        if gamma is None:
            raise ValidationError("One-pass sketches need gamma")
        ParameterValidator.validate_randomized_base(gamma, None)
        base = 1.0 + gamma
        sizing_base = 1.0 + gamma / 2.0
        eps_cs = gamma * gamma / (8.0 * _log(n))
        block_printed = math.ceil(math.log(n * n / delta))
    elif passes == 2:
        if alpha is None:
            raise ValidationError("Two-pass sketches need alpha")
        ParameterValidator.validate_base(alpha)
        base = sizing_base = float(alpha)
        eps_cs = eps
        block_printed = 1
    else:
        raise ValidationError(f"passes must be 1 or 2, got {passes}")

    m = constants.magnitude_bound(n)
    t = level_count(sizing_base, m)
    log_inv_delta = math.log(1.0 / delta)
    printed = {
        "repetitions": constants.c_R * log_inv_delta * _log(n) ** 2 / (eps * eps),
        "block": float(block_printed),
        "beta_cs": min(1.0, constants.c_beta * beta / (t * log_inv_delta)),
    }
    printed["width"] = constants.c_w / (eps_cs * eps_cs * printed["beta_cs"])
    printed["depth"] = constants.c_d * math.log(n / delta)

    repetitions = lab.repetitions(printed["repetitions"])
    block = lab.block(printed["block"]) if passes == 1 else 1
    beta_cs = lab.heaviness(printed["beta_cs"])
    if lab.enabled and lab.occupancy_fraction is not None:
        threshold = lab.occupancy_fraction * repetitions
    else:
        threshold = repetitions * log_inv_delta / (constants.occupancy_divisor * _log(n))
    if lab.enabled and lab.deflation is not None:
        deflation = lab.deflation
    else:
        deflation = constants.deflation * eps

    plan = SketchPlan(
        n=int(n),
        magnitude_bound=int(m),
        passes=passes,
        alpha=base,
        beta=beta,
        eps=eps,
        delta=delta,
        levels=t,
        phi_max=int(math.ceil(math.log2(n))) if n > 1 else 0,
        repetitions=repetitions,
        block=block,
        depth=lab.depth(printed["depth"]),
        width=lab.width(printed["width"]),
        capacity=int(math.ceil(4.0 / beta_cs)),
        beta_cs=beta_cs,
        eps_cs=eps_cs,
        occupancy_threshold=float(threshold),
        deflation=float(deflation),
        nominal={k: float(math.ceil(v)) if k != "beta_cs" else v for k, v in printed.items()},
        constants=constants,
        lab=lab,
    )
    logger.info(
        "sketch plan n=%d passes=%d: Phi=%d R=%d B=%d d=%d w=%d beta_cs=%.3g (%d counters)",
        n, passes, plan.phi_max, repetitions, block, plan.depth, plan.width, beta_cs,
        plan.counter_count,
    )
    return plan


def member(seed: int, phi: int, j: int, index: int) -> bool:
    """Whether ``index`` belongs to the substream of grid cell (phi, j)."""
    cell_seed = mix64(np.uint64(j), derive_seed(seed, "levels", "member", phi))
    return bool(sampled(np.int64(index), cell_seed, phi))


class SampleLevelSketch:
    """
    The subsampling grid: one CountSketch table per (phi, r, b) cell.

    Cell (phi, j) with j = r * B + b lives at bank row phi * R * B + j.

    Args:
        plan: Sizes from ``plan_sketch``
        seed: Root seed of membership and row hashes
    """

    def __init__(self, plan: SketchPlan, seed: int):
        self.plan = plan
        self.seed = int(seed)
        per_depth = plan.cells_per_depth
        depths = range(plan.phi_max + 1)
        self.member_seeds = np.stack(
            [seed_family(self.seed, "levels", "member", phi, shape=(per_depth,)) for phi in depths]
        )
        row_seeds = np.concatenate(
            [seed_family(self.seed, "countsketch", phi, shape=(per_depth, plan.depth)) for phi in depths]
        )
        self.bank = CountSketchBank(row_seeds, plan.width, plan.capacity)
        self.updates_seen = 0

    @property
    def counter_count(self) -> int:
        return self.bank.counter_count

    def cell(self, phi: int, j: int) -> int:
        return phi * self.plan.cells_per_depth + j

    def table(self, phi: int, j: int) -> CountSketchTable:
        """A standalone copy of one cell's table."""
        row = self.cell(phi, j)
        bank = CountSketchBank(self.bank.row_seeds[row : row + 1], self.bank.width, self.bank.capacity)
        bank.counters[0] = self.bank.counters[row]
        bank.tracker_keys[0] = self.bank.tracker_keys[row]
        bank.tracker_est[0] = self.bank.tracker_est[row]
        table = CountSketchTable.__new__(CountSketchTable)
        table.seed = self.seed
        table.bank = bank
        return table

    def update(self, index: int, delta: int) -> None:
        self.ingest_arrays(np.array([index], dtype=np.int64), np.array([delta], dtype=np.int64))

    def ingest_arrays(self, indices: np.ndarray, deltas: np.ndarray) -> None:
        """Route a batch of updates into every cell whose substream holds their index."""
        if indices.size == 0:
            return
        if int(indices.min()) < 0 or int(indices.max()) >= self.plan.n:
            raise StreamError(f"Update index out of range for dimension {self.plan.n}")
        keys, inverse = np.unique(indices, return_inverse=True)
        totals = np.zeros(keys.size, dtype=np.int64)
        np.add.at(totals, inverse, deltas)
        self.updates_seen += int(indices.size)
        per_depth = self.plan.cells_per_depth
        if per_depth == 0:
            return
        step = max(1, _MEMBERSHIP_BLOCK // per_depth)
        for phi in range(self.plan.phi_max + 1):
            seeds = self.member_seeds[phi][:, None]
            for start in range(0, keys.size, step):
                block_keys = keys[start : start + step]
                rows, cols = np.nonzero(sampled(block_keys[None, :], seeds, phi))
                self.bank.add(phi * per_depth + rows, block_keys[cols], totals[start : start + step][cols])

    def ingest(self, stream, chunk: int = DEFAULT_CHUNK) -> "SampleLevelSketch":
        """Chunked ingestion; equal to per-update ingestion on the counters."""
        stream = as_update_stream(stream, self.plan.n)
        for indices, deltas in stream.chunks(chunk):
            self.ingest_arrays(indices, deltas)
        return self

    def compatible(self, other: "SampleLevelSketch") -> bool:
        return self.seed == other.seed and self.plan.to_dict() == other.plan.to_dict()

    def merge(self, other: "SampleLevelSketch") -> "SampleLevelSketch":
        """
        Merge two identically planned and seeded sketches by counter addition.

        Raises:
            SketchMismatchError: If plans or seeds differ
        """
        if not self.compatible(other):
            raise SketchMismatchError("Cannot merge sketches with different plans or seeds")
        merged = SampleLevelSketch.__new__(SampleLevelSketch)
        merged.plan = self.plan
        merged.seed = self.seed
        merged.member_seeds = self.member_seeds
        merged.bank = self.bank.merge(other.bank)
        merged.updates_seen = self.updates_seen + other.updates_seen
        return merged

    def cover(self) -> CoverEntries:
        return self.bank.cover(self.plan.beta_cs, self.plan.eps_cs)

    def grid_position(self, cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(phi, r, b) of bank rows."""
        per_depth = self.plan.cells_per_depth
        phi, j = np.divmod(cells, per_depth)
        r, b = np.divmod(j, self.plan.block)
        return phi, r, b


def sample_level_update(sk: SampleLevelSketch, u: StreamUpdate) -> None:
    """Feed one update to every grid cell whose substream contains its index."""
    sk.update(int(u[0]), int(u[1]))


def ingest(sk: SampleLevelSketch, updates, chunk: int = DEFAULT_CHUNK) -> SampleLevelSketch:
    """Chunked vectorized ingestion of a stream into a sketch."""
    return sk.ingest(updates, chunk)


def level_count_from_rate(eta: float, q: int) -> float:
    """
    Invert eta = 1 - (1 - 2**-q)**b for b.

    Returns 0 for eta <= 0, 1 for q = 0 (the full stream is sampled, so the
    rate carries no count information) and infinity for eta >= 1.

    Example:
        >>> round(level_count_from_rate(1 - 0.5 ** 3, 1), 9)
        3.0
    """
    if eta <= 0.0:
        return 0.0
    if q <= 0:
        return 1.0
    if eta >= 1.0:
        return math.inf
    return math.log1p(-eta) / math.log1p(-(2.0 ** -q))


@dataclass
class LevelEstimate:
    """
    Estimated level counts with per-level diagnostics.

    ``q[i]`` is -1 where no depth passed the occupancy threshold, and then
    ``counts[i]`` is 0.
    """

    base: float
    counts: List[float]
    q: List[int]
    eta: List[float]
    occupancy: List[List[int]]
    passes: int
    repetitions: int
    threshold: float
    deflation: float
    x: Optional[float] = None
    discarded_maps: int = 0
    total_maps: int = 0
    selected_maps: int = 0

    @property
    def t(self) -> int:
        return len(self.counts)

    def rounded_counts(self) -> np.ndarray:
        """Nearest-integer counts."""
        return np.rint(np.asarray(self.counts, dtype=np.float64)).astype(np.int64)

    def level_vector(self, n: Optional[int] = None) -> LevelVector:
        """
        Rounded counts as a LevelVector.

        With ``n`` the lowest levels are trimmed until the counts fit n.
        """
        counts = self.rounded_counts()
        if n is not None:
            excess = int(counts.sum()) - n
            for i in range(counts.size):
                if excess <= 0:
                    break
                cut = min(excess, int(counts[i]))
                counts[i] -= cut
                excess -= cut
        return LevelVector(self.base, counts)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LevelEstimate":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def _estimate_from_occupancy(
    occupancy: np.ndarray, plan: SketchPlan, base: float, passes: int, **extra
) -> LevelEstimate:
    t = occupancy.shape[1]
    R = plan.repetitions
    floor = max(plan.occupancy_threshold, 1.0)
    counts, qs, etas = [], [], []
    for i in range(t):
        passing = np.flatnonzero(occupancy[:, i] >= floor) if R > 0 else np.zeros(0, dtype=int)
        if passing.size == 0:
            counts.append(0.0)
            qs.append(-1)
            etas.append(0.0)
            continue
        q = int(passing.max())
        eta = float(occupancy[q, i]) / (R * (1.0 + plan.deflation))
        counts.append(float(min(level_count_from_rate(eta, q), plan.n)))
        qs.append(q)
        etas.append(eta)
    return LevelEstimate(
        base=float(base),
        counts=counts,
        q=qs,
        eta=etas,
        occupancy=occupancy.astype(int).tolist(),
        passes=passes,
        repetitions=R,
        threshold=float(plan.occupancy_threshold),
        deflation=float(plan.deflation),
        **extra,
    )


def _occupancy(sk: SampleLevelSketch, cells: np.ndarray, levels: np.ndarray, t: int) -> np.ndarray:
    """A[phi, i-1]: repetitions whose selected map holds an item of level i."""
    occupancy = np.zeros((sk.plan.phi_max + 1, t), dtype=np.int64)
    keep = levels > 0
    if not keep.any():
        return occupancy
    phi, r, _ = sk.grid_position(cells[keep])
    lvl = levels[keep] - 1
    triples = np.unique(np.stack([phi, r, lvl], axis=1), axis=0)
    np.add.at(occupancy, (triples[:, 0], triples[:, 2]), 1)
    return occupancy


def exact_frequencies(stream: UpdateStream, keys: np.ndarray) -> np.ndarray:
    """Exact final values of ``keys`` from a replay of the stream."""
    keys = np.unique(keys)
    values = np.zeros(keys.size, dtype=np.int64)
    if keys.size == 0:
        return values
    pos = np.searchsorted(keys, stream.indices)
    pos = np.minimum(pos, keys.size - 1)
    hit = keys[pos] == stream.indices
    np.add.at(values, pos[hit], stream.deltas[hit])
    return values


def two_pass_finalize(sk: SampleLevelSketch, stream) -> LevelEstimate:
    """
    Second pass: replace every recovered estimate by its exact frequency and count levels.

    Occupancy uses the half-open levels [alpha**(i-1), alpha**i) of the exact values.
    """
    plan = sk.plan
    if plan.passes != 2:
        raise ValidationError("two_pass_finalize needs a sketch planned for two passes")
    stream = as_update_stream(stream, plan.n)
    entries = sk.cover()
    keys = np.unique(entries.keys)
    exact = exact_frequencies(stream, keys)
    values = exact[np.searchsorted(keys, entries.keys)] if keys.size else np.zeros(0, np.int64)
    t = level_count(plan.alpha, plan.magnitude_bound)
    levels = level_indices(np.abs(values), plan.alpha, t)
    occupancy = _occupancy(sk, entries.cells, levels, t)
    maps = int(np.unique(entries.cells).size)
    return _estimate_from_occupancy(
        occupancy, plan, plan.alpha, 2, total_maps=plan.cells, selected_maps=maps
    )


def estimate_levels_two_pass(
    stream,
    alpha: float,
    beta: float,
    eps: float,
    delta: float,
    *,
    n: Optional[int] = None,
    seed: int = 0,
    constants: Optional[SketchConstants] = None,
    lab: Optional[LabScale] = None,
    chunk: int = DEFAULT_CHUNK,
) -> LevelEstimate:
    """
    Two-pass level-count estimation.

    Args:
        stream: UpdateStream or iterable of (index, delta); read twice
        alpha: Level base, > 1
        beta: Importance threshold
        eps: Target precision
        delta: Failure probability
        n: Dimension (defaults to the stream's)
        seed: Root seed

    Returns:
        LevelEstimate at base alpha
    """
    stream = as_update_stream(stream, n)
    plan = plan_sketch(stream.n if n is None else n, beta, eps, delta, alpha=alpha, passes=2,
                       constants=constants, lab=lab)
    sk = SampleLevelSketch(plan, derive_seed(seed, "levels", "two-pass")).ingest(stream, chunk)
    return two_pass_finalize(sk, stream)


def _discarded_cells(entries: CoverEntries, log_base: float, eps_cs: float) -> np.ndarray:
    """
    Cells whose map has an ambiguous first entry at some level.

    Entries arrive sorted by (cell, value). For the first entry of each
    (cell, w) with w >= 2 the map is discarded when
    alpha'**(w-1) >= D / (1 + eps_cs).
    """
    if len(entries) == 0:
        return np.zeros(0, dtype=np.int64)
    log_d = np.log(entries.values)
    w = np.maximum(np.ceil(log_d / log_base), 1).astype(np.int64)
    pairs = np.stack([entries.cells, w], axis=1)
    _, first = np.unique(pairs, axis=0, return_index=True)
    cells, w, log_d = entries.cells[first], w[first], log_d[first]
    ambiguous = (w >= 2) & ((w - 1) * log_base >= log_d - math.log1p(eps_cs))
    return np.unique(cells[ambiguous])


def level1_finalize(
    sk: SampleLevelSketch,
    gamma: float,
    beta: float,
    eps: float,
    delta: float,
    x: Optional[float] = None,
) -> LevelEstimate:
    """
    One-pass finalize with randomized base alpha' = 1 + x * gamma.

    Each map is classified entry by entry, w = ceil(log D[j] / log alpha')
    with w in {0, 1} merged into level 1. A map is discarded entirely when
    an entry sits within a factor (1 + eps_cs) above a level boundary. Each
    block of parallel repetitions contributes its first surviving map.

    Args:
        sk: Ingested one-pass sketch
        gamma: Base spread, 0 < gamma < 1
        beta: Importance threshold
        eps: Target precision
        delta: Failure probability
        x: Base position in [1/2, 1]; drawn from the sketch seed when None

    Raises:
        ValidationError: If x or gamma are out of range or the sketch was
            planned for other parameters
    """
    ParameterValidator.validate_randomized_base(gamma, x)
    plan = plan_sketch(sk.plan.n, beta, eps, delta, gamma=gamma, passes=1,
                       constants=sk.plan.constants, lab=sk.plan.lab)
    if plan.layout() != sk.plan.layout():
        raise ValidationError("Sketch was planned for different parameters")
    if x is None:
        x = 0.5 + 0.5 * uniform01(sk.seed, "levels", "x")
    base = 1.0 + x * gamma
    log_base = math.log(base)
    t = level_count(base, plan.magnitude_bound)

    entries = sk.bank.cover(plan.beta_cs, plan.eps_cs)
    discarded = _discarded_cells(entries, log_base, plan.eps_cs)
    shape = (plan.phi_max + 1, plan.repetitions, plan.block)
    bad = np.zeros(shape, dtype=bool)
    if discarded.size:
        phi, r, b = sk.grid_position(discarded)
        bad[phi, r, b] = True
    first_good = np.argmax(~bad, axis=2)
    any_good = (~bad).any(axis=2)

    phi, r, b = sk.grid_position(entries.cells)
    chosen = any_good[phi, r] & (b == first_good[phi, r])
    w = np.maximum(np.ceil(np.log(entries.values) / log_base), 1).astype(np.int64) if len(entries) else \
        np.zeros(0, dtype=np.int64)
    levels = np.where(chosen, np.minimum(w, t), 0)
    occupancy = _occupancy(sk, entries.cells, levels, t)
    logger.debug("level1 finalize: %d of %d maps discarded", discarded.size, plan.cells)
    return _estimate_from_occupancy(
        occupancy, plan, base, 1, x=float(x), discarded_maps=int(discarded.size),
        total_maps=plan.cells, selected_maps=int(any_good.sum()),
    )


def one_pass_sketch(
    n: int,
    gamma: float,
    beta: float,
    eps: float,
    delta: float,
    *,
    seed: int = 0,
    constants: Optional[SketchConstants] = None,
    lab: Optional[LabScale] = None,
) -> SampleLevelSketch:
    """An empty one-pass sketch, ready for (possibly sharded) ingestion."""
    plan = plan_sketch(n, beta, eps, delta, gamma=gamma, passes=1, constants=constants, lab=lab)
    return SampleLevelSketch(plan, derive_seed(seed, "levels", "one-pass"))


def estimate_levels_one_pass(
    stream,
    gamma: float,
    beta: float,
    eps: float,
    delta: float,
    *,
    n: Optional[int] = None,
    seed: int = 0,
    x: Optional[float] = None,
    constants: Optional[SketchConstants] = None,
    lab: Optional[LabScale] = None,
    chunk: int = DEFAULT_CHUNK,
) -> LevelEstimate:
    """One-pass Level1 estimation: build, ingest and finalize in one call."""
    ParameterValidator.validate_randomized_base(gamma, x)
    stream = as_update_stream(stream, n)
    sk = one_pass_sketch(stream.n if n is None else n, gamma, beta, eps, delta, seed=seed,
                         constants=constants, lab=lab)
    sk.ingest(stream, chunk)
    return level1_finalize(sk, gamma, beta, eps, delta, x)
