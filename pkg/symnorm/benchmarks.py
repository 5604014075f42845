"""symnorm performance benchmarks.

Measures, over a grid of dimensions n and repetition counts R:
- one-pass sketch ingestion throughput in updates per second
- Level1 finalize throughput in heavy-hitter maps per second
- sketch size in counters and counter bytes
"""
import statistics
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

from symnorm.config import LabScale
from symnorm.hashing import derive_seed
from symnorm.levels import level1_finalize, one_pass_sketch
from symnorm.stream import StreamSpec, generate_stream


@dataclass
class SketchMeasurement:
    """Timings of one stage at one (n, R) grid point, with the sketch size it ran on.

    Throughput uses the median run, so one cold run does not drag the rate down.
    """

    stage: str
    n: int
    repetitions: int
    counters: int
    counter_bytes: int
    work: int
    unit: str
    seconds: List[float] = field(default_factory=list)

    @property
    def key(self) -> str:
        return f"{self.stage}[n={self.n},R={self.repetitions}]"

    def record(self, duration: float):
        self.seconds.append(duration)

    @property
    def median(self) -> float:
        return statistics.median(self.seconds) if self.seconds else 0.0

    @property
    def rate(self) -> float:
        """Work items per second at the median run."""
        return self.work / self.median if self.median > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "n": self.n,
            "R": self.repetitions,
            "runs": len(self.seconds),
            "median_seconds": self.median,
            "best_seconds": min(self.seconds, default=0.0),
            f"{self.unit}_per_sec": self.rate,
            "counters": self.counters,
            "counter_bytes": self.counter_bytes,
            f"{self.unit}_per_counter": self.work / self.counters if self.counters else 0.0,
        }

    def __str__(self) -> str:
        if not self.seconds:
            return f"{self.key}: not run"
        return (f"{self.key}: {self.rate:,.0f} {self.unit}/s "
                f"(median {self.median * 1000:.3f}ms over {len(self.seconds)} runs), "
                f"{self.counters:,} counters in {self.counter_bytes / 1024:.1f} KiB")


class PerformanceBenchmarks:
    """Ingestion and finalize benchmarks of the one-pass sketch."""

    GAMMA = 0.5
    BETA = 0.05
    EPS = 0.2
    DELTA = 0.01

    def __init__(
        self,
        iterations: int = 3,
        dimensions: Sequence[int] = (1024, 4096, 16384),
        repetitions: Sequence[int] = (16, 64, 256),
        updates_per_coordinate: int = 2,
        seed: int = 0,
        verbose: bool = True,
    ):
        """Initialize benchmarks.

        Args:
            iterations: Timed runs per grid point
            dimensions: Values of n
            repetitions: Caps on R
            updates_per_coordinate: Stream length as a multiple of n
            seed: Root seed of streams and sketches
            verbose: Print each measurement
        """
        self.iterations = iterations
        self.dimensions = list(dimensions)
        self.repetitions = list(repetitions)
        self.updates_per_coordinate = updates_per_coordinate
        self.seed = seed
        self.verbose = verbose
        self.results: Dict[str, SketchMeasurement] = {}

    def measure(self, measurement: SketchMeasurement, func: Callable) -> SketchMeasurement:
        """Time func over the configured iterations and store the measurement."""
        for _ in range(self.iterations):
            start = time.perf_counter()
            func()
            measurement.record(time.perf_counter() - start)

        self.results[measurement.key] = measurement
        if self.verbose:
            print(measurement)
        return measurement

    def _stream(self, n: int):
        spec = StreamSpec("random-turnstile", {"n": n, "updates": self.updates_per_coordinate * n},
                          derive_seed(self.seed, "bench", "stream", n) >> 1)
        return generate_stream(spec)

    def benchmark_point(self, n: int, R: int):
        """Benchmark ingestion and finalize at one (n, R)."""
        lab = LabScale.default().with_overrides(max_repetitions=R)
        stream = self._stream(n)

        def build():
            return one_pass_sketch(n, self.GAMMA, self.BETA, self.EPS, self.DELTA,
                                   seed=self.seed, lab=lab)

        sketch = build().ingest(stream)
        size = {"n": n, "repetitions": R, "counters": sketch.counter_count,
                "counter_bytes": int(sketch.bank.counters.nbytes)}
        self.measure(SketchMeasurement("ingest", work=len(stream), unit="updates", **size),
                     lambda: build().ingest(stream))
        self.measure(
            SketchMeasurement("finalize", work=sketch.plan.cells, unit="maps", **size),
            lambda: level1_finalize(sketch, self.GAMMA, self.BETA, self.EPS, self.DELTA, x=0.75),
        )

    def run_all(self):
        """Run the whole grid."""
        if self.verbose:
            print("=" * 70)
            print("  symnorm Performance Benchmarks")
            print(f"  Iterations per point: {self.iterations}")
            print("=" * 70)

        start_time = time.time()
        for n in self.dimensions:
            for R in self.repetitions:
                self.benchmark_point(n, R)
        total_time = time.time() - start_time

        if self.verbose:
            print("\n" + "=" * 70)
            print(f"  Total benchmark time: {total_time:.2f}s")
            print("=" * 70)

    def get_summary(self) -> Dict[str, Any]:
        """Get summary of all benchmarks.

        Returns:
            Dictionary with every measurement and the counter count per grid point
        """
        return {
            "results": {key: m.to_dict() for key, m in self.results.items()},
            "counters": {f"n={m.n},R={m.repetitions}": m.counters
                         for m in self.results.values() if m.stage == "ingest"},
        }


def run_benchmarks(iterations: int = 3, **kwargs) -> PerformanceBenchmarks:
    """Run performance benchmarks.

    Args:
        iterations: Number of timed runs per grid point
        **kwargs: Grid overrides passed to PerformanceBenchmarks

    Returns:
        PerformanceBenchmarks instance with results
    """
    benchmarks = PerformanceBenchmarks(iterations=iterations, **kwargs)
    benchmarks.run_all()
    return benchmarks
