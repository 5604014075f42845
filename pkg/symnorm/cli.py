"""symnorm CLI tool.

Command-line interface for profiling norms, estimating level counts and
norms of turnstile streams, running experiments and the acceptance suite.

Usage:
    symnorm generate --spec '{"kind": "single-spike", "params": {"n": 1024, "magnitude": 50}}' -o s.txt
    symnorm profile --norm '{"kind": "lp", "p": 4}' --n 4096 --out profile.json
    symnorm levels --stream s.txt --alpha-gamma 0.5 --beta 0.01 --eps 0.2 --delta 0.01 --passes 1
    symnorm estimate --stream s.txt --norm '{"kind": "lp", "p": 1}' --eps 0.2 --mmc 1.5
    symnorm tradeoff --stream s.txt --norm '{"kind": "lp", "p": 4}' --D 4
    symnorm merge a.sketch b.sketch -o merged.sketch
    symnorm accept --out-dir acceptance --quick
"""
import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from symnorm.benchmarks import run_benchmarks
from symnorm.concentration import ConcentrationProfile, compute_mmc
from symnorm.config import SEED_ENV, LabScale, load_json, root_seed
from symnorm.encoder import JSONEncoder, SketchEncoder, read_json, write_json
from symnorm.estimator import (
    EstimatorConfig,
    TradeoffConfig,
    estimate_symmetric_norm,
    estimate_tradeoff,
    sketch_size,
)
from symnorm.exceptions import SymnormException, ValidationError
from symnorm.harness import ExperimentConfig, check_oracle_dimension, run_acceptance_suite, run_experiment
from symnorm.hashing import derive_seed
from symnorm.levels import (
    SampleLevelSketch,
    estimate_levels_two_pass,
    level1_finalize,
    one_pass_sketch,
    two_pass_finalize,
)
from symnorm.norms import norm_from_config
from symnorm.stream import (
    FrequencyVector,
    StreamSpec,
    UpdateStream,
    generate_stream,
    read_stream,
    write_stream,
)

logger = logging.getLogger(__name__)


def _emit(document, out: Optional[str]) -> None:
    data = JSONEncoder.encode(document)
    if out:
        Path(out).write_bytes(data)
        print(f"Wrote {out}", file=sys.stderr)
    else:
        print(data.decode("utf-8"))


def _lab(args) -> LabScale:
    if getattr(args, "no_lab", False):
        return LabScale.off()
    if getattr(args, "lab_scale", None):
        return LabScale.from_dict(load_json(args.lab_scale))
    return LabScale.default()


def _profile(args) -> Optional[ConcentrationProfile]:
    if getattr(args, "mmc_profile", None):
        return ConcentrationProfile.from_dict(read_json(args.mmc_profile))
    return None


def _calibration(args, l, seed: int) -> Tuple[Optional[float], Optional[ConcentrationProfile]]:
    profile = _profile(args)
    if args.mmc is None and profile is None:
        logger.info("no mmc given; profiling %s", l.name)
        profile = compute_mmc(l, grid_size=args.grid_size, samples=args.profile_samples,
                              seed=derive_seed(seed, "cli", "profile"))
    return args.mmc, profile


def _ingest_shard(job: Tuple[bytes, np.ndarray, np.ndarray]) -> bytes:
    blob, indices, deltas = job
    sketch = SketchEncoder.decode(blob)
    sketch.ingest_arrays(indices, deltas)
    return SketchEncoder.encode(sketch)


def _ingest(sketch: SampleLevelSketch, stream: UpdateStream, workers: int) -> SampleLevelSketch:
    """Ingest in-process, or split the stream across identically seeded shard sketches and merge."""
    if workers <= 1 or len(stream) < workers:
        return sketch.ingest(stream)
    empty = SketchEncoder.encode(sketch)
    jobs = [(empty, idx, dlt) for idx, dlt in zip(np.array_split(stream.indices, workers),
                                                 np.array_split(stream.deltas, workers))]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        shards = [SketchEncoder.decode(blob) for blob in pool.map(_ingest_shard, jobs)]
    merged = shards[0]
    for shard in shards[1:]:
        merged = merged.merge(shard)
    return merged


def generate_command(args) -> int:
    """Generate a synthetic stream file.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        body = load_json(args.spec)
        spec = StreamSpec.from_dict(body)
        if args.seed is not None or SEED_ENV in os.environ or "seed" not in body.get("stream", body):
            spec = spec.with_seed(root_seed(args.seed))
        stream = generate_stream(spec)
        write_stream(args.output, stream, header=f"n={stream.n} kind={spec.kind} seed={spec.seed}")
        print(f"Stream written: {args.output} ({len(stream)} updates, n={stream.n})")
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def profile_command(args) -> int:
    """Profile the concentration of a norm.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        l = norm_from_config(load_json(args.norm), args.n)
        profile = compute_mmc(l, grid_size=args.grid_size, samples=args.samples,
                              seed=root_seed(args.seed), workers=args.workers)
        _emit(profile, args.out)
        print(f"mmc({l.name}) ~ {profile.mmc_estimate:.4g} (peak at k={profile.peak_dimension()})",
              file=sys.stderr)
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def levels_command(args) -> int:
    """Estimate level counts of a stream.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        seed = root_seed(args.seed)
        if args.from_sketch:
            sketch = SketchEncoder.load(args.from_sketch)
            if sketch.plan.passes == 1:
                estimate = level1_finalize(sketch, args.alpha_gamma, args.beta, args.eps, args.delta, args.x)
            else:
                if not args.stream:
                    raise ValidationError("Finalizing a two-pass sketch needs --stream")
                estimate = two_pass_finalize(sketch, read_stream(args.stream, sketch.plan.n))
            _emit(estimate, args.out)
            return 0

        if not args.stream:
            raise ValidationError("levels needs --stream or --from-sketch")
        stream = read_stream(args.stream, args.n)
        if args.passes == 2:
            estimate = estimate_levels_two_pass(stream, args.alpha_gamma, args.beta, args.eps, args.delta,
                                                seed=seed, lab=_lab(args))
        else:
            sketch = one_pass_sketch(stream.n, args.alpha_gamma, args.beta, args.eps, args.delta,
                                     seed=seed, lab=_lab(args))
            sketch = _ingest(sketch, stream, args.workers)
            if args.sketch_out:
                SketchEncoder.save(sketch, args.sketch_out)
                print(f"Sketch written: {args.sketch_out} ({sketch.counter_count} counters)", file=sys.stderr)
            estimate = level1_finalize(sketch, args.alpha_gamma, args.beta, args.eps, args.delta, args.x)
        _emit(estimate, args.out)
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def merge_command(args) -> int:
    """Merge sketch snapshots by counter addition.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        sketches = [SketchEncoder.load(path) for path in args.inputs]
        merged = sketches[0]
        for sketch in sketches[1:]:
            merged = merged.merge(sketch)
        SketchEncoder.save(merged, args.output)
        print(f"Merged {len(sketches)} sketches: {args.output} ({merged.updates_seen} updates)")
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def estimate_command(args) -> int:
    """Estimate a symmetric norm of a stream.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        seed = root_seed(args.seed)
        stream = read_stream(args.stream, args.n)
        if args.oracle:
            check_oracle_dimension(stream.n)
        l = norm_from_config(load_json(args.norm), stream.n)
        mmc, profile = _calibration(args, l, seed)
        cfg = EstimatorConfig(eps=args.eps, delta=args.delta, mmc=mmc, profile=profile, lab=_lab(args))
        result = estimate_symmetric_norm(stream, l, cfg, seed=seed)
        report = {
            "estimate": result.estimate,
            "parameters": result.parameters,
            "diagnostics": {
                "levels": result.levels.to_dict(),
                "counter_count": result.counter_count,
                "nominal_counter_count": result.nominal_counter_count,
            },
        }
        if args.oracle:
            report["exact"] = l.evaluate(FrequencyVector.from_stream(stream, stream.n))
        _emit(report, args.out)
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def tradeoff_command(args) -> int:
    """Compute the D-approximation of a symmetric norm.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        seed = root_seed(args.seed)
        stream = read_stream(args.stream, args.n)
        if args.oracle:
            check_oracle_dimension(stream.n)
        l = norm_from_config(load_json(args.norm), stream.n)
        mmc, profile = _calibration(args, l, seed)
        cfg = TradeoffConfig(D=args.D, eps=args.eps, delta=args.delta, mmc=mmc, profile=profile,
                             lam=args.lam, lab=_lab(args))
        result = estimate_tradeoff(stream, l, cfg, seed=seed)
        report = result.to_dict()
        report["sketch_size"] = sketch_size(cfg, stream.n)
        if args.oracle:
            report["exact"] = l.evaluate(FrequencyVector.from_stream(stream, stream.n))
        _emit(report, args.out)
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def bench_command(args) -> int:
    """Run the ingestion and finalize benchmarks.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        benchmarks = run_benchmarks(iterations=args.iterations, dimensions=args.dims,
                                    repetitions=args.reps, seed=root_seed(args.seed))
        if args.out:
            write_json(benchmarks.get_summary(), args.out)
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def experiment_command(args) -> int:
    """Run an experiment from a JSON config.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 for success)
    """
    try:
        body = dict(load_json(args.config))
        if args.workers is not None:
            body["workers"] = args.workers
        if args.no_oracle:
            body["oracle"] = False
        report = run_experiment(ExperimentConfig.from_dict(body))
        json_path, csv_path = report.write(args.out_dir, stem=args.stem)
        aggregate = report.aggregate()
        print(f"Experiment written: {json_path}, {csv_path}")
        print(f"  Trials: {aggregate['trials']}  Success rate: {aggregate['success_rate']}")
        return 0
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def accept_command(args) -> int:
    """Run the acceptance suite.

    Args:
        args: Command arguments

    Returns:
        Exit code (0 when every criterion passed)
    """
    try:
        status = run_acceptance_suite(args.out_dir, quick=args.quick, criteria=args.criteria,
                                      seed=args.seed)
        label = "PASS" if status == 0 else "FAIL"
        smoke = " (smoke)" if args.quick else ""
        print(f"Acceptance {label}{smoke}: {Path(args.out_dir) / 'acceptance.json'}")
        return status
    except SymnormException as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


def _add_calibration_arguments(sub) -> None:
    sub.add_argument("--mmc", type=float, help="Upper bound on mmc of the norm")
    sub.add_argument("--mmc-profile", help="Concentration profile JSON from 'symnorm profile'")
    sub.add_argument("--profile-samples", type=int, default=1000, help="Samples when profiling on the fly")
    sub.add_argument("--grid-size", type=int, default=8, help="Grid points when profiling on the fly")


def _add_lab_arguments(sub) -> None:
    sub.add_argument("--lab-scale", help="LabScale JSON (string or file)")
    sub.add_argument("--no-lab", action="store_true", help="Use the printed sketch sizes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symnorm",
        description="symnorm - streaming approximation of symmetric norms",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Profile the concentration of l_4
  symnorm profile --norm '{"kind": "lp", "p": 4}' --n 4096 --out l4.json

  # One-pass level counts, saving the sketch for later merges
  symnorm levels --stream s.txt --alpha-gamma 0.5 --beta 0.01 --eps 0.2 --delta 0.01 --sketch-out s.sketch

  # Norm estimate with the exact value for comparison
  symnorm estimate --stream s.txt --norm '{"kind": "topk", "k": 16}' --mmc-profile topk.json --oracle

  # Smoke run of the acceptance suite
  symnorm accept --out-dir acceptance --quick

The SYMNORM_SEED environment variable overrides every root seed.
        """,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    gen = subparsers.add_parser("generate", help="Generate a synthetic stream file")
    gen.add_argument("--spec", required=True, help="Stream spec JSON (string or file)")
    gen.add_argument("--seed", type=int, help="Root seed")
    gen.add_argument("-o", "--output", required=True, help="Stream file to write")

    prof = subparsers.add_parser("profile", help="Profile mc(l^(k)) over a geometric grid")
    prof.add_argument("--norm", required=True, help="Norm JSON (string or file)")
    prof.add_argument("--n", type=int, required=True, help="Dimension")
    prof.add_argument("--grid-size", type=int, help="Number of grid points (default: all powers of 2)")
    prof.add_argument("--samples", type=int, default=4000, help="Sphere samples per grid point")
    prof.add_argument("--seed", type=int, help="Root seed")
    prof.add_argument("--workers", type=int, default=1, help="Worker processes")
    prof.add_argument("--out", help="Output file (default: stdout)")

    lev = subparsers.add_parser("levels", help="Estimate level counts of a stream")
    lev.add_argument("--stream", help="Stream file")
    lev.add_argument("--n", type=int, help="Dimension (default: max index + 1)")
    lev.add_argument("--alpha-gamma", type=float, required=True,
                     help="Level base alpha (two passes) or gamma (one pass)")
    lev.add_argument("--beta", type=float, default=0.01, help="Importance threshold")
    lev.add_argument("--eps", type=float, default=0.2, help="Target precision")
    lev.add_argument("--delta", type=float, default=0.01, help="Failure probability")
    lev.add_argument("--passes", type=int, choices=[1, 2], default=1, help="Number of passes")
    lev.add_argument("--x", type=float, help="Fixed base position in [1/2, 1] (one pass)")
    lev.add_argument("--seed", type=int, help="Root seed")
    lev.add_argument("--workers", type=int, default=1, help="Shard ingestion across processes")
    lev.add_argument("--sketch-out", help="Save the one-pass sketch before finalizing")
    lev.add_argument("--from-sketch", help="Finalize a saved sketch instead of reading a stream")
    _add_lab_arguments(lev)
    lev.add_argument("--out", help="Output file (default: stdout)")

    mer = subparsers.add_parser("merge", help="Merge sketch snapshots")
    mer.add_argument("inputs", nargs="+", help="Sketch snapshots")
    mer.add_argument("-o", "--output", required=True, help="Merged snapshot")

    est = subparsers.add_parser("estimate", help="One-pass (1 +- eps) norm estimate")
    est.add_argument("--stream", required=True, help="Stream file")
    est.add_argument("--n", type=int, help="Dimension (default: max index + 1)")
    est.add_argument("--norm", required=True, help="Norm JSON (string or file)")
    est.add_argument("--eps", type=float, default=0.2, help="Target accuracy")
    est.add_argument("--delta", type=float, help="Failure budget (default: 0.01 * eps / n)")
    est.add_argument("--seed", type=int, help="Root seed")
    est.add_argument("--oracle", action="store_true", help="Also report the exact value")
    _add_calibration_arguments(est)
    _add_lab_arguments(est)
    est.add_argument("--out", help="Output file (default: stdout)")

    tra = subparsers.add_parser("tradeoff", help="D-approximation with a smaller sketch")
    tra.add_argument("--stream", required=True, help="Stream file")
    tra.add_argument("--n", type=int, help="Dimension (default: max index + 1)")
    tra.add_argument("--norm", required=True, help="Norm JSON (string or file)")
    tra.add_argument("--D", type=float, default=4.0, help="Approximation factor, 1.1 <= D <= mmc")
    tra.add_argument("--eps", type=float, default=0.25, help="Level precision in (0, 1/2)")
    tra.add_argument("--delta", type=float, default=0.01, help="Failure probability")
    tra.add_argument("--lam", type=float, default=1.0, help="Recentring constant")
    tra.add_argument("--seed", type=int, help="Root seed")
    tra.add_argument("--oracle", action="store_true", help="Also report the exact value")
    _add_calibration_arguments(tra)
    _add_lab_arguments(tra)
    tra.add_argument("--out", help="Output file (default: stdout)")

    ben = subparsers.add_parser("bench", help="Benchmark ingestion and finalize")
    ben.add_argument("--iterations", type=int, default=3, help="Timed runs per grid point")
    ben.add_argument("--dims", type=int, nargs="+", default=[1024, 4096, 16384], help="Dimensions n")
    ben.add_argument("--reps", type=int, nargs="+", default=[16, 64, 256], help="Repetition caps R")
    ben.add_argument("--seed", type=int, help="Root seed")
    ben.add_argument("--out", help="Summary JSON file")

    exp = subparsers.add_parser("experiment", help="Run an experiment config")
    exp.add_argument("--config", required=True, help="Experiment JSON (string or file)")
    exp.add_argument("--out-dir", default=".", help="Output directory")
    exp.add_argument("--stem", default="report", help="Output file stem")
    exp.add_argument("--workers", type=int, help="Worker processes")
    exp.add_argument("--no-oracle", action="store_true", help="Skip the exact oracle")

    acc = subparsers.add_parser("accept", help="Run the acceptance suite")
    acc.add_argument("--out-dir", default="acceptance", help="Output directory")
    acc.add_argument("--quick", action="store_true", help="Reduced trial counts (smoke run)")
    acc.add_argument("--criteria", type=int, nargs="+", help="Criterion numbers (default: all)")
    acc.add_argument("--seed", type=int, help="Root seed")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    if not args.command:
        parser.print_help()
        return 1

    # Route to command handlers
    commands = {
        "generate": generate_command,
        "profile": profile_command,
        "levels": levels_command,
        "merge": merge_command,
        "estimate": estimate_command,
        "tradeoff": tradeoff_command,
        "bench": bench_command,
        "experiment": experiment_command,
        "accept": accept_command,
    }

    handler = commands.get(args.command)
    if handler:
        return handler(args)
    else:
        print(f"Error: Unknown command: {args.command}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
