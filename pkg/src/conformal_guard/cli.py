"""Command-line front end.

Subcommands: ``calibrate``, ``warn``, ``evaluate``, ``sweep``, ``generate``,
``compare-pac``.  Every command is a pure function of its input files, flags
and seed; the seed comes from ``--seed``, falling back to the
``CONFORMAL_GUARD_SEED`` environment variable, then to 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    adjusted_epsilon,
    build_calibration,
    decision_stream,
    fnr_upper_bound,
    min_unsafe_samples,
)
from .csvio import (
    ingest_csv,
    ingest_scores_csv,
    read_calibration_artifact,
    write_calibration_artifact,
    write_dataset_csv,
    write_eval_csv,
    write_pac_csv,
    write_sweep_csv,
    write_warn_csv,
)
from .errors import ConformalGuardError, ParameterError
from .generate import GRASP_THRESHOLD, GeneratorConfig, generate_exchangeable_pairs, generate_scene_sequence
from .harness import SWEEP_AXES, pac_vs_conformal_report, run_trials, sweep
from .scores import degrade_samples

__all__ = ["RunConfig", "main", "cmd_calibrate", "cmd_warn", "cmd_evaluate", "cmd_sweep", "cmd_generate", "cmd_compare_pac"]

ENV_SEED = "CONFORMAL_GUARD_SEED"


@dataclass
class RunConfig:
    """Everything a command needs, assembled from flags and the environment."""

    command: str
    eps_target: float = 0.05
    f0: float = 0.0
    seed: int = 0
    n_trials: int = 100
    split_fraction: float = 0.5
    input_path: Path | None = None
    output_path: Path | None = None
    calibration_path: Path | None = None
    axis: str | None = None
    values: list[float] = field(default_factory=list)
    deterministic_u: bool = False
    mode: str = "driving"
    n_samples: int = 1000
    unsafe_fraction: float = 0.2
    correlation: float = 0.8
    scene_length: int = 1
    noise_weight: float | None = None
    delta: float = 0.05


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(ENV_SEED)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ParameterError(f"{ENV_SEED} must be an integer, got {env!r}") from None


@contextmanager
def _cleanup_on_error(*paths: Path | None):
    """Remove output files this command created if it fails midway."""
    existed = {p: p.exists() for p in paths if p is not None}
    try:
        yield
    except Exception:
        for p, was_there in existed.items():
            if not was_there and p.exists():
                p.unlink()
        raise


def cmd_calibrate(cfg: RunConfig) -> None:
    samples = ingest_csv(cfg.input_path)
    cal = build_calibration(samples, cfg.f0)
    budget = adjusted_epsilon(cfg.eps_target, cal.m)
    bound = fnr_upper_bound(budget.eps_adjusted, cal.m)
    with _cleanup_on_error(cfg.output_path):
        write_calibration_artifact(cfg.output_path, __version__, cal, budget, bound)
    need = min_unsafe_samples(cfg.eps_target, practical=False)
    rec = min_unsafe_samples(cfg.eps_target, practical=True)
    print(f"calibrated on {len(samples)} samples: m={cal.m} unsafe below f0={cfg.f0}")
    print(f"eps_target={cfg.eps_target} -> eps_adjusted={budget.eps_adjusted} (bound {bound})")
    if budget.trivial:
        print(
            f"NOTICE: budget is TRIVIAL, the monitor will always warn. "
            f"At least {need} unsafe samples are required for eps_target={cfg.eps_target} "
            f"(recommended: {rec}); got {cal.m}."
        )
    else:
        print(f"non-trivial budget (minimum unsafe count {need}, recommended {rec})")
    print(f"artifact written to {cfg.output_path}")


def cmd_warn(cfg: RunConfig) -> None:
    artifact = read_calibration_artifact(cfg.calibration_path)
    g_values = ingest_scores_csv(cfg.input_path)
    rng = np.random.default_rng(cfg.seed)
    decisions = decision_stream(
        artifact.calibration, g_values, artifact.budget, rng, deterministic_u=cfg.deterministic_u
    )
    with _cleanup_on_error(cfg.output_path):
        write_warn_csv(cfg.output_path, g_values, decisions)
    n_warn = sum(d.warn for d in decisions)
    print(f"{n_warn}/{len(decisions)} warnings written to {cfg.output_path}")


def _load_pool(cfg: RunConfig) -> tuple[list, int | np.random.SeedSequence]:
    """Ingest the pool and, if requested, degrade its surrogate scores.

    Degradation and trial running get independent child seeds so adding
    ``--noise-weight`` never silently reuses the trial randomness.
    """
    samples = ingest_csv(cfg.input_path)
    if cfg.noise_weight is None:
        return samples, cfg.seed
    root = np.random.SeedSequence(cfg.seed)
    degrade_ss, trials_ss = root.spawn(2)
    samples = degrade_samples(samples, cfg.noise_weight, np.random.default_rng(degrade_ss))
    return samples, trials_ss


def cmd_evaluate(cfg: RunConfig) -> None:
    pool, seed = _load_pool(cfg)
    report = run_trials(
        pool,
        n_trials=cfg.n_trials,
        split_fraction=cfg.split_fraction,
        eps_target=cfg.eps_target,
        f0=cfg.f0,
        seed=seed,
    )
    with _cleanup_on_error(cfg.output_path):
        write_eval_csv(cfg.output_path, report)
    print(
        f"{cfg.n_trials} trials: fnr_mean={report.fnr_mean:.6f} (bound {report.bound}), "
        f"fpr_mean={report.fpr_mean:.6f}"
    )
    print(f"report written to {cfg.output_path}")


def cmd_sweep(cfg: RunConfig) -> None:
    pool, seed = _load_pool(cfg)
    results = sweep(
        pool,
        cfg.axis,
        cfg.values,
        n_trials=cfg.n_trials,
        split_fraction=cfg.split_fraction,
        eps_target=cfg.eps_target,
        f0=cfg.f0,
        seed=seed,
    )
    with _cleanup_on_error(cfg.output_path):
        write_sweep_csv(cfg.output_path, results)
    print(f"swept {cfg.axis} over {len(results)} values; report written to {cfg.output_path}")


def cmd_generate(cfg: RunConfig) -> None:
    gen_cfg = GeneratorConfig(
        n_samples=cfg.n_samples,
        unsafe_fraction=cfg.unsafe_fraction,
        correlation=cfg.correlation,
        f0=cfg.f0,
        mode=cfg.mode,
        scene_length=cfg.scene_length,
    )
    rng = np.random.default_rng(cfg.seed)
    if gen_cfg.scene_length > 1:
        n_scenes = max(1, gen_cfg.n_samples // gen_cfg.scene_length)
        samples = []
        for _ in range(n_scenes):
            samples.extend(generate_scene_sequence(gen_cfg, rng))
    else:
        samples = generate_exchangeable_pairs(gen_cfg, rng)
    if cfg.noise_weight is not None:
        samples = degrade_samples(samples, cfg.noise_weight, rng)
    with _cleanup_on_error(cfg.output_path):
        write_dataset_csv(cfg.output_path, samples)
    n_unsafe = sum(1 for s in samples if s.true_safety < gen_cfg.f0)
    print(f"{len(samples)} samples ({n_unsafe} unsafe at f0={gen_cfg.f0}) written to {cfg.output_path}")


def cmd_compare_pac(cfg: RunConfig) -> None:
    report = pac_vs_conformal_report(cfg.eps_target, cfg.delta)
    print(
        f"conformal: {report.conformal_min} (min) / {report.conformal_practical} (practical), "
        f"pac: {report.pac}"
    )
    print(f"ratio (pac / conformal min): {report.ratio:.2f}")
    if cfg.output_path is not None:
        with _cleanup_on_error(cfg.output_path):
            write_pac_csv(cfg.output_path, report)
        print(f"comparison written to {cfg.output_path}")


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${ENV_SEED} or 0)")


def _add_eps(p: argparse.ArgumentParser, default: float | None = 0.05) -> None:
    p.add_argument("--eps", type=float, default=default, help="target false negative rate in (0,1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-guard",
        description="Calibrate warning systems to a provable false-negative-rate budget.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="build a calibration artifact from a dataset CSV")
    p.add_argument("--input", type=Path, required=True, help="dataset CSV with header g,f[,scene_id]")
    p.add_argument("--output", type=Path, required=True, help="calibration artifact path")
    _add_eps(p)
    p.add_argument("--f0", type=float, required=True, help="safety threshold; f < f0 is unsafe")

    p = sub.add_parser("warn", help="issue warnings for a CSV of surrogate scores")
    p.add_argument("--calibration", type=Path, required=True, help="calibration artifact")
    p.add_argument("--input", type=Path, required=True, help="score CSV with header g")
    p.add_argument("--output", type=Path, required=True, help="decision CSV (g,q,u,warn)")
    p.add_argument(
        "--deterministic-u",
        action="store_true",
        help="pin the tie draw to 0 (most warning-prone resolution) instead of randomizing",
    )
    _add_seed(p)

    p = sub.add_parser("evaluate", help="randomized split trials with FNR/FPR statistics")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    _add_eps(p)
    p.add_argument("--f0", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--split", type=float, default=0.5, help="training fraction of the pool")
    p.add_argument("--noise-weight", type=float, default=None, help="degrade surrogate scores first")
    _add_seed(p)

    p = sub.add_parser("sweep", help="evaluate across a parameter axis with paired seeds")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", type=str, required=True, help="comma-separated axis values")
    _add_eps(p)
    p.add_argument("--f0", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--noise-weight", type=float, default=None, help="degrade surrogate scores first")
    _add_seed(p)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--mode", choices=("driving", "grasp"), default="driving")
    p.add_argument("--n", type=int, default=1000, help="number of samples")
    p.add_argument("--unsafe-fraction", type=float, default=0.2)
    p.add_argument("--correlation", type=float, default=0.8, help="surrogate informativeness in [0,1]")
    p.add_argument("--f0", type=float, default=None, help="default 0.0 (driving) or 0.5 (grasp)")
    p.add_argument("--scene-length", type=int, default=1, help=">1 emits correlated scenes")
    p.add_argument("--noise-weight", type=float, default=None)
    _add_seed(p)

    p = sub.add_parser("compare-pac", help="conformal vs Hoeffding-certificate sample needs")
    _add_eps(p)
    p.add_argument("--delta", type=float, default=0.05, help="PAC failure probability")
    p.add_argument("--output", type=Path, default=None, help="optional CSV output")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if hasattr(args, "eps") and args.eps is not None:
        cfg.eps_target = args.eps
    if hasattr(args, "f0"):
        if args.f0 is not None:
            cfg.f0 = args.f0
        elif args.command == "generate":
            cfg.f0 = GRASP_THRESHOLD if args.mode == "grasp" else 0.0
    if hasattr(args, "seed"):
        cfg.seed = _resolve_seed(args.seed)
    if hasattr(args, "trials"):
        cfg.n_trials = args.trials
    if hasattr(args, "split"):
        cfg.split_fraction = args.split
    if hasattr(args, "input"):
        cfg.input_path = args.input
    if hasattr(args, "output"):
        cfg.output_path = args.output
    if hasattr(args, "calibration"):
        cfg.calibration_path = args.calibration
    if hasattr(args, "axis"):
        cfg.axis = args.axis
        raw = [v for v in args.values.split(",") if v.strip()]
        if not raw:
            raise ParameterError("--values must list at least one number")
        try:
            cfg.values = [float(v) for v in raw]
        except ValueError:
            raise ParameterError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if hasattr(args, "deterministic_u"):
        cfg.deterministic_u = args.deterministic_u
    if hasattr(args, "mode"):
        cfg.mode = args.mode
    if hasattr(args, "n"):
        cfg.n_samples = args.n
    if hasattr(args, "unsafe_fraction"):
        cfg.unsafe_fraction = args.unsafe_fraction
    if hasattr(args, "correlation"):
        cfg.correlation = args.correlation
    if hasattr(args, "scene_length"):
        cfg.scene_length = args.scene_length
    if hasattr(args, "noise_weight"):
        cfg.noise_weight = args.noise_weight
    if hasattr(args, "delta"):
        cfg.delta = args.delta
    return cfg


_COMMANDS = {
    "calibrate": cmd_calibrate,
    "warn": cmd_warn,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "generate": cmd_generate,
    "compare-pac": cmd_compare_pac,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        _COMMANDS[cfg.command](cfg)
    except ConformalGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
