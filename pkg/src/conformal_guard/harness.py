"""Monte-Carlo evaluation of the calibrated monitor.

Each trial pools the data, reshuffles it with a per-trial derived seed,
splits into train/test, calibrates on the train side and measures the false
negative and false positive rates on the test side.  Trials are independent
given the master seed (seeds are spawned by counter), so the whole protocol
is reproducible and trials could run in parallel without changing a single
output bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    SafetySample,
    adjusted_epsilon,
    build_calibration,
    fnr_upper_bound,
    min_unsafe_samples,
    warn,
)
from .errors import ParameterError, ValidationError

__all__ = [
    "TrialResult",
    "EvalReport",
    "PacConformalComparison",
    "run_trial",
    "run_trials",
    "sweep",
    "SWEEP_AXES",
    "pac_sample_complexity",
    "pac_vs_conformal_report",
]

TrainFilter = Callable[[list[SafetySample], float], list[SafetySample]]

SWEEP_AXES = ("epsilon", "threshold", "label_frequency", "n_unsafe")


@dataclass(frozen=True)
class TrialResult:
    """FNR/FPR of one train/test split.

    ``fnr`` is 0.0 when the test split holds no unsafe sample; that state is
    visible as ``n_unsafe_test == 0`` (``fnr_defined`` False) and such trials
    are excluded from the variance and quartile aggregates.
    """

    fnr: float
    fpr: float
    m_unsafe_train: int
    n_unsafe_test: int
    n_safe_test: int
    eps_adjusted: float
    trivial: bool

    @property
    def fnr_defined(self) -> bool:
        return self.n_unsafe_test > 0

    @property
    def fpr_defined(self) -> bool:
        return self.n_safe_test > 0


@dataclass(frozen=True)
class EvalReport:
    """Aggregate of a trial batch; every statistic is recomputable from ``trials``."""

    trials: tuple[TrialResult, ...]
    fnr_mean: float
    fnr_variance: float
    fpr_mean: float
    fpr_variance: float
    fnr_quartiles: tuple[float, float, float, float, float]
    bound: float


def run_trial(
    train: Sequence[SafetySample],
    test: Sequence[SafetySample],
    eps_target: float,
    f0: float,
    rand: np.random.Generator,
) -> TrialResult:
    """Calibrate on ``train``, decide every ``test`` sample, count errors."""
    if len(train) == 0:
        raise ValidationError("training split is empty")
    if len(test) == 0:
        raise ValidationError("test split is empty")
    cal = build_calibration(train, f0)
    budget = adjusted_epsilon(eps_target, cal.m)
    missed = warned_safe = n_unsafe = n_safe = 0
    for sample in test:
        decision = warn(cal, sample.surrogate_score, budget, rand)
        if sample.true_safety < f0:
            n_unsafe += 1
            missed += not decision.warn
        else:
            n_safe += 1
            warned_safe += decision.warn
    return TrialResult(
        fnr=missed / n_unsafe if n_unsafe else 0.0,
        fpr=warned_safe / n_safe if n_safe else 0.0,
        m_unsafe_train=cal.m,
        n_unsafe_test=n_unsafe,
        n_safe_test=n_safe,
        eps_adjusted=budget.eps_adjusted,
        trivial=budget.trivial,
    )


def _lower_median(values: Sequence[int]) -> int:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def _summary(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.var())


def summarize_trials(trials: Sequence[TrialResult], eps_target: float) -> EvalReport:
    """Fold trials into an EvalReport, in trial-index order.

    Undefined-FNR trials contribute their placeholder 0.0 to ``fnr_mean``
    (keeping the mean well defined on every batch) but are excluded from the
    variance and the quartiles; symmetrically for FPR.  Variances are
    population variances, so a single trial reports variance 0.
    """
    if not trials:
        raise ValidationError("cannot summarize an empty trial batch")
    fnr_all = [t.fnr for t in trials]
    fpr_all = [t.fpr for t in trials]
    fnr_defined = [t.fnr for t in trials if t.fnr_defined]
    fpr_defined = [t.fpr for t in trials if t.fpr_defined]
    _, fnr_var = _summary(fnr_defined)
    _, fpr_var = _summary(fpr_defined)
    quart_src = np.asarray(fnr_defined if fnr_defined else [0.0], dtype=float)
    quartiles = tuple(float(v) for v in np.percentile(quart_src, [0, 25, 50, 75, 100]))
    m_med = _lower_median([t.m_unsafe_train for t in trials])
    bound = fnr_upper_bound(adjusted_epsilon(eps_target, m_med).eps_adjusted, m_med)
    return EvalReport(
        trials=tuple(trials),
        fnr_mean=float(np.mean(fnr_all)),
        fnr_variance=fnr_var,
        fpr_mean=float(np.mean(fpr_all)),
        fpr_variance=fpr_var,
        fnr_quartiles=quartiles,  # type: ignore[arg-type]
        bound=bound,
    )


def _trial_seeds(seed: int | np.random.SeedSequence, n: int) -> list[np.random.SeedSequence]:
    """Per-trial seeds by counter, stateless so repeated calls pair up exactly."""
    if isinstance(seed, np.random.SeedSequence):
        entropy, base_key = seed.entropy, tuple(seed.spawn_key)
    else:
        entropy, base_key = seed, ()
    return [np.random.SeedSequence(entropy=entropy, spawn_key=base_key + (i,)) for i in range(n)]


def run_trials(
    pool: Sequence[SafetySample],
    n_trials: int,
    split_fraction: float,
    eps_target: float,
    f0: float,
    seed: int | np.random.SeedSequence,
    train_filter: TrainFilter | None = None,
) -> EvalReport:
    """Repeat shuffle/split/evaluate ``n_trials`` times and aggregate.

    ``split_fraction`` is the fraction of the pool that becomes the training
    split.  ``train_filter``, if given, edits the training split after the
    shuffle (used by the label-frequency and unsafe-count sweeps); it must
    be deterministic so it cannot perturb the decision randomness.
    """
    if n_trials < 1:
        raise ParameterError(f"n_trials must be >= 1, got {n_trials}")
    if not 0.0 < split_fraction < 1.0:
        raise ParameterError(f"split_fraction must lie in (0, 1), got {split_fraction}")
    n_train = int(round(split_fraction * len(pool)))
    if n_train < 1 or n_train >= len(pool):
        raise ValidationError(
            f"pool of {len(pool)} samples cannot be split {split_fraction:.0%}/"
            f"{1 - split_fraction:.0%} into two non-empty parts"
        )
    trials = []
    for child in _trial_seeds(seed, n_trials):
        rng = np.random.default_rng(child)
        order = rng.permutation(len(pool))
        train = [pool[i] for i in order[:n_train]]
        test = [pool[i] for i in order[n_train:]]
        if train_filter is not None:
            train = train_filter(train, f0)
        trials.append(run_trial(train, test, eps_target, f0, rng))
    return summarize_trials(trials, eps_target)


def _label_frequency_filter(target_unsafe_fraction: float) -> TrainFilter:
    """Delete safe training samples until unsafe samples reach the target share.

    Keeps the earliest safe samples in shuffle order, so no extra randomness
    is consumed and monitor decisions are bit-identical across targets.
    """
    if not 0.0 < target_unsafe_fraction < 1.0:
        raise ParameterError(
            f"label-frequency values must lie in (0, 1), got {target_unsafe_fraction}"
        )

    def apply(train: list[SafetySample], f0: float) -> list[SafetySample]:
        n_unsafe = sum(1 for s in train if s.true_safety < f0)
        if n_unsafe == 0:
            return train
        keep_safe = round(n_unsafe * (1.0 - target_unsafe_fraction) / target_unsafe_fraction)
        kept, safe_seen = [], 0
        for s in train:
            if s.true_safety < f0:
                kept.append(s)
            elif safe_seen < keep_safe:
                kept.append(s)
                safe_seen += 1
        return kept

    return apply


def _n_unsafe_filter(n_unsafe: int) -> TrainFilter:
    """Keep only the first ``n_unsafe`` unsafe training samples (shuffle order)."""
    if n_unsafe < 0:
        raise ParameterError(f"n_unsafe values must be >= 0, got {n_unsafe}")

    def apply(train: list[SafetySample], f0: float) -> list[SafetySample]:
        kept, unsafe_seen = [], 0
        for s in train:
            if s.true_safety < f0:
                if unsafe_seen < n_unsafe:
                    kept.append(s)
                    unsafe_seen += 1
            else:
                kept.append(s)
        return kept

    return apply


def sweep(
    pool: Sequence[SafetySample],
    axis: str,
    values: Sequence[float],
    *,
    n_trials: int,
    split_fraction: float,
    eps_target: float,
    f0: float,
    seed: int | np.random.SeedSequence,
) -> list[tuple[float, EvalReport]]:
    """Run ``run_trials`` once per axis value with a shared seed schedule.

    Every axis value sees the identical sequence of derived per-trial seeds,
    so curves across values are paired (differences are never re-sampling
    noise).  ``epsilon`` varies the target level, ``threshold`` varies
    ``f0``, ``label_frequency`` deletes safe training samples to hit a target
    unsafe share, and ``n_unsafe`` truncates the unsafe training count.
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if len(values) == 0:
        raise ParameterError("sweep needs at least one axis value")
    results = []
    for value in values:
        kwargs = dict(
            n_trials=n_trials,
            split_fraction=split_fraction,
            eps_target=eps_target,
            f0=f0,
            seed=seed,
        )
        if axis == "epsilon":
            kwargs["eps_target"] = float(value)
        elif axis == "threshold":
            kwargs["f0"] = float(value)
        elif axis == "label_frequency":
            kwargs["train_filter"] = _label_frequency_filter(float(value))
        else:
            kwargs["train_filter"] = _n_unsafe_filter(int(value))
        results.append((float(value), run_trials(pool, **kwargs)))
    return results


def pac_sample_complexity(eps: float, delta: float) -> int:
    """Unsafe samples a Hoeffding-style certificate needs: ``ceil(log(1/delta) / (2 eps^2))``."""
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(math.log(1.0 / delta) / (2.0 * eps * eps))


@dataclass(frozen=True)
class PacConformalComparison:
    eps: float
    delta: float
    conformal_min: int
    conformal_practical: int
    pac: int
    ratio: float


def pac_vs_conformal_report(eps: float, delta: float) -> PacConformalComparison:
    """Contrast the O(1/eps) conformal sample need with the O(1/eps^2) PAC need.

    ``ratio`` is PAC over the conformal minimum; it grows like 1/eps.
    """
    conformal_min = min_unsafe_samples(eps, practical=False)
    conformal_practical = min_unsafe_samples(eps, practical=True)
    pac = pac_sample_complexity(eps, delta)
    return PacConformalComparison(
        eps=eps,
        delta=delta,
        conformal_min=conformal_min,
        conformal_practical=conformal_practical,
        pac=pac,
        ratio=pac / conformal_min,
    )
