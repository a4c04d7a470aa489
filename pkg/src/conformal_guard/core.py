"""Rank-based conformal calibration of a warning monitor.

The monitor keeps the sorted surrogate scores of the *unsafe* calibration
samples only.  A new observation with surrogate score ``g_hat`` is ranked
against that multiset; the randomized rank quantile

    q = (|{a < g_hat}| + U + 1) / (m + 1),   U ~ Uniform{0, ..., |{a == g_hat}|}

is uniform on {1/(m+1), ..., 1} whenever the new sample is unsafe and
exchangeable with the calibration set.  Warning on ``q <= 1 - eps`` therefore
misses an unsafe situation with probability at most ``eps + 1/(m+1)``,
regardless of the score distribution.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, ParameterError, ValidationError

__all__ = [
    "SafetySample",
    "CalibrationScores",
    "EpsilonBudget",
    "WarningDecision",
    "QuantileResult",
    "build_calibration",
    "adjusted_epsilon",
    "min_unsafe_samples",
    "conformal_quantile",
    "warn",
    "warn_deterministic",
    "fnr_upper_bound",
    "fpr_lower_bound",
]


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SafetySample:
    """One (surrogate score, true safety score) pair.

    ``surrogate_score`` is computed from a prediction of the future;
    ``true_safety`` from the realized future.  Higher means safer for both.
    ``scene_id`` optionally groups correlated snippets from one scene.
    """

    surrogate_score: float
    true_safety: float
    scene_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "surrogate_score", _require_finite(self.surrogate_score, "surrogate_score")
        )
        object.__setattr__(
            self, "true_safety", _require_finite(self.true_safety, "true_safety")
        )


@dataclass(frozen=True)
class CalibrationScores:
    """Sorted surrogate scores of the unsafe calibration samples.

    Immutable once built, so one instance can back any number of concurrent
    decision streams.  ``source_count`` records how many calibration samples
    (safe + unsafe) were seen; decisions never depend on it.
    """

    unsafe_scores: tuple[float, ...]
    safety_threshold: float
    source_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "unsafe_scores", tuple(float(s) for s in self.unsafe_scores))
        _require_finite(self.safety_threshold, "safety_threshold")
        for s in self.unsafe_scores:
            _require_finite(s, "calibration score")
        if any(a > b for a, b in zip(self.unsafe_scores, self.unsafe_scores[1:])):
            raise ValidationError("unsafe_scores must be sorted in non-decreasing order")
        if self.source_count < len(self.unsafe_scores):
            raise ValidationError(
                f"source_count={self.source_count} smaller than the unsafe count "
                f"{len(self.unsafe_scores)}"
            )

    @property
    def m(self) -> int:
        """Number of unsafe calibration scores."""
        return len(self.unsafe_scores)


@dataclass(frozen=True)
class EpsilonBudget:
    """Target miss rate split into a usable part and a discretization part.

    ``eps_adjusted = eps_target - 1/(1+m)`` is the level actually fed to the
    decision rule; the subtracted ``1/(1+m)`` pays for having only ``m``
    unsafe calibration scores.  When ``eps_adjusted <= 0`` the budget is
    ``trivial``: no non-degenerate rule can certify the target, and the
    monitor warns unconditionally.
    """

    eps_target: float
    eps_adjusted: float
    discretization_error: float
    m: int
    trivial: bool

    def __post_init__(self) -> None:
        if not 0.0 < self.eps_target < 1.0:
            raise ParameterError(f"eps_target must lie in (0, 1), got {self.eps_target}")
        if self.m < 0:
            raise ParameterError(f"m must be non-negative, got {self.m}")
        if self.discretization_error != 1.0 / (1.0 + self.m):
            raise ConsistencyError("discretization_error does not equal 1/(1+m)")
        if self.trivial != (self.eps_adjusted <= 0.0):
            raise ConsistencyError("trivial flag inconsistent with eps_adjusted")
        if not math.isclose(
            self.eps_adjusted + self.discretization_error, self.eps_target, rel_tol=1e-12, abs_tol=1e-12
        ):
            raise ConsistencyError("eps_adjusted + discretization_error != eps_target")


class QuantileResult(NamedTuple):
    q: float
    u_draw: int
    rank_below: int
    tie_count: int


@dataclass(frozen=True)
class WarningDecision:
    """Outcome of one monitor decision, with the rank arithmetic exposed.

    ``q == (rank_below + u_draw + 1) / (m + 1)`` always holds, so the
    decision can be re-audited from this record alone.
    """

    warn: bool
    q: float
    u_draw: int
    rank_below: int
    tie_count: int


def build_calibration(samples: Sequence[SafetySample], f0: float) -> CalibrationScores:
    """Collect the sorted surrogate scores of samples with ``true_safety < f0``.

    The comparison is strict: a sample sitting exactly on the threshold
    counts as safe and contributes nothing.
    """
    f0 = _require_finite(f0, "f0")
    unsafe: list[float] = []
    for i, s in enumerate(samples):
        if not (math.isfinite(s.surrogate_score) and math.isfinite(s.true_safety)):
            raise ValidationError(f"sample {i} contains a non-finite value")
        if s.true_safety < f0:
            unsafe.append(s.surrogate_score)
    unsafe.sort()
    return CalibrationScores(
        unsafe_scores=tuple(unsafe), safety_threshold=f0, source_count=len(samples)
    )


def adjusted_epsilon(eps_target: float, m: int) -> EpsilonBudget:
    """Largest usable ``eps`` such that ``eps + 1/(1+m) <= eps_target``.

    Running the decision rule at the returned ``eps_adjusted`` certifies a
    miss rate of at most ``eps_target``.  With ``m <= 1/eps_target - 1`` the
    adjusted level is non-positive and the budget is flagged trivial.
    """
    if not 0.0 < eps_target < 1.0:
        raise ParameterError(f"eps_target must lie in (0, 1), got {eps_target}")
    if m < 0:
        raise ParameterError(f"m must be non-negative, got {m}")
    discretization = 1.0 / (1.0 + m)
    eps_adjusted = eps_target - discretization
    return EpsilonBudget(
        eps_target=eps_target,
        eps_adjusted=eps_adjusted,
        discretization_error=discretization,
        m=int(m),
        trivial=eps_adjusted <= 0.0,
    )


def min_unsafe_samples(eps_target: float, practical: bool = False) -> int:
    """Unsafe-sample count needed before the monitor stops being trivial.

    ``practical=False`` returns the hard threshold (smallest ``m`` with a
    positive adjusted level); ``practical=True`` returns the recommended
    ``ceil(1.5/eps_target - 1)``, which leaves enough slack for the false
    positive rate to settle.
    """
    if not 0.0 < eps_target < 1.0:
        raise ParameterError(f"eps_target must lie in (0, 1), got {eps_target}")
    if practical:
        raw = 1.5 / eps_target - 1.0
        nearest = round(raw)
        if abs(raw - nearest) < 1e-9:  # absorb representation error at integer points
            return max(int(nearest), 1)
        return max(math.ceil(raw), 1)
    # Smallest m with eps_target - 1/(1+m) > 0, using the exact float
    # predicate adjusted_epsilon applies, so the two can never disagree.
    m = max(0, int(1.0 / eps_target) - 2)
    while eps_target - 1.0 / (1.0 + m) <= 0.0:
        m += 1
    return m


def conformal_quantile(
    cal: CalibrationScores, g_hat: float, rand: np.random.Generator
) -> QuantileResult:
    """Randomized rank quantile of ``g_hat`` within the calibration scores.

    ``rank_below`` counts strict predecessors, ``tie_count`` exact float
    ties, and ``u_draw`` is uniform on the inclusive range {0, ..., tie_count}
    so that ``rank_below + u_draw`` spans {0, ..., m} for an exchangeable
    unsafe sample.  Tie detection is exact equality on purpose: any tolerance
    would break that uniformity.
    """
    g_hat = _require_finite(g_hat, "g_hat")
    scores = cal.unsafe_scores
    rank_below = bisect_left(scores, g_hat)
    tie_count = bisect_right(scores, g_hat) - rank_below
    u_draw = int(rand.integers(0, tie_count + 1))
    q = (rank_below + u_draw + 1) / (cal.m + 1)
    return QuantileResult(q=q, u_draw=u_draw, rank_below=rank_below, tie_count=tie_count)


def _decide(budget: EpsilonBudget, quantile: QuantileResult) -> WarningDecision:
    if budget.trivial:
        warn_bit = True
    else:
        warn_bit = quantile.q <= 1.0 - budget.eps_adjusted
    return WarningDecision(
        warn=warn_bit,
        q=quantile.q,
        u_draw=quantile.u_draw,
        rank_below=quantile.rank_below,
        tie_count=quantile.tie_count,
    )


def _check_budget(cal: CalibrationScores, budget: EpsilonBudget) -> None:
    if budget.m != cal.m:
        raise ConsistencyError(
            f"budget was computed for m={budget.m} but calibration holds m={cal.m} "
            "unsafe scores; recompute the budget"
        )


def warn(
    cal: CalibrationScores,
    g_hat: float,
    budget: EpsilonBudget,
    rand: np.random.Generator,
) -> WarningDecision:
    """Decide whether to warn for a new surrogate score.

    Warns iff ``q <= 1 - eps_adjusted``; a trivial budget warns
    unconditionally (the quantile is still computed and reported).
    """
    _check_budget(cal, budget)
    return _decide(budget, conformal_quantile(cal, g_hat, rand))


def warn_deterministic(
    cal: CalibrationScores, g_hat: float, budget: EpsilonBudget
) -> WarningDecision:
    """``warn`` with the tie draw pinned to 0 instead of randomized.

    Pinning ``u_draw = 0`` minimizes ``q``, making this the most
    warning-prone resolution of ties: whenever it outputs no-warn, the
    randomized rule outputs no-warn with certainty.  Useful when a
    deployment cannot tolerate randomized decisions.
    """
    _check_budget(cal, budget)
    g_hat = _require_finite(g_hat, "g_hat")
    scores = cal.unsafe_scores
    rank_below = bisect_left(scores, g_hat)
    tie_count = bisect_right(scores, g_hat) - rank_below
    q = (rank_below + 1) / (cal.m + 1)
    return _decide(budget, QuantileResult(q=q, u_draw=0, rank_below=rank_below, tie_count=tie_count))


def fnr_upper_bound(eps_adjusted: float, m: int) -> float:
    """Certified miss-rate bound ``eps_adjusted + 1/(1+m)``, clamped to [0, 1]."""
    if m < 0:
        raise ParameterError(f"m must be non-negative, got {m}")
    return min(1.0, max(0.0, eps_adjusted + 1.0 / (1.0 + m)))


def fpr_lower_bound(t: int, eps: float) -> float:
    """Floor on the false positive rate of any rank-based ``eps``-safe monitor.

    With ``t`` unsafe calibration samples, no warning rule that looks only at
    the ordering of surrogate scores can have a false positive rate below
    ``1 - (1+t)*eps`` while keeping its miss rate at or under ``eps``.
    """
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")
    if eps < 0.0:
        raise ParameterError(f"eps must be non-negative, got {eps}")
    return max(0.0, 1.0 - (1.0 + t) * eps)


def decision_stream(
    cal: CalibrationScores,
    g_values: Iterable[float],
    budget: EpsilonBudget,
    rand: np.random.Generator,
    deterministic_u: bool = False,
) -> list[WarningDecision]:
    """Run the monitor over a stream of surrogate scores, in order."""
    if deterministic_u:
        return [warn_deterministic(cal, g, budget) for g in g_values]
    return [warn(cal, g, budget, rand) for g in g_values]
