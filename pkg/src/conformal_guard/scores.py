"""Surrogate and true safety score functions.

Three score families are provided: a velocity-aligned nearest-agent distance
for driving-style monitors, a classifier success probability for
ROC-threshold-tuning setups, and a controlled noise degradation that blends
any [0, 1] score with uniform noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import SafetySample
from .errors import ParameterError, ValidationError

__all__ = [
    "EgoState",
    "ScoreDegradation",
    "mahalanobis_safety",
    "classifier_prob_score",
    "degrade_score",
    "squash_distance_score",
    "degrade_samples",
]

Vec2 = Sequence[float]


def _finite_vec2(v: Vec2, what: str) -> tuple[float, float]:
    x, y = float(v[0]), float(v[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"{what} must have finite components, got ({x!r}, {y!r})")
    return x, y


@dataclass(frozen=True)
class EgoState:
    """Position and velocity of the monitored vehicle, in meters and m/s."""

    position: tuple[float, float]
    velocity: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _finite_vec2(self.position, "position"))
        object.__setattr__(self, "velocity", _finite_vec2(self.velocity, "velocity"))


@dataclass(frozen=True)
class ScoreDegradation:
    """Convex weights blending the original score with uniform noise."""

    signal_weight: float
    noise_weight: float

    def __post_init__(self) -> None:
        s, n = float(self.signal_weight), float(self.noise_weight)
        if not (0.0 <= s <= 1.0 and 0.0 <= n <= 1.0):
            raise ParameterError(f"degradation weights must lie in [0, 1], got ({s}, {n})")
        if abs(s + n - 1.0) > 1e-9:
            raise ParameterError(f"degradation weights must sum to 1, got {s} + {n} = {s + n}")
        object.__setattr__(self, "signal_weight", s)
        object.__setattr__(self, "noise_weight", n)

    @classmethod
    def from_noise_weight(cls, noise_weight: float) -> "ScoreDegradation":
        return cls(signal_weight=1.0 - float(noise_weight), noise_weight=float(noise_weight))


def mahalanobis_safety(
    ego: EgoState,
    agent_positions: Sequence[Vec2],
    half_width_m: float = 1.0,
    speed_floor: float = 1.0,
) -> float:
    """Velocity-aligned distance to the nearest agent (higher = safer).

    Each agent offset is expressed in the frame (unit velocity direction,
    orthogonal direction) and scaled per axis: the along-track axis by the
    ego speed, the cross-track axis by ``half_width_m``.  An agent 10 m
    ahead at 10 m/s thus scores the same as one 1 m abeam.  The scene score
    is the minimum over agents.

    ``speed_floor`` bounds the along-track scale away from zero so a
    standing ego is never a singularity; at exactly zero velocity the
    along-track axis defaults to +x (the axes then matter only when
    ``speed_floor != half_width_m``).
    """
    if half_width_m <= 0.0 or not math.isfinite(half_width_m):
        raise ParameterError(f"half_width_m must be positive and finite, got {half_width_m}")
    if speed_floor <= 0.0 or not math.isfinite(speed_floor):
        raise ParameterError(f"speed_floor must be positive and finite, got {speed_floor}")
    if len(agent_positions) == 0:
        raise ValidationError("at least one agent position is required")

    vx, vy = ego.velocity
    speed = math.hypot(vx, vy)
    if speed > 0.0:
        ex, ey = vx / speed, vy / speed
    else:
        ex, ey = 1.0, 0.0
    scale_along = max(speed, speed_floor)

    best = math.inf
    for i, pos in enumerate(agent_positions):
        ax, ay = _finite_vec2(pos, f"agent position {i}")
        rx, ry = ax - ego.position[0], ay - ego.position[1]
        along = rx * ex + ry * ey
        across = -rx * ey + ry * ex
        score = math.hypot(along / scale_along, across / half_width_m)
        if score < best:
            best = score
    return best


def classifier_prob_score(success_probability: float) -> float:
    """Predicted success probability used directly as the surrogate score.

    Identity apart from range validation; exists so that threshold tuning on
    a classifier probability is an explicit, named configuration.
    """
    p = float(success_probability)
    if not math.isfinite(p) or not 0.0 <= p <= 1.0:
        raise ValidationError(f"success probability must lie in [0, 1], got {p!r}")
    return p


def degrade_score(score: float, deg: ScoreDegradation, rand: np.random.Generator) -> float:
    """Blend a [0, 1] score with uniform noise: ``s_w * score + n_w * U``."""
    score = float(score)
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise ValidationError(f"score must lie in [0, 1] before degradation, got {score!r}")
    u = float(rand.random())
    return deg.signal_weight * score + deg.noise_weight * u


def squash_distance_score(score: float) -> float:
    """Map a non-negative distance-like score to [0, 1) via ``s / (1 + s)``.

    Monotone, so ranks (and therefore every monitor decision) are preserved.
    """
    score = float(score)
    if not math.isfinite(score) or score < 0.0:
        raise ValidationError(f"distance score must be non-negative and finite, got {score!r}")
    return score / (1.0 + score)


def degrade_samples(
    samples: Sequence[SafetySample],
    noise_weight: float,
    rand: np.random.Generator,
) -> list[SafetySample]:
    """Apply noise degradation to the surrogate score of every sample.

    Scores must already be in [0, 1]; if any score exceeds 1, all scores are
    treated as distances and squashed through ``s / (1 + s)`` first so the
    noise scale stays commensurate.  True safety scores are untouched.
    """
    deg = ScoreDegradation.from_noise_weight(noise_weight)
    scores = [s.surrogate_score for s in samples]
    if any(g > 1.0 for g in scores):
        scores = [squash_distance_score(g) for g in scores]
    return [
        SafetySample(
            surrogate_score=degrade_score(g, deg, rand),
            true_safety=s.true_safety,
            scene_id=s.scene_id,
        )
        for g, s in zip(scores, samples)
    ]
