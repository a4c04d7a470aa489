"""Synthetic exchangeable datasets with a controllable surrogate quality.

Two modes: ``driving`` produces continuous true-safety scores spread around
the threshold ``f0``; ``grasp`` produces binary success labels with a
synthetic predicted-success-probability surrogate (threshold fixed at 0.5).

The surrogate is a ``correlation``-weighted blend of a monotone transform of
the true safety score and independent uniform noise, so correlation 1 orders
safe strictly above unsafe and correlation 0 makes the surrogate carry no
label information at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SafetySample
from .errors import ParameterError
from .scores import classifier_prob_score

__all__ = [
    "GeneratorConfig",
    "GRASP_THRESHOLD",
    "generate_exchangeable_pairs",
    "generate_scene_sequence",
    "generate_grasp_dataset",
]

# Failure labels sit at 0.0, successes at 1.0; anything below this is unsafe.
GRASP_THRESHOLD = 0.5

# Separation margin of the driving-mode signal around the threshold, in
# normalized signal units; gives correlation-1 data a genuine decision gap.
_SIGNAL_MARGIN = 0.05

# Probability that a snippet reuses the shared scene driver instead of a
# fresh draw.  Copying with probability < 1 keeps every snippet's marginal
# identical to the i.i.d. generator while still correlating scene members.
_SCENE_COUPLING = 0.5


@dataclass(frozen=True)
class GeneratorConfig:
    n_samples: int
    unsafe_fraction: float
    correlation: float
    f0: float
    mode: str = "driving"
    scene_length: int = 1

    def __post_init__(self) -> None:
        if self.n_samples <= 0:
            raise ParameterError(f"n_samples must be positive, got {self.n_samples}")
        if not 0.0 < self.unsafe_fraction < 1.0:
            raise ParameterError(
                f"unsafe_fraction must lie in (0, 1), got {self.unsafe_fraction}"
            )
        if not 0.0 <= self.correlation <= 1.0:
            raise ParameterError(f"correlation must lie in [0, 1], got {self.correlation}")
        if not np.isfinite(self.f0):
            raise ParameterError(f"f0 must be finite, got {self.f0}")
        if self.mode not in ("driving", "grasp"):
            raise ParameterError(f"mode must be 'driving' or 'grasp', got {self.mode!r}")
        if self.scene_length < 1:
            raise ParameterError(f"scene_length must be >= 1, got {self.scene_length}")


def _snippet(cfg: GeneratorConfig, u: float, eta: float, scene_id: str | None) -> SafetySample:
    """Build one sample from its two uniform drivers.

    ``u`` jointly decides the label and, via the stratified inverse
    transform, the safety margin; ``eta`` is the surrogate's private noise.
    """
    p = cfg.unsafe_fraction
    unsafe = u < p
    if cfg.mode == "grasp":
        true_safety = 0.0 if unsafe else 1.0
        signal = true_safety
        g = classifier_prob_score(cfg.correlation * signal + (1.0 - cfg.correlation) * eta)
    else:
        v = u / p if unsafe else (u - p) / (1.0 - p)  # v ~ U(0,1), independent of the label
        offset = _SIGNAL_MARGIN + (1.0 - _SIGNAL_MARGIN) * v
        true_safety = cfg.f0 - offset if unsafe else cfg.f0 + offset
        signal = (true_safety - cfg.f0 + 1.0) / 2.0
        g = cfg.correlation * signal + (1.0 - cfg.correlation) * eta
    return SafetySample(surrogate_score=g, true_safety=true_safety, scene_id=scene_id)


def generate_exchangeable_pairs(
    cfg: GeneratorConfig, rand: np.random.Generator
) -> list[SafetySample]:
    """Draw ``cfg.n_samples`` i.i.d. (surrogate, true safety) pairs."""
    draws = rand.random((cfg.n_samples, 2))
    return [_snippet(cfg, u, eta, None) for u, eta in draws]


def generate_scene_sequence(
    cfg: GeneratorConfig, rand: np.random.Generator, scene_id: str | None = None
) -> list[SafetySample]:
    """Draw one scene of ``cfg.scene_length`` correlated snippets.

    Snippets share a latent driver with probability 0.5 each, which induces
    within-scene correlation of the true safety score while leaving every
    single snippet marginally identical to ``generate_exchangeable_pairs``
    output, so each snippet on its own stays exchangeable with an i.i.d.
    calibration set.
    """
    scene_u = float(rand.random())
    if scene_id is None:
        scene_id = f"scene-{int(rand.integers(0, 2**32)):08x}"
    snippets = []
    for _ in range(cfg.scene_length):
        u = scene_u if rand.random() < _SCENE_COUPLING else float(rand.random())
        snippets.append(_snippet(cfg, u, float(rand.random()), scene_id))
    return snippets


def generate_grasp_dataset(cfg: GeneratorConfig, rand: np.random.Generator) -> list[SafetySample]:
    """Binary success/failure grasp data; unsafe iff the label is 0.

    The implied safety threshold is ``GRASP_THRESHOLD`` (0.5) regardless of
    ``cfg.f0``; the surrogate is a synthetic predicted success probability
    whose quality follows ``cfg.correlation``.
    """
    if cfg.mode != "grasp":
        raise ParameterError(f"generate_grasp_dataset requires mode='grasp', got {cfg.mode!r}")
    return generate_exchangeable_pairs(cfg, rand)
