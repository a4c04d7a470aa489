"""File formats: dataset CSV, score CSV, calibration artifact, report CSVs.

All numeric fields are serialized with Python's shortest round-trip ``repr``,
so a write/read cycle reproduces every float bit-exactly (ties in the score
multiset survive serialization).  Files are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import (
    CalibrationScores,
    EpsilonBudget,
    SafetySample,
    WarningDecision,
    adjusted_epsilon,
    fnr_upper_bound,
)
from .errors import ConsistencyError, ParseError
from .harness import EvalReport, PacConformalComparison

__all__ = [
    "ingest_csv",
    "ingest_scores_csv",
    "write_dataset_csv",
    "write_warn_csv",
    "write_eval_csv",
    "write_sweep_csv",
    "write_pac_csv",
    "CalibrationArtifact",
    "write_calibration_artifact",
    "read_calibration_artifact",
]

_ARTIFACT_KEYS = ("version", "f0", "eps_target", "eps_adjusted", "m", "trivial", "bound")


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(text: str, path: Path, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{path}: row {row}: column {column!r} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"{path}: row {row}: column {column!r} is not finite: {text!r}")
    return value


def ingest_csv(path: str | Path) -> list[SafetySample]:
    """Read a dataset CSV with header ``g,f`` or ``g,f,scene_id``."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ParseError(f"{path}: empty file, expected a 'g,f[,scene_id]' header")
    header = [h.strip() for h in rows[0]]
    if header not in (["g", "f"], ["g", "f", "scene_id"]):
        raise ParseError(f"{path}: row 1: expected header 'g,f' or 'g,f,scene_id', got {rows[0]!r}")
    has_scene = len(header) == 3
    samples = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {i}: expected {len(header)} fields, got {len(row)}")
        g = _parse_float(row[0], path, i, "g")
        f = _parse_float(row[1], path, i, "f")
        scene = (row[2] or None) if has_scene else None
        samples.append(SafetySample(surrogate_score=g, true_safety=f, scene_id=scene))
    return samples


def ingest_scores_csv(path: str | Path) -> list[float]:
    """Read a surrogate-score CSV with header ``g``."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["g"]:
        raise ParseError(f"{path}: row 1: expected header 'g'")
    values = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 1:
            raise ParseError(f"{path}: row {i}: expected 1 field, got {len(row)}")
        values.append(_parse_float(row[0], path, i, "g"))
    return values


def _open_write(path: str | Path):
    return open(path, "w", newline="", encoding="utf-8")


def write_dataset_csv(path: str | Path, samples: Sequence[SafetySample]) -> None:
    with_scene = any(s.scene_id is not None for s in samples)
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if with_scene:
            writer.writerow(["g", "f", "scene_id"])
            for s in samples:
                writer.writerow([_fmt(s.surrogate_score), _fmt(s.true_safety), s.scene_id or ""])
        else:
            writer.writerow(["g", "f"])
            for s in samples:
                writer.writerow([_fmt(s.surrogate_score), _fmt(s.true_safety)])


def write_warn_csv(
    path: str | Path, g_values: Sequence[float], decisions: Sequence[WarningDecision]
) -> None:
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["g", "q", "u", "warn"])
        for g, d in zip(g_values, decisions):
            writer.writerow([_fmt(g), _fmt(d.q), d.u_draw, int(d.warn)])


def write_eval_csv(path: str | Path, report: EvalReport) -> None:
    """Per-trial rows plus one ``aggregate`` row.

    In the aggregate row, fnr/fpr carry the means, ``m`` and
    ``eps_adjusted`` the lower-median values, and ``trivial`` the fraction
    of trivial trials.
    """
    trials = report.trials
    ms = sorted(t.m_unsafe_train for t in trials)
    m_med = ms[(len(ms) - 1) // 2]
    eps_med = sorted(t.eps_adjusted for t in trials)[(len(trials) - 1) // 2]
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["trial", "fnr", "fpr", "m", "eps_adjusted", "trivial"])
        for i, t in enumerate(trials):
            writer.writerow([i, _fmt(t.fnr), _fmt(t.fpr), t.m_unsafe_train, _fmt(t.eps_adjusted), int(t.trivial)])
        frac_trivial = sum(t.trivial for t in trials) / len(trials)
        writer.writerow(
            ["aggregate", _fmt(report.fnr_mean), _fmt(report.fpr_mean), m_med, _fmt(eps_med), _fmt(frac_trivial)]
        )


def write_sweep_csv(path: str | Path, results: Sequence[tuple[float, EvalReport]]) -> None:
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value", "fnr_mean", "fnr_var", "fpr_mean", "fpr_var", "bound"])
        for value, rep in results:
            writer.writerow(
                [
                    _fmt(value),
                    _fmt(rep.fnr_mean),
                    _fmt(rep.fnr_variance),
                    _fmt(rep.fpr_mean),
                    _fmt(rep.fpr_variance),
                    _fmt(rep.bound),
                ]
            )


def write_pac_csv(path: str | Path, cmp: PacConformalComparison) -> None:
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eps", "delta", "conformal_min", "conformal_practical", "pac", "ratio"])
        writer.writerow(
            [_fmt(cmp.eps), _fmt(cmp.delta), cmp.conformal_min, cmp.conformal_practical, cmp.pac, _fmt(cmp.ratio)]
        )


@dataclass(frozen=True)
class CalibrationArtifact:
    """In-memory image of a calibration artifact file."""

    version: str
    calibration: CalibrationScores
    budget: EpsilonBudget
    bound: float


def write_calibration_artifact(
    path: str | Path, version: str, cal: CalibrationScores, budget: EpsilonBudget, bound: float
) -> None:
    """Write the self-describing text artifact: 7 header keys, then sorted scores."""
    lines = [
        f"version {version}",
        f"f0 {_fmt(cal.safety_threshold)}",
        f"eps_target {_fmt(budget.eps_target)}",
        f"eps_adjusted {_fmt(budget.eps_adjusted)}",
        f"m {budget.m}",
        f"trivial {'true' if budget.trivial else 'false'}",
        f"bound {_fmt(bound)}",
    ]
    lines.extend(_fmt(s) for s in cal.unsafe_scores)
    with _open_write(path) as fh:
        fh.write("\n".join(lines) + "\n")


def read_calibration_artifact(path: str | Path) -> CalibrationArtifact:
    """Parse and cross-check a calibration artifact.

    The stored eps_adjusted/trivial/bound are recomputed from
    ``eps_target`` and ``m``; any disagreement means the file was edited or
    produced by an incompatible tool and raises a consistency error.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if len(lines) < len(_ARTIFACT_KEYS):
        raise ParseError(f"{path}: truncated artifact, expected {len(_ARTIFACT_KEYS)} header lines")
    header: dict[str, str] = {}
    for i, key in enumerate(_ARTIFACT_KEYS):
        parts = lines[i].split(" ", 1)
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"{path}: line {i + 1}: expected '{key} <value>', got {lines[i]!r}")
        header[key] = parts[1]

    def as_float(key: str, line: int) -> float:
        return _parse_float(header[key], path, line, key)

    f0 = as_float("f0", 2)
    eps_target = as_float("eps_target", 3)
    eps_adjusted = as_float("eps_adjusted", 4)
    try:
        m = int(header["m"])
    except ValueError:
        raise ParseError(f"{path}: line 5: m is not an integer: {header['m']!r}") from None
    if header["trivial"] not in ("true", "false"):
        raise ParseError(f"{path}: line 6: trivial must be 'true' or 'false', got {header['trivial']!r}")
    trivial = header["trivial"] == "true"
    bound = as_float("bound", 7)

    scores = []
    for j, line in enumerate(lines[len(_ARTIFACT_KEYS):], start=len(_ARTIFACT_KEYS) + 1):
        if not line.strip():
            continue
        scores.append(_parse_float(line, path, j, "score"))
    if len(scores) != m:
        raise ConsistencyError(f"{path}: header says m={m} but {len(scores)} scores follow")
    if any(a > b for a, b in zip(scores, scores[1:])):
        raise ParseError(f"{path}: scores are not sorted ascending")

    budget = adjusted_epsilon(eps_target, m)
    if budget.eps_adjusted != eps_adjusted or budget.trivial != trivial:
        raise ConsistencyError(
            f"{path}: stored eps_adjusted/trivial disagree with eps_target and m; "
            "the artifact was modified or is incompatible"
        )
    if fnr_upper_bound(budget.eps_adjusted, m) != bound:
        raise ConsistencyError(f"{path}: stored bound disagrees with eps_target and m")
    cal = CalibrationScores(unsafe_scores=tuple(scores), safety_threshold=f0, source_count=m)
    return CalibrationArtifact(version=header["version"], calibration=cal, budget=budget, bound=bound)
