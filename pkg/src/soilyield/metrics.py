"""Evaluation metrics and the soil-fertility nutrient index."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .errors import LengthMismatchError, ZeroTotalError, ZeroVarianceError


def _as_pair(y_true, y_pred, minimum: int) -> tuple[np.ndarray, np.ndarray]:
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise LengthMismatchError(
            f"y_true and y_pred must be equal-length vectors, got {yt.shape} and {yp.shape}"
        )
    if yt.shape[0] < minimum:
        raise LengthMismatchError(f"need at least {minimum} values, got {yt.shape[0]}")
    return yt, yp


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - RSS/TSS.

    May be negative for predictors worse than the mean.  A constant
    y_true makes the score undefined (TSS = 0) and raises.
    """
    yt, yp = _as_pair(y_true, y_pred, minimum=2)
    tss = float(((yt - yt.mean()) ** 2).sum())
    if tss == 0.0:
        raise ZeroVarianceError("y_true is constant, R^2 is undefined (TSS = 0)")
    rss = float(((yt - yp) ** 2).sum())
    return 1.0 - rss / tss


def rmse(y_true, y_pred) -> float:
    yt, yp = _as_pair(y_true, y_pred, minimum=1)
    return float(np.sqrt(((yt - yp) ** 2).mean()))


def mae(y_true, y_pred) -> float:
    yt, yp = _as_pair(y_true, y_pred, minimum=1)
    return float(np.abs(yt - yp).mean())


@dataclass(frozen=True)
class NutrientCounts:
    """Samples classified into low / medium / high fertility classes."""

    nl: int
    nm: int
    nh: int
    nt: int

    def __post_init__(self) -> None:
        if min(self.nl, self.nm, self.nh, self.nt) < 0:
            raise ValueError("counts must be nonnegative")
        if self.nl + self.nm + self.nh != self.nt:
            raise ValueError(
                f"class counts {self.nl}+{self.nm}+{self.nh} must sum to nt={self.nt}"
            )


def nutrient_index(c: NutrientCounts) -> float:
    """Weighted class mean (nl*1 + nm*2 + nh*3) / nt, always in [1, 3]."""
    if c.nt == 0:
        raise ZeroTotalError("no samples analyzed (nt = 0)")
    return (c.nl + 2 * c.nm + 3 * c.nh) / c.nt


def classify_levels(values: Sequence[float], low: float, high: float) -> NutrientCounts:
    """Count values below ``low``, above ``high``, and between (inclusive)."""
    if not low <= high:
        raise ValueError(f"low threshold {low} must not exceed high threshold {high}")
    nl = sum(1 for v in values if v < low)
    nh = sum(1 for v in values if v > high)
    nt = len(values)
    return NutrientCounts(nl=nl, nm=nt - nl - nh, nh=nh, nt=nt)


def default_nutrient_thresholds() -> dict[str, dict[str, float]]:
    """Bundled low/high cutoffs per nutrient.

    These are conventional soil-testing norms shipped as editable
    defaults, not survey-calibrated values; pass explicit thresholds to
    :func:`classify_levels` for real assessments.
    """
    raw = resources.files("soilyield").joinpath("data/nutrient_thresholds.json")
    payload = json.loads(raw.read_text(encoding="utf-8"))
    return {k: v for k, v in payload.items() if not k.startswith("_")}
