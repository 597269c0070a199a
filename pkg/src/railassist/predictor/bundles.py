"""Per-station model bundles and interval calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..mlcore import ForestModel, RidgeModel, forest_predict, ridge_predict

CI_LEVELS = (68, 95, 99)

SHARED_SCOPE = "shared-station"

MIN_CALIBRATION_RESIDUALS = 10


@dataclass(eq=False)
class StationModelBundle:
    """Trained forest + ridge pair for one station, with the calibration
    table of symmetric interval half-widths keyed by CI level."""

    station: str
    scope: str
    forest: ForestModel
    ridge: RidgeModel
    residual_quantiles: dict[int, float]
    n_train_samples: int

    def __post_init__(self) -> None:
        widths = [self.residual_quantiles[level] for level in CI_LEVELS]
        if any(w < 0 for w in widths):
            raise ValueError("interval half-widths must be >= 0")
        if not (widths[0] <= widths[1] <= widths[2]):
            raise ValueError(f"half-widths must be non-decreasing across {CI_LEVELS}, got {widths}")

    def predict(self, features: np.ndarray, model_kind: str) -> float:
        if model_kind == "forest":
            return forest_predict(self.forest, features)
        if model_kind == "ridge":
            return ridge_predict(self.ridge, features)
        raise ValueError(f"unknown model_kind {model_kind!r}")

    def half_width(self, ci_level: int) -> float:
        return self.residual_quantiles[ci_level]


def empirical_half_widths(residuals: Sequence[float] | np.ndarray) -> dict[int, float]:
    """Sorted-absolute-residual quantiles: half-width(L) is the k-th smallest
    |residual| with k = ceil(L/100 * n). Zero widths when no residuals."""
    if len(residuals) == 0:
        return {level: 0.0 for level in CI_LEVELS}
    abs_sorted = np.sort(np.abs(np.asarray(residuals, dtype=float)))
    n = abs_sorted.shape[0]
    out: dict[int, float] = {}
    for level in CI_LEVELS:
        k = math.ceil(level / 100.0 * n)
        out[level] = float(abs_sorted[min(n, k) - 1])
    return out


def calibrate_intervals(
    residuals: Iterable[float],
    inherited: Mapping[int, float] | None = None,
    min_residuals: int = MIN_CALIBRATION_RESIDUALS,
) -> dict[int, float]:
    """Empirical symmetric half-widths from validation residuals.

    Below ``min_residuals`` the station has too little evidence of its own
    and inherits the supplied table (typically the shared-station one).
    """
    values = list(residuals)
    if len(values) < min_residuals and inherited is not None:
        return {level: float(inherited[level]) for level in CI_LEVELS}
    return empirical_half_widths(values)
