"""Registry training: per-(train, station) bundles for known trains plus
pooled shared-station bundles, calibrated on the validation split.

Station models are fit with teacher forcing (the previous stop's *actual*
delay fills the chained feature), while calibration replays journeys with
chained predictions so interval widths reflect inference conditions.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from ..domain import (
    LATE_MINUTES_FLOOR,
    DatasetSplit,
    DelayObservation,
    JourneyKey,
    NetworkCatalog,
    TrainSchedule,
)
from ..mlcore import DesignMatrix, ForestConfig, ForestModel, RidgeModel, forest_fit, forest_predict, ridge_fit, ridge_predict
from ..seeding import stable_seed
from .bundles import CI_LEVELS, SHARED_SCOPE, StationModelBundle, calibrate_intervals, empirical_half_widths
from .errors import TrainingDataError
from .features import FEATURE_NAMES, build_features

DEFAULT_RIDGE_LAMBDA = 1.0
MIN_KNOWN_JOURNEYS = 30
MIN_STATION_SAMPLES = 20


@dataclass(frozen=True)
class TrainingMetadata:
    seed: int
    forest_config: ForestConfig
    ridge_lambda: float
    date_start: dt.date
    date_end: dt.date
    n_train_journeys: int
    n_validation_journeys: int
    min_known_journeys: int
    min_station_samples: int
    demoted_trains: tuple[str, ...]
    shared_fallback: tuple[tuple[str, str], ...]


@dataclass(eq=False)
class ModelRegistry:
    """Immutable after training; concurrent readers are safe."""

    direct: dict[tuple[str, str], StationModelBundle]
    shared: dict[str, StationModelBundle]
    feature_names: tuple[str, ...]
    known_trains: frozenset[str]
    widest_half_widths: dict[int, float]
    metadata: TrainingMetadata


def journey_observations(observations: Iterable[DelayObservation]) -> dict[JourneyKey, dict[str, float]]:
    """Group observations as (train, date) -> station -> late minutes."""
    grouped: dict[JourneyKey, dict[str, float]] = {}
    for obs in observations:
        grouped.setdefault((obs.train_number, obs.date), {})[obs.station_code] = obs.late_minutes
    return grouped


def _journey_rows(schedule: TrainSchedule, date: dt.date, stop_delays: dict[str, float]):
    """Teacher-forced (features, target) pairs for one training journey."""
    rows = []
    prev_actual = 0.0
    for stop in schedule.stops:
        target = stop_delays.get(stop.station.code)
        features = build_features(schedule, stop.stop_index, date, prev_actual)
        if target is not None:
            rows.append((stop.station.code, features, target))
            prev_actual = target
    return rows


def _fit_models(
    rows: list[tuple[np.ndarray, float]], config: ForestConfig, ridge_lambda: float, seed_key: tuple
) -> tuple[ForestModel, RidgeModel]:
    X = np.vstack([f for f, _ in rows])
    y = np.array([t for _, t in rows])
    data = DesignMatrix(X, y, FEATURE_NAMES)
    forest = forest_fit(data, replace(config, seed=stable_seed(config.seed, *seed_key)))
    ridge = ridge_fit(data, ridge_lambda)
    return forest, ridge


def _chain_residuals(
    schedule: TrainSchedule,
    date: dt.date,
    stop_delays: dict[str, float],
    models: dict[str, tuple[ForestModel, RidgeModel]],
    model_kind: str,
):
    """Replay one journey with chained predictions; yields per-stop residuals."""
    out = []
    prev_pred = 0.0
    for stop in schedule.stops:
        pair = models.get(stop.station.code)
        if pair is None:
            continue
        features = build_features(schedule, stop.stop_index, date, prev_pred)
        forest, ridge = pair
        pred = forest_predict(forest, features) if model_kind == "forest" else ridge_predict(ridge, features)
        pred = max(pred, LATE_MINUTES_FLOOR)
        prev_pred = pred
        actual = stop_delays.get(stop.station.code)
        if actual is not None:
            out.append((stop.station.code, actual - pred))
    return out


def train_registry(
    catalog: NetworkCatalog,
    observations: Sequence[DelayObservation],
    split: DatasetSplit,
    config: ForestConfig,
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
    *,
    min_known_journeys: int = MIN_KNOWN_JOURNEYS,
    min_station_samples: int = MIN_STATION_SAMPLES,
    calibration_model_kind: str = "forest",
    include_shared: bool = True,
) -> ModelRegistry:
    """Fit one bundle per known-train stop plus shared per-station bundles.

    Known trains with fewer than ``min_known_journeys`` training journeys are
    demoted to the unknown group (served by shared bundles) with a warning in
    the metadata. ``include_shared=False`` skips the pooled bundles; it exists
    for single-train benchmark runs and disables unknown-train serving.
    """
    if not split.train:
        raise TrainingDataError("training split is empty")
    grouped = journey_observations(observations)

    journeys_per_train: dict[str, list[JourneyKey]] = {}
    for key in sorted(split.train):
        if key in grouped:
            journeys_per_train.setdefault(key[0], []).append(key)

    demoted: list[str] = []
    effective_known: list[str] = []
    for train_number in sorted(catalog.trains):
        schedule = catalog.trains[train_number]
        if not schedule.known:
            continue
        if len(journeys_per_train.get(train_number, [])) < min_known_journeys:
            demoted.append(train_number)
        else:
            effective_known.append(train_number)
    if not effective_known:
        raise TrainingDataError(
            f"no known train reaches {min_known_journeys} training journeys; nothing to fit"
        )

    direct_rows: dict[tuple[str, str], list[tuple[np.ndarray, float]]] = {}
    shared_rows: dict[str, list[tuple[np.ndarray, float]]] = {}
    for train_number in effective_known:
        schedule = catalog.trains[train_number]
        for key in journeys_per_train[train_number]:
            for code, features, target in _journey_rows(schedule, key[1], grouped[key]):
                direct_rows.setdefault((train_number, code), []).append((features, target))
                if include_shared:
                    shared_rows.setdefault(code, []).append((features, target))

    shared_models: dict[str, tuple[ForestModel, RidgeModel]] = {}
    for code in sorted(shared_rows):
        shared_models[code] = _fit_models(shared_rows[code], config, ridge_lambda, ("shared", code))

    direct_models: dict[tuple[str, str], tuple[ForestModel, RidgeModel]] = {}
    shared_fallback: list[tuple[str, str]] = []
    for key in sorted(direct_rows):
        if len(direct_rows[key]) >= min_station_samples or key[1] not in shared_models:
            direct_models[key] = _fit_models(direct_rows[key], config, ridge_lambda, ("direct",) + key)
        else:
            direct_models[key] = shared_models[key[1]]
            shared_fallback.append(key)

    # Calibration: replay validation journeys with chained predictions, once
    # against the direct bundles and once against the shared ones.
    direct_residuals: dict[tuple[str, str], list[float]] = {}
    shared_residuals: dict[str, list[float]] = {}
    all_residuals: list[float] = []
    for key in sorted(split.validation):
        train_number, date = key
        if train_number not in effective_known or key not in grouped:
            continue
        schedule = catalog.trains[train_number]
        per_train = {
            code: direct_models[(train_number, code)]
            for code in schedule.station_codes
            if (train_number, code) in direct_models
        }
        for code, residual in _chain_residuals(schedule, date, grouped[key], per_train, calibration_model_kind):
            direct_residuals.setdefault((train_number, code), []).append(residual)
            all_residuals.append(residual)
        if include_shared:
            for code, residual in _chain_residuals(schedule, date, grouped[key], shared_models, calibration_model_kind):
                shared_residuals.setdefault(code, []).append(residual)
                all_residuals.append(residual)

    global_widths = empirical_half_widths(all_residuals)

    shared: dict[str, StationModelBundle] = {}
    for code, (forest, ridge) in shared_models.items():
        shared[code] = StationModelBundle(
            station=code,
            scope=SHARED_SCOPE,
            forest=forest,
            ridge=ridge,
            residual_quantiles=calibrate_intervals(shared_residuals.get(code, []), inherited=global_widths),
            n_train_samples=len(shared_rows[code]),
        )

    direct: dict[tuple[str, str], StationModelBundle] = {}
    for key, (forest, ridge) in direct_models.items():
        train_number, code = key
        if key in shared_fallback:
            direct[key] = shared[code]
            continue
        inherited = shared[code].residual_quantiles if code in shared else global_widths
        direct[key] = StationModelBundle(
            station=code,
            scope=train_number,
            forest=forest,
            ridge=ridge,
            residual_quantiles=calibrate_intervals(direct_residuals.get(key, []), inherited=inherited),
            n_train_samples=len(direct_rows[key]),
        )

    widest = {
        level: max(
            [b.residual_quantiles[level] for b in shared.values()]
            + [b.residual_quantiles[level] for b in direct.values()]
            + [global_widths[level]]
        )
        for level in CI_LEVELS
    }

    dates = sorted(date for _, date in grouped)
    metadata = TrainingMetadata(
        seed=config.seed,
        forest_config=config,
        ridge_lambda=ridge_lambda,
        date_start=dates[0],
        date_end=dates[-1],
        n_train_journeys=len(split.train),
        n_validation_journeys=len(split.validation),
        min_known_journeys=min_known_journeys,
        min_station_samples=min_station_samples,
        demoted_trains=tuple(demoted),
        shared_fallback=tuple(shared_fallback),
    )
    return ModelRegistry(
        direct=direct,
        shared=shared,
        feature_names=FEATURE_NAMES,
        known_trains=frozenset(effective_known),
        widest_half_widths=widest,
        metadata=metadata,
    )
