"""Prediction-time versus accuracy benchmarks.

``run_tradeoff`` sweeps forest sizes on one long train and reports fit time,
median per-journey prediction latency, and held-out RMSE. ``run_rr_scaling``
measures ridge prediction latency against route length (with a forest column
for contrast) and against a doubled training set. Timing uses warmed-up
median-of-repetitions so content columns stay deterministic and only timing
columns carry noise.
"""

from __future__ import annotations

import csv
import datetime as dt
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .domain import DatasetSplit, NetworkCatalog
from .mlcore import ForestConfig, rmse
from .predictor import PredictionRequest, predict_journey, train_registry
from .predictor.training import ModelRegistry, journey_observations
from .synthdata import GeneratorConfig, generate_delay_history, generate_network, split_dataset

TRADEOFF_CSV_COLUMNS = ["n_trees", "fit_s", "predict_ms_per_journey", "rmse"]
RR_SCALING_CSV_COLUMNS = ["n_stations", "rr_predict_ms", "rr_predict_ms_doubled_data", "forest_predict_ms"]

DEFAULT_REPETITIONS = 11
_WARMUP = 2


@dataclass(frozen=True)
class TradeoffRow:
    n_trees: int
    fit_s: float
    predict_ms_per_journey: float
    rmse: float


@dataclass(frozen=True)
class RrScalingRow:
    n_stations: int
    rr_predict_ms: float
    rr_predict_ms_doubled_data: float
    forest_predict_ms: float


def _single_train_dataset(seed: int, n_stations: int, n_days: int):
    config = GeneratorConfig(
        seed=seed,
        n_known_trains=1,
        n_unknown_trains=0,
        stations_per_train=(n_stations, n_stations),
        station_pool_size=max(n_stations, 40),
        date_start=dt.date(2018, 1, 1),
        date_end=dt.date(2018, 1, 1) + dt.timedelta(days=n_days - 1),
        noise_sigma=4.0,
        propagation_alpha=0.8,
        recovery_rate=0.02,
        congestion_scale=5.0,
    )
    catalog = generate_network(config)
    observations, _ = generate_delay_history(catalog, config)
    split = split_dataset(observations, (0.7, 0.15, 0.15), seed=seed)
    return catalog, observations, split


def _time_block(registry: ModelRegistry, catalog: NetworkCatalog, requests: Sequence[PredictionRequest]) -> float:
    started = time.perf_counter()
    for request in requests:
        predict_journey(registry, request, catalog)
    return (time.perf_counter() - started) / len(requests) * 1000.0


def _median_journey_ms(
    registry: ModelRegistry,
    catalog: NetworkCatalog,
    requests: Sequence[PredictionRequest],
    repetitions: int,
) -> float:
    samples = []
    for rep in range(_WARMUP + repetitions):
        per_journey_ms = _time_block(registry, catalog, requests)
        if rep >= _WARMUP:
            samples.append(per_journey_ms)
    return statistics.median(samples)


def _median_journey_ms_pair(
    a: tuple[ModelRegistry, NetworkCatalog, Sequence[PredictionRequest]],
    b: tuple[ModelRegistry, NetworkCatalog, Sequence[PredictionRequest]],
    repetitions: int,
) -> tuple[float, float]:
    """Interleave the two measurements so machine jitter hits both equally;
    ratio comparisons between the medians stay meaningful on a noisy host."""
    samples_a, samples_b = [], []
    for rep in range(_WARMUP + repetitions):
        ta = _time_block(*a)
        tb = _time_block(*b)
        if rep >= _WARMUP:
            samples_a.append(ta)
            samples_b.append(tb)
    return statistics.median(samples_a), statistics.median(samples_b)


def _heldout_rmse(registry: ModelRegistry, catalog: NetworkCatalog, observations, split: DatasetSplit, model_kind: str) -> float:
    grouped = journey_observations(observations)
    preds, actuals = [], []
    for key in sorted(split.test):
        delays = grouped[key]
        prediction = predict_journey(
            registry, PredictionRequest(key[0], key[1], model_kind=model_kind), catalog
        )
        for stop in prediction.stops:
            actual = delays.get(stop.station)
            if actual is not None:
                preds.append(stop.expected_late_min)
                actuals.append(actual)
    return rmse(preds, actuals).rmse


def _probe_requests(catalog: NetworkCatalog, model_kind: str, n: int = 3) -> list[PredictionRequest]:
    train = sorted(catalog.trains)[0]
    base = dt.date(2019, 1, 1)
    return [PredictionRequest(train, base + dt.timedelta(days=i * 7), model_kind=model_kind) for i in range(n)]


def run_tradeoff(
    tree_counts: Sequence[int],
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    n_stations: int = 112,
    n_days: int = 120,
    max_depth: int | None = 8,
) -> list[TradeoffRow]:
    """One row per forest size on a single long train, counts ascending."""
    if list(tree_counts) != sorted(tree_counts):
        raise ValueError("tree_counts must be sorted ascending")
    catalog, observations, split = _single_train_dataset(seed, n_stations, n_days)
    rows: list[TradeoffRow] = []
    base_config = ForestConfig(n_trees=1, max_depth=max_depth, min_samples_leaf=3, seed=seed)
    for count in tree_counts:
        config = replace(base_config, n_trees=count)
        started = time.perf_counter()
        registry = train_registry(catalog, observations, split, config, include_shared=False, min_known_journeys=1)
        fit_s = time.perf_counter() - started
        predict_ms = _median_journey_ms(registry, catalog, _probe_requests(catalog, "forest"), repetitions)
        error = _heldout_rmse(registry, catalog, observations, split, "forest")
        rows.append(TradeoffRow(n_trees=count, fit_s=fit_s, predict_ms_per_journey=predict_ms, rmse=error))
    return rows


def run_rr_scaling(
    station_counts: Sequence[int],
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = 0,
    n_days: int = 60,
    contrast_n_trees: int = 25,
) -> list[RrScalingRow]:
    """Ridge journey-prediction latency per route length.

    The doubled-data column retrains on twice the journeys: ridge predict
    cost depends only on the station count, so the two columns should agree.
    """
    rows: list[RrScalingRow] = []
    for count in station_counts:
        catalog, observations, split = _single_train_dataset(seed, count, n_days)
        config = ForestConfig(n_trees=contrast_n_trees, max_depth=8, min_samples_leaf=3, seed=seed)
        registry = train_registry(catalog, observations, split, config, include_shared=False, min_known_journeys=1)
        forest_ms = _median_journey_ms(registry, catalog, _probe_requests(catalog, "forest"), repetitions)

        catalog2, observations2, split2 = _single_train_dataset(seed, count, n_days * 2)
        registry2 = train_registry(catalog2, observations2, split2, config, include_shared=False, min_known_journeys=1)
        rr_ms, rr_ms_doubled = _median_journey_ms_pair(
            (registry, catalog, _probe_requests(catalog, "ridge", n=25)),
            (registry2, catalog2, _probe_requests(catalog2, "ridge", n=25)),
            repetitions,
        )
        rows.append(
            RrScalingRow(
                n_stations=count,
                rr_predict_ms=rr_ms,
                rr_predict_ms_doubled_data=rr_ms_doubled,
                forest_predict_ms=forest_ms,
            )
        )
    return rows


def write_tradeoff_csv(rows: Sequence[TradeoffRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRADEOFF_CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.n_trees, f"{row.fit_s:.6f}", f"{row.predict_ms_per_journey:.6f}", f"{row.rmse:.6f}"])


def write_rr_scaling_csv(rows: Sequence[RrScalingRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RR_SCALING_CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.n_stations, f"{row.rr_predict_ms:.6f}", f"{row.rr_predict_ms_doubled_data:.6f}", f"{row.forest_predict_ms:.6f}"]
            )
