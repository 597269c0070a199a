"""Chained journey prediction, unknown-train generalization, coverage
evaluation, and the response gate."""

from __future__ import annotations

import datetime as dt
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..domain import LATE_MINUTES_FLOOR, DelayObservation, JourneyKey, NetworkCatalog, TrainSchedule, route_position
from .bundles import CI_LEVELS, StationModelBundle
from .errors import StationNotOnRouteError, UnknownTrainError
from .features import build_features
from .training import ModelRegistry

MODEL_KINDS = ("forest", "ridge")

SOURCE_DIRECT = "direct"
SOURCE_SHARED = "shared"
SOURCE_INTERPOLATED = "interpolated"
SOURCE_FALLBACK = "fallback"


@dataclass(frozen=True)
class PredictionRequest:
    train_number: str
    date: dt.date
    station: Optional[str] = None
    ci_level: int = 99
    model_kind: str = "forest"

    def __post_init__(self) -> None:
        if self.ci_level not in CI_LEVELS:
            raise ValueError(f"ci_level must be one of {CI_LEVELS}")
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"model_kind must be one of {MODEL_KINDS}")


@dataclass(frozen=True)
class StopPrediction:
    station: str
    station_name: str
    expected_late_min: float
    interval_low: float
    interval_high: float
    source: str


@dataclass
class JourneyPrediction:
    train_number: str
    date: dt.date
    ci_level: int
    model_kind: str
    stops: tuple[StopPrediction, ...]
    confidence: float
    elapsed_prediction_ms: float = field(compare=False, default=0.0)

    def stop_for(self, station_code: str) -> Optional[StopPrediction]:
        for stop in self.stops:
            if stop.station == station_code:
                return stop
        return None

    @property
    def destination(self) -> StopPrediction:
        return self.stops[-1]


def generalize_unknown(
    registry: ModelRegistry, schedule: TrainSchedule, stop_index: int
) -> tuple[str, Optional[StationModelBundle]]:
    """Bundle choice for one stop of a train without direct models.

    Stops at stations that carry a shared bundle use it; stops without one
    are interpolated between the nearest shared-bundle neighbors on the same
    route; when the whole route lacks shared stations the stop falls back to
    a zero prediction with the widest global interval.
    """
    code = schedule.stops[stop_index].station.code
    bundle = registry.shared.get(code)
    if bundle is not None:
        return SOURCE_SHARED, bundle
    if any(stop.station.code in registry.shared for stop in schedule.stops):
        return SOURCE_INTERPOLATED, None
    return SOURCE_FALLBACK, None


def _confidence(weights: list[float], scores: list[float]) -> float:
    # Sample-count weighting with +1 smoothing so fallback stops (weight 0)
    # still drag the average down instead of vanishing from it.
    total = sum(w + 1.0 for w in weights)
    return sum((w + 1.0) * s for w, s in zip(weights, scores)) / total


def predict_journey(
    registry: ModelRegistry, request: PredictionRequest, catalog: NetworkCatalog
) -> JourneyPrediction:
    """Predict every stop of the requested journey in route order.

    Each stop's prediction feeds the next stop's chained feature. Expected
    values are clamped at the late-minutes floor; the interval at the
    requested CI level is the bundle's calibrated symmetric half-width.
    """
    started = time.perf_counter()
    schedule = catalog.trains.get(request.train_number)
    if schedule is None:
        raise UnknownTrainError(request.train_number)
    if request.station is not None and route_position(schedule, request.station) is None:
        raise StationNotOnRouteError(
            request.train_number,
            request.station,
            [(s.station.code, s.station.name) for s in schedule.stops],
        )

    if request.train_number in registry.known_trains:
        stops, weights, scores = _predict_known(registry, schedule, request)
    else:
        stops, weights, scores = _predict_unknown(registry, schedule, request)

    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return JourneyPrediction(
        train_number=request.train_number,
        date=request.date,
        ci_level=request.ci_level,
        model_kind=request.model_kind,
        stops=tuple(stops),
        confidence=_confidence(weights, scores),
        elapsed_prediction_ms=elapsed_ms,
    )


def _predict_known(registry: ModelRegistry, schedule: TrainSchedule, request: PredictionRequest):
    stops: list[StopPrediction] = []
    weights: list[float] = []
    scores: list[float] = []
    prev = 0.0
    for stop in schedule.stops:
        bundle = registry.direct[(schedule.train_number, stop.station.code)]
        features = build_features(schedule, stop.stop_index, request.date, prev)
        expected = max(bundle.predict(features, request.model_kind), LATE_MINUTES_FLOOR)
        prev = expected
        hw = bundle.half_width(request.ci_level)
        stops.append(
            StopPrediction(
                station=stop.station.code,
                station_name=stop.station.name,
                expected_late_min=expected,
                interval_low=expected - hw,
                interval_high=expected + hw,
                source=SOURCE_DIRECT,
            )
        )
        weights.append(float(bundle.n_train_samples))
        scores.append(1.0)
    return stops, weights, scores


def _predict_unknown(registry: ModelRegistry, schedule: TrainSchedule, request: PredictionRequest):
    n = len(schedule.stops)
    choices = [generalize_unknown(registry, schedule, i) for i in range(n)]

    # First pass: chain through the stops that have shared bundles; stops
    # awaiting interpolation do not advance the chain.
    anchor: dict[int, tuple[float, StationModelBundle]] = {}
    prev = 0.0
    for i, stop in enumerate(schedule.stops):
        source, bundle = choices[i]
        if source != SOURCE_SHARED:
            continue
        features = build_features(schedule, i, request.date, prev)
        expected = max(bundle.predict(features, request.model_kind), LATE_MINUTES_FLOOR)
        prev = expected
        anchor[i] = (expected, bundle)

    stops: list[StopPrediction] = []
    weights: list[float] = []
    scores: list[float] = []
    anchored = sorted(anchor)
    for i, stop in enumerate(schedule.stops):
        source, _ = choices[i]
        if source == SOURCE_SHARED:
            expected, bundle = anchor[i]
            hw = bundle.half_width(request.ci_level)
            weight, score = float(bundle.n_train_samples), 1.0
        elif source == SOURCE_INTERPOLATED:
            expected, hw, weight = _interpolate(schedule, i, anchor, anchored, request.ci_level)
            score = 0.5
        else:
            expected = 0.0
            hw = registry.widest_half_widths[request.ci_level]
            weight, score = 0.0, 0.0
        stops.append(
            StopPrediction(
                station=stop.station.code,
                station_name=stop.station.name,
                expected_late_min=expected,
                interval_low=expected - hw,
                interval_high=expected + hw,
                source=source,
            )
        )
        weights.append(weight)
        scores.append(score)
    return stops, weights, scores


def _interpolate(schedule, index, anchor, anchored, ci_level):
    """Distance-weighted blend of the nearest anchored neighbors; one-sided
    neighbors are copied (constant extrapolation)."""
    before = [i for i in anchored if i < index]
    after = [i for i in anchored if i > index]
    km = schedule.stops[index].distance_km

    def at(i):
        expected, bundle = anchor[i]
        return expected, bundle.half_width(ci_level), float(bundle.n_train_samples)

    if before and after:
        lo, hi = before[-1], after[0]
        km_lo, km_hi = schedule.stops[lo].distance_km, schedule.stops[hi].distance_km
        w = (km - km_lo) / (km_hi - km_lo)
        e_lo, h_lo, n_lo = at(lo)
        e_hi, h_hi, n_hi = at(hi)
        return (
            (1 - w) * e_lo + w * e_hi,
            (1 - w) * h_lo + w * h_hi,
            (1 - w) * n_lo + w * n_hi,
        )
    return at(before[-1] if before else after[0])


def evaluate_ci_accuracy(
    registry: ModelRegistry,
    catalog: NetworkCatalog,
    observations: Iterable[DelayObservation],
    journeys: Iterable[JourneyKey],
    ci_level: int,
    model_kind: str = "forest",
) -> float:
    """Fraction of held-out observations falling inside the predicted interval."""
    grouped: dict[JourneyKey, dict[str, float]] = {}
    for obs in observations:
        grouped.setdefault((obs.train_number, obs.date), {})[obs.station_code] = obs.late_minutes
    inside = 0
    total = 0
    for key in sorted(set(journeys)):
        delays = grouped.get(key)
        if not delays or key[0] not in catalog.trains:
            continue
        request = PredictionRequest(train_number=key[0], date=key[1], ci_level=ci_level, model_kind=model_kind)
        prediction = predict_journey(registry, request, catalog)
        for stop in prediction.stops:
            actual = delays.get(stop.station)
            if actual is None:
                continue
            total += 1
            if stop.interval_low <= actual <= stop.interval_high:
                inside += 1
    if total == 0:
        raise ValueError("no test observations matched the requested journeys")
    return inside / total


@dataclass(frozen=True)
class GateDecision:
    accepted: bool
    reason: Optional[str] = None


def gate_response(
    prediction: JourneyPrediction,
    min_confidence: float = 0.5,
    timeout_ms: float = 10_000.0,
) -> GateDecision:
    """Decide whether a prediction is fit to present: confident enough and
    produced within the latency budget."""
    if prediction.confidence < min_confidence:
        return GateDecision(False, "low-confidence")
    if prediction.elapsed_prediction_ms > timeout_ms:
        return GateDecision(False, "timeout")
    return GateDecision(True)
