"""Policy selection: dispatch a resolved query to the predictor or the
analytics functions and wrap the outcome in a typed result. Every prediction
passes the response gate before it may become an answer."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .. import analytics
from ..domain import DelayObservation, NetworkCatalog
from ..predictor import (
    JourneyPrediction,
    PredictionRequest,
    StationNotOnRouteError,
    UnknownTrainError,
    gate_response,
    predict_journey,
)
from ..predictor.training import ModelRegistry
from .model import ClarificationRequest, Intent, ResolvedQuery

SIMILAR_TRAINS_TOP_K = 3


@dataclass(frozen=True)
class PolicyResult:
    kind: str = field(init=False, default="")


@dataclass(frozen=True)
class DelayAnswer(PolicyResult):
    kind: str = field(init=False, default="delay_answer")
    train: str = ""
    station: str = ""
    station_name: str = ""
    date: Optional[dt.date] = None
    minutes: float = 0.0
    interval_low: float = 0.0
    interval_high: float = 0.0
    ci_level: int = 99
    prediction: Optional[JourneyPrediction] = None


@dataclass(frozen=True)
class FurtherDelayAnswer(PolicyResult):
    kind: str = field(init=False, default="further_delay_answer")
    train: str = ""
    station: str = ""
    station_name: str = ""
    date: Optional[dt.date] = None
    verdict: str = "worsened"
    delta_minutes: float = 0.0
    at_station_minutes: float = 0.0
    destination_minutes: float = 0.0
    prediction: Optional[JourneyPrediction] = None


@dataclass(frozen=True)
class StationListOffer(PolicyResult):
    kind: str = field(init=False, default="station_list_offer")
    train: str = ""
    queried_station_name: str = ""
    stations: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class RouteListAnswer(PolicyResult):
    kind: str = field(init=False, default="route_list_answer")
    train: str = ""
    stations: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class AverageDelayAnswer(PolicyResult):
    kind: str = field(init=False, default="average_delay_answer")
    train: str = ""
    station: str = ""
    station_name: str = ""
    minutes: float = 0.0


@dataclass(frozen=True)
class FirstDelayAnswer(PolicyResult):
    kind: str = field(init=False, default="first_delay_answer")
    train: str = ""
    date: Optional[dt.date] = None
    station: Optional[str] = None
    minutes: Optional[float] = None
    threshold: float = analytics.DELAYED_THRESHOLD_MIN
    prediction: Optional[JourneyPrediction] = None


@dataclass(frozen=True)
class BottleneckAnswer(PolicyResult):
    kind: str = field(init=False, default="bottleneck_answer")
    train: str = ""
    station: str = ""
    station_name: str = ""
    increment_minutes: float = 0.0


@dataclass(frozen=True)
class SimilarTrainsAnswer(PolicyResult):
    kind: str = field(init=False, default="similar_trains_answer")
    train: str = ""
    ranked: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class Refusal(PolicyResult):
    kind: str = field(init=False, default="refusal")
    reason: str = "low-confidence"


@dataclass(frozen=True)
class UnknownTrainResult(PolicyResult):
    kind: str = field(init=False, default="unknown_train")
    train: str = ""


@dataclass(frozen=True)
class NoDataResult(PolicyResult):
    kind: str = field(init=False, default="no_data")
    message: str = ""


@dataclass(frozen=True)
class ClarificationResult(PolicyResult):
    kind: str = field(init=False, default="clarification")
    question_key: str = "clarify_train"
    missing: str = "train"


@dataclass(frozen=True)
class GreetResult(PolicyResult):
    kind: str = field(init=False, default="greeting")


@dataclass(frozen=True)
class HelpResult(PolicyResult):
    kind: str = field(init=False, default="help")


@dataclass(frozen=True)
class FallbackResult(PolicyResult):
    kind: str = field(init=False, default="fallback")


@dataclass
class PolicyDeps:
    registry: ModelRegistry
    catalog: NetworkCatalog
    observations: Sequence[DelayObservation]
    ci_level: int = 99
    model_kind: str = "forest"
    min_confidence: float = 0.5
    timeout_ms: float = 10_000.0
    mitigation_dead_band: float = analytics.MITIGATION_DEAD_BAND_MIN
    _profiles: Optional[list[analytics.DelayProfile]] = None

    def profiles(self) -> list[analytics.DelayProfile]:
        if self._profiles is None:
            out = []
            for train in sorted(self.catalog.trains):
                try:
                    out.append(analytics.build_profile(self.observations, self.catalog, train))
                except analytics.NoDataError:
                    continue
            self._profiles = out
        return self._profiles


def clarification(request: ClarificationRequest) -> ClarificationResult:
    if request.question_key == "fallback":
        return FallbackResult()
    return ClarificationResult(question_key=request.question_key, missing=request.missing)


def _gated_prediction(deps: PolicyDeps, query: ResolvedQuery):
    request = PredictionRequest(
        train_number=query.train_number,
        date=query.date,
        station=query.station_code,
        ci_level=deps.ci_level,
        model_kind=deps.model_kind,
    )
    prediction = predict_journey(deps.registry, request, deps.catalog)
    decision = gate_response(prediction, deps.min_confidence, deps.timeout_ms)
    if not decision.accepted:
        return None, Refusal(reason=decision.reason)
    return prediction, None


def execute_policy(query: ResolvedQuery, deps: PolicyDeps) -> PolicyResult:
    if query.intent is Intent.GREET:
        return GreetResult()
    if query.intent is Intent.HELP:
        return HelpResult()
    if query.intent is Intent.FALLBACK:
        return FallbackResult()

    schedule = deps.catalog.trains.get(query.train_number)
    if schedule is None:
        return UnknownTrainResult(train=query.train_number)

    if query.intent is Intent.LIST_STATIONS:
        return RouteListAnswer(
            train=query.train_number,
            stations=tuple((s.station.code, s.station.name) for s in schedule.stops),
        )
    if query.intent is Intent.AVERAGE_DELAY:
        try:
            mean = analytics.average_delay(deps.observations, deps.catalog, query.train_number, query.station_code)
        except analytics.NoDataError as err:
            return NoDataResult(message=str(err))
        return AverageDelayAnswer(
            train=query.train_number,
            station=query.station_code,
            station_name=_station_name(deps.catalog, query.station_code),
            minutes=mean,
        )
    if query.intent is Intent.BOTTLENECK:
        try:
            profile = analytics.build_profile(deps.observations, deps.catalog, query.train_number)
            station, increment = analytics.bottleneck_station(profile)
        except analytics.NoDataError as err:
            return NoDataResult(message=str(err))
        return BottleneckAnswer(
            train=query.train_number,
            station=station,
            station_name=_station_name(deps.catalog, station),
            increment_minutes=increment,
        )
    if query.intent is Intent.SIMILAR_TRAINS:
        try:
            ranked = analytics.train_similarity(deps.profiles(), query.train_number, k=SIMILAR_TRAINS_TOP_K + 1)
        except analytics.NoDataError as err:
            return NoDataResult(message=str(err))
        others = tuple((t, s) for t, s in ranked if t != query.train_number)[:SIMILAR_TRAINS_TOP_K]
        if not others:
            return NoDataResult(message="no comparable trains share enough stations")
        return SimilarTrainsAnswer(train=query.train_number, ranked=others)

    # Prediction-backed intents from here on.
    try:
        prediction, refusal = _gated_prediction(deps, query)
    except UnknownTrainError:
        return UnknownTrainResult(train=query.train_number)
    except StationNotOnRouteError as err:
        return StationListOffer(
            train=query.train_number,
            queried_station_name=_station_name(deps.catalog, err.station_code),
            stations=tuple((c, n) for c, n in err.stations),
        )
    if refusal is not None:
        return refusal

    if query.intent is Intent.FIRST_DELAY:
        series = [(s.station, s.expected_late_min) for s in prediction.stops]
        hit = analytics.first_delay_station(series)
        if hit is None:
            return FirstDelayAnswer(train=query.train_number, date=query.date, prediction=prediction)
        return FirstDelayAnswer(
            train=query.train_number,
            date=query.date,
            station=hit[0],
            minutes=hit[1],
            prediction=prediction,
        )

    # QUERY_DELAY and QUERY_DELAY_FURTHER share the journey comparison.
    destination = schedule.destination.station.code
    station = query.station_code or destination
    if query.intent is Intent.QUERY_DELAY_FURTHER and station == destination:
        station = schedule.origin.station.code
    at_stop = prediction.stop_for(station)
    if station == destination:
        return DelayAnswer(
            train=query.train_number,
            station=station,
            station_name=_station_name(deps.catalog, station),
            date=query.date,
            minutes=at_stop.expected_late_min,
            interval_low=at_stop.interval_low,
            interval_high=at_stop.interval_high,
            ci_level=prediction.ci_level,
            prediction=prediction,
        )

    comparison = analytics.delay_mitigated(
        [(s.station, s.expected_late_min) for s in prediction.stops],
        station,
        dead_band_min=deps.mitigation_dead_band,
    )
    if comparison.verdict == "unchanged" and query.intent is Intent.QUERY_DELAY:
        return DelayAnswer(
            train=query.train_number,
            station=station,
            station_name=_station_name(deps.catalog, station),
            date=query.date,
            minutes=at_stop.expected_late_min,
            interval_low=at_stop.interval_low,
            interval_high=at_stop.interval_high,
            ci_level=prediction.ci_level,
            prediction=prediction,
        )
    return FurtherDelayAnswer(
        train=query.train_number,
        station=station,
        station_name=_station_name(deps.catalog, station),
        date=query.date,
        verdict=comparison.verdict,
        delta_minutes=comparison.delta,
        at_station_minutes=comparison.delay_at_station,
        destination_minutes=comparison.delay_at_destination,
        prediction=prediction,
    )


def _station_name(catalog: NetworkCatalog, code: Optional[str]) -> str:
    if code is None:
        return ""
    return catalog.stations.get(code, code)
