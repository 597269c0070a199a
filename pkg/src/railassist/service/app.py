"""REST facade over the dialog engine, the predictor, and the analytics."""

from __future__ import annotations

import datetime as dt
from typing import Optional, Sequence

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import analytics
from ..dialog import DialogEngine
from ..dialog.model import Clock
from ..domain import DelayObservation, NetworkCatalog
from ..predictor import (
    PredictionRequest,
    StationNotOnRouteError,
    UnknownTrainError,
    gate_response,
    predict_journey,
)
from ..predictor.bundles import CI_LEVELS
from ..predictor.training import ModelRegistry
from .config import AppConfig
from .sessions import MemorySessionStore, SessionStore


class ChatBody(BaseModel):
    text: str = Field(min_length=0, max_length=2000)
    session_id: Optional[str] = None


class PredictBody(BaseModel):
    train: str
    date: str
    station: Optional[str] = None
    ci_level: Optional[int] = None
    model_kind: Optional[str] = None


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"error": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def create_app(
    registry: ModelRegistry,
    catalog: NetworkCatalog,
    observations: Sequence[DelayObservation],
    config: AppConfig | None = None,
    clock: Optional[Clock] = None,
    store: Optional[SessionStore] = None,
) -> FastAPI:
    config = config or AppConfig()
    engine = DialogEngine(
        registry,
        catalog,
        observations,
        clock=clock,
        ci_level=config.ci_default_level,
        model_kind=config.model_kind,
        min_confidence=config.gate_min_confidence,
        timeout_ms=config.gate_timeout_ms,
    )
    sessions = store or MemorySessionStore(ttl_minutes=config.session_ttl_minutes)
    app = FastAPI(title="railassist", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def malformed(_request: Request, exc: RequestValidationError):
        return _error(400, "malformed", "request body failed validation", detail=exc.errors())

    @app.post("/api/chat")
    def chat(body: ChatBody):
        session = sessions.get_or_create(body.session_id)
        with session.lock:
            response, new_context = engine.step(session.context, body.text)
            session.context = new_context
            sessions.save(session)
        return {
            "session_id": session.session_id,
            "reply_text": response.text,
            "payload": response.payload,
            "needs_clarification": response.needs_clarification,
        }

    @app.post("/api/predict")
    def predict(body: PredictBody):
        try:
            date = dt.date.fromisoformat(body.date)
        except ValueError:
            return _error(400, "malformed", f"invalid date {body.date!r}, expected YYYY-MM-DD")
        ci_level = body.ci_level if body.ci_level is not None else config.ci_default_level
        model_kind = body.model_kind or config.model_kind
        if ci_level not in CI_LEVELS or model_kind not in ("forest", "ridge"):
            return _error(400, "malformed", "ci_level must be 68/95/99 and model_kind forest/ridge")
        try:
            request = PredictionRequest(body.train, date, station=body.station, ci_level=ci_level, model_kind=model_kind)
            prediction = predict_journey(registry, request, catalog)
        except UnknownTrainError as err:
            return _error(404, err.code, str(err))
        except StationNotOnRouteError as err:
            return _error(
                409,
                err.code,
                str(err),
                detail={"stations": [{"station": c, "station_name": n} for c, n in err.stations]},
            )
        decision = gate_response(prediction, config.gate_min_confidence, config.gate_timeout_ms)
        if not decision.accepted:
            return _error(503, "gate-refusal", "prediction withheld by the response gate", detail={"reason": decision.reason})
        return {
            "train": prediction.train_number,
            "date": prediction.date.isoformat(),
            "ci_level": prediction.ci_level,
            "model_kind": prediction.model_kind,
            "confidence": prediction.confidence,
            "elapsed_prediction_ms": prediction.elapsed_prediction_ms,
            "stops": [
                {
                    "station": s.station,
                    "station_name": s.station_name,
                    "expected_late_min": s.expected_late_min,
                    "interval_low": s.interval_low,
                    "interval_high": s.interval_high,
                    "source": s.source,
                }
                for s in prediction.stops
            ],
        }

    @app.get("/api/trains")
    def trains():
        return {
            "trains": [
                {
                    "train_number": s.train_number,
                    "train_name": s.train_name,
                    "known": s.known,
                    "origin": s.origin.station.code,
                    "destination": s.destination.station.code,
                    "n_stops": len(s.stops),
                }
                for s in (catalog.trains[n] for n in sorted(catalog.trains))
            ]
        }

    @app.get("/api/trains/{train_number}/route")
    def route(train_number: str):
        schedule = catalog.trains.get(train_number)
        if schedule is None:
            return _error(404, "unknown-train", f"train {train_number!r} is not in the catalog")
        return {
            "train_number": schedule.train_number,
            "train_name": schedule.train_name,
            "known": schedule.known,
            "stops": [
                {
                    "station": stop.station.code,
                    "station_name": stop.station.name,
                    "stop_index": stop.stop_index,
                    "day_offset": stop.day_offset,
                    "arrival_min": stop.sched_arrival_min,
                    "departure_min": stop.sched_departure_min,
                    "distance_km": stop.distance_km,
                }
                for stop in schedule.stops
            ],
        }

    @app.get("/api/analytics/{train_number}/summary")
    def summary(
        train_number: str,
        date_from: Optional[str] = Query(None, alias="from"),
        date_to: Optional[str] = Query(None, alias="to"),
    ):
        schedule = catalog.trains.get(train_number)
        if schedule is None:
            return _error(404, "unknown-train", f"train {train_number!r} is not in the catalog")
        try:
            start = dt.date.fromisoformat(date_from) if date_from else None
            end = dt.date.fromisoformat(date_to) if date_to else None
        except ValueError:
            return _error(400, "malformed", "date_from/date_to must be YYYY-MM-DD")
        date_range = (start, end) if (start or end) else None
        try:
            profile = analytics.build_profile(observations, catalog, train_number, date_range)
            destination_avg = analytics.average_delay(observations, catalog, train_number, "destination", date_range)
            late_rate = analytics.pct_late_over(observations, catalog, train_number, "destination", date_range=date_range)
            station, increment = analytics.bottleneck_station(profile)
        except analytics.NoDataError as err:
            return _error(404, "no-data", str(err))
        return {
            "train_number": train_number,
            "date_start": profile.date_start.isoformat(),
            "date_end": profile.date_end.isoformat(),
            "stops": [
                {"station": s, "station_name": catalog.stations.get(s, s), "mean_late_min": m, "n_observations": c}
                for s, m, c in zip(profile.stations, profile.mean_delays, profile.counts)
            ],
            "destination": {
                "station": schedule.destination.station.code,
                "average_late_min": destination_avg,
                "pct_late_over_60": late_rate,
            },
            "bottleneck": {"station": station, "increment_minutes": increment},
        }

    return app
