"""Template responses. Templates live in data/templates.json keyed by result
kind and locale; minutes render with one decimal only when fractional."""

from __future__ import annotations

import json
from pathlib import Path

from .model import BotResponse
from .policy import (
    AverageDelayAnswer,
    BottleneckAnswer,
    ClarificationResult,
    DelayAnswer,
    FirstDelayAnswer,
    FurtherDelayAnswer,
    PolicyResult,
    RouteListAnswer,
    SimilarTrainsAnswer,
    StationListOffer,
)

_DATA_DIR = Path(__file__).parent / "data"

# Result kinds that answer the user's question and therefore end with the
# satisfaction check; error conditions and clarifications do not.
_ANSWER_KINDS = {
    "delay_answer",
    "further_delay_answer",
    "mitigated_answer",
    "unchanged_answer",
    "average_delay_answer",
    "first_delay_answer",
    "first_delay_none",
    "bottleneck_answer",
    "similar_trains_answer",
    "route_list_answer",
}


def load_templates(path: Path | None = None) -> dict[str, dict[str, str]]:
    return json.loads((path or _DATA_DIR / "templates.json").read_text(encoding="utf-8"))


def format_minutes(value: float) -> str:
    rounded = round(float(value), 1)
    if rounded == int(rounded):
        return str(int(rounded))
    return f"{rounded:.1f}"


def _journey_payload(prediction) -> list[dict]:
    if prediction is None:
        return []
    return [
        {
            "station": s.station,
            "station_name": s.station_name,
            "expected_late_min": s.expected_late_min,
            "interval_low": s.interval_low,
            "interval_high": s.interval_high,
            "source": s.source,
        }
        for s in prediction.stops
    ]


class ResponseRenderer:
    def __init__(self, templates: dict[str, dict[str, str]] | None = None, locale: str = "en"):
        self.templates = templates if templates is not None else load_templates()
        self.locale = locale

    def template(self, key: str) -> str:
        entry = self.templates[key]
        return entry.get(self.locale) or entry["en"]

    def render(self, result: PolicyResult) -> BotResponse:
        key, fields, payload, needs_clarification = self._prepare(result)
        text = self.template(key).format(**fields)
        if key in _ANSWER_KINDS:
            text = f"{text} {self.template('satisfaction_check')}"
        payload["kind"] = result.kind
        return BotResponse(text=text, payload=payload, needs_clarification=needs_clarification)

    def _prepare(self, result: PolicyResult) -> tuple[str, dict, dict, bool]:
        if isinstance(result, DelayAnswer):
            fields = {
                "train": result.train,
                "minutes": format_minutes(result.minutes),
                "station": result.station,
                "date": result.date.isoformat(),
            }
            payload = {
                "train": result.train,
                "station": result.station,
                "date": result.date.isoformat(),
                "expected_late_min": result.minutes,
                "interval_low": result.interval_low,
                "interval_high": result.interval_high,
                "ci_level": result.ci_level,
                "journey": _journey_payload(result.prediction),
            }
            return "delay_answer", fields, payload, False
        if isinstance(result, FurtherDelayAnswer):
            key = {
                "worsened": "further_delay_answer",
                "mitigated": "mitigated_answer",
                "unchanged": "unchanged_answer",
            }[result.verdict]
            magnitude = abs(result.delta_minutes) if result.verdict != "unchanged" else result.at_station_minutes
            fields = {
                "train": result.train,
                "station": result.station,
                "date": result.date.isoformat(),
                "minutes": format_minutes(magnitude),
            }
            payload = {
                "train": result.train,
                "station": result.station,
                "date": result.date.isoformat(),
                "verdict": result.verdict,
                "delta_minutes": result.delta_minutes,
                "at_station_minutes": result.at_station_minutes,
                "destination_minutes": result.destination_minutes,
                "journey": _journey_payload(result.prediction),
            }
            return key, fields, payload, False
        if isinstance(result, StationListOffer):
            names = [name for _, name in result.stations]
            fields = {
                "train": result.train,
                "station": result.queried_station_name,
                "stations": ", ".join(names),
            }
            payload = {
                "train": result.train,
                "queried_station": result.queried_station_name,
                "stations": [{"station": c, "station_name": n} for c, n in result.stations],
            }
            return "station_list_offer", fields, payload, False
        if isinstance(result, RouteListAnswer):
            fields = {
                "train": result.train,
                "stations": ", ".join(name for _, name in result.stations),
            }
            payload = {
                "train": result.train,
                "stations": [{"station": c, "station_name": n} for c, n in result.stations],
            }
            return "route_list_answer", fields, payload, False
        if isinstance(result, AverageDelayAnswer):
            fields = {
                "train": result.train,
                "minutes": format_minutes(result.minutes),
                "station": result.station,
            }
            payload = {"train": result.train, "station": result.station, "average_late_min": result.minutes}
            return "average_delay_answer", fields, payload, False
        if isinstance(result, FirstDelayAnswer):
            if result.station is None:
                fields = {
                    "train": result.train,
                    "threshold": format_minutes(result.threshold),
                    "date": result.date.isoformat(),
                }
                payload = {
                    "train": result.train,
                    "date": result.date.isoformat(),
                    "station": None,
                    "journey": _journey_payload(result.prediction),
                }
                return "first_delay_none", fields, payload, False
            fields = {
                "train": result.train,
                "station": result.station,
                "date": result.date.isoformat(),
                "minutes": format_minutes(result.minutes),
            }
            payload = {
                "train": result.train,
                "date": result.date.isoformat(),
                "station": result.station,
                "expected_late_min": result.minutes,
                "journey": _journey_payload(result.prediction),
            }
            return "first_delay_answer", fields, payload, False
        if isinstance(result, BottleneckAnswer):
            fields = {
                "train": result.train,
                "station": result.station,
                "minutes": format_minutes(result.increment_minutes),
            }
            payload = {
                "train": result.train,
                "station": result.station,
                "increment_minutes": result.increment_minutes,
            }
            return "bottleneck_answer", fields, payload, False
        if isinstance(result, SimilarTrainsAnswer):
            listing = ", ".join(f"{train} (score {score:.2f})" for train, score in result.ranked)
            fields = {"train": result.train, "trains": listing}
            payload = {
                "train": result.train,
                "similar": [{"train": t, "score": s} for t, s in result.ranked],
            }
            return "similar_trains_answer", fields, payload, False
        if isinstance(result, ClarificationResult):
            return result.question_key, {}, {"missing": result.missing}, True

        # Remaining kinds render from their fields verbatim.
        kind = result.kind
        if kind == "refusal":
            return "refusal", {"reason": result.reason}, {"reason": result.reason}, False
        if kind == "unknown_train":
            return "unknown_train", {"train": result.train}, {"train": result.train}, False
        if kind == "no_data":
            return "no_data", {}, {"message": result.message}, False
        if kind == "greeting":
            return "greeting", {}, {}, False
        if kind == "help":
            return "help", {}, {}, False
        return "fallback", {}, {}, False


def render_response(result: PolicyResult, locale: str = "en") -> BotResponse:
    return ResponseRenderer(locale=locale).render(result)
