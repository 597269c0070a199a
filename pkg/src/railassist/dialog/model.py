"""Dialog vocabulary: intents, slots, per-session context, responses."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol


class Intent(str, Enum):
    QUERY_DELAY = "QUERY_DELAY"
    QUERY_DELAY_FURTHER = "QUERY_DELAY_FURTHER"
    FIRST_DELAY = "FIRST_DELAY"
    AVERAGE_DELAY = "AVERAGE_DELAY"
    BOTTLENECK = "BOTTLENECK"
    SIMILAR_TRAINS = "SIMILAR_TRAINS"
    LIST_STATIONS = "LIST_STATIONS"
    GREET = "GREET"
    HELP = "HELP"
    FALLBACK = "FALLBACK"


# Intents that operate on a specific train.
TRAIN_INTENTS = frozenset(
    {
        Intent.QUERY_DELAY,
        Intent.QUERY_DELAY_FURTHER,
        Intent.FIRST_DELAY,
        Intent.AVERAGE_DELAY,
        Intent.BOTTLENECK,
        Intent.SIMILAR_TRAINS,
        Intent.LIST_STATIONS,
    }
)


@dataclass(frozen=True)
class SlotSet:
    """Slots extracted from one utterance. ``station`` is a gazetteer-resolved
    station code, never raw text."""

    train_number: Optional[str] = None
    station: Optional[str] = None
    date: Optional[dt.date] = None
    is_correction: bool = False

    def any_filled(self) -> bool:
        return bool(self.train_number or self.station or self.date)


@dataclass(frozen=True)
class DialogContext:
    """Per-session memory enabling follow-ups and corrections."""

    session_id: str
    last_intent: Optional[Intent] = None
    last_train: Optional[str] = None
    last_station: Optional[str] = None
    last_date: Optional[dt.date] = None
    turn_count: int = 0
    last_offered_station_list: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class ResolvedQuery:
    intent: Intent
    train_number: Optional[str] = None
    station_code: Optional[str] = None
    date: Optional[dt.date] = None


@dataclass(frozen=True)
class ClarificationRequest:
    question_key: str
    missing: str


@dataclass(frozen=True)
class BotResponse:
    text: str
    payload: dict = field(default_factory=dict)
    needs_clarification: bool = False


class Clock(Protocol):
    def today(self) -> dt.date: ...


@dataclass(frozen=True)
class FixedClock:
    """Pinned clock so transcripts are reproducible byte for byte."""

    date: dt.date

    def today(self) -> dt.date:
        return self.date


class SystemClock:
    def today(self) -> dt.date:
        return dt.date.today()
