"""Slot resolution: defaults, context carry-over, anaphora, corrections.

Default policy: a missing train comes from context (else we ask), a missing
station means the journey destination, a missing date means today. Turns
that carry only slots inherit the intent and train of the previous query;
corrections additionally keep all previous slots and replace just the ones
supplied.
"""

from __future__ import annotations

from typing import Union

from ..domain import NetworkCatalog
from .model import (
    TRAIN_INTENTS,
    ClarificationRequest,
    Clock,
    DialogContext,
    Intent,
    ResolvedQuery,
    SlotSet,
)

DESTINATION = "destination"


def resolve_slots(
    intent: Intent,
    slots: SlotSet,
    context: DialogContext,
    catalog: NetworkCatalog,
    clock: Clock,
) -> Union[ResolvedQuery, ClarificationRequest]:
    inheritable = context.last_intent if context.last_intent in TRAIN_INTENTS else None

    if slots.is_correction:
        if not slots.any_filled():
            return ClarificationRequest("clarify_correction", missing="correction")
        resolved_intent = intent if intent in TRAIN_INTENTS else (inheritable or Intent.QUERY_DELAY)
        train = slots.train_number or context.last_train
        station = slots.station or context.last_station
        date = slots.date or context.last_date or clock.today()
    elif intent is Intent.FALLBACK:
        if slots.any_filled() and inheritable is not None:
            resolved_intent = inheritable
            train = slots.train_number or context.last_train
            station = slots.station
            date = slots.date
        elif slots.train_number:
            # A bare train number is a delay query in all but name.
            resolved_intent = Intent.QUERY_DELAY
            train, station, date = slots.train_number, slots.station, slots.date
        elif slots.any_filled():
            return ClarificationRequest("clarify_train", missing="train")
        else:
            return ResolvedQuery(intent=Intent.FALLBACK)
    elif intent in (Intent.GREET, Intent.HELP):
        return ResolvedQuery(intent=intent)
    else:
        resolved_intent = intent
        train = slots.train_number or context.last_train
        station = slots.station
        date = slots.date

    if train is None:
        return ClarificationRequest("clarify_train", missing="train")

    schedule = catalog.trains.get(train)
    if station is None and schedule is not None:
        station = schedule.destination.station.code
    if date is None:
        date = clock.today()
    return ResolvedQuery(intent=resolved_intent, train_number=train, station_code=station, date=date)
