"""One-turn pipeline: parse, resolve, execute, render, update context.

The engine is stateless between calls apart from the immutable dependencies;
callers own the per-session DialogContext (the service keeps a session
store) and pass it in each turn.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Sequence

from ..domain import DelayObservation, NetworkCatalog
from ..predictor.training import ModelRegistry
from .model import BotResponse, ClarificationRequest, Clock, DialogContext, Intent, SystemClock, TRAIN_INTENTS
from .nlu import Gazetteer, UtteranceParser
from .policy import PolicyDeps, StationListOffer, clarification, execute_policy
from .render import ResponseRenderer
from .resolve import resolve_slots


class DialogEngine:
    def __init__(
        self,
        registry: ModelRegistry,
        catalog: NetworkCatalog,
        observations: Sequence[DelayObservation],
        clock: Optional[Clock] = None,
        ci_level: int = 99,
        model_kind: str = "forest",
        min_confidence: float = 0.5,
        timeout_ms: float = 10_000.0,
        locale: str = "en",
    ):
        self.catalog = catalog
        self.clock = clock or SystemClock()
        self.parser = UtteranceParser(Gazetteer(catalog.stations), self.clock)
        self.renderer = ResponseRenderer(locale=locale)
        self.deps = PolicyDeps(
            registry=registry,
            catalog=catalog,
            observations=observations,
            ci_level=ci_level,
            model_kind=model_kind,
            min_confidence=min_confidence,
            timeout_ms=timeout_ms,
        )

    def new_context(self, session_id: str) -> DialogContext:
        return DialogContext(session_id=session_id)

    def step(self, context: DialogContext, text: str) -> tuple[BotResponse, DialogContext]:
        """Run one turn; returns the response and the successor context."""
        intent, slots, _confidence = self.parser.parse(text)
        resolved = resolve_slots(intent, slots, context, self.catalog, self.clock)

        if isinstance(resolved, ClarificationRequest):
            response = self.renderer.render(clarification(resolved))
            return response, dataclasses.replace(context, turn_count=context.turn_count + 1)

        result = execute_policy(resolved, self.deps)
        response = self.renderer.render(result)

        updates: dict = {"turn_count": context.turn_count + 1, "last_intent": resolved.intent}
        if resolved.intent in TRAIN_INTENTS:
            updates.update(
                last_train=resolved.train_number,
                last_station=resolved.station_code,
                last_date=resolved.date,
            )
        if isinstance(result, StationListOffer):
            updates["last_offered_station_list"] = tuple(code for code, _ in result.stations)
        else:
            updates["last_offered_station_list"] = None
        return response, dataclasses.replace(context, **updates)
