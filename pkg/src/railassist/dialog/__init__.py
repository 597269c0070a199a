"""Slot-based conversational front-end: rule-based NLU, context carry-over,
policy dispatch, and template rendering."""

from .engine import DialogEngine
from .model import (
    BotResponse,
    ClarificationRequest,
    Clock,
    DialogContext,
    FixedClock,
    Intent,
    ResolvedQuery,
    SlotSet,
    SystemClock,
)
from .nlu import Gazetteer, UtteranceParser, load_intent_rules, parse_utterance
from .policy import PolicyDeps, execute_policy
from .render import ResponseRenderer, format_minutes, load_templates, render_response
from .resolve import resolve_slots

__all__ = [
    "BotResponse",
    "ClarificationRequest",
    "Clock",
    "DialogContext",
    "DialogEngine",
    "FixedClock",
    "Gazetteer",
    "Intent",
    "PolicyDeps",
    "ResolvedQuery",
    "ResponseRenderer",
    "SlotSet",
    "SystemClock",
    "UtteranceParser",
    "execute_policy",
    "format_minutes",
    "load_intent_rules",
    "load_templates",
    "parse_utterance",
    "render_response",
    "resolve_slots",
]
