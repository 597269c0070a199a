"""Rule-based utterance analysis: intent patterns, entity extraction, and the
station gazetteer. Patterns live in data/nlu_patterns.txt so they can change
without touching code."""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .model import Clock, Intent, SlotSet

_DATA_DIR = Path(__file__).parent / "data"

# Short station codes collide with everyday words; those only match when the
# user actually typed them in uppercase.
_STOPWORDS = {
    "a", "an", "am", "and", "are", "as", "at", "be", "by", "do", "for", "go",
    "hi", "how", "i", "if", "in", "is", "it", "its", "me", "my", "no", "not",
    "of", "ok", "on", "or", "so", "the", "to", "up", "us", "was", "we", "what",
    "when", "will", "yes", "you",
}

_WEEKDAYS = {
    "monday": 0, "tuesday": 1, "wednesday": 2, "thursday": 3,
    "friday": 4, "saturday": 5, "sunday": 6,
}

_TRAIN_RE = re.compile(r"(?<!\d)(\d{5})(?!\d)")
_ISO_DATE_RE = re.compile(r"\b(\d{4}-\d{2}-\d{2})\b")
_WORD_RE = re.compile(r"[A-Za-z]+")
_CORRECTION_RE = re.compile(r"^\s*(no|nope|nah)\b|\bi\s+meant\b|\bi\s+mean\b", re.IGNORECASE)


def edit_distance_at_most_one(a: str, b: str) -> bool:
    if a == b:
        return True
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la > lb:
        a, b, la, lb = b, a, lb, la
    # a is the shorter (or equal) string; scan for the single edit.
    i = j = 0
    used_edit = False
    while i < la and j < lb:
        if a[i] == b[j]:
            i += 1
            j += 1
            continue
        if used_edit:
            return False
        used_edit = True
        if la == lb:
            i += 1
        j += 1
    return True


class Gazetteer:
    """Station lookup over codes and display names, with light fuzz.

    Codes match case-insensitively as standalone tokens (stopword-shaped
    codes only when typed uppercase); names match as 1- to 3-word spans,
    allowing one edit for spans of four or more characters.
    """

    def __init__(self, stations: Mapping[str, str]):
        self.code_to_name = dict(stations)
        self._by_code = {code.lower(): code for code in stations}
        self._by_name = {name.lower(): code for code, name in stations.items()}

    def name_of(self, code: str) -> str:
        return self.code_to_name.get(code, code)

    def resolve_token_span(self, span: str, raw_span: str) -> Optional[str]:
        lowered = span.lower()
        code = self._by_code.get(lowered)
        if code is not None and (raw_span.isupper() or lowered not in _STOPWORDS):
            return code
        exact = self._by_name.get(lowered)
        if exact is not None:
            return exact
        if len(lowered) >= 4:
            for name, code in self._by_name.items():
                if edit_distance_at_most_one(lowered, name):
                    return code
        return None

    def find_last_mention(self, text: str) -> Optional[str]:
        """Resolve the rightmost station mention, preferring longer spans."""
        tokens = [(m.group(0), m.start()) for m in _WORD_RE.finditer(text)]
        found: Optional[tuple[int, str]] = None
        for i in range(len(tokens)):
            for width in (3, 2, 1):
                if i + width > len(tokens):
                    continue
                words = [t for t, _ in tokens[i : i + width]]
                span = " ".join(words)
                code = self.resolve_token_span(span, span)
                if code is not None:
                    position = tokens[i][1]
                    if found is None or position >= found[0]:
                        found = (position, code)
                    break
        return found[1] if found else None


@dataclass(frozen=True)
class IntentRule:
    intent: Intent
    priority: int
    pattern: re.Pattern


def load_intent_rules(path: Path | None = None) -> list[IntentRule]:
    rules = []
    raw = (path or _DATA_DIR / "nlu_patterns.txt").read_text(encoding="utf-8")
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        intent_name, priority, pattern = line.split("|", 2)
        rules.append(IntentRule(Intent(intent_name), int(priority), re.compile(pattern, re.IGNORECASE)))
    rules.sort(key=lambda r: -r.priority)
    return rules


def _extract_date(text: str, clock: Clock) -> Optional[dt.date]:
    m = _ISO_DATE_RE.search(text)
    if m:
        try:
            return dt.date.fromisoformat(m.group(1))
        except ValueError:
            pass
    lowered = text.lower()
    if re.search(r"\btoday\b", lowered):
        return clock.today()
    if re.search(r"\btomorrow\b", lowered):
        return clock.today() + dt.timedelta(days=1)
    for name, weekday in _WEEKDAYS.items():
        if re.search(rf"\b{name}\b", lowered):
            today = clock.today()
            ahead = (weekday - today.weekday() - 1) % 7 + 1
            return today + dt.timedelta(days=ahead)
    return None


class UtteranceParser:
    def __init__(self, gazetteer: Gazetteer, clock: Clock, rules: list[IntentRule] | None = None):
        self.gazetteer = gazetteer
        self.clock = clock
        self.rules = rules if rules is not None else load_intent_rules()

    def parse(self, text: str) -> tuple[Intent, SlotSet, float]:
        """Intent, slots, and a coarse parse confidence.

        Keyword intents score 0.9; slot-only turns (anaphora, corrections)
        fall back with 0.5 and let the resolver inherit an intent from
        context; unmatchable input yields FALLBACK at 0.
        """
        train = None
        m = _TRAIN_RE.search(text)
        if m:
            train = m.group(1)
        station = self.gazetteer.find_last_mention(text)
        date = _extract_date(text, self.clock)
        is_correction = bool(_CORRECTION_RE.search(text))
        slots = SlotSet(train_number=train, station=station, date=date, is_correction=is_correction)

        intent = Intent.FALLBACK
        for rule in self.rules:
            if rule.pattern.search(text):
                intent = rule.intent
                break

        if intent is not Intent.FALLBACK:
            confidence = 0.9
        elif slots.any_filled() or is_correction:
            confidence = 0.5
        else:
            confidence = 0.0
        return intent, slots, confidence


def parse_utterance(
    text: str, gazetteer: Gazetteer, clock: Clock, rules: list[IntentRule] | None = None
) -> tuple[Intent, SlotSet, float]:
    return UtteranceParser(gazetteer, clock, rules).parse(text)
