import datetime as dt
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from railassist.dialog import (
    ClarificationRequest,
    DialogContext,
    DialogEngine,
    FixedClock,
    Gazetteer,
    Intent,
    ResolvedQuery,
    SlotSet,
    format_minutes,
    parse_utterance,
    resolve_slots,
)
from railassist.dialog.nlu import edit_distance_at_most_one
from railassist.dialog.policy import (
    AverageDelayAnswer,
    DelayAnswer,
    FurtherDelayAnswer,
    PolicyDeps,
    Refusal,
    StationListOffer,
    UnknownTrainResult,
    execute_policy,
)
from railassist.dialog.render import render_response
from railassist.synthdata import demo_catalog

PINNED = FixedClock(dt.date(2018, 9, 21))

DELAY_TEMPLATE_RE = re.compile(
    r"^Train Number (\d{5}) will be delayed by (-?\d+(\.\d)?) minutes at ([A-Z]+) station on (\d{4}-\d{2}-\d{2})\."
)
FURTHER_TEMPLATE_RE = re.compile(
    r"^Train (\d{5}) will be delayed further after station ([A-Z]+) on (\d{4}-\d{2}-\d{2}) by (-?\d+(\.\d)?) minutes"
)


@pytest.fixture(scope="module")
def gazetteer():
    return Gazetteer(demo_catalog().stations)


@pytest.fixture(scope="module")
def engine(demo_parts):
    catalog, observations, _, registry = demo_parts
    return DialogEngine(registry, catalog, observations, clock=PINNED)


class TestParseUtterance:
    def test_delay_query_with_train(self, gazetteer):
        intent, slots, confidence = parse_utterance("Is train 12307 on time?", gazetteer, PINNED)
        assert intent is Intent.QUERY_DELAY
        assert slots.train_number == "12307"
        assert confidence == 0.9

    def test_correction_with_station(self, gazetteer):
        intent, slots, _ = parse_utterance("No, I meant for Allahabad.", gazetteer, PINNED)
        assert slots.is_correction
        assert slots.station == "ALD"

    @pytest.mark.parametrize("text", ["", "asdfgh qwerty"])
    def test_unmatchable_input(self, gazetteer, text):
        intent, slots, confidence = parse_utterance(text, gazetteer, PINNED)
        assert intent is Intent.FALLBACK
        assert confidence == 0.0
        assert not slots.any_filled()

    def test_anaphoric_station_only(self, gazetteer):
        intent, slots, confidence = parse_utterance("How about for Varanasi?", gazetteer, PINNED)
        assert intent is Intent.FALLBACK
        assert slots.station == "BSB"
        assert confidence == 0.5

    def test_iso_date(self, gazetteer):
        _, slots, _ = parse_utterance("status of 12307 on 2018-11-02", gazetteer, PINNED)
        assert slots.date == dt.date(2018, 11, 2)

    def test_today_and_tomorrow(self, gazetteer):
        _, slots, _ = parse_utterance("is 12307 late today", gazetteer, PINNED)
        assert slots.date == dt.date(2018, 9, 21)
        _, slots, _ = parse_utterance("what about tomorrow", gazetteer, PINNED)
        assert slots.date == dt.date(2018, 9, 22)

    def test_weekday_is_strictly_future(self, gazetteer):
        # 2018-09-21 is a Friday; asking for Friday means the next one.
        _, slots, _ = parse_utterance("is 12307 late on friday", gazetteer, PINNED)
        assert slots.date == dt.date(2018, 9, 28)

    def test_station_code_token(self, gazetteer):
        _, slots, _ = parse_utterance("will 12307 reach ALD on time", gazetteer, PINNED)
        assert slots.station == "ALD"

    def test_fuzzy_station_name(self, gazetteer):
        _, slots, _ = parse_utterance("how late is it at Allahbad", gazetteer, PINNED)
        assert slots.station == "ALD"

    def test_multiword_station_name(self, gazetteer):
        _, slots, _ = parse_utterance("does 12561 stop at new delhi", gazetteer, PINNED)
        assert slots.station == "NDLS"

    def test_average_beats_delay_keyword(self, gazetteer):
        intent, _, _ = parse_utterance("What is the average train delay?", gazetteer, PINNED)
        assert intent is Intent.AVERAGE_DELAY

    def test_stopword_never_matches_code(self):
        gaz = Gazetteer({"IS": "Islampur", "AT": "Atari"})
        _, slots, _ = parse_utterance("is 12307 late at all", gaz, PINNED)
        assert slots.station is None
        _, slots, _ = parse_utterance("is 12307 late AT night", gaz, PINNED)
        assert slots.station == "AT"


class TestEditDistance:
    @pytest.mark.parametrize(
        "a,b,want",
        [
            ("allahabad", "allahabad", True),
            ("allahbad", "allahabad", True),
            ("alahabad", "allahabad", True),
            ("allahabadi", "allahabad", True),
            ("alabad", "allahabad", False),
            ("varanasi", "allahabad", False),
        ],
    )
    def test_cases(self, a, b, want):
        assert edit_distance_at_most_one(a, b) is want


class TestResolveSlots:
    def test_turn_one_defaults(self):
        catalog = demo_catalog()
        context = DialogContext(session_id="s")
        resolved = resolve_slots(
            Intent.QUERY_DELAY, SlotSet(train_number="12307"), context, catalog, PINNED
        )
        assert isinstance(resolved, ResolvedQuery)
        assert resolved.train_number == "12307"
        assert resolved.station_code == "JU"
        assert resolved.date == dt.date(2018, 9, 21)

    def test_anaphora_inherits_intent_and_train(self):
        catalog = demo_catalog()
        context = DialogContext(
            session_id="s", last_intent=Intent.QUERY_DELAY, last_train="12307",
            last_station="JU", last_date=dt.date(2018, 9, 21), turn_count=1,
        )
        resolved = resolve_slots(Intent.FALLBACK, SlotSet(station="BSB"), context, catalog, PINNED)
        assert isinstance(resolved, ResolvedQuery)
        assert resolved.intent is Intent.QUERY_DELAY
        assert resolved.train_number == "12307"
        assert resolved.station_code == "BSB"

    def test_nothing_to_inherit_clarifies(self):
        catalog = demo_catalog()
        context = DialogContext(session_id="s")
        resolved = resolve_slots(
            Intent.FALLBACK, SlotSet(date=dt.date(2018, 9, 22)), context, catalog, PINNED
        )
        assert isinstance(resolved, ClarificationRequest)
        assert resolved.missing == "train"

    def test_correction_replaces_station_only(self):
        catalog = demo_catalog()
        context = DialogContext(
            session_id="s", last_intent=Intent.QUERY_DELAY, last_train="12307",
            last_station="BSB", last_date=dt.date(2018, 9, 21), turn_count=2,
        )
        resolved = resolve_slots(
            Intent.FALLBACK, SlotSet(station="ALD", is_correction=True), context, catalog, PINNED
        )
        assert isinstance(resolved, ResolvedQuery)
        assert resolved.intent is Intent.QUERY_DELAY
        assert resolved.train_number == "12307"
        assert resolved.station_code == "ALD"
        assert resolved.date == dt.date(2018, 9, 21)


class TestExecutePolicy:
    def deps(self, demo_parts, **kw):
        catalog, observations, _, registry = demo_parts
        return PolicyDeps(registry=registry, catalog=catalog, observations=observations, **kw)

    def test_station_not_on_route_offer(self, demo_parts):
        deps = self.deps(demo_parts)
        query = ResolvedQuery(Intent.QUERY_DELAY, "12307", "BSB", dt.date(2018, 9, 21))
        result = execute_policy(query, deps)
        assert isinstance(result, StationListOffer)
        assert result.queried_station_name == "Varanasi"
        assert [c for c, _ in result.stations] == ["HWH", "DHN", "MGS", "ALD", "CNB", "AGC", "JP", "JU"]

    def test_gate_refusal_surfaces_politely(self, demo_parts):
        deps = self.deps(demo_parts, min_confidence=1.1)
        query = ResolvedQuery(Intent.QUERY_DELAY, "12307", "JU", dt.date(2018, 9, 21))
        result = execute_policy(query, deps)
        assert isinstance(result, Refusal)
        assert result.reason == "low-confidence"

    def test_average_delay_dispatch(self, demo_parts):
        deps = self.deps(demo_parts)
        query = ResolvedQuery(Intent.AVERAGE_DELAY, "12307", "JU", dt.date(2018, 9, 21))
        result = execute_policy(query, deps)
        assert isinstance(result, AverageDelayAnswer)
        assert result.minutes > 0

    def test_unknown_train(self, demo_parts):
        deps = self.deps(demo_parts)
        query = ResolvedQuery(Intent.QUERY_DELAY, "99999", None, dt.date(2018, 9, 21))
        assert isinstance(execute_policy(query, deps), UnknownTrainResult)

    def test_destination_query_is_delay_answer(self, demo_parts):
        deps = self.deps(demo_parts)
        query = ResolvedQuery(Intent.QUERY_DELAY, "12307", "JU", dt.date(2018, 9, 21))
        result = execute_policy(query, deps)
        assert isinstance(result, DelayAnswer)

    def test_midroute_query_detects_worsening(self, demo_parts):
        deps = self.deps(demo_parts)
        query = ResolvedQuery(Intent.QUERY_DELAY, "12307", "ALD", dt.date(2018, 9, 21))
        result = execute_policy(query, deps)
        assert isinstance(result, FurtherDelayAnswer)
        assert result.verdict == "worsened"
        assert result.delta_minutes > 5


class TestRenderResponse:
    def test_delay_template_verbatim(self):
        result = DelayAnswer(
            train="12307", station="JU", station_name="Jodhpur",
            date=dt.date(2018, 9, 21), minutes=159.0, interval_low=100.0,
            interval_high=218.0, ci_level=99, prediction=None,
        )
        response = render_response(result)
        assert response.text.startswith(
            "Train Number 12307 will be delayed by 159 minutes at JU station on 2018-09-21."
        )

    def test_further_delay_template_verbatim(self):
        result = FurtherDelayAnswer(
            train="12307", station="ALD", station_name="Allahabad",
            date=dt.date(2018, 9, 21), verdict="worsened", delta_minutes=110.8,
            at_station_minutes=48.2, destination_minutes=159.0, prediction=None,
        )
        response = render_response(result)
        assert response.text.startswith(
            "Train 12307 will be delayed further after station ALD on 2018-09-21 by 110.8 minutes"
        )

    def test_refusal_names_reason(self):
        response = render_response(Refusal(reason="timeout"))
        assert "timeout" in response.text

    @pytest.mark.parametrize(
        "value,want",
        [(159.0, "159"), (110.8, "110.8"), (158.74, "158.7"), (0.0, "0"), (-3.25, "-3.2"), (25.0499, "25")],
    )
    def test_minutes_formatting(self, value, want):
        assert format_minutes(value) == want


class TestEngineTranscript:
    def test_figure_one_script(self, engine):
        context = engine.new_context("fig1")

        r1, context = engine.step(context, "Is train 12307 on time?")
        m = DELAY_TEMPLATE_RE.match(r1.text)
        assert m, r1.text
        assert m.group(1) == "12307" and m.group(4) == "JU" and m.group(5) == "2018-09-21"
        assert context.last_intent is Intent.QUERY_DELAY
        assert context.last_train == "12307"
        assert context.last_station == "JU"
        assert context.last_date == dt.date(2018, 9, 21)

        r2, context = engine.step(context, "How about for Varanasi?")
        assert r2.text.startswith(
            "Train 12307 does not stop at Varanasi. Here is the list of stations on this route."
        )
        assert context.last_intent is Intent.QUERY_DELAY
        assert context.last_station == "BSB"
        assert context.last_offered_station_list == ("HWH", "DHN", "MGS", "ALD", "CNB", "AGC", "JP", "JU")

        r3, context = engine.step(context, "No, I meant for Allahabad.")
        m = FURTHER_TEMPLATE_RE.match(r3.text)
        assert m, r3.text
        assert m.group(1) == "12307" and m.group(2) == "ALD" and m.group(3) == "2018-09-21"
        assert context.last_station == "ALD"
        assert context.last_offered_station_list is None

        r4, context = engine.step(context, "What is the average train delay?")
        assert context.last_intent is Intent.AVERAGE_DELAY
        assert r4.text.startswith("On average, train 12307 arrives ")
        assert "JU station" in r4.text

    def test_erroneous_station_gone_after_correction(self, engine):
        context = engine.new_context("corr")
        _, context = engine.step(context, "Is train 12307 on time?")
        _, context = engine.step(context, "How about for Varanasi?")
        _, context = engine.step(context, "No, I meant for Allahabad.")
        assert context.last_station == "ALD"
        assert "BSB" not in (context.last_train, context.last_station)
        assert context.last_offered_station_list is None

    def test_sessions_do_not_leak(self, engine):
        a = engine.new_context("a")
        b = engine.new_context("b")
        _, a = engine.step(a, "Is train 12307 on time?")
        _, b = engine.step(b, "Is train 12561 on time?")
        ra, a = engine.step(a, "What is the average train delay?")
        rb, b = engine.step(b, "What is the average train delay?")
        assert "12307" in ra.text and "12561" in rb.text
        assert a.last_train == "12307" and b.last_train == "12561"

    def test_repeat_turn_is_deterministic(self, engine):
        r1, _ = engine.step(engine.new_context("x"), "Is train 12307 on time?")
        r2, _ = engine.step(engine.new_context("y"), "Is train 12307 on time?")
        assert r1.text == r2.text

    def test_turn_count_increases(self, engine):
        context = engine.new_context("t")
        for i, text in enumerate(["hi", "Is train 12307 on time?", "gibberish"], start=1):
            _, context = engine.step(context, text)
            assert context.turn_count == i

    @settings(max_examples=40, deadline=None)
    @given(st.text(max_size=50))
    def test_step_never_raises(self, text):
        engine = _fuzz_engine()
        response, _ = engine.step(engine.new_context("fuzz"), text)
        assert isinstance(response.text, str) and response.text

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["How about for {}?", "What about {}?", "{} please"]),
                st.sampled_from(["Allahabad", "Kanpur", "Agra", "Jaipur", "Howrah", "ALD", "JU"]),
            ),
            min_size=1,
            max_size=5,
        )
    )
    def test_station_only_turns_inherit_train_property(self, turns):
        # Generated dialogs: an opening query, then station-only follow-ups.
        engine = _fuzz_engine()
        context = engine.new_context("inherit")
        _, context = engine.step(context, "Is train 12307 on time?")
        for template, station in turns:
            _, context = engine.step(context, template.format(station))
            assert context.last_train == "12307"


_FUZZ_ENGINE = None


def _fuzz_engine():
    # hypothesis forbids function-scoped fixtures; cache an engine per run.
    global _FUZZ_ENGINE
    if _FUZZ_ENGINE is None:
        import railassist.synthdata as synth
        from railassist.predictor import train_registry
        from conftest import DEMO_FOREST

        catalog, observations, _, _ = synth.demo_history()
        split = synth.split_dataset(observations, (0.7, 0.15, 0.15), seed=1)
        registry = train_registry(catalog, observations, split, DEMO_FOREST)
        _FUZZ_ENGINE = DialogEngine(registry, catalog, observations, clock=PINNED)
    return _FUZZ_ENGINE


class TestDelayAnswerTemplateFuzz:
    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(min_value=-30.0, max_value=2000.0, allow_nan=False),
        st.dates(min_value=dt.date(2018, 1, 1), max_value=dt.date(2020, 1, 1)),
    )
    def test_rendered_delay_answers_match_template(self, minutes, date):
        result = DelayAnswer(
            train="12307", station="JU", station_name="Jodhpur", date=date,
            minutes=minutes, interval_low=minutes - 1, interval_high=minutes + 1,
            ci_level=99, prediction=None,
        )
        text = render_response(result).text
        assert DELAY_TEMPLATE_RE.match(text), text
