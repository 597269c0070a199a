import dataclasses
import datetime as dt
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from railassist.domain import LATE_MINUTES_FLOOR
from railassist.mlcore import EvalReport, ForestConfig, ForestModel, RidgeModel, TreeNode, forest_predict, rmse
from railassist.predictor import (
    CI_LEVELS,
    CorruptBundleError,
    PredictionRequest,
    StationModelBundle,
    StationNotOnRouteError,
    TrainingDataError,
    UnknownTrainError,
    UnsupportedVersionError,
    build_features,
    calibrate_intervals,
    empirical_half_widths,
    evaluate_ci_accuracy,
    gate_response,
    generalize_unknown,
    load_registry,
    predict_journey,
    save_registry,
    train_registry,
)
from railassist.predictor.journey import JourneyPrediction, StopPrediction
from railassist.synthdata import GeneratorConfig, generate_delay_history, generate_network, split_dataset

from oracles import sort_and_index_quantile

FAST_FOREST = ForestConfig(n_trees=8, max_depth=6, min_samples_leaf=3, feature_subsample_fraction=1.0, bootstrap=True, seed=11)


def scenario(**kw):
    base = dict(
        seed=21,
        n_known_trains=5,
        n_unknown_trains=2,
        stations_per_train=(4, 6),
        station_pool_size=10,
        date_start=dt.date(2018, 1, 1),
        date_end=dt.date(2018, 6, 30),
        noise_sigma=3.0,
        propagation_alpha=0.7,
        recovery_rate=0.05,
        congestion_scale=4.0,
    )
    base.update(kw)
    config = GeneratorConfig(**base)
    catalog = generate_network(config)
    observations, truth = generate_delay_history(catalog, config)
    split = split_dataset(observations, (0.6, 0.2, 0.2), seed=config.seed)
    return catalog, observations, truth, split, config


@pytest.fixture(scope="module")
def trained():
    catalog, observations, truth, split, config = scenario()
    registry = train_registry(catalog, observations, split, FAST_FOREST, ridge_lambda=1.0)
    return catalog, observations, truth, split, registry


@pytest.fixture(scope="module")
def quiet_trained():
    catalog, observations, truth, split, config = scenario(
        noise_sigma=0.0, congestion_scale=0.0, recovery_rate=0.0, seed=5
    )
    registry = train_registry(catalog, observations, split, FAST_FOREST)
    return catalog, observations, split, registry


class TestBuildFeatures:
    def _schedule(self, trained):
        catalog = trained[0]
        return next(iter(catalog.trains.values()))

    def test_origin_prev_delay_pinned_to_zero(self, trained):
        schedule = self._schedule(trained)
        vec = build_features(schedule, 0, dt.date(2018, 2, 2), prev_predicted_delay=99.0)
        assert vec[5] == 0.0

    def test_calendar_features(self, trained):
        schedule = self._schedule(trained)
        vec = build_features(schedule, 1, dt.date(2018, 9, 21))
        assert vec[0] == 9.0
        assert vec[1] == 4.0

    def test_route_features_pass_through(self, trained):
        schedule = self._schedule(trained)
        stop = dataclasses.replace(schedule.stops[1], distance_km=1529.0, sched_arrival_min=1080.0)
        patched = dataclasses.replace(schedule, stops=(schedule.stops[0], stop) + schedule.stops[2:])
        vec = build_features(patched, 1, dt.date(2018, 9, 21), prev_predicted_delay=3.0)
        assert vec[3] == 1529.0
        assert vec[4] == 1080.0
        assert vec[5] == 3.0


class TestCalibrateIntervals:
    def test_zero_residuals_zero_widths(self):
        widths = calibrate_intervals([0.0] * 50)
        assert widths == {68: 0.0, 95: 0.0, 99: 0.0}

    def test_normal_residuals_match_oracle(self):
        rng = np.random.default_rng(3)
        residuals = rng.normal(0.0, 10.0, size=10_000)
        widths = calibrate_intervals(residuals)
        assert widths[68] == pytest.approx(10.0, abs=0.5)
        for level in CI_LEVELS:
            assert widths[level] == sort_and_index_quantile(np.abs(residuals), level)

    def test_too_few_residuals_inherit(self):
        inherited = {68: 1.0, 95: 2.0, 99: 3.0}
        assert calibrate_intervals([5.0] * 9, inherited=inherited) == inherited
        assert calibrate_intervals([5.0] * 10, inherited=inherited) != inherited

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=200))
    def test_width_monotonicity(self, residuals):
        widths = empirical_half_widths(residuals)
        assert 0.0 <= widths[68] <= widths[95] <= widths[99]


class TestTrainRegistry:
    def test_structural_counts(self):
        catalog, observations, _, split, _ = scenario(
            n_known_trains=1, n_unknown_trains=0, stations_per_train=(3, 3), station_pool_size=6,
            date_start=dt.date(2018, 1, 1), date_end=dt.date(2018, 4, 10),
        )
        assert len(split.train) == 60
        registry = train_registry(catalog, observations, split, FAST_FOREST)
        assert len(registry.direct) == 3
        assert len(registry.shared) == 3
        assert len(registry.known_trains) == 1

    def test_all_zero_history_predicts_zero_everywhere(self, quiet_trained):
        catalog, observations, split, registry = quiet_trained
        for bundle in list(registry.direct.values()) + list(registry.shared.values()):
            assert bundle.residual_quantiles == {68: 0.0, 95: 0.0, 99: 0.0}
            probe = np.array([6.0, 3.0, 1.0, 120.0, 95.0, 0.0])
            assert bundle.predict(probe, "forest") == 0.0

    def test_empty_training_split_fatal(self):
        catalog, observations, _, split, _ = scenario()
        empty = dataclasses.replace(split, train=frozenset())
        with pytest.raises(TrainingDataError):
            train_registry(catalog, observations, empty, FAST_FOREST)

    def test_demotion_below_min_journeys(self):
        catalog, observations, _, split, _ = scenario()
        victim = sorted(t for t, s in catalog.trains.items() if s.known)[0]
        keep = sorted(k for k in split.train if k[0] == victim)[:10]
        thinned_train = frozenset(k for k in split.train if k[0] != victim) | frozenset(keep)
        thinned = dataclasses.replace(split, train=thinned_train)
        registry = train_registry(catalog, observations, thinned, FAST_FOREST)
        assert registry.metadata.demoted_trains == (victim,)
        assert victim not in registry.known_trains
        assert all(train != victim for train, _ in registry.direct)

    def test_sparse_station_falls_back_to_shared(self):
        catalog, observations, _, split, _ = scenario(n_known_trains=2, n_unknown_trains=0)
        target_train = sorted(catalog.trains)[0]
        target_station = catalog.trains[target_train].stops[1].station.code
        thinned = [
            o
            for o in observations
            if not (o.train_number == target_train and o.station_code == target_station)
            or o.date.day == 1
        ]
        registry = train_registry(catalog, thinned, split, FAST_FOREST)
        key = (target_train, target_station)
        assert key in registry.metadata.shared_fallback
        assert registry.direct[key] is registry.shared[target_station]

    def test_heldout_rmse_within_noise_budget(self, trained):
        catalog, observations, truth, split, registry = trained
        sigma = 3.0
        preds, actuals = [], []
        grouped = {}
        for o in observations:
            grouped.setdefault((o.train_number, o.date), {})[o.station_code] = o.late_minutes
        for train_number, date in sorted(split.test):
            if train_number not in registry.known_trains:
                continue
            prediction = predict_journey(registry, PredictionRequest(train_number, date), catalog)
            for stop in prediction.stops:
                actual = grouped[(train_number, date)].get(stop.station)
                if actual is not None:
                    preds.append(stop.expected_late_min)
                    actuals.append(actual)
        report = rmse(preds, actuals)
        assert report.rmse <= 1.5 * sigma


class TestPredictJourney:
    def test_all_zero_registry_journey(self, quiet_trained):
        catalog, _, _, registry = quiet_trained
        train = sorted(registry.known_trains)[0]
        prediction = predict_journey(registry, PredictionRequest(train, dt.date(2018, 5, 1)), catalog)
        assert prediction.confidence == 1.0
        for stop in prediction.stops:
            assert stop.expected_late_min == 0.0
            assert stop.interval_low == 0.0 and stop.interval_high == 0.0

    def test_unknown_train_error(self, trained):
        catalog, _, _, _, registry = trained
        with pytest.raises(UnknownTrainError):
            predict_journey(registry, PredictionRequest("99999", dt.date(2018, 5, 1)), catalog)

    def test_station_not_on_route_carries_station_list(self, trained):
        catalog, _, _, _, registry = trained
        train = sorted(registry.known_trains)[0]
        schedule = catalog.trains[train]
        off_route = next(code for code in catalog.stations if code not in schedule.station_codes)
        with pytest.raises(StationNotOnRouteError) as err:
            predict_journey(registry, PredictionRequest(train, dt.date(2018, 5, 1), station=off_route), catalog)
        assert [c for c, _ in err.value.stations] == list(schedule.station_codes)

    def test_chain_matches_manual_oracle(self, trained):
        catalog, _, _, _, registry = trained
        train = sorted(registry.known_trains)[0]
        schedule = catalog.trains[train]
        date = dt.date(2018, 5, 4)
        prediction = predict_journey(registry, PredictionRequest(train, date), catalog)

        prev = 0.0
        for stop in schedule.stops:
            bundle = registry.direct[(train, stop.station.code)]
            features = build_features(schedule, stop.stop_index, date, prev)
            expected = max(forest_predict(bundle.forest, features), LATE_MINUTES_FLOOR)
            got = prediction.stop_for(stop.station.code)
            assert got.expected_late_min == expected
            assert got.source == "direct"
            prev = expected

    def test_causality_downstream_edits_do_not_change_upstream(self, trained):
        catalog, _, _, _, registry = trained
        train = sorted(registry.known_trains)[0]
        schedule = catalog.trains[train]
        date = dt.date(2018, 5, 4)
        base = predict_journey(registry, PredictionRequest(train, date), catalog)

        last = dataclasses.replace(schedule.stops[-1], distance_km=schedule.stops[-1].distance_km + 500.0)
        patched_schedule = dataclasses.replace(schedule, stops=schedule.stops[:-1] + (last,))
        patched_catalog = dataclasses.replace(catalog, trains={**catalog.trains, train: patched_schedule})
        patched = predict_journey(registry, PredictionRequest(train, date), patched_catalog)
        for before, after in zip(base.stops[:-1], patched.stops[:-1]):
            assert before.expected_late_min == after.expected_late_min

    def test_interval_monotone_across_levels(self, trained):
        catalog, _, _, _, registry = trained
        train = sorted(registry.known_trains)[0]
        date = dt.date(2018, 5, 4)
        widths = {}
        for level in CI_LEVELS:
            prediction = predict_journey(registry, PredictionRequest(train, date, ci_level=level), catalog)
            widths[level] = [s.interval_high - s.interval_low for s in prediction.stops]
        for w68, w95, w99 in zip(widths[68], widths[95], widths[99]):
            assert w68 <= w95 <= w99

    def test_deterministic_excluding_elapsed(self, trained):
        catalog, _, _, _, registry = trained
        train = sorted(registry.known_trains)[0]
        request = PredictionRequest(train, dt.date(2018, 5, 4))
        a = predict_journey(registry, request, catalog)
        b = predict_journey(registry, request, catalog)
        assert a == b

    def test_unknown_train_sources(self, trained):
        catalog, _, _, _, registry = trained
        unknown = next(t for t in catalog.trains if t not in registry.known_trains)
        prediction = predict_journey(registry, PredictionRequest(unknown, dt.date(2018, 5, 4)), catalog)
        assert all(s.source != "direct" for s in prediction.stops)


def constant_bundle(station, value, widths=None, n_samples=50, scope="shared-station"):
    widths = widths or {68: 1.0, 95: 2.0, 99: 3.0}
    config = ForestConfig(n_trees=1, max_depth=0, bootstrap=False)
    forest = ForestModel(trees=[TreeNode(n_samples=1, value=float(value))], config=config)
    ridge = RidgeModel(weights=np.zeros(6), intercept=float(value), lam=1.0)
    return StationModelBundle(station=station, scope=scope, forest=forest, ridge=ridge, residual_quantiles=dict(widths), n_train_samples=n_samples)


@pytest.fixture()
def handcrafted():
    """Unknown 3-stop train; shared bundles exist at the endpoints only,
    predicting 10 and 30, and the middle stop sits midway by distance."""
    import railassist.domain as dom

    stops = tuple(
        dom.ScheduleStop(
            station=dom.StationCode(code, name),
            stop_index=i,
            day_offset=0,
            sched_arrival_min=i * 100.0,
            sched_departure_min=i * 100.0 + (5.0 if i == 1 else 0.0),
            distance_km=i * 80.0,
        )
        for i, (code, name) in enumerate([("XA", "Alpha"), ("XM", "Midway"), ("XB", "Beta")])
    )
    schedule = dom.TrainSchedule("77777", "Ghost Express", stops, known=False)
    catalog = dom.NetworkCatalog(trains={"77777": schedule}, stations={"XA": "Alpha", "XM": "Midway", "XB": "Beta"})

    from railassist.predictor.training import ModelRegistry, TrainingMetadata

    registry = ModelRegistry(
        direct={},
        shared={"XA": constant_bundle("XA", 10.0), "XB": constant_bundle("XB", 30.0)},
        feature_names=tuple("abcdef"),
        known_trains=frozenset(),
        widest_half_widths={68: 40.0, 95: 50.0, 99: 60.0},
        metadata=TrainingMetadata(
            seed=0, forest_config=ForestConfig(), ridge_lambda=1.0,
            date_start=dt.date(2018, 1, 1), date_end=dt.date(2018, 1, 2),
            n_train_journeys=1, n_validation_journeys=1,
            min_known_journeys=30, min_station_samples=20,
            demoted_trains=(), shared_fallback=(),
        ),
    )
    return catalog, registry


class TestGeneralizeUnknown:
    def test_shared_station_uses_shared_bundle(self, handcrafted):
        catalog, registry = handcrafted
        source, bundle = generalize_unknown(registry, catalog.trains["77777"], 0)
        assert source == "shared" and bundle.station == "XA"

    def test_midpoint_interpolation(self, handcrafted):
        catalog, registry = handcrafted
        prediction = predict_journey(registry, PredictionRequest("77777", dt.date(2018, 6, 1)), catalog)
        mid = prediction.stop_for("XM")
        assert mid.source == "interpolated"
        assert mid.expected_late_min == pytest.approx(20.0)
        # Interval half-width interpolates too: both neighbors use 3.0 at 99.
        assert (mid.interval_high - mid.interval_low) / 2 == pytest.approx(3.0)

    def test_no_shared_on_route_falls_back_and_gate_refuses(self, handcrafted):
        catalog, registry = handcrafted
        bare = dataclasses.replace(registry, shared={}, direct={})
        prediction = predict_journey(registry=bare, request=PredictionRequest("77777", dt.date(2018, 6, 1)), catalog=catalog)
        assert all(s.source == "fallback" for s in prediction.stops)
        assert all(s.expected_late_min == 0.0 for s in prediction.stops)
        assert all(s.interval_high - s.interval_low == pytest.approx(120.0) for s in prediction.stops)
        assert prediction.confidence == 0.0
        decision = gate_response(prediction)
        assert not decision.accepted and decision.reason == "low-confidence"


class TestEvaluateCiAccuracy:
    def test_zero_width_intervals_zero_coverage(self, quiet_trained):
        catalog, observations, split, registry = quiet_trained
        # Zero-width intervals from the quiet registry, checked against
        # journeys whose observations are shifted off the prediction.
        shifted = [dataclasses.replace(o, late_minutes=o.late_minutes + 5.0) for o in observations]
        journeys = sorted(split.test)[:10]
        assert evaluate_ci_accuracy(registry, catalog, shifted, journeys, 99) == 0.0

    def test_infinite_width_full_coverage(self, handcrafted):
        catalog, registry = handcrafted
        wide = {68: 1e9, 95: 1e9, 99: 1e9}
        registry = dataclasses.replace(
            registry,
            shared={"XA": constant_bundle("XA", 10.0, widths=wide), "XB": constant_bundle("XB", 30.0, widths=wide)},
        )
        import railassist.domain as dom

        observations = [
            dom.DelayObservation("77777", dt.date(2018, 6, 1), code, value)
            for code, value in [("XA", 500.0), ("XM", -20.0), ("XB", 123.0)]
        ]
        coverage = evaluate_ci_accuracy(registry, catalog, observations, [("77777", dt.date(2018, 6, 1))], 95)
        assert coverage == 1.0

    def test_smooth_statistical_coverage(self, trained):
        catalog, observations, _, split, registry = trained
        coverage = evaluate_ci_accuracy(registry, catalog, observations, sorted(split.test), 95)
        assert 0.90 <= coverage <= 1.0

    def test_monotone_in_level(self, trained):
        catalog, observations, _, split, registry = trained
        journeys = sorted(split.test)[:40]
        coverages = [evaluate_ci_accuracy(registry, catalog, observations, journeys, lvl) for lvl in CI_LEVELS]
        assert coverages[0] <= coverages[1] <= coverages[2]

    def test_empty_test_split_rejected(self, trained):
        catalog, observations, _, _, registry = trained
        with pytest.raises(ValueError):
            evaluate_ci_accuracy(registry, catalog, observations, [], 95)


class TestGateResponse:
    def _prediction(self, confidence, elapsed):
        stop = StopPrediction("AA", "Aa", 1.0, 0.0, 2.0, "direct")
        return JourneyPrediction("12345", dt.date(2018, 1, 1), 99, "forest", (stop,), confidence, elapsed)

    def test_confident_and_timely_answers(self):
        decision = gate_response(self._prediction(1.0, 5.0), min_confidence=0.5, timeout_ms=10_000)
        assert decision.accepted and decision.reason is None

    def test_low_confidence_refused(self):
        decision = gate_response(self._prediction(0.0, 5.0))
        assert not decision.accepted and decision.reason == "low-confidence"

    def test_timeout_refused(self):
        decision = gate_response(self._prediction(1.0, 20_000.0), timeout_ms=10_000)
        assert not decision.accepted and decision.reason == "timeout"


class TestStore:
    def test_round_trip_preserves_probe_predictions(self, trained, tmp_path):
        catalog, _, _, _, registry = trained
        path = tmp_path / "model.bundle"
        save_registry(registry, path)
        loaded = load_registry(path)

        rng = np.random.default_rng(0)
        trains = sorted(catalog.trains)
        for _ in range(100):
            train = trains[int(rng.integers(len(trains)))]
            date = dt.date(2018, 1, 1) + dt.timedelta(days=int(rng.integers(0, 300)))
            kind = "forest" if rng.integers(2) else "ridge"
            level = CI_LEVELS[int(rng.integers(3))]
            request = PredictionRequest(train, date, ci_level=level, model_kind=kind)
            a = predict_journey(registry, request, catalog)
            b = predict_journey(loaded, request, catalog)
            assert a == b

    def test_truncated_file_is_corrupt(self, trained, tmp_path):
        _, _, _, _, registry = trained
        path = tmp_path / "model.bundle"
        save_registry(registry, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CorruptBundleError):
            load_registry(path)

    def test_checksum_tamper_detected(self, trained, tmp_path):
        _, _, _, _, registry = trained
        path = tmp_path / "model.bundle"
        save_registry(registry, path)
        doc = json.loads(path.read_text())
        doc["known_trains"] = []
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptBundleError, match="checksum"):
            load_registry(path)

    def test_future_version_rejected(self, trained, tmp_path):
        _, _, _, _, registry = trained
        path = tmp_path / "model.bundle"
        save_registry(registry, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = 2
        path.write_text(json.dumps(doc))
        with pytest.raises(UnsupportedVersionError):
            load_registry(path)

    def test_training_is_bit_reproducible(self, tmp_path):
        catalog, observations, _, split, _ = scenario(seed=33, n_known_trains=1, n_unknown_trains=0, date_start=dt.date(2018, 1, 1), date_end=dt.date(2018, 3, 1))
        a = train_registry(catalog, observations, split, FAST_FOREST)
        b = train_registry(catalog, observations, split, FAST_FOREST)
        pa, pb = tmp_path / "a.bundle", tmp_path / "b.bundle"
        save_registry(a, pa)
        save_registry(b, pb)
        assert pa.read_bytes() == pb.read_bytes()
