"""Deterministic synthetic network and delay-history generator.

Delays follow a clamped autoregressive process with known ground truth so
every analytic has an exact oracle:

    latent[0]   = 0
    carried     = max(alpha * latent[i] - recovery * dwell[i], min(alpha * latent[i], 0))
    latent[i+1] = max(carried + congestion(station, date) + bottleneck(station, date), FLOOR)
    observed[i] = max(latent[i] + noise, FLOOR)   (floor 0 at the origin)

Noise stays out of the propagation so the latent path is the analytically
clean signal the observations scatter around. Congestion is a fixed
per-station base scaled by weekday and month multipliers; bottlenecks add a
fixed mean at their station during their active months.
"""

from __future__ import annotations

import csv
import datetime as dt
import itertools
import string
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .domain import (
    LATE_MINUTES_FLOOR,
    DatasetSplit,
    DelayObservation,
    JourneyKey,
    NetworkCatalog,
    ScheduleStop,
    StationCode,
    TrainSchedule,
)
from .seeding import rng_for, stable_uniform

GROUND_TRUTH_CSV_COLUMNS = ["train_number", "date", "station_code", "latent_delay"]


@dataclass(frozen=True)
class BottleneckSpec:
    """A station that injects a fixed mean delay, optionally only in some months."""

    station_code: str
    mean_added_delay: float
    active_months: tuple[int, ...] = ()

    def added_delay(self, date: dt.date) -> float:
        if self.active_months and date.month not in self.active_months:
            return 0.0
        return self.mean_added_delay


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 42
    n_known_trains: int = 52
    n_unknown_trains: int = 83
    stations_per_train: tuple[int, int] = (6, 12)
    station_pool_size: int = 40
    date_start: dt.date = dt.date(2018, 1, 1)
    date_end: dt.date = dt.date(2018, 12, 31)
    noise_sigma: float = 3.0
    propagation_alpha: float = 0.7
    recovery_rate: float = 0.05
    congestion_scale: float = 4.0
    bottlenecks: tuple[BottleneckSpec, ...] = ()
    weekday_multipliers: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.1, 1.2, 1.1)
    month_multipliers: tuple[float, ...] = (1.0,) * 12
    force_bottlenecks_on_routes: bool = True

    def __post_init__(self) -> None:
        lo, hi = self.stations_per_train
        if not 2 <= lo <= hi:
            raise ValueError("stations_per_train must satisfy 2 <= lo <= hi")
        if hi > self.station_pool_size:
            raise ValueError("stations_per_train upper bound exceeds the station pool")
        if self.date_end < self.date_start:
            raise ValueError("date_end precedes date_start")
        if self.noise_sigma < 0 or self.congestion_scale < 0 or self.recovery_rate < 0:
            raise ValueError("noise_sigma, congestion_scale, recovery_rate must be >= 0")
        if not 0.0 <= self.propagation_alpha <= 1.0:
            raise ValueError("propagation_alpha must lie in [0, 1]")
        if len(self.weekday_multipliers) != 7 or len(self.month_multipliers) != 12:
            raise ValueError("need 7 weekday multipliers and 12 month multipliers")

    def dates(self) -> list[dt.date]:
        span = (self.date_end - self.date_start).days + 1
        return [self.date_start + dt.timedelta(days=i) for i in range(span)]


@dataclass
class GroundTruth:
    """Noise-free latent delays per journey, aligned with route stop order."""

    latent: dict[JourneyKey, tuple[float, ...]] = field(default_factory=dict)
    bottleneck_stations: tuple[str, ...] = ()
    true_mean_destination_delay: dict[str, float] = field(default_factory=dict)


def station_pool_codes(size: int) -> list[str]:
    """Fixed code sequence AA, AB, ... shared by every seed, like real networks."""
    letters = string.ascii_uppercase
    codes = ["".join(p) for p in itertools.product(letters, repeat=2)]
    if size > len(codes):
        codes += ["".join(p) for p in itertools.product(letters, repeat=3)]
    return codes[:size]


_NAME_SYLLABLES = [
    "ka", "ra", "na", "pur", "bad", "va", "ti", "sar", "gan", "ja",
    "lo", "re", "mi", "dha", "kot", "nag", "gar", "wa", "si", "bal",
]


def _station_names(codes: list[str], rng: np.random.Generator) -> dict[str, str]:
    names: dict[str, str] = {}
    used: set[str] = set()
    for code in codes:
        while True:
            n_syll = int(rng.integers(2, 5))
            name = "".join(rng.choice(_NAME_SYLLABLES) for _ in range(n_syll)).capitalize()
            if name not in used:
                break
        used.add(name)
        names[code] = name
    return names


def generate_network(config: GeneratorConfig) -> NetworkCatalog:
    """Build a deterministic catalog of known and unknown trains."""
    rng = rng_for(config.seed, "network")
    codes = station_pool_codes(config.station_pool_size)
    names = _station_names(codes, rng)

    forced = [b.station_code for b in config.bottlenecks if config.force_bottlenecks_on_routes]
    for code in forced:
        if code not in names:
            raise ValueError(f"bottleneck station {code!r} is outside the station pool")

    n_total = config.n_known_trains + config.n_unknown_trains
    numbers: list[str] = []
    seen: set[int] = set()
    while len(numbers) < n_total:
        n = int(rng.integers(10000, 99999))
        if n not in seen:
            seen.add(n)
            numbers.append(str(n))

    trains: dict[str, TrainSchedule] = {}
    lo, hi = config.stations_per_train
    for idx, train_number in enumerate(numbers):
        k = int(rng.integers(lo, hi + 1))
        route = list(rng.choice(codes, size=k, replace=False))
        for code in forced:
            if k < 3:
                continue
            # Keep the bottleneck strictly inside the route; the origin's
            # latent delay is pinned to zero, so a terminal bottleneck would
            # be invisible.
            middle = int(rng.integers(1, k - 1))
            if code not in route:
                route[middle] = code
            elif route.index(code) in (0, k - 1):
                at = route.index(code)
                route[at], route[middle] = route[middle], route[at]
        route = list(dict.fromkeys(route))
        k = len(route)

        seg_km = rng.uniform(25.0, 140.0, size=k - 1)
        seg_speed = rng.uniform(45.0, 85.0, size=k - 1)
        dwell = rng.integers(2, 11, size=k).astype(float)
        stops = []
        distance = 0.0
        arrival = 0.0
        for i, code in enumerate(route):
            if i > 0:
                distance += float(seg_km[i - 1])
                arrival += float(seg_km[i - 1] / seg_speed[i - 1] * 60.0) + float(dwell[i - 1] if i > 1 else 0.0)
            is_terminal = i == 0 or i == k - 1
            stops.append(
                ScheduleStop(
                    station=StationCode(code, names[code]),
                    stop_index=i,
                    day_offset=int(arrival // 1440),
                    sched_arrival_min=round(arrival, 1),
                    sched_departure_min=round(arrival, 1) if is_terminal else round(arrival + float(dwell[i]), 1),
                    distance_km=round(distance, 1),
                )
            )
        origin, dest = stops[0].station.name, stops[-1].station.name
        trains[train_number] = TrainSchedule(
            train_number=train_number,
            train_name=f"{origin} {dest} Express",
            stops=tuple(stops),
            known=idx < config.n_known_trains,
        )
    return NetworkCatalog(trains=trains, stations=names)


def congestion_base(seed: int, station_code: str, scale: float) -> float:
    """Per-station mean congestion in minutes, stable for a given seed."""
    return stable_uniform(seed, "congestion", station_code) * scale


def _congestion(config: GeneratorConfig, code: str, date: dt.date) -> float:
    base = congestion_base(config.seed, code, config.congestion_scale)
    return base * config.weekday_multipliers[date.weekday()] * config.month_multipliers[date.month - 1]


def _bottleneck(config: GeneratorConfig, code: str, date: dt.date) -> float:
    return sum(b.added_delay(date) for b in config.bottlenecks if b.station_code == code)


def latent_journey(config: GeneratorConfig, schedule: TrainSchedule, date: dt.date) -> tuple[float, ...]:
    """Noise-free delay path for one (train, date)."""
    alpha = config.propagation_alpha
    latent = [0.0]
    for prev, stop in zip(schedule.stops, schedule.stops[1:]):
        dwell = prev.sched_departure_min - prev.sched_arrival_min
        carried = alpha * latent[-1]
        if carried > 0:
            carried = max(carried - config.recovery_rate * dwell, 0.0)
        value = carried + _congestion(config, stop.station.code, date) + _bottleneck(config, stop.station.code, date)
        latent.append(max(value, LATE_MINUTES_FLOOR))
    return tuple(latent)


def generate_delay_history(
    catalog: NetworkCatalog, config: GeneratorConfig
) -> tuple[list[DelayObservation], GroundTruth]:
    """One observation per (train, date, stop), plus the latent ground truth.

    Per-journey noise streams are keyed by (seed, train, date) so generation
    order never matters.
    """
    observations: list[DelayObservation] = []
    truth = GroundTruth(bottleneck_stations=tuple(b.station_code for b in config.bottlenecks))
    dates = config.dates()
    for train_number in sorted(catalog.trains):
        schedule = catalog.trains[train_number]
        dest_total = 0.0
        for date in dates:
            latent = latent_journey(config, schedule, date)
            truth.latent[(train_number, date)] = latent
            dest_total += latent[-1]
            if config.noise_sigma > 0:
                noise = rng_for(config.seed, "noise", train_number, date.toordinal()).normal(
                    0.0, config.noise_sigma, size=len(latent)
                )
            else:
                noise = np.zeros(len(latent))
            for stop, lat, eps in zip(schedule.stops, latent, noise):
                floor = 0.0 if stop.stop_index == 0 else LATE_MINUTES_FLOOR
                observations.append(
                    DelayObservation(
                        train_number=train_number,
                        date=date,
                        station_code=stop.station.code,
                        late_minutes=max(lat + float(eps), floor),
                    )
                )
        truth.true_mean_destination_delay[train_number] = dest_total / len(dates)
    return observations, truth


def split_dataset(
    observations: list[DelayObservation], ratios: tuple[float, float, float], seed: int
) -> DatasetSplit:
    """Partition whole journeys into train/validation/test, deterministically.

    Flooring leftovers land in the training split.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    journeys = sorted({(o.train_number, o.date) for o in observations})
    rng = rng_for(seed, "split")
    order = rng.permutation(len(journeys))
    shuffled = [journeys[i] for i in order]
    n = len(shuffled)
    n_val = int(ratios[1] * n)
    n_test = int(ratios[2] * n)
    n_train = n - n_val - n_test
    return DatasetSplit(
        train=frozenset(shuffled[:n_train]),
        validation=frozenset(shuffled[n_train : n_train + n_val]),
        test=frozenset(shuffled[n_train + n_val :]),
        ratios=ratios,
    )


def write_ground_truth_csv(truth: GroundTruth, catalog: NetworkCatalog, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GROUND_TRUTH_CSV_COLUMNS)
        for (train_number, date), latents in sorted(truth.latent.items()):
            schedule = catalog.trains[train_number]
            for stop, latent in zip(schedule.stops, latents):
                writer.writerow([train_number, date.isoformat(), stop.station.code, repr(float(latent))])


# ---------------------------------------------------------------------------
# Scenario library
# ---------------------------------------------------------------------------

# Named configurations with analytically known behavior:
#   smooth       - low noise, mild congestion, no bottlenecks
#   bottlenecked - one dominant station (AC) plus seasonal surge months
#   messy        - heavy noise, several bottlenecks, strong calendar effects
_SCENARIOS: dict[str, GeneratorConfig] = {
    "smooth": GeneratorConfig(
        seed=42,
        noise_sigma=3.0,
        propagation_alpha=0.7,
        recovery_rate=0.05,
        congestion_scale=4.0,
    ),
    "bottlenecked": GeneratorConfig(
        seed=43,
        noise_sigma=4.0,
        propagation_alpha=0.85,
        recovery_rate=0.02,
        congestion_scale=6.0,
        bottlenecks=(BottleneckSpec("AC", 40.0, active_months=(4, 5, 6, 7, 8, 9)),),
        weekday_multipliers=(1.0, 1.0, 1.0, 1.0, 1.3, 1.8, 1.5),
    ),
    "messy": GeneratorConfig(
        seed=44,
        noise_sigma=12.0,
        propagation_alpha=0.9,
        recovery_rate=0.1,
        congestion_scale=10.0,
        bottlenecks=(
            BottleneckSpec("AB", 35.0),
            BottleneckSpec("AJ", 25.0, active_months=(6, 7, 8)),
            BottleneckSpec("AQ", 15.0, active_months=(11, 12, 1)),
        ),
        weekday_multipliers=(1.0, 0.9, 1.0, 1.1, 1.4, 1.9, 1.6),
        month_multipliers=(1.2, 1.0, 1.0, 1.1, 1.3, 1.5, 1.5, 1.4, 1.2, 1.1, 1.3, 1.4),
    ),
}


def scenario_names() -> list[str]:
    return sorted(_SCENARIOS)


def scenario_config(name: str, **overrides) -> GeneratorConfig:
    """Fetch a named scenario, optionally overriding size or seed knobs."""
    try:
        base = _SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {scenario_names()}") from None
    return replace(base, **overrides) if overrides else base


def generate_scenario(
    name: str, **overrides
) -> tuple[NetworkCatalog, list[DelayObservation], GroundTruth, GeneratorConfig]:
    config = scenario_config(name, **overrides)
    catalog = generate_network(config)
    observations, truth = generate_delay_history(catalog, config)
    return catalog, observations, truth, config


# ---------------------------------------------------------------------------
# Hand-built demo network for the sample conversation
# ---------------------------------------------------------------------------

_DEMO_STATIONS = {
    "HWH": "Howrah",
    "DHN": "Dhanbad",
    "MGS": "Mughal Sarai",
    "ALD": "Allahabad",
    "CNB": "Kanpur",
    "AGC": "Agra",
    "JP": "Jaipur",
    "JU": "Jodhpur",
    "BSB": "Varanasi",
    "MFP": "Muzaffarpur",
    "NDLS": "New Delhi",
    "ASN": "Asansol",
    "PNBE": "Patna",
}


def _demo_schedule(train_number, train_name, codes, known, seg_km, seg_min, dwell_min=5.0):
    stops = []
    distance = 0.0
    arrival = 0.0
    for i, code in enumerate(codes):
        if i > 0:
            distance += seg_km[i - 1]
            arrival += seg_min[i - 1] + (dwell_min if i > 1 else 0.0)
        terminal = i == 0 or i == len(codes) - 1
        stops.append(
            ScheduleStop(
                station=StationCode(code, _DEMO_STATIONS[code]),
                stop_index=i,
                day_offset=int(arrival // 1440),
                sched_arrival_min=arrival,
                sched_departure_min=arrival if terminal else arrival + dwell_min,
                distance_km=distance,
            )
        )
    return TrainSchedule(train_number, train_name, tuple(stops), known)


def demo_catalog() -> NetworkCatalog:
    """Small fixed network: train 12307 runs Howrah to Jodhpur via Allahabad,
    Varanasi exists in the gazetteer but is not on 12307's route."""
    t1 = _demo_schedule(
        "12307",
        "Howrah Jodhpur Express",
        ["HWH", "DHN", "MGS", "ALD", "CNB", "AGC", "JP", "JU"],
        True,
        seg_km=[259.0, 392.0, 153.0, 194.0, 285.0, 151.0, 308.0],
        seg_min=[255.0, 350.0, 140.0, 180.0, 280.0, 150.0, 300.0],
    )
    t2 = _demo_schedule(
        "12561",
        "Muzaffarpur Delhi Express",
        ["MFP", "BSB", "ALD", "CNB", "NDLS"],
        True,
        seg_km=[254.0, 151.0, 194.0, 440.0],
        seg_min=[250.0, 145.0, 185.0, 400.0],
    )
    t3 = _demo_schedule(
        "12305",
        "Kolkata Delhi Premium",
        ["HWH", "ASN", "PNBE", "MGS", "CNB", "NDLS"],
        False,
        seg_km=[200.0, 332.0, 210.0, 345.0, 440.0],
        seg_min=[180.0, 300.0, 190.0, 320.0, 390.0],
    )
    trains = {t.train_number: t for t in (t1, t2, t3)}
    return NetworkCatalog(trains=trains, stations=dict(_DEMO_STATIONS))


def demo_config() -> GeneratorConfig:
    """History generator matched to the demo catalog: delays accumulate along
    the route so a mid-route query shows further delay by the destination."""
    return GeneratorConfig(
        seed=7,
        n_known_trains=2,
        n_unknown_trains=1,
        noise_sigma=2.0,
        propagation_alpha=1.0,
        recovery_rate=0.0,
        congestion_scale=8.0,
        force_bottlenecks_on_routes=False,
    )


def demo_history() -> tuple[NetworkCatalog, list[DelayObservation], GroundTruth, GeneratorConfig]:
    catalog = demo_catalog()
    config = demo_config()
    observations, truth = generate_delay_history(catalog, config)
    return catalog, observations, truth, config
