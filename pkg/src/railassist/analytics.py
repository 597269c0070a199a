"""Journey and route insights over observed or predicted delays.

Everything here is a pure function over observation lists; results are
independent of input ordering. Threshold defaults (10 min "delayed", 60 min
"late over an hour", 5 min mitigation dead band) are parameters.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .domain import DelayObservation, NetworkCatalog

DELAYED_THRESHOLD_MIN = 10.0
LATE_OVER_THRESHOLD_MIN = 60.0
MITIGATION_DEAD_BAND_MIN = 5.0
MIN_SHARED_STATIONS = 3

DateRange = Optional[tuple[Optional[dt.date], Optional[dt.date]]]


class NoDataError(Exception):
    code = "no-data"


@dataclass(frozen=True)
class DelayProfile:
    """Per-stop mean late minutes for one train over a date range."""

    train_number: str
    stations: tuple[str, ...]
    mean_delays: tuple[float, ...]
    counts: tuple[int, ...]
    date_start: Optional[dt.date]
    date_end: Optional[dt.date]


@dataclass(frozen=True)
class MitigationResult:
    verdict: str  # mitigated | worsened | unchanged
    after_station: str
    delay_at_station: float
    delay_at_destination: float
    delta: float  # destination minus queried station


def _in_range(date: dt.date, date_range: DateRange) -> bool:
    if date_range is None:
        return True
    start, end = date_range
    if start is not None and date < start:
        return False
    if end is not None and date > end:
        return False
    return True


def _resolve_station(catalog: NetworkCatalog, train_number: str, station: str) -> str:
    schedule = catalog.trains.get(train_number)
    if schedule is None:
        raise NoDataError(f"no schedule for train {train_number}")
    if station == "destination":
        return schedule.destination.station.code
    return station


def _matching(
    observations: Iterable[DelayObservation], train_number: str, station_code: str, date_range: DateRange
) -> list[float]:
    return [
        o.late_minutes
        for o in observations
        if o.train_number == train_number and o.station_code == station_code and _in_range(o.date, date_range)
    ]


def average_delay(
    observations: Iterable[DelayObservation],
    catalog: NetworkCatalog,
    train_number: str,
    station: str = "destination",
    date_range: DateRange = None,
) -> float:
    """Arithmetic mean of matching late minutes."""
    code = _resolve_station(catalog, train_number, station)
    values = _matching(observations, train_number, code, date_range)
    if not values:
        raise NoDataError(f"no observations for train {train_number} at {code}")
    return sum(values) / len(values)


def pct_late_over(
    observations: Iterable[DelayObservation],
    catalog: NetworkCatalog,
    train_number: str,
    station: str = "destination",
    threshold_min: float = LATE_OVER_THRESHOLD_MIN,
    date_range: DateRange = None,
) -> float:
    """Fraction of days strictly later than the threshold."""
    code = _resolve_station(catalog, train_number, station)
    values = _matching(observations, train_number, code, date_range)
    if not values:
        raise NoDataError(f"no observations for train {train_number} at {code}")
    return sum(1 for v in values if v > threshold_min) / len(values)


def build_profile(
    observations: Iterable[DelayObservation],
    catalog: NetworkCatalog,
    train_number: str,
    date_range: DateRange = None,
) -> DelayProfile:
    """Mean delay per route stop, NaN where the range holds no data."""
    schedule = catalog.trains.get(train_number)
    if schedule is None:
        raise NoDataError(f"no schedule for train {train_number}")
    sums = {code: 0.0 for code in schedule.station_codes}
    counts = {code: 0 for code in schedule.station_codes}
    dates: list[dt.date] = []
    for o in observations:
        if o.train_number != train_number or o.station_code not in sums or not _in_range(o.date, date_range):
            continue
        sums[o.station_code] += o.late_minutes
        counts[o.station_code] += 1
        dates.append(o.date)
    if not dates:
        raise NoDataError(f"no observations for train {train_number} in range")
    means = tuple(
        sums[code] / counts[code] if counts[code] else math.nan for code in schedule.station_codes
    )
    return DelayProfile(
        train_number=train_number,
        stations=schedule.station_codes,
        mean_delays=means,
        counts=tuple(counts[code] for code in schedule.station_codes),
        date_start=min(dates),
        date_end=max(dates),
    )


def first_delay_station(
    stop_delays: Sequence[tuple[str, float]], threshold_min: float = DELAYED_THRESHOLD_MIN
) -> Optional[tuple[str, float]]:
    """Earliest stop whose delay strictly exceeds the threshold, else None."""
    for station, delay in stop_delays:
        if delay > threshold_min:
            return station, delay
    return None


def bottleneck_station(profile: DelayProfile) -> tuple[str, float]:
    """Stop with the largest mean gain over its predecessor, earliest on ties."""
    if len(profile.stations) < 2:
        raise NoDataError("bottleneck needs at least two stops")
    best: Optional[tuple[str, float]] = None
    for i in range(1, len(profile.stations)):
        a, b = profile.mean_delays[i - 1], profile.mean_delays[i]
        if math.isnan(a) or math.isnan(b):
            continue
        increment = b - a
        if best is None or increment > best[1]:
            best = (profile.stations[i], increment)
    if best is None:
        raise NoDataError("no consecutive stops with data")
    return best


def delay_mitigated(
    stop_delays: Sequence[tuple[str, float]],
    after_station: str,
    dead_band_min: float = MITIGATION_DEAD_BAND_MIN,
) -> MitigationResult:
    """Compare the delay at a stop against the destination delay."""
    stations = [s for s, _ in stop_delays]
    if after_station not in stations:
        raise NoDataError(f"{after_station} is not among the journey stops")
    if after_station == stations[-1]:
        raise NoDataError("mitigation is undefined at the destination itself")
    at_station = dict(stop_delays)[after_station]
    at_destination = stop_delays[-1][1]
    delta = at_destination - at_station
    if delta < -dead_band_min:
        verdict = "mitigated"
    elif delta > dead_band_min:
        verdict = "worsened"
    else:
        verdict = "unchanged"
    return MitigationResult(
        verdict=verdict,
        after_station=after_station,
        delay_at_station=at_station,
        delay_at_destination=at_destination,
        delta=delta,
    )


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def train_similarity(
    profiles: Sequence[DelayProfile],
    query_train: str,
    k: int,
    min_shared_stations: int = MIN_SHARED_STATIONS,
) -> list[tuple[str, float]]:
    """Top-k trains by Pearson correlation of per-station mean delays over
    shared stations; pairs with fewer than ``min_shared_stations`` shared
    stations (or zero variance) are excluded. Ties rank the lower train
    number first."""
    query = next((p for p in profiles if p.train_number == query_train), None)
    if query is None:
        raise NoDataError(f"no profile for train {query_train}")
    query_means = {
        s: m for s, m, c in zip(query.stations, query.mean_delays, query.counts) if c > 0 and not math.isnan(m)
    }
    scored: list[tuple[str, float]] = []
    for profile in profiles:
        shared_x: list[float] = []
        shared_y: list[float] = []
        for s, m, c in zip(profile.stations, profile.mean_delays, profile.counts):
            if c > 0 and not math.isnan(m) and s in query_means:
                shared_x.append(query_means[s])
                shared_y.append(m)
        if len(shared_x) < min_shared_stations:
            continue
        score = _pearson(shared_x, shared_y)
        if score is None:
            continue
        scored.append((profile.train_number, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
