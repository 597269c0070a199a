"""Core vocabulary of the assistant: stations, schedules, delay observations,
dataset splits, plus validation and route arithmetic.

All types are immutable after construction and safe to share across threads.
Times are expressed as minutes since the journey-origin departure (plus a
day offset for display), which avoids wall-clock and timezone arithmetic on
multi-day routes.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

# Real feeds report early arrivals; late_minutes is floored here so the
# regression target stays bounded.
LATE_MINUTES_FLOOR = -30.0

MAX_STATION_CODE_LEN = 8

SCHEDULES_CSV_COLUMNS = [
    "train_number",
    "train_name",
    "known",
    "stop_index",
    "station_code",
    "station_name",
    "day_offset",
    "arrival_min",
    "departure_min",
    "distance_km",
]

DELAYS_CSV_COLUMNS = ["train_number", "date", "station_code", "late_minutes"]


@dataclass(frozen=True)
class StationCode:
    """A station identity: short uppercase code plus a display name."""

    code: str
    name: str


@dataclass(frozen=True)
class ScheduleStop:
    """One scheduled stop on a route.

    Arrival and departure are minutes since the origin departure; day_offset
    is the calendar-day offset of the arrival for display purposes.
    """

    station: StationCode
    stop_index: int
    day_offset: int
    sched_arrival_min: float
    sched_departure_min: float
    distance_km: float


@dataclass(frozen=True)
class TrainSchedule:
    """A train's ordered stops. ``known`` marks membership in the
    directly-modeled training group."""

    train_number: str
    train_name: str
    stops: tuple[ScheduleStop, ...]
    known: bool

    @property
    def origin(self) -> ScheduleStop:
        return self.stops[0]

    @property
    def destination(self) -> ScheduleStop:
        return self.stops[-1]

    @property
    def station_codes(self) -> tuple[str, ...]:
        return tuple(s.station.code for s in self.stops)


@dataclass(frozen=True)
class DelayObservation:
    """One historical data point: late minutes for (train, date, station)."""

    train_number: str
    date: dt.date
    station_code: str
    late_minutes: float


@dataclass(frozen=True)
class NetworkCatalog:
    """All schedules plus the station gazetteer (code -> display name)."""

    trains: Mapping[str, TrainSchedule]
    stations: Mapping[str, str]


JourneyKey = tuple[str, dt.date]


@dataclass(frozen=True)
class DatasetSplit:
    """Train/validation/test partition of whole journeys.

    Splits are disjoint by (train_number, date) so one journey's stations
    never straddle two sets.
    """

    train: frozenset[JourneyKey]
    validation: frozenset[JourneyKey]
    test: frozenset[JourneyKey]
    ratios: tuple[float, float, float]


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_catalog."""

    entity: str
    rule: str
    message: str


def route_position(schedule: TrainSchedule, station: str | StationCode) -> Optional[int]:
    """Return the stop_index of ``station`` on the route, or None if absent."""
    code = station.code if isinstance(station, StationCode) else station
    for stop in schedule.stops:
        if stop.station.code == code:
            return stop.stop_index
    return None


def _check_schedule(schedule: TrainSchedule, catalog: NetworkCatalog, out: list[Violation]) -> None:
    tn = schedule.train_number
    if not (len(tn) == 5 and tn.isdigit()):
        out.append(Violation(tn, "train-number-format", f"train number {tn!r} is not a 5-digit string"))
    if len(schedule.stops) < 2:
        out.append(Violation(tn, "route-min-stops", f"route has {len(schedule.stops)} stop(s), needs at least 2"))

    seen_codes: set[str] = set()
    for stop in schedule.stops:
        code = stop.station.code
        if not code or len(code) > MAX_STATION_CODE_LEN:
            out.append(Violation(tn, "station-code-format", f"station code {code!r} empty or longer than {MAX_STATION_CODE_LEN}"))
        if code not in catalog.stations:
            out.append(Violation(tn, "station-in-catalog", f"station {code!r} missing from the catalog gazetteer"))
        if code in seen_codes:
            out.append(Violation(tn, "route-station-unique", f"station {code!r} appears twice on the route"))
        seen_codes.add(code)
        if stop.sched_departure_min < stop.sched_arrival_min:
            out.append(Violation(tn, "stop-dwell", f"stop {stop.stop_index}: departure precedes arrival"))
        if stop.day_offset < 0:
            out.append(Violation(tn, "day-offset-negative", f"stop {stop.stop_index}: day_offset {stop.day_offset} < 0"))

    for i, stop in enumerate(schedule.stops):
        if stop.stop_index != i:
            out.append(Violation(tn, "stop-index-sequence", f"stop at position {i} carries stop_index {stop.stop_index}"))
    if schedule.stops and schedule.stops[0].distance_km != 0:
        out.append(Violation(tn, "origin-distance-zero", f"origin distance_km is {schedule.stops[0].distance_km}, expected 0"))
    for prev, cur in zip(schedule.stops, schedule.stops[1:]):
        if cur.sched_arrival_min <= prev.sched_arrival_min:
            out.append(Violation(tn, "arrival-monotone", f"arrival_min not strictly increasing at stop_index {cur.stop_index}"))
        if cur.distance_km <= prev.distance_km:
            out.append(Violation(tn, "distance-monotone", f"distance_km not strictly increasing at stop_index {cur.stop_index}"))


def validate_catalog(catalog: NetworkCatalog, observations: Iterable[DelayObservation]) -> list[Violation]:
    """Report every invariant violation in the catalog and observation list.

    Violations are data, not failures: an empty report means valid. The
    result is insensitive to observation order (same multiset of violations
    for any permutation).
    """
    out: list[Violation] = []
    for code, name in catalog.stations.items():
        if not code or len(code) > MAX_STATION_CODE_LEN:
            out.append(Violation(code, "station-code-format", f"gazetteer code {code!r} empty or longer than {MAX_STATION_CODE_LEN}"))
        if not name:
            out.append(Violation(code, "station-name-empty", f"gazetteer entry {code!r} has an empty name"))
    for schedule in catalog.trains.values():
        _check_schedule(schedule, catalog, out)

    seen: dict[tuple[str, dt.date, str], int] = {}
    for obs in observations:
        entity = f"{obs.train_number}/{obs.date.isoformat()}/{obs.station_code}"
        schedule = catalog.trains.get(obs.train_number)
        if schedule is None:
            out.append(Violation(entity, "obs-train-exists", f"observation references unknown train {obs.train_number!r}"))
        elif route_position(schedule, obs.station_code) is None:
            out.append(Violation(entity, "obs-station-on-route", f"station {obs.station_code!r} is not on train {obs.train_number}'s route"))
        if obs.late_minutes < LATE_MINUTES_FLOOR:
            out.append(Violation(entity, "obs-late-floor", f"late_minutes {obs.late_minutes} below floor {LATE_MINUTES_FLOOR}"))
        key = (obs.train_number, obs.date, obs.station_code)
        seen[key] = seen.get(key, 0) + 1
    for (tn, date, code), count in seen.items():
        if count > 1:
            entity = f"{tn}/{date.isoformat()}/{code}"
            out.append(Violation(entity, "obs-duplicate", f"{count} observations for one (train, date, station)"))
    return out


# ---------------------------------------------------------------------------
# CSV interchange formats
# ---------------------------------------------------------------------------

def write_schedules_csv(catalog: NetworkCatalog, path: str | Path) -> None:
    """Write one row per stop, trains ordered by number, stops by index."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCHEDULES_CSV_COLUMNS)
        for tn in sorted(catalog.trains):
            schedule = catalog.trains[tn]
            for stop in schedule.stops:
                writer.writerow([
                    schedule.train_number,
                    schedule.train_name,
                    "true" if schedule.known else "false",
                    stop.stop_index,
                    stop.station.code,
                    stop.station.name,
                    stop.day_offset,
                    _fmt_num(stop.sched_arrival_min),
                    _fmt_num(stop.sched_departure_min),
                    _fmt_num(stop.distance_km),
                ])


def read_schedules_csv(path: str | Path) -> NetworkCatalog:
    trains: dict[str, TrainSchedule] = {}
    stations: dict[str, str] = {}
    rows_by_train: dict[str, list[dict[str, str]]] = {}
    names: dict[str, str] = {}
    known: dict[str, bool] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SCHEDULES_CSV_COLUMNS:
            raise ValueError(f"unexpected schedules.csv header: {reader.fieldnames}")
        for row in reader:
            rows_by_train.setdefault(row["train_number"], []).append(row)
            names[row["train_number"]] = row["train_name"]
            known[row["train_number"]] = row["known"] == "true"
            stations[row["station_code"]] = row["station_name"]
    for tn, rows in rows_by_train.items():
        rows.sort(key=lambda r: int(r["stop_index"]))
        stops = tuple(
            ScheduleStop(
                station=StationCode(r["station_code"], r["station_name"]),
                stop_index=int(r["stop_index"]),
                day_offset=int(r["day_offset"]),
                sched_arrival_min=float(r["arrival_min"]),
                sched_departure_min=float(r["departure_min"]),
                distance_km=float(r["distance_km"]),
            )
            for r in rows
        )
        trains[tn] = TrainSchedule(tn, names[tn], stops, known[tn])
    return NetworkCatalog(trains=trains, stations=stations)


def write_delays_csv(observations: Iterable[DelayObservation], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DELAYS_CSV_COLUMNS)
        for obs in observations:
            writer.writerow([obs.train_number, obs.date.isoformat(), obs.station_code, _fmt_num(obs.late_minutes)])


def read_delays_csv(path: str | Path) -> list[DelayObservation]:
    out: list[DelayObservation] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != DELAYS_CSV_COLUMNS:
            raise ValueError(f"unexpected delays.csv header: {reader.fieldnames}")
        for row in reader:
            out.append(
                DelayObservation(
                    train_number=row["train_number"],
                    date=dt.date.fromisoformat(row["date"]),
                    station_code=row["station_code"],
                    late_minutes=float(row["late_minutes"]),
                )
            )
    return out


def _fmt_num(x: float) -> str:
    """Render floats without a trailing .0 so CSVs stay diff-friendly."""
    f = float(x)
    return str(int(f)) if f.is_integer() else repr(f)
