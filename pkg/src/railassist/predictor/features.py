"""Feature vector shared by every station model.

All six features are computable strictly before the journey starts, which is
what makes future-dated queries possible. The last slot carries the chained
prediction from the previous stop and is pinned to 0 at the origin.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from ..domain import TrainSchedule

FEATURE_NAMES = (
    "month",
    "day_of_week",
    "stop_index",
    "distance_km",
    "sched_elapsed_min",
    "prev_predicted_delay_min",
)


def build_features(
    schedule: TrainSchedule,
    stop_index: int,
    date: dt.date,
    prev_predicted_delay: float = 0.0,
) -> np.ndarray:
    """Deterministic vector in FEATURE_NAMES order. Monday is weekday 0."""
    stop = schedule.stops[stop_index]
    prev = 0.0 if stop_index == 0 else float(prev_predicted_delay)
    return np.array(
        [
            float(date.month),
            float(date.weekday()),
            float(stop_index),
            stop.distance_km,
            stop.sched_arrival_min,
            prev,
        ]
    )
