"""Machine-readable error types surfaced through the service layer."""

from __future__ import annotations


class PredictorError(Exception):
    code = "predictor-error"


class UnknownTrainError(PredictorError):
    code = "unknown-train"

    def __init__(self, train_number: str):
        super().__init__(f"train {train_number!r} is not in the catalog")
        self.train_number = train_number


class StationNotOnRouteError(PredictorError):
    """Carries the route's full station list so a caller can offer choices."""

    code = "station-not-on-route"

    def __init__(self, train_number: str, station_code: str, stations: list[tuple[str, str]]):
        super().__init__(f"train {train_number} does not stop at {station_code}")
        self.train_number = train_number
        self.station_code = station_code
        self.stations = stations


class TrainingDataError(PredictorError):
    code = "training-data"


class CorruptBundleError(PredictorError):
    code = "corrupt-bundle"


class UnsupportedVersionError(PredictorError):
    code = "unsupported-version"
