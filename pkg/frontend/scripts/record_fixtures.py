"""Record live backend responses as test fixtures.

Builds the demo registry (same seeds as the backend's chat transcript
pinning), runs the documented requests against an in-process service, and
writes each exchange to tests/fixtures/. Re-run after backend changes:

    python3 scripts/record_fixtures.py
"""

import datetime as dt
import json
from pathlib import Path

from fastapi.testclient import TestClient

from railassist.dialog import FixedClock
from railassist.mlcore import ForestConfig
from railassist.predictor import train_registry
from railassist.service import AppConfig, create_app
from railassist.synthdata import demo_history, split_dataset

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"

FIG1_SCRIPT = [
    "Is train 12307 on time?",
    "How about for Varanasi?",
    "No, I meant for Allahabad.",
    "What is the average train delay?",
]


def build_client(min_confidence=0.5):
    catalog, observations, _, _ = demo_history()
    split = split_dataset(observations, (0.6, 0.2, 0.2), seed=0)
    registry = train_registry(
        catalog, observations, split,
        ForestConfig(n_trees=8, max_depth=6, min_samples_leaf=3, seed=3),
    )
    config = AppConfig(gate_min_confidence=min_confidence)
    app = create_app(registry, catalog, observations, config, clock=FixedClock(dt.date(2018, 9, 21)))
    return TestClient(app)


def record(name, method, path, body, response):
    doc = {
        "request": {"method": method, "path": path, "body": body},
        "status": response.status_code,
        "body": response.json(),
    }
    (FIXTURES / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {name}.json ({response.status_code})")


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    client = build_client()

    turns = []
    session_id = None
    for text in FIG1_SCRIPT:
        body = {"text": text} if session_id is None else {"session_id": session_id, "text": text}
        response = client.post("/api/chat", json=body)
        session_id = response.json()["session_id"]
        turns.append({"request": {"method": "POST", "path": "/api/chat", "body": body},
                      "status": response.status_code, "body": response.json()})
    (FIXTURES / "fig1_turns.json").write_text(json.dumps(turns, indent=2) + "\n", encoding="utf-8")
    print(f"recorded fig1_turns.json ({len(turns)} turns)")

    body = {"train": "12307", "date": "2018-09-21"}
    record("predict_12307", "POST", "/api/predict", body, client.post("/api/predict", json=body))

    body = {"train": "12307", "date": "2018-09-21", "station": "BSB"}
    record("predict_station_offer", "POST", "/api/predict", body, client.post("/api/predict", json=body))

    record("summary_12307", "GET", "/api/analytics/12307/summary", None,
           client.get("/api/analytics/12307/summary"))
    record("summary_unknown", "GET", "/api/analytics/99999/summary", None,
           client.get("/api/analytics/99999/summary"))

    strict = build_client(min_confidence=1.1)
    body = {"train": "12307", "date": "2018-09-21"}
    record("predict_refused", "POST", "/api/predict", body, strict.post("/api/predict", json=body))


if __name__ == "__main__":
    main()
