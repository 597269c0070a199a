"""Registry serialization: one self-describing JSON document with a checksum.

The layout is documented field by field in docs/bundle_format.md. Floats
round-trip exactly through JSON, so a loaded registry reproduces the saved
one's predictions bit for bit.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..mlcore import ForestConfig, ForestModel, RidgeModel, TreeNode
from .bundles import SHARED_SCOPE, StationModelBundle
from .errors import CorruptBundleError, UnsupportedVersionError
from .training import ModelRegistry, TrainingMetadata

BUNDLE_FORMAT_VERSION = 1


def _tree_to_doc(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"n": node.n_samples, "value": node.value}
    return {
        "n": node.n_samples,
        "feature": node.feature_index,
        "threshold": node.threshold,
        "left": _tree_to_doc(node.left),
        "right": _tree_to_doc(node.right),
    }


def _tree_from_doc(doc: dict) -> TreeNode:
    if "value" in doc:
        return TreeNode(n_samples=doc["n"], value=doc["value"])
    return TreeNode(
        n_samples=doc["n"],
        feature_index=doc["feature"],
        threshold=doc["threshold"],
        left=_tree_from_doc(doc["left"]),
        right=_tree_from_doc(doc["right"]),
    )


def _bundle_to_doc(bundle: StationModelBundle) -> dict:
    return {
        "station": bundle.station,
        "scope": bundle.scope,
        "n_train_samples": bundle.n_train_samples,
        "residual_quantiles": {str(k): v for k, v in sorted(bundle.residual_quantiles.items())},
        "ridge": {
            "weights": [float(w) for w in bundle.ridge.weights],
            "intercept": bundle.ridge.intercept,
            "lambda": bundle.ridge.lam,
        },
        "forest": {
            "config": asdict(bundle.forest.config),
            "trees": [_tree_to_doc(t) for t in bundle.forest.trees],
        },
    }


def _bundle_from_doc(doc: dict) -> StationModelBundle:
    forest_doc = doc["forest"]
    return StationModelBundle(
        station=doc["station"],
        scope=doc["scope"],
        forest=ForestModel(
            trees=[_tree_from_doc(t) for t in forest_doc["trees"]],
            config=ForestConfig(**forest_doc["config"]),
        ),
        ridge=RidgeModel(
            weights=np.array(doc["ridge"]["weights"], dtype=float),
            intercept=doc["ridge"]["intercept"],
            lam=doc["ridge"]["lambda"],
        ),
        residual_quantiles={int(k): v for k, v in doc["residual_quantiles"].items()},
        n_train_samples=doc["n_train_samples"],
    )


def registry_to_document(registry: ModelRegistry) -> dict:
    meta = registry.metadata
    payload = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "feature_schema": list(registry.feature_names),
        "known_trains": sorted(registry.known_trains),
        "widest_half_widths": {str(k): v for k, v in sorted(registry.widest_half_widths.items())},
        "metadata": {
            "seed": meta.seed,
            "forest_config": asdict(meta.forest_config),
            "ridge_lambda": meta.ridge_lambda,
            "date_start": meta.date_start.isoformat(),
            "date_end": meta.date_end.isoformat(),
            "n_train_journeys": meta.n_train_journeys,
            "n_validation_journeys": meta.n_validation_journeys,
            "min_known_journeys": meta.min_known_journeys,
            "min_station_samples": meta.min_station_samples,
            "demoted_trains": list(meta.demoted_trains),
            "shared_fallback": [list(pair) for pair in meta.shared_fallback],
        },
        "shared_bundles": {code: _bundle_to_doc(b) for code, b in sorted(registry.shared.items())},
        "direct_bundles": [
            {"train": train, "station": station, "shared_ref": True}
            if registry.direct[(train, station)].scope == SHARED_SCOPE
            else {"train": train, "station": station, "bundle": _bundle_to_doc(registry.direct[(train, station)])}
            for train, station in sorted(registry.direct)
        ],
    }
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")).hexdigest()
    payload["checksum"] = digest
    return payload


def registry_from_document(doc: dict) -> ModelRegistry:
    version = doc.get("format_version")
    if version != BUNDLE_FORMAT_VERSION:
        raise UnsupportedVersionError(f"bundle format version {version!r} is not supported (expected {BUNDLE_FORMAT_VERSION})")
    stated = doc.get("checksum")
    payload = {k: v for k, v in doc.items() if k != "checksum"}
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")).hexdigest()
    if stated != digest:
        raise CorruptBundleError("checksum mismatch; the bundle file is damaged")
    try:
        meta_doc = doc["metadata"]
        metadata = TrainingMetadata(
            seed=meta_doc["seed"],
            forest_config=ForestConfig(**meta_doc["forest_config"]),
            ridge_lambda=meta_doc["ridge_lambda"],
            date_start=dt.date.fromisoformat(meta_doc["date_start"]),
            date_end=dt.date.fromisoformat(meta_doc["date_end"]),
            n_train_journeys=meta_doc["n_train_journeys"],
            n_validation_journeys=meta_doc["n_validation_journeys"],
            min_known_journeys=meta_doc["min_known_journeys"],
            min_station_samples=meta_doc["min_station_samples"],
            demoted_trains=tuple(meta_doc["demoted_trains"]),
            shared_fallback=tuple((t, s) for t, s in meta_doc["shared_fallback"]),
        )
        shared = {code: _bundle_from_doc(b) for code, b in doc["shared_bundles"].items()}
        direct: dict[tuple[str, str], StationModelBundle] = {}
        for entry in doc["direct_bundles"]:
            key = (entry["train"], entry["station"])
            direct[key] = shared[entry["station"]] if entry.get("shared_ref") else _bundle_from_doc(entry["bundle"])
        return ModelRegistry(
            direct=direct,
            shared=shared,
            feature_names=tuple(doc["feature_schema"]),
            known_trains=frozenset(doc["known_trains"]),
            widest_half_widths={int(k): v for k, v in doc["widest_half_widths"].items()},
            metadata=metadata,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptBundleError(f"malformed bundle document: {exc}") from exc


def save_registry(registry: ModelRegistry, path: str | Path) -> None:
    doc = registry_to_document(registry)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")


def load_registry(path: str | Path) -> ModelRegistry:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptBundleError(f"cannot read bundle file: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptBundleError("bundle file does not contain a JSON object")
    return registry_from_document(doc)
