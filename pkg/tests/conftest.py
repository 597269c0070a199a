import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from railassist.mlcore import ForestConfig
from railassist.predictor import train_registry
from railassist.synthdata import demo_history, split_dataset

DEMO_FOREST = ForestConfig(n_trees=8, max_depth=6, min_samples_leaf=3, seed=3)


@pytest.fixture(scope="session")
def demo_parts():
    """Demo catalog, its full synthetic history, and a trained registry."""
    catalog, observations, truth, config = demo_history()
    split = split_dataset(observations, (0.7, 0.15, 0.15), seed=1)
    registry = train_registry(catalog, observations, split, DEMO_FOREST)
    return catalog, observations, truth, registry
