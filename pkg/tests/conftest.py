from __future__ import annotations

from pathlib import Path

import pytest

from publoop.config import ScenarioConfig, load_scenario

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = REPO / "configs" / "scenarios"


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS


def tiny_scenario(seed: int = 7, horizon: int = 20, **dotted) -> ScenarioConfig:
    """A small, fast config for engine-level tests."""
    overrides = {
        "seed": str(seed),
        "horizon": str(horizon),
        "world.n_authors": "60",
        "world.n_human_reviewers": "24",
        "world.n_ai_reviewers": "6",
        "world.p_sub": "0.1",
        "world.keyword_universe_size": "12",
        "pipeline.max_reviews_per_timestep": "24",
        "adversary.cluster_reviewers": "5",
        "adversary.cluster_authors": "12",
    }
    overrides.update({k: str(v) for k, v in dotted.items()})
    return load_scenario(None, list(overrides.items()))
