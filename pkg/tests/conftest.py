from pathlib import Path

import numpy as np
import pytest

from misslogit.data.dataset import ColumnLayout, Dataset

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SIMPLE_LAYOUT = ColumnLayout(x1=("x1",), x2=("x2",), z=("z",), w=("w",))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte Carlo reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def _build(rows):
    """rows: (y, x1, x2, z, w) with None for an absent block."""
    return Dataset.from_arrays(
        y=[r[0] for r in rows],
        x1=[None if r[1] is None else (r[1],) for r in rows],
        x2=[None if r[2] is None else (r[2],) for r in rows],
        z=[(r[3],) for r in rows],
        w=[(r[4],) for r in rows],
        layout=SIMPLE_LAYOUT,
    )


def _random(rng, n, complete=False, pattern_probs=(0.55, 0.15, 0.15, 0.15)):
    x1 = rng.choice([0, 1, 2], size=n)
    x2 = rng.choice([-1, 1], size=n)
    z = rng.integers(0, 2, size=n)
    w = (x1 > 0).astype(int) if rng.random() < 0.5 else rng.integers(0, 2, size=n)
    eta = -0.3 + 0.6 * x1 - 0.5 * x2 + 0.4 * z
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(int)

    if complete:
        delta = np.ones(n, dtype=int)
    else:
        delta = rng.choice([1, 2, 3, 4], size=n, p=pattern_probs)
        delta[: max(4, n // 10)] = 1

    rows = [
        (
            int(y[i]),
            int(x1[i]) if delta[i] in (1, 3) else None,
            int(x2[i]) if delta[i] in (1, 2) else None,
            int(z[i]),
            int(w[i]),
        )
        for i in range(n)
    ]
    return _build(rows)


@pytest.fixture
def make_dataset():
    return _build


@pytest.fixture
def random_dataset():
    """Factory: random_dataset(rng, n, complete=False) -> Dataset."""
    return _random


@pytest.fixture
def small_dataset():
    # Two (Y, Z, W) strata with every pattern, plus a stratum of complete cases only
    return _build([
        (1, 0, 1, 0, 0),
        (1, 1, 1, 0, 0),
        (1, 1, -1, 0, 0),
        (1, None, 1, 0, 0),
        (1, 2, None, 0, 0),
        (1, None, None, 0, 0),
        (0, 0, -1, 1, 1),
        (0, 2, -1, 1, 1),
        (0, None, -1, 1, 1),
        (0, 0, None, 1, 1),
        (0, None, None, 1, 1),
        (0, 1, 1, 0, 1),
        (1, 2, 1, 1, 0),
        (0, 1, -1, 1, 0),
    ])
