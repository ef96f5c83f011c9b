import os

import numpy as np
import pytest

from opsw import Instance, apply_deviation, euclidean_weights

SET3_ENV = "OPSW_SET3_PATH"
SET3_DEFAULT = os.path.join(os.path.dirname(__file__), "..", "data",
                            "tsiligirides_set3.txt")


def set3_path() -> str | None:
    """Benchmark set-3 file if the user provided one (not bundled)."""
    candidate = os.environ.get(SET3_ENV, SET3_DEFAULT)
    return candidate if os.path.exists(candidate) else None


def random_instance(rng: np.random.Generator, n_nodes: int, length_limit: float,
                    alpha: float = 0.2, max_score: int = 10):
    """Random Euclidean instance on the unit 10x10 square with integer scores."""
    pts = rng.uniform(0.0, 10.0, size=(n_nodes, 2))
    nodes = tuple(
        (float(x), float(y), 0.0 if k == 0 else float(rng.integers(1, max_score + 1)))
        for k, (x, y) in enumerate(pts))
    inst = Instance(nodes, length_limit)
    return inst, apply_deviation(euclidean_weights(inst), alpha)


@pytest.fixture
def toy():
    """Hand-traceable line instance: depot at 0, two nodes on the x axis.

    dbar: depot->v1 = 10, v1->v2 = 7, v2->depot = 3; scores 10 and 5; L = 20.
    """
    inst = Instance(((0.0, 0.0, 0.0), (10.0, 0.0, 10.0), (3.0, 0.0, 5.0)), 20.0)
    w = euclidean_weights(inst)
    return inst, w


@pytest.fixture
def toy_dev(toy):
    inst, w = toy
    return inst, apply_deviation(w, 0.2)
