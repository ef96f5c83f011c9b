"""Box uncertainty set for arc weights, plus seeded uniform scenario sampling.

The box set scales the deviation band by a level ``theta`` in [0, 1]:
``U = { d : |d_ij - dbar_ij| <= theta * dhat_ij }``.  Simulation scenarios are
drawn from the *full* band (theta plays no role in sampling); they are produced
by a counter-based generator so that scenario ``i`` only depends on
``(base_seed, i)`` and never on evaluation order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .instance import WeightModel


@dataclass(frozen=True)
class Scenario:
    """One realized weight matrix; ``seed_tag`` records the sampling index.

    Derived scenarios (box extreme points, optimistic weights) carry tag -1.
    """

    d: np.ndarray
    seed_tag: int = -1

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("scenario matrix must be square")
        if np.any(np.diag(d) != 0):
            raise ValueError("scenario diagonal must be 0")


@dataclass(frozen=True)
class BoxUncertainty:
    model: WeightModel
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {self.theta}")


def worst_case_weights(u: BoxUncertainty) -> Scenario:
    """Elementwise maximum of the box: ``dbar + theta * dhat``."""
    return Scenario(d=u.model.dbar + u.theta * u.model.dhat)


def optimistic_weights(model: WeightModel) -> Scenario:
    """All weights at their minimum values ``dbar - dhat`` (full deviation)."""
    return Scenario(d=model.dbar - model.dhat)


def sample_scenario(model: WeightModel, base_seed: int, index: int) -> Scenario:
    """Uniform symmetric scenario on the full band, keyed by (base_seed, index).

    Only the upper triangle consumes randomness; the lower triangle mirrors it.
    Philox is counter-based, so distinct indices give independent streams and
    the result is identical no matter in which order scenarios are drawn.
    """
    if index < 0:
        raise ValueError(f"scenario index must be >= 0, got {index}")
    n = model.n_nodes
    rng = np.random.Generator(np.random.Philox(key=np.array([base_seed, index], dtype=np.uint64)))
    iu, ju = np.triu_indices(n, k=1)
    shift = (2.0 * rng.random(iu.size) - 1.0) * model.dhat[iu, ju]
    d = np.zeros((n, n))
    d[iu, ju] = model.dbar[iu, ju] + shift
    d[ju, iu] = d[iu, ju]
    return Scenario(d=d, seed_tag=index)


def contains(u: BoxUncertainty, s: Scenario) -> bool:
    """Membership test ``dbar - theta*dhat <= d <= dbar + theta*dhat`` elementwise.

    Bounds are formed with the same expressions as :func:`worst_case_weights`
    so the extreme points themselves always test as members.
    """
    if s.d.shape != u.model.dbar.shape:
        raise ValueError(f"shape mismatch: scenario {s.d.shape} vs model {u.model.dbar.shape}")
    lo = u.model.dbar - u.theta * u.model.dhat
    hi = u.model.dbar + u.theta * u.model.dhat
    return bool(np.all(s.d >= lo) and np.all(s.d <= hi))


def scenario_to_csv(s: Scenario) -> str:
    """One row per ordered arc: ``i,j,d`` (full precision, for external replay)."""
    buf = io.StringIO()
    buf.write("i,j,d\n")
    n = s.d.shape[0]
    for i in range(n):
        for j in range(n):
            if i != j:
                buf.write(f"{i},{j},{float(s.d[i, j])!r}\n")
    return buf.getvalue()


def scenario_from_csv(text: str, n_nodes: int, seed_tag: int = -1) -> Scenario:
    lines = text.strip().splitlines()
    if not lines or lines[0] != "i,j,d":
        raise ValueError("expected header 'i,j,d'")
    d = np.zeros((n_nodes, n_nodes))
    for line in lines[1:]:
        i_s, j_s, v_s = line.split(",")
        d[int(i_s), int(j_s)] = float(v_s)
    return Scenario(d=d, seed_tag=seed_tag)
