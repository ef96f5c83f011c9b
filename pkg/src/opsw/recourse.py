"""Exact abort-and-return recourse evaluation for a fixed first-stage path.

A path is a depot-rooted sequence of distinct scoring nodes; the vehicle plans
to visit them in order and return to the depot.  When realized arc weights
threaten the length budget, the recourse aborts the path at some node and heads
straight back.  Two information regimes are supported:

* forward checking — weights revealed one arc ahead; abort at the first node
  whose visit (plus expected return) no longer fits,
* backward checking — all on-path weights known at departure; keep the longest
  prefix whose realized length plus expected return still fits.

The return leg is always costed at the expected weight ``dbar[v, 0]``: a safety
stock outside the budget absorbs return-leg deviations, so the return arc is
never re-sampled.  Ties (length exactly equal to the budget) count as feasible.

Two deliberately naive executors (`step_executor`, `brute_force_cut`) serve as
independent oracles for the checking algorithms.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

Path = Sequence[int]


class RecourseOutcome(NamedTuple):
    """``last_reached`` counts path positions (0 = depot only); loss is the
    score forfeited past the cut; ``objective = -loss``."""

    last_reached: int
    loss: float
    objective: float


def _outcome(last_reached: int, loss: float) -> RecourseOutcome:
    return RecourseOutcome(last_reached, loss, -loss)


def _suffix_loss(path: Path, scores: np.ndarray, first_lost: int) -> float:
    """Sum of scores of path positions >= first_lost (1-based positions)."""
    total = 0.0
    for v in path[first_lost - 1 :]:
        total += scores[v]
    return total


def sequential_recourse(
    path: Path, d: np.ndarray, dbar: np.ndarray, scores: np.ndarray, L: float
) -> RecourseOutcome:
    """Forward checking: abort at the first position k whose realized prefix
    plus expected return exceeds the budget; positions k..n are lost."""
    length = 0.0
    prev = 0
    for k, v in enumerate(path, start=1):
        length += d[prev, v]
        if length + dbar[v, 0] > L:
            return _outcome(k - 1, _suffix_loss(path, scores, k))
        prev = v
    return _outcome(len(path), 0.0)


def concurrent_recourse(
    path: Path, d: np.ndarray, dbar: np.ndarray, scores: np.ndarray, L: float
) -> RecourseOutcome:
    """Backward checking: keep the largest prefix k whose realized length plus
    expected return fits; if none fits, return straight from the depot."""
    n = len(path)
    prefix = [0.0] * (n + 1)
    prev = 0
    for k, v in enumerate(path, start=1):
        prefix[k] = prefix[k - 1] + d[prev, v]
        prev = v
    for k in range(n, 0, -1):
        if prefix[k] + dbar[path[k - 1], 0] <= L:
            return _outcome(k, _suffix_loss(path, scores, k + 1))
    return _outcome(0, _suffix_loss(path, scores, 1))


def brute_force_cut(
    path: Path, d: np.ndarray, dbar: np.ndarray, scores: np.ndarray, L: float
) -> RecourseOutcome:
    """Enumerate every cut position and return the feasible one of minimum loss.

    Definitional optimum of backward checking restricted to suffix
    cancellations; ties in loss resolve to the latest cut.
    """
    n = len(path)
    prefix = [0.0] * (n + 1)
    prev = 0
    for k, v in enumerate(path, start=1):
        prefix[k] = prefix[k - 1] + d[prev, v]
        prev = v

    best_k = 0
    best_loss = _suffix_loss(path, scores, 1)  # cut at the depot, always feasible
    for k in range(1, n + 1):
        if prefix[k] + dbar[path[k - 1], 0] <= L:
            loss = _suffix_loss(path, scores, k + 1)
            if loss < best_loss or (loss == best_loss and k > best_k):
                best_k, best_loss = k, loss
    return _outcome(best_k, best_loss)


def step_executor(
    path: Path, d: np.ndarray, dbar: np.ndarray, scores: np.ndarray, L: float
) -> RecourseOutcome:
    """Node-by-node simulation of forward checking: before each move, check that
    the consumed length plus the next arc plus the expected return fits."""
    consumed = 0.0
    prev = 0
    for k, v in enumerate(path, start=1):
        if consumed + d[prev, v] + dbar[v, 0] > L:
            return _outcome(k - 1, _suffix_loss(path, scores, k))
        consumed += d[prev, v]
        prev = v
    return _outcome(len(path), 0.0)
