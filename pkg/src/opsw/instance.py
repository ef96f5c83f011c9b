"""Instance handling: benchmark parsing, Euclidean expected weights, deviation scaling.

An :class:`Instance` is a set of scored nodes plus a depot (always node 0) and a
length budget.  A :class:`WeightModel` carries the expected arc weights ``dbar``
and the maximum deviations ``dhat``; a realized weight for arc (i, j) lives on
the interval ``[dbar_ij - dhat_ij, dbar_ij + dhat_ij]``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be parsed."""


@dataclass(frozen=True)
class Instance:
    """Node set with a depot and a length budget.

    ``nodes[k]`` is ``(x, y, score)``; node 0 is the depot and carries score 0.
    """

    nodes: tuple[tuple[float, float, float], ...]
    length_limit: float
    depot_index: int = 0

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("instance needs at least the depot node")
        if self.depot_index != 0:
            raise ValueError("depot must be node 0")
        if self.length_limit <= 0:
            raise ValueError(f"length limit must be positive, got {self.length_limit}")
        if self.nodes[0][2] != 0:
            raise ValueError("depot score must be 0")
        for k, (_, _, s) in enumerate(self.nodes):
            if s < 0:
                raise ValueError(f"node {k} has negative score {s}")

    @property
    def n_nodes(self) -> int:
        """Number of nodes including the depot."""
        return len(self.nodes)

    def coords(self) -> np.ndarray:
        return np.array([(x, y) for x, y, _ in self.nodes], dtype=float)

    def scores(self) -> np.ndarray:
        return np.array([s for _, _, s in self.nodes], dtype=float)

    def total_score(self) -> float:
        return float(sum(s for _, _, s in self.nodes))

    def subset(self, n_nodes: int, length_limit: float | None = None) -> "Instance":
        """First ``n_nodes`` nodes (depot included), optionally with a new budget."""
        if not 1 <= n_nodes <= self.n_nodes:
            raise ValueError(f"cannot take {n_nodes} nodes from {self.n_nodes}")
        limit = self.length_limit if length_limit is None else length_limit
        return Instance(self.nodes[:n_nodes], limit)


@dataclass(frozen=True)
class WeightModel:
    """Expected weights and maximum deviations over all ordered node pairs."""

    dbar: np.ndarray
    dhat: np.ndarray

    def __post_init__(self):
        dbar = np.asarray(self.dbar, dtype=float)
        dhat = np.asarray(self.dhat, dtype=float)
        object.__setattr__(self, "dbar", dbar)
        object.__setattr__(self, "dhat", dhat)
        if dbar.ndim != 2 or dbar.shape[0] != dbar.shape[1]:
            raise ValueError("dbar must be a square matrix")
        if dhat.shape != dbar.shape:
            raise ValueError("dhat shape must match dbar")
        if np.any(np.diag(dbar) != 0) or np.any(np.diag(dhat) != 0):
            raise ValueError("diagonal weights must be 0")
        if np.any(dhat < 0) or np.any(dhat > dbar):
            raise ValueError("need 0 <= dhat <= dbar elementwise")

    @property
    def n_nodes(self) -> int:
        return self.dbar.shape[0]


def parse_tsiligirides(text: str, length_limit: float) -> Instance:
    """Parse a benchmark file of whitespace-separated ``x y score`` triples.

    Line 1 is the start point (kept as the depot, score forced to 0), line 2 is
    the end point (discarded), remaining lines are scoring nodes in file order.
    ``#``-prefixed lines and blank lines are skipped.
    """
    rows: list[tuple[float, float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InstanceFormatError(
                f"line {lineno}: expected 3 fields 'x y score', got {len(parts)}"
            )
        try:
            x, y, s = (float(p) for p in parts)
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
        rows.append((x, y, s))
    if len(rows) < 2:
        raise InstanceFormatError("file must contain at least a start and an end point")

    start = rows[0]
    if start[2] != 0:
        warnings.warn(f"depot score {start[2]} forced to 0", stacklevel=2)
    depot = (start[0], start[1], 0.0)
    # rows[1] is the end point, which is dropped.
    return Instance((depot, *rows[2:]), length_limit)


def euclidean_weights(inst: Instance) -> WeightModel:
    """Expected weights from pairwise Euclidean distances; deviations all zero."""
    xy = inst.coords()
    diff = xy[:, None, :] - xy[None, :, :]
    dbar = np.hypot(diff[..., 0], diff[..., 1])
    return WeightModel(dbar=dbar, dhat=np.zeros_like(dbar))


def apply_deviation(model: WeightModel, alpha: float) -> WeightModel:
    """Set deviations to ``alpha * dbar``; alpha > 1 would allow negative weights."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"deviation fraction must be in [0, 1], got {alpha}")
    return WeightModel(dbar=model.dbar.copy(), dhat=alpha * model.dbar)


def save_instance(inst: Instance, model: WeightModel | None = None) -> str:
    """Canonical JSON text form carrying nodes, the budget, and optional matrices."""
    payload: dict = {
        "length_limit": inst.length_limit,
        "nodes": [list(n) for n in inst.nodes],
    }
    if model is not None:
        payload["dbar"] = model.dbar.tolist()
        payload["dhat"] = model.dhat.tolist()
    return json.dumps(payload, sort_keys=True, indent=1)


def load_instance(text: str) -> tuple[Instance, WeightModel | None]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"bad instance JSON: {exc}") from None
    try:
        nodes = tuple((float(x), float(y), float(s)) for x, y, s in payload["nodes"])
        inst = Instance(nodes, float(payload["length_limit"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad instance payload: {exc}") from None
    model = None
    if "dbar" in payload:
        dhat = payload.get("dhat")
        dbar = np.array(payload["dbar"], dtype=float)
        model = WeightModel(dbar=dbar, dhat=np.array(dhat, dtype=float) if dhat is not None else np.zeros_like(dbar))
    return inst, model


def instance_digest(inst: Instance) -> str:
    """Short stable hash of the node data and budget, for model metadata."""
    import hashlib

    return hashlib.sha256(save_instance(inst).encode()).hexdigest()[:12]
