"""Graphons, graphon signals, graphs, and their L2 geometry.

A graphon is a bounded symmetric kernel W: [0,1]^2 -> [0,1]. It is
represented either analytically (a vectorized callable from a small
built-in family) or as a step function on a partition of [0,1]. Graphon
signals are functions on [0,1] with the same two representations.
Graphs carry node labels in [0,1] and a dense symmetric shift matrix.

Every object is immutable after construction and every operation is
pure, so all of them are safe to use from concurrent workers.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "Graphon",
    "GraphonSignal",
    "Graph",
    "constant_graphon",
    "sbm_graphon",
    "product_graphon",
    "exp_graphon",
    "mean_graphon",
    "step_graphon",
    "constant_signal",
    "ramp_signal",
    "sine_signal",
    "step_signal",
    "induced_graphon",
    "induced_graphon_signal",
    "graphon_l2_distance",
    "signal_l2_distance",
    "max_degree",
    "graphon_to_json",
    "graphon_from_json",
    "signal_to_json",
    "signal_from_json",
    "save_graph_csv",
    "load_graph_csv",
    "save_labels",
    "load_labels",
]

# Resolution used for value/symmetry checks of analytic kernels and as the
# default quadrature grid (midpoint rule, per axis) for L2 distances.
_CHECK_GRID = 256
DEFAULT_QUADRATURE = 2048


def _as_readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def _step_index(breakpoints: np.ndarray, u) -> np.ndarray:
    """Cell index of u in a partition: u in [b_i, b_{i+1}) maps to i.

    The last cell is closed on the right so u = 1 belongs to it.
    """
    idx = np.searchsorted(breakpoints, u, side="right") - 1
    return np.clip(idx, 0, len(breakpoints) - 2)


def _check_breakpoints(breakpoints: np.ndarray) -> None:
    if breakpoints.ndim != 1 or len(breakpoints) < 2:
        raise ValueError("breakpoints must be a 1-D array with at least two entries")
    if breakpoints[0] != 0.0 or breakpoints[-1] != 1.0:
        raise ValueError("breakpoints must start at 0 and end at 1")
    if np.any(np.diff(breakpoints) <= 0):
        raise ValueError("breakpoints must be strictly increasing")


@dataclass(frozen=True, eq=False)
class Graphon:
    """Bounded symmetric kernel on [0,1]^2.

    kind is either "analytic" (fn is a vectorized callable) or "step"
    (breakpoints plus a symmetric value matrix). `lipschitz` is the
    kernel's Lipschitz constant under the |du|+|dv| metric, or None when
    unknown (step functions are never Lipschitz).
    """

    kind: str
    fn: Callable | None = None
    breakpoints: np.ndarray | None = None
    values: np.ndarray | None = None
    lipschitz: float | None = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "analytic":
            if self.fn is None:
                raise ValueError("analytic graphon requires a kernel callable")
            u = (np.arange(_CHECK_GRID) + 0.5) / _CHECK_GRID
            vals = np.asarray(self.fn(u[:, None], u[None, :]), dtype=float)
            if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
                raise ValueError("kernel values leave [0, 1] on the check grid")
            if not np.allclose(vals, vals.T, atol=1e-10):
                raise ValueError("kernel is not symmetric on the check grid")
        elif self.kind == "step":
            bp = _as_readonly(self.breakpoints)
            vals = _as_readonly(self.values)
            _check_breakpoints(bp)
            b = len(bp) - 1
            if vals.shape != (b, b):
                raise ValueError("value matrix shape must match the partition")
            if not np.array_equal(vals, vals.T):
                raise ValueError("step graphon value matrix must be symmetric")
            if vals.min() < 0.0 or vals.max() > 1.0:
                raise ValueError("step graphon values must lie in [0, 1]")
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown graphon kind {self.kind!r}")

    def evaluate(self, u, v) -> np.ndarray:
        """Kernel values W(u, v), broadcasting over array inputs."""
        if self.kind == "analytic":
            return np.asarray(self.fn(np.asarray(u, float), np.asarray(v, float)), float)
        iu = _step_index(self.breakpoints, np.asarray(u, float))
        iv = _step_index(self.breakpoints, np.asarray(v, float))
        return self.values[iu, iv]

    @property
    def block_widths(self) -> np.ndarray:
        if self.kind != "step":
            raise ValueError("block widths are defined for step graphons only")
        return np.diff(self.breakpoints)


@dataclass(frozen=True, eq=False)
class GraphonSignal:
    """Function X in L2([0,1]): analytic callable or step function."""

    kind: str
    fn: Callable | None = None
    breakpoints: np.ndarray | None = None
    values: np.ndarray | None = None
    lipschitz: float | None = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "analytic":
            if self.fn is None:
                raise ValueError("analytic signal requires a callable")
        elif self.kind == "step":
            bp = _as_readonly(self.breakpoints)
            vals = _as_readonly(self.values)
            _check_breakpoints(bp)
            if vals.shape != (len(bp) - 1,):
                raise ValueError("value vector length must match the partition")
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "values", vals)
        else:
            raise ValueError(f"unknown signal kind {self.kind!r}")

    def evaluate(self, u) -> np.ndarray:
        if self.kind == "analytic":
            return np.asarray(self.fn(np.asarray(u, float)), float)
        return self.values[_step_index(self.breakpoints, np.asarray(u, float))]

    def norm(self, m: int = DEFAULT_QUADRATURE) -> float:
        """L2([0,1]) norm; exact for step signals, midpoint quadrature
        else. Computed on first use and cached per resolution."""
        cache = self.__dict__.setdefault("_norm_cache", {})
        key = 0 if self.kind == "step" else m
        if key not in cache:
            if self.kind == "step":
                widths = np.diff(self.breakpoints)
                cache[key] = float(np.sqrt(np.sum(widths * self.values**2)))
            else:
                u = (np.arange(m) + 0.5) / m
                cache[key] = float(np.sqrt(np.mean(self.evaluate(u) ** 2)))
        return cache[key]


class Graph:
    """Graph with node labels in [0,1] and a dense symmetric shift matrix.

    Labels are sorted ascending at construction; the same permutation is
    applied to the matrix, which is harmless because every operator here
    is equivariant to node relabeling. When labels are not supplied the
    regular grid i/n is used.
    """

    def __init__(self, gso, labels=None, provenance: str = "external"):
        S = np.array(gso, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("shift matrix must be square")
        n = S.shape[0]
        if not np.allclose(S, S.T, atol=1e-12):
            raise ValueError("shift matrix must be symmetric")
        S = (S + S.T) / 2.0
        if labels is None:
            labels = np.arange(n) / n
        labels = np.asarray(labels, dtype=float)
        if labels.shape != (n,):
            raise ValueError("need one label per node")
        if labels.min() < 0.0 or labels.max() > 1.0:
            raise ValueError("labels must lie in [0, 1]")
        order = np.argsort(labels, kind="stable")
        labels = labels[order]
        S = S[np.ix_(order, order)]
        if provenance in ("template", "weighted", "stochastic"):
            if S.min() < -1e-12 or S.max() > 1 + 1e-12:
                raise ValueError("graphon-sampled graphs must have entries in [0, 1]")
        self.gso = _as_readonly(S)
        self.labels = _as_readonly(labels)
        self.provenance = provenance

    @property
    def n(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"Graph(n={self.n}, provenance={self.provenance!r})"


# ---------------------------------------------------------------------------
# Built-in kernel family
# ---------------------------------------------------------------------------

def constant_graphon(p: float) -> Graphon:
    """Erdos-Renyi kernel W(u,v) = p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("constant level must lie in [0, 1]")
    return Graphon("analytic", fn=lambda u, v: np.full(np.broadcast(u, v).shape, float(p)),
                   lipschitz=0.0, name="constant", params={"p": float(p)})


def sbm_graphon(breakpoints, probs) -> Graphon:
    """k-block stochastic block model kernel, stored exactly as a step graphon."""
    return Graphon("step", breakpoints=np.asarray(breakpoints, float),
                   values=np.asarray(probs, float), lipschitz=None,
                   name="sbm", params={"breakpoints": list(map(float, breakpoints)),
                                       "probs": np.asarray(probs, float).tolist()})


def product_graphon() -> Graphon:
    """W(u,v) = u v; rank one with a non-constant eigenfunction."""
    return Graphon("analytic", fn=lambda u, v: u * v, lipschitz=1.0, name="product")


def exp_graphon(gamma: float) -> Graphon:
    """W(u,v) = exp(-gamma |u - v|); infinite-rank kernel, values in (0, 1]."""
    g = float(gamma)
    if g < 0:
        raise ValueError("gamma must be nonnegative")
    return Graphon("analytic", fn=lambda u, v: np.exp(-g * np.abs(u - v)),
                   lipschitz=g, name="exp", params={"gamma": g})


def mean_graphon() -> Graphon:
    """W(u,v) = (u + v) / 2."""
    return Graphon("analytic", fn=lambda u, v: 0.5 * (u + v) * np.ones(np.broadcast(u, v).shape),
                   lipschitz=0.5, name="mean")


def step_graphon(breakpoints, values, lipschitz=None) -> Graphon:
    return Graphon("step", breakpoints=np.asarray(breakpoints, float),
                   values=np.asarray(values, float), lipschitz=lipschitz, name="step")


def constant_signal(c: float) -> GraphonSignal:
    return GraphonSignal("analytic", fn=lambda u: np.full(np.shape(u), float(c)),
                         lipschitz=0.0, name="constant", params={"c": float(c)})


def ramp_signal() -> GraphonSignal:
    """X(u) = u."""
    return GraphonSignal("analytic", fn=lambda u: np.asarray(u, float),
                         lipschitz=1.0, name="ramp")


def sine_signal(amplitude: float = 1.0, frequency: float = 1.0) -> GraphonSignal:
    a, f = float(amplitude), float(frequency)
    return GraphonSignal("analytic", fn=lambda u: a * np.sin(2 * np.pi * f * np.asarray(u, float)),
                         lipschitz=abs(a) * 2 * np.pi * f, name="sine",
                         params={"amplitude": a, "frequency": f})


def step_signal(breakpoints, values, lipschitz=None) -> GraphonSignal:
    return GraphonSignal("step", breakpoints=np.asarray(breakpoints, float),
                         values=np.asarray(values, float), lipschitz=lipschitz, name="step")


_BUILTIN_GRAPHONS = {
    "constant": lambda *a: constant_graphon(float(a[0]) if a else 0.4),
    "product": lambda *a: product_graphon(),
    "uv": lambda *a: product_graphon(),
    "expdiff": lambda *a: exp_graphon(float(a[0]) if a else 2.0),
    "mean": lambda *a: mean_graphon(),
    "sbm": lambda *a: sbm_graphon([0.0, 0.5, 1.0], [[0.8, 0.2], [0.2, 0.6]]),
}


def builtin_graphon(spec: str) -> Graphon:
    """Parse shorthand like "constant:0.4", "uv", "expdiff:2.0", "sbm"."""
    parts = spec.split(":")
    name, args = parts[0], parts[1:]
    if name not in _BUILTIN_GRAPHONS:
        raise ValueError(f"unknown builtin graphon {name!r}; have {sorted(_BUILTIN_GRAPHONS)}")
    return _BUILTIN_GRAPHONS[name](*args)


_BUILTIN_SIGNALS = {
    "constant": lambda *a: constant_signal(float(a[0]) if a else 1.0),
    "ramp": lambda *a: ramp_signal(),
    "sine": lambda *a: sine_signal(*(float(x) for x in a)),
}


def builtin_signal(spec: str) -> GraphonSignal:
    parts = spec.split(":")
    name, args = parts[0], parts[1:]
    if name not in _BUILTIN_SIGNALS:
        raise ValueError(f"unknown builtin signal {name!r}; have {sorted(_BUILTIN_SIGNALS)}")
    return _BUILTIN_SIGNALS[name](*args)


# ---------------------------------------------------------------------------
# Induced objects
# ---------------------------------------------------------------------------

def _induced_breakpoints(labels: np.ndarray) -> np.ndarray:
    """Contiguous intervals owned by sorted labels: [0,u_2), ..., [u_n,1]."""
    bp = np.concatenate(([0.0], labels[1:], [1.0]))
    if np.any(np.diff(bp) <= 0):
        raise ValueError("duplicate node labels produce an empty interval")
    return bp


def induced_graphon(g: Graph) -> Graphon:
    """Step graphon taking the value [S]_ij on the label interval I_i x I_j."""
    return step_graphon(_induced_breakpoints(g.labels), g.gso)


def induced_graphon_signal(x, g: Graph) -> GraphonSignal:
    """Step signal taking the value [x]_i on the label interval I_i."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != g.n:
        raise ValueError(f"signal length {len(x)} does not match graph size {g.n}")
    return step_signal(_induced_breakpoints(g.labels), x)


# ---------------------------------------------------------------------------
# L2 geometry
# ---------------------------------------------------------------------------

def _merged_cells(b1: np.ndarray, b2: np.ndarray):
    merged = np.union1d(b1, b2)
    widths = np.diff(merged)
    mids = (merged[:-1] + merged[1:]) / 2.0
    return widths, _step_index(b1, mids), _step_index(b2, mids)


def graphon_l2_distance(a: Graphon, b: Graphon, m: int = DEFAULT_QUADRATURE) -> float:
    """L2([0,1]^2) distance between two graphons.

    Step-vs-step pairs are computed exactly on the merged partition; any
    pair involving an analytic kernel uses the composite midpoint rule on
    an m x m grid.
    """
    if a.kind == "step" and b.kind == "step":
        widths, ia, ib = _merged_cells(a.breakpoints, b.breakpoints)
        diff = a.values[np.ix_(ia, ia)] - b.values[np.ix_(ib, ib)]
        return float(np.sqrt(widths @ diff**2 @ widths))
    u = (np.arange(m) + 0.5) / m
    diff = a.evaluate(u[:, None], u[None, :]) - b.evaluate(u[:, None], u[None, :])
    return float(np.sqrt(np.mean(diff**2)))


def signal_l2_distance(a: GraphonSignal, b: GraphonSignal, m: int = DEFAULT_QUADRATURE) -> float:
    """L2([0,1]) distance between two graphon signals (1-D analogue)."""
    if a.kind == "step" and b.kind == "step":
        widths, ia, ib = _merged_cells(a.breakpoints, b.breakpoints)
        diff = a.values[ia] - b.values[ib]
        return float(np.sqrt(np.sum(widths * diff**2)))
    u = (np.arange(m) + 0.5) / m
    diff = a.evaluate(u) - b.evaluate(u)
    return float(np.sqrt(np.mean(diff**2)))


def max_degree(w: Graphon, m: int = DEFAULT_QUADRATURE) -> float:
    """max_u of the degree function d(u) = integral of W(u, .).

    Exact block arithmetic for step graphons, midpoint quadrature else.
    """
    if w.kind == "step":
        return float(np.max(w.values @ w.block_widths))
    u = (np.arange(m) + 0.5) / m
    degrees = w.evaluate(u[:, None], u[None, :]).mean(axis=1)
    return float(np.max(degrees))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def graphon_to_json(w: Graphon) -> dict:
    if w.kind == "step":
        return {"breakpoints": w.breakpoints.tolist(), "values": w.values.tolist(),
                **({"lipschitz": w.lipschitz} if w.lipschitz is not None else {})}
    return {"kind": w.name, **w.params}


def graphon_from_json(obj: dict) -> Graphon:
    if "breakpoints" in obj and "values" in obj and "kind" not in obj:
        return step_graphon(obj["breakpoints"], obj["values"], obj.get("lipschitz"))
    kind = obj.get("kind")
    if kind == "constant":
        return constant_graphon(obj.get("p", 0.4))
    if kind in ("product", "uv"):
        return product_graphon()
    if kind in ("exp", "expdiff"):
        return exp_graphon(obj.get("gamma", 2.0))
    if kind == "mean":
        return mean_graphon()
    if kind == "sbm":
        return sbm_graphon(obj["breakpoints"], obj["probs"])
    raise ValueError(f"cannot parse graphon JSON: {obj!r}")


def signal_to_json(x: GraphonSignal) -> dict:
    if x.kind == "step":
        return {"breakpoints": x.breakpoints.tolist(), "values": x.values.tolist(),
                **({"lipschitz": x.lipschitz} if x.lipschitz is not None else {})}
    return {"kind": x.name, **x.params}


def signal_from_json(obj: dict) -> GraphonSignal:
    if "breakpoints" in obj and "values" in obj and "kind" not in obj:
        return step_signal(obj["breakpoints"], obj["values"], obj.get("lipschitz"))
    kind = obj.get("kind")
    if kind == "constant":
        return constant_signal(obj.get("c", 1.0))
    if kind == "ramp":
        return ramp_signal()
    if kind == "sine":
        return sine_signal(obj.get("amplitude", 1.0), obj.get("frequency", 1.0))
    raise ValueError(f"cannot parse signal JSON: {obj!r}")


def save_graph_csv(g: Graph, path) -> None:
    """Edge-list CSV with header "i,j,w", upper triangle incl. diagonal."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["i", "j", "w"])
        iu, ju = np.triu_indices(g.n)
        for i, j in zip(iu, ju):
            w = g.gso[i, j]
            if w != 0.0:
                writer.writerow([int(i), int(j), repr(float(w))])


def load_graph_csv(path, labels_path=None, n: int | None = None,
                   provenance: str = "external") -> Graph:
    """Load a graph from an "i,j,w" edge list, mirroring entries.

    Size is taken from the label file when given, else from --n, else
    inferred as one plus the largest node index.
    """
    entries = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["i", "j", "w"]:
            raise ValueError(f"{path}: expected header 'i,j,w'")
        for row in reader:
            if not row:
                continue
            entries.append((int(row[0]), int(row[1]), float(row[2])))
    labels = load_labels(labels_path) if labels_path else None
    if labels is not None:
        n = len(labels)
    elif n is None:
        if not entries:
            raise ValueError(f"{path}: empty edge list and no size information")
        n = 1 + max(max(i, j) for i, j, _ in entries)
    S = np.zeros((n, n))
    for i, j, w in entries:
        S[i, j] = w
        S[j, i] = w
    return Graph(S, labels=labels, provenance=provenance)


def save_labels(g: Graph, path) -> None:
    with open(path, "w") as f:
        for u in g.labels:
            f.write(repr(float(u)) + "\n")


def load_labels(path) -> np.ndarray:
    with open(path) as f:
        return np.array([float(line) for line in f if line.strip()])


def load_json(path) -> dict:
    with open(path) as f:
        return json.load(f)
