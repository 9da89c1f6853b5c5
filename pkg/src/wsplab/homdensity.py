"""Homomorphism counts and densities of small motifs in graphs and
graphons; the convergence diagnostic for graphon-sampled sequences.

A motif is a simple unweighted graph on at most six nodes. The count
sums, over every map from motif nodes to target nodes, the product of
target weights along motif edges; self-loop weights of the target
participate whenever a map sends adjacent motif nodes to one node.
Densities divide by the number of maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphon import Graph, Graphon
from .sampling import rng_stream

__all__ = [
    "Motif",
    "EDGE",
    "PATH2",
    "TRIANGLE",
    "hom_count",
    "hom_density_graph",
    "hom_density_graphon",
    "DensityEstimate",
    "builtin_motif",
]

MAX_MOTIF_NODES = 6
MAX_MAPS = 10**8

_SUBSCRIPTS = "abcdef"


@dataclass(frozen=True)
class Motif:
    nodes: int
    edges: tuple

    def __post_init__(self):
        if not 1 <= self.nodes <= MAX_MOTIF_NODES:
            raise ValueError(f"motifs may have 1..{MAX_MOTIF_NODES} nodes")
        canon = []
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError("motifs are simple: no self-loops")
            if not (0 <= i < self.nodes and 0 <= j < self.nodes):
                raise ValueError("edge endpoint out of range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError("motifs are simple: no repeated edges")
            seen.add(key)
            canon.append(key)
        object.__setattr__(self, "edges", tuple(canon))

    @classmethod
    def from_json(cls, obj: dict) -> "Motif":
        return cls(int(obj["nodes"]), tuple((int(i), int(j)) for i, j in obj["edges"]))


EDGE = Motif(2, ((0, 1),))
PATH2 = Motif(3, ((0, 1), (1, 2)))
TRIANGLE = Motif(3, ((0, 1), (1, 2), (2, 0)))

_BUILTIN_MOTIFS = {"edge": EDGE, "path2": PATH2, "triangle": TRIANGLE}


def builtin_motif(name: str) -> Motif:
    if name in _BUILTIN_MOTIFS:
        return _BUILTIN_MOTIFS[name]
    with open(name) as f:
        return Motif.from_json(json.load(f))


def _map_sum(motif: Motif, pair_weight: np.ndarray,
             node_weight: np.ndarray | None = None) -> float:
    """Sum over all node maps of prod(edge weights) * prod(node weights).

    Full enumeration, vectorized as a tensor contraction with one index
    per motif node; the map count n^nodes is capped to guard blow-up.
    """
    n = pair_weight.shape[0]
    if float(n) ** motif.nodes > MAX_MAPS:
        raise ValueError(
            f"{n}^{motif.nodes} maps exceed the enumeration cap {MAX_MAPS:.0e}")
    subs, operands = [], []
    for i, j in motif.edges:
        subs.append(_SUBSCRIPTS[i] + _SUBSCRIPTS[j])
        operands.append(pair_weight)
    for i in range(motif.nodes):
        subs.append(_SUBSCRIPTS[i])
        operands.append(node_weight if node_weight is not None else np.ones(n))
    expr = ",".join(subs) + "->"
    return float(np.einsum(expr, *operands, optimize=True))


def hom_count(motif: Motif, g: Graph) -> float:
    """Weighted number of adjacency-preserving maps from the motif."""
    return _map_sum(motif, g.gso)


def hom_density_graph(motif: Motif, g: Graph) -> float:
    """hom count over n^nodes: the chance a uniform random map preserves
    adjacency (weighted)."""
    return hom_count(motif, g) / float(g.n) ** motif.nodes


@dataclass(frozen=True)
class DensityEstimate:
    value: float
    stderr: float
    exact: bool


def _exact_step_density(motif: Motif, w: Graphon) -> float:
    widths = w.block_widths
    return _map_sum(motif, w.values, node_weight=widths)


def hom_density_graphon(motif: Motif, w: Graphon, mc_samples: int = 100_000,
                        seed: int = 0, method: str = "auto") -> DensityEstimate:
    """Motif density in a kernel: the integral of edge-weight products.

    Constant kernels use the closed form p^(#edges); step kernels use an
    exact block sum; anything else (or method="mc") falls back to Monte
    Carlo with a reported standard error.
    """
    if method not in ("auto", "mc", "exact"):
        raise ValueError(f"unknown method {method!r}")
    if method != "mc":
        if w.kind == "analytic" and w.name == "constant":
            return DensityEstimate(w.params["p"] ** len(motif.edges), 0.0, True)
        if w.kind == "step":
            return DensityEstimate(_exact_step_density(motif, w), 0.0, True)
        if method == "exact":
            raise ValueError("exact densities exist for constant and step kernels only")
    if mc_samples < 10**3:
        raise ValueError("need at least 1000 Monte Carlo samples")
    rng = rng_stream(seed, 0, "homdensity")
    u = rng.uniform(size=(mc_samples, motif.nodes))
    prod = np.ones(mc_samples)
    for i, j in motif.edges:
        prod *= w.evaluate(u[:, i], u[:, j])
    return DensityEstimate(float(prod.mean()),
                           float(prod.std(ddof=1) / np.sqrt(mc_samples)), False)
