"""Graph and signal instantiation from graphons with seeded randomness.

Randomness is organized as counter-based streams derived from
(master seed, trial index, purpose tag), so label draws and edge draws
are independent and trials can run in any order, in parallel, and still
reproduce bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .graphon import Graph, Graphon, GraphonSignal

__all__ = [
    "SampleSpec",
    "rng_stream",
    "sample_template",
    "sample_weighted",
    "sample_stochastic",
    "bernoulli_from_weighted",
    "sample_graph_signal",
    "sample_graph",
]


@dataclass(frozen=True)
class SampleSpec:
    """What to draw: size, sampling mode, master seed, and trial index."""

    n: int
    mode: str = "template"  # template | weighted | stochastic
    seed: int = 0
    trial: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample size must be at least 1")
        if self.mode not in ("template", "weighted", "stochastic"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")


def rng_stream(seed: int, trial: int = 0, purpose: str = "") -> np.random.Generator:
    """Independent generator for (seed, trial, purpose).

    The purpose tag is hashed with a keyed-stable digest (not Python's
    salted hash) so streams are reproducible across processes.
    """
    tag = int.from_bytes(hashlib.blake2s(purpose.encode(), digest_size=4).digest(), "big")
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                                spawn_key=(int(trial) & (2**32 - 1), tag))
    return np.random.default_rng(ss)


def sample_template(w: Graphon, n: int) -> Graph:
    """Deterministic graph on the regular labels u_i = (i-1)/n."""
    if n < 1:
        raise ValueError("need at least one node")
    labels = np.arange(n) / n
    S = w.evaluate(labels[:, None], labels[None, :])
    return Graph(S, labels=labels, provenance="template")


def sample_weighted(w: Graphon, n: int, seed: int, trial: int = 0) -> Graph:
    """Kernel-weighted graph on sorted i.i.d. uniform labels."""
    if n < 1:
        raise ValueError("need at least one node")
    labels = np.sort(rng_stream(seed, trial, "labels").uniform(size=n))
    S = w.evaluate(labels[:, None], labels[None, :])
    return Graph(S, labels=labels, provenance="weighted")


def bernoulli_from_weighted(g: Graph, seed: int, trial: int = 0,
                            self_loops: bool = True) -> Graph:
    """Unweighted graph with one Bernoulli([S]_ij) draw per unordered pair."""
    S = g.gso
    if S.min() < 0.0 or S.max() > 1.0:
        raise ValueError("weighted entries must lie in [0, 1] to be edge probabilities")
    n = g.n
    rng = rng_stream(seed, trial, "edges")
    iu, ju = np.triu_indices(n)
    draws = (rng.uniform(size=len(iu)) < S[iu, ju]).astype(float)
    B = np.zeros((n, n))
    B[iu, ju] = draws
    B[ju, iu] = draws
    if not self_loops:
        np.fill_diagonal(B, 0.0)
    return Graph(B, labels=g.labels, provenance="stochastic")


def sample_stochastic(w: Graphon, n: int, seed: int, trial: int = 0,
                      self_loops: bool = True) -> Graph:
    """0/1 graph: uniform labels, then Bernoulli(W(u_i, u_j)) edges.

    Implemented as the two-stage route (weighted graph, then entrywise
    Bernoulli), which is the same distribution and shares the label/edge
    stream split.
    """
    return bernoulli_from_weighted(sample_weighted(w, n, seed, trial),
                                   seed, trial, self_loops=self_loops)


def sample_graph_signal(x: GraphonSignal, g: Graph) -> np.ndarray:
    """Graph signal [x]_i = X(u_i); covers the regular-grid rule too."""
    return np.asarray(x.evaluate(g.labels), dtype=float)


def sample_graph(w: Graphon, spec: SampleSpec, self_loops: bool = True) -> Graph:
    if spec.mode == "template":
        return sample_template(w, spec.n)
    if spec.mode == "weighted":
        return sample_weighted(w, spec.n, spec.seed, spec.trial)
    return sample_stochastic(w, spec.n, spec.seed, spec.trial, self_loops=self_loops)
