"""Symmetric eigendecompositions with sign-aware indexing, Fourier
transforms on graphs and graphons, and the band constants used by the
transfer bounds.

Eigenvalues are indexed by nonzero signed integers: strictly positive
values get indices 1, 2, ... in decreasing order, strictly negative
values get -1, -2, ... starting from the most negative, and values
within 1e-10 of zero are appended after the positive block. Kernel
spectra always live on the normalized scale (matrix divided by size),
where a regular-label graph shares the nonzero eigenvalues of the step
kernel it induces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphon import Graph, Graphon, GraphonSignal, step_signal

__all__ = [
    "SpectralDecomposition",
    "GraphonSpectrum",
    "EmptyBandError",
    "eigendecompose",
    "signed_spectrum",
    "graphon_spectrum",
    "step_graphon_spectrum_exact",
    "gft",
    "inverse_gft",
    "wft",
    "c_band_cardinality",
    "c_eigenvalue_margin",
    "eigenvalue_by_index",
]

ZERO_EIGENVALUE_TOL = 1e-10


class EmptyBandError(ValueError):
    """No eigenvalue reaches the band threshold; the margin is undefined."""


def _signed_order(values: np.ndarray):
    """Column permutation and signed indices realizing the sign-aware order."""
    pos = np.flatnonzero(values > ZERO_EIGENVALUE_TOL)
    neg = np.flatnonzero(values < -ZERO_EIGENVALUE_TOL)
    zero = np.flatnonzero(np.abs(values) <= ZERO_EIGENVALUE_TOL)
    pos = pos[np.argsort(-values[pos], kind="stable")]
    zero = zero[np.argsort(-values[zero], kind="stable")]
    neg = neg[np.argsort(values[neg], kind="stable")]
    order = np.concatenate([pos, zero, neg]).astype(int)
    npos = len(pos) + len(zero)
    indices = np.concatenate([np.arange(1, npos + 1), -np.arange(1, len(neg) + 1)]).astype(int)
    return order, indices


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    indices: np.ndarray      # signed indices, aligned with columns
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    scale: str               # "raw" | "normalized"

    def eigenvalue(self, index: int, default: float = 0.0) -> float:
        hits = np.flatnonzero(self.indices == index)
        return float(self.eigenvalues[hits[0]]) if len(hits) else default

    def reconstruction(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def signed_spectrum(values) -> SpectralDecomposition:
    """Index a bare eigenvalue list (no eigenvectors)."""
    values = np.asarray(values, dtype=float)
    order, indices = _signed_order(values)
    return SpectralDecomposition(indices, values[order], None, "normalized")


def _decompose(M: np.ndarray, scale: str, want_vectors: bool = True) -> SpectralDecomposition:
    if want_vectors:
        vals, V = np.linalg.eigh(M)
    else:
        vals, V = np.linalg.eigvalsh(M), None
    order, indices = _signed_order(vals)
    vals = vals[order]
    if V is not None:
        V = V[:, order]
        # Deterministic sign: largest-magnitude component of each vector >= 0.
        flip = V[np.abs(V).argmax(axis=0), np.arange(V.shape[1])] < 0
        V = V * np.where(flip, -1.0, 1.0)
    return SpectralDecomposition(indices, vals, V, scale)


def eigendecompose(g: Graph, scale: str = "raw",
                   want_vectors: bool = True) -> SpectralDecomposition:
    """Full decomposition of the shift matrix (or of S/n when normalized)."""
    if scale not in ("raw", "normalized"):
        raise ValueError(f"unknown scale {scale!r}")
    S = g.gso
    if not np.allclose(S, S.T, atol=1e-10):
        raise ValueError("shift matrix must be symmetric")
    M = S / g.n if scale == "normalized" else S
    return _decompose(M, scale, want_vectors)


@dataclass(frozen=True, eq=False)
class GraphonSpectrum:
    """Spectrum of a kernel via its m-point regular-grid discretization.

    Eigenvalues are those of the size-m grid matrix divided by m (the
    normalized scale). Eigenfunctions are step functions on the uniform
    m-grid, scaled by sqrt(m) so they are orthonormal in L2([0,1]).
    """

    decomposition: SpectralDecomposition
    m: int

    @property
    def indices(self) -> np.ndarray:
        return self.decomposition.indices

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.decomposition.eigenvalues

    def eigenfunction_values(self, index: int) -> np.ndarray:
        hits = np.flatnonzero(self.indices == index)
        if not len(hits):
            raise KeyError(f"no eigenfunction with index {index}")
        return self.decomposition.eigenvectors[:, hits[0]] * np.sqrt(self.m)

    def eigenfunction(self, index: int) -> GraphonSignal:
        bp = np.concatenate([np.arange(self.m) / self.m, [1.0]])
        return step_signal(bp, self.eigenfunction_values(index))


def graphon_spectrum(w: Graphon, m: int = 2048) -> GraphonSpectrum:
    if m < 2:
        raise ValueError("grid must have at least two points")
    grid = np.arange(m) / m
    K = w.evaluate(grid[:, None], grid[None, :]) / m
    return GraphonSpectrum(_decompose(K, "normalized"), m)


def step_graphon_spectrum_exact(w: Graphon) -> SpectralDecomposition:
    """Exact finite-rank spectrum of a step kernel.

    The kernel operator restricted to block-constant functions is
    similar to diag(sqrt(widths)) V diag(sqrt(widths)); its eigenvalues
    are the full nonzero spectrum.
    """
    if w.kind != "step":
        raise ValueError("exact spectra are available for step graphons only")
    r = np.sqrt(w.block_widths)
    core = r[:, None] * w.values * r[None, :]
    return signed_spectrum(np.linalg.eigvalsh(core))


def gft(x, d: SpectralDecomposition) -> np.ndarray:
    """Fourier coefficients V^T x in the decomposition's index order."""
    x = np.asarray(x, dtype=float)
    V = d.eigenvectors
    if V is None or x.shape[0] != V.shape[0]:
        raise ValueError("signal length does not match the decomposition")
    return V.T @ x


def inverse_gft(xhat, d: SpectralDecomposition) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=float)
    V = d.eigenvectors
    if V is None or xhat.shape[0] != V.shape[1]:
        raise ValueError("coefficient length does not match the decomposition")
    return V @ xhat


def wft(x: GraphonSignal, s: GraphonSpectrum) -> np.ndarray:
    """Projection of a signal onto the grid eigenfunctions by quadrature."""
    grid = np.arange(s.m) / s.m
    xv = x.evaluate(grid)
    return s.decomposition.eigenvectors.T @ xv / np.sqrt(s.m)


def _values_of(spec) -> np.ndarray:
    if isinstance(spec, GraphonSpectrum):
        return spec.eigenvalues
    if isinstance(spec, SpectralDecomposition):
        return spec.eigenvalues
    return np.asarray(spec, dtype=float)


def _indexed(spec):
    if isinstance(spec, GraphonSpectrum):
        return spec.indices, spec.eigenvalues
    if isinstance(spec, SpectralDecomposition):
        return spec.indices, spec.eigenvalues
    d = signed_spectrum(spec)
    return d.indices, d.eigenvalues


def c_band_cardinality(eigs, c: float) -> int:
    """Number of eigenvalues with |lambda| >= c, for c in (0, 1]."""
    if not 0.0 < c <= 1.0:
        raise ValueError("band threshold must lie in (0, 1]")
    return int(np.count_nonzero(np.abs(_values_of(eigs)) >= c))


def c_eigenvalue_margin(eigs_w, eigs_wprime, c: float) -> float:
    """min over in-band indices i of W' and indices j != i of |lam_i' - lam_j|.

    Both spectra are finite truncations of compact-operator spectra whose
    tails cluster at zero, so an implicit eigenvalue 0 participates as
    lam_j for every index beyond the computed set.
    """
    if not 0.0 < c <= 1.0:
        raise ValueError("band threshold must lie in (0, 1]")
    idx_w, val_w = _indexed(eigs_w)
    idx_p, val_p = _indexed(eigs_wprime)
    in_band = np.abs(val_p) >= c
    if not np.any(in_band):
        raise EmptyBandError(f"no eigenvalue of the second spectrum reaches |lambda| >= {c}")
    best = np.inf
    for i, lam in zip(idx_p[in_band], val_p[in_band]):
        others = val_w[idx_w != i]
        gap = np.min(np.abs(lam - others)) if len(others) else np.inf
        best = min(best, gap, abs(lam))  # abs(lam): the zero tail
    return float(best)


def eigenvalue_by_index(spec, index: int, default: float = 0.0) -> float:
    idx, val = _indexed(spec)
    hits = np.flatnonzero(idx == index)
    return float(val[hits[0]]) if len(hits) else default
