"""Convolutional networks on graphs and graphons with shared coefficients.

A network is L layers of (filterbank, pointwise nonlinearity). Layer l
maps F_{l-1} features to F_l features through F_l x F_{l-1} polynomial
filters of K taps each; the coefficient tensor is shared verbatim
between the graph instantiation (shift matrix, optionally divided by n)
and the kernel instantiation (grid-discretized integral operator).
Training minimizes mean squared error with Adam on hand-derived
gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .graphon import Graph, Graphon, GraphonSignal, step_signal
from .filters import response_sup_norm
from .sampling import rng_stream

__all__ = [
    "GnnConfig",
    "CoefficientTensor",
    "TrainConfig",
    "TrainingDivergence",
    "NonlinearityReport",
    "NONLINEARITIES",
    "gnn_forward",
    "gnn_forward_layers",
    "wnn_forward",
    "wnn_forward_layers",
    "nonlinearity_check",
    "init_coefficients",
    "mse_loss_and_grads",
    "train_adam",
    "model_to_json",
    "model_from_json",
]


def _relu(u):
    return np.maximum(u, 0.0)


def _relu_prime(u):
    return (u > 0).astype(float)


def _tanh_prime(u):
    return 1.0 - np.tanh(u) ** 2


def _sigmoid_shifted(u):
    # 2/(1+e^-u) - 1: passes through the origin with slope 1/2 <= 1.
    return 2.0 / (1.0 + np.exp(-u)) - 1.0


def _sigmoid_shifted_prime(u):
    y = _sigmoid_shifted(u)
    return (1.0 - y**2) / 2.0


def _identity(u):
    return u


def _one(u):
    return np.ones_like(u)


NONLINEARITIES = {
    "relu": (_relu, _relu_prime),
    "tanh": (np.tanh, _tanh_prime),
    "sigmoid-shifted": (_sigmoid_shifted, _sigmoid_shifted_prime),
    "identity": (_identity, _one),
}


@dataclass(frozen=True)
class GnnConfig:
    """Layer widths F_0..F_L, taps per filter, nonlinearity, shift scale."""

    widths: tuple
    taps: int
    nonlinearity: str = "relu"
    scale: str = "normalized"

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 2 or any(w < 1 for w in self.widths):
            raise ValueError("need at least one layer and positive widths")
        if self.taps < 1:
            raise ValueError("each filter needs at least one tap")
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.scale not in ("raw", "normalized"):
            raise ValueError(f"unknown scale {self.scale!r}")

    @property
    def layers(self) -> int:
        return len(self.widths) - 1


@dataclass
class CoefficientTensor:
    """Per-layer tap arrays of shape (F_l, F_{l-1}, K)."""

    layers: list = field(default_factory=list)

    def check_shape(self, cfg: GnnConfig) -> None:
        if len(self.layers) != cfg.layers:
            raise ValueError("layer count does not match the configuration")
        for l, H in enumerate(self.layers):
            expect = (cfg.widths[l + 1], cfg.widths[l], cfg.taps)
            if H.shape != expect:
                raise ValueError(f"layer {l + 1} has shape {H.shape}, expected {expect}")

    def copy(self) -> "CoefficientTensor":
        return CoefficientTensor([H.copy() for H in self.layers])

    def flat(self) -> np.ndarray:
        return np.concatenate([H.reshape(-1) for H in self.layers])

    @classmethod
    def from_flat(cls, flat: np.ndarray, cfg: GnnConfig) -> "CoefficientTensor":
        layers, pos = [], 0
        for l in range(cfg.layers):
            shape = (cfg.widths[l + 1], cfg.widths[l], cfg.taps)
            size = int(np.prod(shape))
            layers.append(np.asarray(flat[pos:pos + size], float).reshape(shape))
            pos += size
        if pos != len(flat):
            raise ValueError("flat vector length does not match the configuration")
        return cls(layers)

    @classmethod
    def zeros(cls, cfg: GnnConfig) -> "CoefficientTensor":
        return cls([np.zeros((cfg.widths[l + 1], cfg.widths[l], cfg.taps))
                    for l in range(cfg.layers)])


def init_coefficients(cfg: GnnConfig, seed: int = 0, trial: int = 0,
                      cap_response: float | None = None) -> CoefficientTensor:
    """Uniform(-1/(K F_in), 1/(K F_in)) taps, optionally rescaled so every
    filter's sup response on [-1,1] stays below cap_response (< 1 keeps
    the band conditions of the transfer bounds satisfiable)."""
    rng = rng_stream(seed, trial, "init")
    layers = []
    for l in range(cfg.layers):
        bound = 1.0 / (cfg.taps * cfg.widths[l])
        H = rng.uniform(-bound, bound, size=(cfg.widths[l + 1], cfg.widths[l], cfg.taps))
        if cap_response is not None:
            for f in range(H.shape[0]):
                for g in range(H.shape[1]):
                    sup = response_sup_norm(H[f, g])
                    if sup > cap_response:
                        H[f, g] *= cap_response / sup
        layers.append(H)
    return CoefficientTensor(layers)


def _as_features(x, width: int, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape != (n, width):
        raise ValueError(f"input features have shape {x.shape}, expected ({n}, {width})")
    return x


def _shift_stack(M: np.ndarray, X: np.ndarray, K: int) -> np.ndarray:
    """Stack [X, MX, ..., M^{K-1}X] of shape (K, n, F) by repeated matvecs."""
    Z = np.empty((K,) + X.shape)
    Z[0] = X
    for k in range(1, K):
        Z[k] = M @ Z[k - 1]
    return Z


def _forward(M: np.ndarray, tensor: CoefficientTensor, cfg: GnnConfig, X0: np.ndarray):
    sigma, _ = NONLINEARITIES[cfg.nonlinearity]
    X = X0
    stacks, preacts, outputs = [], [], [X0]
    for H in tensor.layers:
        Z = _shift_stack(M, X, cfg.taps)
        U = np.einsum("knq,fqk->nf", Z, H)
        X = sigma(U)
        stacks.append(Z)
        preacts.append(U)
        outputs.append(X)
    return X, (stacks, preacts, outputs)


def _shift_matrix(g: Graph, cfg: GnnConfig) -> np.ndarray:
    return g.gso / g.n if cfg.scale == "normalized" else g.gso


def gnn_forward(tensor: CoefficientTensor, cfg: GnnConfig, g: Graph, x) -> np.ndarray:
    """Output features (n, F_L) of the network on a graph."""
    tensor.check_shape(cfg)
    X0 = _as_features(x, cfg.widths[0], g.n)
    Y, _ = _forward(_shift_matrix(g, cfg), tensor, cfg, X0)
    return Y


def gnn_forward_layers(tensor: CoefficientTensor, cfg: GnnConfig, g: Graph, x) -> list:
    """Per-layer outputs [X_0, X_1, ..., X_L] for inspection and tests."""
    tensor.check_shape(cfg)
    X0 = _as_features(x, cfg.widths[0], g.n)
    _, (_, _, outputs) = _forward(_shift_matrix(g, cfg), tensor, cfg, X0)
    return outputs


def _backward(M, tensor, cfg, cache, dY):
    stacks, preacts, _ = cache
    _, sigma_prime = NONLINEARITIES[cfg.nonlinearity]
    grads = [None] * cfg.layers
    dX = dY
    for l in range(cfg.layers - 1, -1, -1):
        dU = dX * sigma_prime(preacts[l])
        grads[l] = np.einsum("nf,knq->fqk", dU, stacks[l])
        if l > 0:
            D = _shift_stack(M, dU, cfg.taps)
            dX = np.einsum("knf,fqk->nq", D, tensor.layers[l])
    return grads


def _signal_list(x, width: int):
    if isinstance(x, GraphonSignal):
        x = [x]
    if len(x) != width:
        raise ValueError(f"need {width} input signals, got {len(x)}")
    return list(x)


def wnn_forward_layers(tensor: CoefficientTensor, cfg: GnnConfig, w: Graphon,
                       x, m: int = 2048) -> list:
    tensor.check_shape(cfg)
    if m < 2:
        raise ValueError("grid must have at least two points")
    grid = np.arange(m) / m
    M = w.evaluate(grid[:, None], grid[None, :]) / m
    X0 = np.stack([s.evaluate(grid) for s in _signal_list(x, cfg.widths[0])], axis=1)
    _, (_, _, outputs) = _forward(M, tensor, cfg, X0)
    return outputs


def wnn_forward(tensor: CoefficientTensor, cfg: GnnConfig, w: Graphon,
                x, m: int = 2048) -> list:
    """Kernel-side forward pass; returns F_L step signals on the m-grid.

    Runs the same layer recursion as the graph side with the kernel
    matrix divided by m. For a step kernel whose blocks align with the
    grid this equals the lifted graph output exactly.
    """
    values = wnn_forward_layers(tensor, cfg, w, x, m)[-1]
    bp = np.concatenate([np.arange(m) / m, [1.0]])
    return [step_signal(bp, values[:, f]) for f in range(values.shape[1])]


@dataclass(frozen=True)
class NonlinearityReport:
    name: str
    passes: bool
    max_slope: float
    value_at_zero: float
    reason: str = ""


def nonlinearity_check(nonlinearity, grid: int = 2001,
                       lo: float = -10.0, hi: float = 10.0) -> NonlinearityReport:
    """Grid check that sigma is normalized Lipschitz with sigma(0) = 0.

    All grid pairs are tested, so any slope above one on [lo, hi] at the
    grid resolution rejects the candidate for bound-checked experiments.
    """
    if isinstance(nonlinearity, str):
        name = nonlinearity
        fn = NONLINEARITIES[nonlinearity][0]
    else:
        name, fn = getattr(nonlinearity, "__name__", "custom"), nonlinearity
    u = np.linspace(lo, hi, grid)
    s = np.asarray(fn(u), dtype=float)
    du = np.abs(u[:, None] - u[None, :])
    ds = np.abs(s[:, None] - s[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(du > 0, ds / du, 0.0)
    max_slope = float(np.max(ratios))
    at_zero = float(np.asarray(fn(np.array([0.0])), dtype=float)[0])
    ok = max_slope <= 1.0 + 1e-9 and abs(at_zero) <= 1e-12
    reason = "" if ok else (
        f"slope {max_slope:.6g} exceeds 1" if max_slope > 1.0 + 1e-9
        else f"value at zero is {at_zero:.6g}")
    return NonlinearityReport(name, ok, max_slope, at_zero, reason)


class TrainingDivergence(RuntimeError):
    pass


@dataclass
class TrainConfig:
    """Adam hyperparameters; defaults follow the usual first/second-moment
    forgetting factors 0.9 / 0.999 with learning rate 5e-4."""

    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    steps: int = 1000
    batch_size: int = 1
    seed: int = 0
    lipschitz_penalty: float = 0.0
    divergence_limit: float = 1e6


def mse_loss_and_grads(tensor: CoefficientTensor, cfg: GnnConfig, batch):
    """Mean-over-items of per-entry squared error, with tap gradients."""
    grads = [np.zeros_like(H) for H in tensor.layers]
    total = 0.0
    b = len(batch)
    for g, x, target in batch:
        M = _shift_matrix(g, cfg)
        X0 = _as_features(x, cfg.widths[0], g.n)
        T = _as_features(target, cfg.widths[-1], g.n)
        Y, cache = _forward(M, tensor, cfg, X0)
        err = Y - T
        total += float(np.mean(err**2)) / b
        dY = 2.0 * err / (err.size * b)
        for gl, dl in zip(grads, _backward(M, tensor, cfg, cache, dY)):
            gl += dl
    return total, grads


def _slope_argmax(taps: np.ndarray, grid_size: int = 4001):
    """Location and value of max |h'| on [-1, 1]."""
    dh = npoly.polyder(taps)
    pts = np.linspace(-1.0, 1.0, grid_size)
    if len(dh):
        roots = npoly.polyroots(npoly.polyder(dh)) if len(dh) > 1 else np.array([])
        real = np.real(roots[np.isreal(roots)]) if len(roots) else np.array([])
        pts = np.concatenate([pts, real[(real >= -1) & (real <= 1)]])
    vals = np.abs(npoly.polyval(pts, dh)) if len(dh) else np.zeros_like(pts)
    k = int(np.argmax(vals))
    return float(vals[k]), float(pts[k])


def _penalty_and_grads(tensor: CoefficientTensor, mu: float):
    """mu * max over filters of the full-interval response slope, with a
    subgradient routed to the filter attaining the max."""
    best, where = -1.0, None
    for l, H in enumerate(tensor.layers):
        for f in range(H.shape[0]):
            for q in range(H.shape[1]):
                val, lam = _slope_argmax(H[f, q])
                if val > best:
                    best, where = val, (l, f, q, lam)
    grads = [np.zeros_like(H) for H in tensor.layers]
    if where is None or best <= 0.0:
        return 0.0, grads
    l, f, q, lam = where
    taps = tensor.layers[l][f, q]
    dh_at = npoly.polyval(lam, npoly.polyder(taps))
    sign = np.sign(dh_at) if dh_at != 0 else 1.0
    for k in range(1, len(taps)):
        grads[l][f, q, k] = mu * sign * k * lam ** (k - 1)
    return mu * best, grads


def train_adam(tensor0: CoefficientTensor, cfg: GnnConfig, dataset,
               train_cfg: TrainConfig | None = None):
    """Minimize MSE over (graph, input, target) items with Adam.

    Returns the trained tensor and the per-step loss trace. Raises
    TrainingDivergence when the loss passes the divergence limit.
    """
    tc = train_cfg or TrainConfig()
    tensor = tensor0.copy()
    tensor.check_shape(cfg)
    if not dataset:
        raise ValueError("empty training set")
    rng = rng_stream(tc.seed, 0, "minibatch")
    m = [np.zeros_like(H) for H in tensor.layers]
    v = [np.zeros_like(H) for H in tensor.layers]
    trace = []
    batch_size = min(tc.batch_size, len(dataset))
    for t in range(1, tc.steps + 1):
        idx = rng.choice(len(dataset), size=batch_size, replace=False)
        loss, grads = mse_loss_and_grads(tensor, cfg, [dataset[i] for i in idx])
        if tc.lipschitz_penalty > 0.0:
            pen, pgrads = _penalty_and_grads(tensor, tc.lipschitz_penalty)
            loss += pen
            for gl, pl in zip(grads, pgrads):
                gl += pl
        if not np.isfinite(loss) or loss > tc.divergence_limit:
            raise TrainingDivergence(
                f"loss {loss:.3e} exceeded {tc.divergence_limit:.1e} at step {t}")
        trace.append(loss)
        for i, H in enumerate(tensor.layers):
            m[i] = tc.beta1 * m[i] + (1 - tc.beta1) * grads[i]
            v[i] = tc.beta2 * v[i] + (1 - tc.beta2) * grads[i] ** 2
            mhat = m[i] / (1 - tc.beta1**t)
            vhat = v[i] / (1 - tc.beta2**t)
            H -= tc.lr * mhat / (np.sqrt(vhat) + tc.eps)
    return tensor, np.array(trace)


def model_to_json(tensor: CoefficientTensor, cfg: GnnConfig) -> dict:
    return {
        "config": {"widths": list(cfg.widths), "taps": cfg.taps,
                   "nonlinearity": cfg.nonlinearity, "scale": cfg.scale},
        "tensor": {"shapes": [list(H.shape) for H in tensor.layers],
                   "values": tensor.flat().tolist()},
    }


def model_from_json(obj: dict):
    c = obj["config"]
    cfg = GnnConfig(widths=tuple(c["widths"]), taps=int(c["taps"]),
                    nonlinearity=c["nonlinearity"], scale=c.get("scale", "normalized"))
    tensor = CoefficientTensor.from_flat(np.asarray(obj["tensor"]["values"], float), cfg)
    shapes = [tuple(s) for s in obj["tensor"]["shapes"]]
    if shapes != [H.shape for H in tensor.layers]:
        raise ValueError("checkpoint shapes do not match its configuration")
    return tensor, cfg
