"""Experiment orchestration: transfer-error sweeps against evaluated
bounds, and the train-small/test-big protocol on a synthetic teacher
task, with deterministic seeded fan-out and CSV/JSON report emission.

The error metric is the L2 distance between induced step signals (the
metric the bounds control); a secondary per-node RMSE on a common
template grid is emitted for intuition. All randomness is derived from
the master seed per (role, size, trial), so results are byte-identical
across runs and worker counts.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bnd
from .filters import apply_graph_filter, apply_graphon_filter, estimate_spectral_profile
from .gnn import (CoefficientTensor, GnnConfig, TrainConfig, gnn_forward,
                  init_coefficients, model_from_json, model_to_json,
                  train_adam, wnn_forward)
from .graphon import (Graph, Graphon, GraphonSignal, builtin_graphon,
                      builtin_signal, graphon_from_json, graphon_to_json,
                      induced_graphon_signal, signal_from_json, signal_to_json,
                      signal_l2_distance)
from .sampling import bernoulli_from_weighted, rng_stream, sample_graph_signal, \
    sample_template, sample_weighted
from .spectral import EmptyBandError, c_band_cardinality, c_eigenvalue_margin, \
    graphon_spectrum, signed_spectrum, step_graphon_spectrum_exact

__all__ = [
    "ExperimentConfig",
    "TransferRow",
    "TransferReport",
    "run_transfer_sweep",
    "TrainTransferConfig",
    "TrainRow",
    "TrainTransferReport",
    "run_train_transfer",
    "emit_report",
    "load_rows_csv",
    "worker_count",
]

RMSE_GRID = 512


def _derive_seed(master: int, label: str) -> int:
    digest = hashlib.blake2s(f"{master}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def worker_count() -> int:
    """Pool size, capped by the WSPLAB_THREADS environment variable."""
    env = os.environ.get("WSPLAB_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_pool(tasks):
    """Run zero-argument tasks, possibly in a thread pool; results keep
    task order so reductions are order-independent."""
    n = worker_count()
    if n <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda t: t(), tasks))


# ---------------------------------------------------------------------------
# Transfer sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    graphon: Graphon
    signal: GraphonSignal
    taps: np.ndarray | None = None
    gnn_tensor: CoefficientTensor | None = None
    gnn_config: GnnConfig | None = None
    sizes: tuple = (50, 100, 200, 400)
    reference_size: int | None = 800
    graphon_reference: bool = False
    trials: int = 20
    seed: int = 0
    mode: str = "stochastic"
    band_threshold: float = 0.3
    label_risk: float = 0.05
    spacing_risk: float = 0.05
    edge_risk: float = 0.05
    kernel_lipschitz: float | None = None
    signal_lipschitz: float | None = None
    spectrum_grid: int = 2048
    reference_grid: int = 4096
    main_text_constants: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if list(self.sizes) != sorted(self.sizes):
            raise ValueError("size grid must be sorted ascending")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.mode not in ("template", "weighted", "stochastic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.taps is None and self.gnn_tensor is None:
            raise ValueError("config needs filter taps or a network model")
        if (self.gnn_tensor is None) != (self.gnn_config is None):
            raise ValueError("network model needs both tensor and configuration")
        if not self.graphon_reference and self.reference_size is None:
            raise ValueError("need a reference size or the graphon-reference flag")
        if self.taps is not None:
            object.__setattr__(self, "taps", np.asarray(self.taps, float))

    @property
    def is_network(self) -> bool:
        return self.gnn_tensor is not None

    def kernel_smoothness(self) -> float | None:
        if self.kernel_lipschitz is not None:
            return self.kernel_lipschitz
        return self.graphon.lipschitz

    def signal_smoothness(self) -> float | None:
        if self.signal_lipschitz is not None:
            return self.signal_lipschitz
        return self.signal.lipschitz

    def filter_list(self):
        if self.taps is not None:
            return [(self.taps, self.band_threshold)]
        return [(H[f, g], self.band_threshold)
                for H in self.gnn_tensor.layers
                for f in range(H.shape[0]) for g in range(H.shape[1])]

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        graphon = (builtin_graphon(obj["graphon"][8:]) if isinstance(obj["graphon"], str)
                   else graphon_from_json(obj["graphon"]))
        signal = (builtin_signal(obj["signal"][8:]) if isinstance(obj["signal"], str)
                  else signal_from_json(obj["signal"]))
        model = obj["model"]
        taps = tensor = gcfg = None
        if "taps" in model:
            taps = np.asarray(model["taps"], float)
        else:
            tensor, gcfg = model_from_json(model["gnn"])
        return cls(
            graphon=graphon, signal=signal, taps=taps,
            gnn_tensor=tensor, gnn_config=gcfg,
            sizes=tuple(obj.get("sizes", (50, 100, 200, 400))),
            reference_size=obj.get("reference_size"),
            graphon_reference=bool(obj.get("graphon_reference", False)),
            trials=int(obj.get("trials", 20)),
            seed=int(obj.get("seed", 0)),
            mode=obj.get("mode", "stochastic"),
            band_threshold=float(obj.get("band_threshold", 0.3)),
            label_risk=float(obj.get("label_risk", 0.05)),
            spacing_risk=float(obj.get("spacing_risk", 0.05)),
            edge_risk=float(obj.get("edge_risk", 0.05)),
            kernel_lipschitz=obj.get("kernel_lipschitz"),
            signal_lipschitz=obj.get("signal_lipschitz"),
            spectrum_grid=int(obj.get("spectrum_grid", 2048)),
            reference_grid=int(obj.get("reference_grid", 4096)),
            main_text_constants=bool(obj.get("main_text_constants", False)),
        )

    def to_json(self) -> dict:
        model = ({"taps": self.taps.tolist()} if self.taps is not None
                 else {"gnn": model_to_json(self.gnn_tensor, self.gnn_config)})
        return {
            "graphon": graphon_to_json(self.graphon),
            "signal": signal_to_json(self.signal),
            "model": model,
            "sizes": list(self.sizes),
            "reference_size": self.reference_size,
            "graphon_reference": self.graphon_reference,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "band_threshold": self.band_threshold,
            "label_risk": self.label_risk,
            "spacing_risk": self.spacing_risk,
            "edge_risk": self.edge_risk,
            "kernel_lipschitz": self.kernel_lipschitz,
            "signal_lipschitz": self.signal_lipschitz,
            "spectrum_grid": self.spectrum_grid,
            "reference_grid": self.reference_grid,
            "main_text_constants": self.main_text_constants,
        }


@dataclass(frozen=True)
class TransferRow:
    size: int
    trial: int
    error: float
    rmse: float
    bound: float
    term_transferability: float
    term_discretization: float
    term_nontransferable: float
    confidence: float
    assumptions_pass: bool
    vacuous: bool
    quadrature_error: float = float("nan")


@dataclass
class TransferReport:
    config: dict
    rows: list = field(default_factory=list)
    kind: str = "transfer"

    def aggregates(self) -> dict:
        out = {}
        for n in sorted({r.size for r in self.rows}):
            sub = [r for r in self.rows if r.size == n]
            errs = np.array([r.error for r in sub])
            checked = [r for r in sub if r.assumptions_pass and not r.vacuous]
            violations = sum(r.error > r.bound for r in checked)
            out[n] = {
                "trials": len(sub),
                "mean_error": float(errs.mean()),
                "std_error": float(errs.std(ddof=1)) if len(errs) > 1 else 0.0,
                "stderr": (float(errs.std(ddof=1) / math.sqrt(len(errs)))
                           if len(errs) > 1 else 0.0),
                "mean_bound": float(np.mean([r.bound for r in sub])),
                "checked_rows": len(checked),
                "violations": int(violations),
                "confidence": float(np.mean([r.confidence for r in sub])),
            }
        return out


@dataclass(frozen=True)
class _GraphSide:
    graph: Graph
    weighted_values: np.ndarray | None   # normalized eigenvalues of the weighted stage
    values: np.ndarray                    # normalized eigenvalues of the used graph


def _sample_side(cfg: ExperimentConfig, role: str, n: int, trial: int) -> _GraphSide:
    if cfg.mode == "template":
        g = sample_template(cfg.graphon, n)
        vals = np.linalg.eigvalsh(g.gso) / n
        return _GraphSide(g, None, vals)
    seed = _derive_seed(cfg.seed, f"sweep:{role}")
    gw = sample_weighted(cfg.graphon, n, seed, trial=trial)
    wvals = np.linalg.eigvalsh(gw.gso) / n
    if cfg.mode == "weighted":
        return _GraphSide(gw, None, wvals)
    gs = bernoulli_from_weighted(gw, seed, trial=trial)
    svals = np.linalg.eigvalsh(gs.gso) / n
    return _GraphSide(gs, wvals, svals)


def _model_output(cfg: ExperimentConfig, g: Graph, x: np.ndarray) -> np.ndarray:
    if cfg.is_network:
        return gnn_forward(cfg.gnn_tensor, cfg.gnn_config, g, x)[:, 0]
    return apply_graph_filter(cfg.taps, g, x, scale="normalized")


def _reference_output_on_graphon(cfg: ExperimentConfig, m: int) -> GraphonSignal:
    if cfg.is_network:
        return wnn_forward(cfg.gnn_tensor, cfg.gnn_config, cfg.graphon,
                           cfg.signal, m=m)[0]
    return apply_graphon_filter(cfg.taps, cfg.graphon, cfg.signal, m=m)


def _filter_constants(cfg: ExperimentConfig):
    profs = [estimate_spectral_profile(t, c) for t, c in cfg.filter_list()]
    return (max(p.outer_lipschitz for p in profs),
            max(p.inner_lipschitz for p in profs))


def _margins(cfg, graphon_spec, side: _GraphSide):
    """(band counts encountered, margins encountered) for one graph side."""
    c = cfg.band_threshold
    counts = [c_band_cardinality(side.values, c)]
    margins = []
    if side.weighted_values is not None:
        counts.append(c_band_cardinality(side.weighted_values, c))
        margins.append(c_eigenvalue_margin(graphon_spec, side.weighted_values, c))
        margins.append(c_eigenvalue_margin(side.weighted_values, side.values, c))
    else:
        margins.append(c_eigenvalue_margin(graphon_spec, side.values, c))
    return counts, margins


def _graphon_eigenvalues(cfg: ExperimentConfig):
    if cfg.graphon.kind == "step":
        return step_graphon_spectrum_exact(cfg.graphon)
    return signed_spectrum(graphon_spectrum(cfg.graphon, cfg.spectrum_grid).eigenvalues)


def _base_ingredients(cfg: ExperimentConfig, **extra) -> bnd.BoundIngredients:
    A_h, a_h = _filter_constants(cfg)
    kw = dict(
        band_threshold=cfg.band_threshold,
        filter_lipschitz=A_h,
        filter_lipschitz_inner=a_h,
        signal_norm=cfg.signal.norm(),
        kernel_lipschitz=cfg.kernel_smoothness(),
        signal_lipschitz=cfg.signal_smoothness(),
        label_risk=cfg.label_risk,
        spacing_risk=cfg.spacing_risk,
        edge_risk=cfg.edge_risk,
        kernel_max_degree=None,
    )
    if cfg.is_network:
        kw["layers"] = cfg.gnn_config.layers
        widths = cfg.gnn_config.widths[1:-1]
        kw["width"] = max(widths) if widths else 1
    kw.update(extra)
    return bnd.BoundIngredients(**kw)


def _assumption_flags(cfg: ExperimentConfig, n_small: int) -> bnd.AssumptionReport:
    nonlin = cfg.gnn_config.nonlinearity if cfg.is_network else None
    return bnd.check_assumptions(
        cfg.graphon, cfg.signal, cfg.filter_list(), nonlin, n_small,
        cfg.edge_risk, kernel_lipschitz=cfg.kernel_smoothness())


def _flags_required(cfg: ExperimentConfig, rep: bnd.AssumptionReport) -> bool:
    needed = [rep.smooth_kernel, rep.filter_band, rep.smooth_signal]
    if cfg.mode == "stochastic":
        needed.append(rep.graph_size)
    if cfg.is_network:
        needed.append(rep.activation)
    return all(needed)


def _rmse_on_template_grid(a: GraphonSignal, b: GraphonSignal) -> float:
    u = (np.arange(RMSE_GRID) + 0.5) / RMSE_GRID
    return float(np.sqrt(np.mean((a.evaluate(u) - b.evaluate(u)) ** 2)))


def _vacuous_report(conf: float) -> bnd.BoundReport:
    return bnd.BoundReport(value=float("inf"),
                           terms={"transferability": float("inf"),
                                  "discretization": 0.0,
                                  "nontransferable": 0.0},
                           confidence=conf)


def _transfer_trial(cfg: ExperimentConfig, graphon_spec, flags_by_n, trial: int) -> list:
    ref = _sample_side(cfg, "ref", cfg.reference_size, trial)
    x_ref = sample_graph_signal(cfg.signal, ref.graph)
    y_ref = induced_graphon_signal(_model_output(cfg, ref.graph, x_ref), ref.graph)
    counts_ref, margins_ref = None, None
    rows = []
    for n in cfg.sizes:
        side = _sample_side(cfg, "sweep", n, trial)
        x = sample_graph_signal(cfg.signal, side.graph)
        y = induced_graphon_signal(_model_output(cfg, side.graph, x), side.graph)
        err = signal_l2_distance(y, y_ref)
        rmse = _rmse_on_template_grid(y, y_ref)
        flags = flags_by_n[n]
        vacuous = False
        try:
            counts, margins = _margins(cfg, graphon_spec, side)
            if counts_ref is None:
                counts_ref, margins_ref = _margins(cfg, graphon_spec, ref)
            ing = _base_ingredients(
                cfg, size=n, size2=cfg.reference_size,
                band_count_max=max(counts + counts_ref),
                band_margin_min=min(margins + margins_ref))
            evaluator = (bnd.bound_network_transfer if cfg.is_network
                         else bnd.bound_filter_transfer)
            report = evaluator(ing, cfg.main_text_constants, mode=cfg.mode)
        except EmptyBandError:
            vacuous = True
            report = _vacuous_report(0.0)
        except ValueError:
            # Precondition failures (size gate, zero margin) are recorded,
            # not fatal.
            vacuous = True
            report = _vacuous_report(0.0)
        rows.append(TransferRow(
            size=n, trial=trial, error=err, rmse=rmse, bound=report.value,
            term_transferability=report.terms["transferability"],
            term_discretization=report.terms["discretization"],
            term_nontransferable=report.terms["nontransferable"],
            confidence=report.confidence,
            assumptions_pass=_flags_required(cfg, flags) and not vacuous,
            vacuous=vacuous))
    return rows


def _approx_trial(cfg: ExperimentConfig, graphon_spec, flags_by_n, y_limit,
                  quad_err, trial: int) -> list:
    rows = []
    for n in cfg.sizes:
        side = _sample_side(cfg, "sweep", n, trial)
        x = sample_graph_signal(cfg.signal, side.graph)
        y = induced_graphon_signal(_model_output(cfg, side.graph, x), side.graph)
        err = signal_l2_distance(y, y_limit)
        rmse = _rmse_on_template_grid(y, y_limit)
        flags = flags_by_n[n]
        vacuous = False
        try:
            counts, margins = _margins(cfg, graphon_spec, side)
            ing = _base_ingredients(cfg, size=n,
                                    band_count=max(counts), band_margin=min(margins))
            if cfg.mode == "template":
                report = bnd.bound_template_filter(ing, cfg.main_text_constants)
            elif cfg.mode == "weighted":
                report = bnd.bound_weighted_filter(ing, cfg.main_text_constants)
            elif cfg.is_network:
                report = bnd.bound_network_approx(ing, cfg.main_text_constants)
            else:
                report = bnd.bound_stochastic_filter(ing, cfg.main_text_constants)
        except EmptyBandError:
            vacuous = True
            report = _vacuous_report(0.0)
        except ValueError:
            vacuous = True
            report = _vacuous_report(0.0)
        rows.append(TransferRow(
            size=n, trial=trial, error=err, rmse=rmse, bound=report.value,
            term_transferability=report.terms["transferability"],
            term_discretization=report.terms["discretization"],
            term_nontransferable=report.terms["nontransferable"],
            confidence=report.confidence,
            assumptions_pass=_flags_required(cfg, flags) and not vacuous,
            vacuous=vacuous, quadrature_error=quad_err))
    return rows


def run_transfer_sweep(cfg: ExperimentConfig) -> TransferReport:
    """Measure transfer errors against the matching evaluated bound.

    Transfer mode samples an independent reference graph per trial
    (shared across the size grid); graphon-reference mode compares each
    graph output against the fine-grid kernel-level output and reports
    the quadrature error (fine vs half-resolution difference) alongside.
    """
    if cfg.is_network and cfg.graphon_reference and cfg.mode != "stochastic":
        raise ValueError("network approximation sweeps are defined for stochastic mode")
    graphon_spec = _graphon_eigenvalues(cfg)
    if cfg.graphon_reference:
        flags_by_n = {n: _assumption_flags(cfg, n) for n in cfg.sizes}
        y_limit = _reference_output_on_graphon(cfg, cfg.reference_grid)
        y_half = _reference_output_on_graphon(cfg, cfg.reference_grid // 2)
        quad_err = signal_l2_distance(y_limit, y_half)
        tasks = [(lambda t=t: _approx_trial(cfg, graphon_spec, flags_by_n,
                                            y_limit, quad_err, t))
                 for t in range(cfg.trials)]
    else:
        flags_by_n = {n: _assumption_flags(cfg, min(n, cfg.reference_size))
                      for n in cfg.sizes}
        tasks = [(lambda t=t: _transfer_trial(cfg, graphon_spec, flags_by_n, t))
                 for t in range(cfg.trials)]
    rows = [row for chunk in _run_pool(tasks) for row in chunk]
    rows.sort(key=lambda r: (r.size, r.trial))
    kind = "approximation" if cfg.graphon_reference else "transfer"
    return TransferReport(config=cfg.to_json(), rows=rows, kind=kind)


# ---------------------------------------------------------------------------
# Train-small / test-big protocol on a synthetic teacher task
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrainTransferConfig:
    """Synthetic regression: targets come from a fixed band-compliant
    teacher filter applied on each graph's normalized shift, plus noise.
    Inputs are random smooth graphon signals evaluated at the node labels
    (plus a small per-node jitter), so their energy rides on the
    transferable spectral components and the per-node task scale does not
    drift with graph size. Students are trained on the size-n graph and
    evaluated both there and on the large graph; the reported metric is
    the relative performance difference (large minus small, over small)."""

    graphon: Graphon
    teacher_taps: tuple = (0.0, 0.5, 0.3)
    sizes: tuple = (50, 100, 200, 400)
    big_size: int = 800
    seeds: int = 10
    seed: int = 0
    noise: float = 0.01
    signal_scale: float = 0.3
    node_jitter: float = 0.0
    train_signals: int = 8
    test_signals: int = 48
    filter_taps: int = 10
    gnn_width: int = 6
    gnn_taps: int = 4
    gnn_nonlinearity: str = "tanh"
    steps: int = 900
    lr: float = 3e-3
    batch_size: int = 8
    penalty: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "teacher_taps", tuple(float(t) for t in self.teacher_taps))

    @classmethod
    def from_json(cls, obj: dict) -> "TrainTransferConfig":
        graphon = (builtin_graphon(obj["graphon"][8:]) if isinstance(obj["graphon"], str)
                   else graphon_from_json(obj["graphon"]))
        kw = {k: v for k, v in obj.items() if k != "graphon"}
        for key in ("sizes", "teacher_taps"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(graphon=graphon, **kw)

    def to_json(self) -> dict:
        out = {"graphon": graphon_to_json(self.graphon)}
        for f in ("teacher_taps", "sizes", "big_size", "seeds", "seed", "noise",
                  "signal_scale", "node_jitter", "train_signals", "test_signals",
                  "filter_taps", "gnn_width", "gnn_taps", "gnn_nonlinearity",
                  "steps", "lr", "batch_size", "penalty"):
            val = getattr(self, f)
            out[f] = list(val) if isinstance(val, tuple) else val
        return out


@dataclass(frozen=True)
class TrainRow:
    model: str
    size: int
    trial: int
    perf_small: float
    perf_big: float
    relative_difference: float


@dataclass
class TrainTransferReport:
    config: dict
    rows: list = field(default_factory=list)
    kind: str = "train-transfer"

    def aggregates(self) -> dict:
        out = {}
        models = sorted({r.model for r in self.rows})
        for n in sorted({r.size for r in self.rows}):
            out[n] = {}
            for m in models:
                vals = np.array([r.relative_difference for r in self.rows
                                 if r.size == n and r.model == m])
                out[n][m] = {
                    "trials": len(vals),
                    "mean_relative_difference": float(vals.mean()),
                    "stderr": (float(vals.std(ddof=1) / math.sqrt(len(vals)))
                               if len(vals) > 1 else 0.0),
                }
        return out

    def ordering_holds(self, n: int) -> bool:
        """Penalized network <= network <= filter on mean relative difference."""
        agg = self.aggregates()[n]
        pen = agg["gnn-penalized"]["mean_relative_difference"]
        gnn = agg["gnn"]["mean_relative_difference"]
        filt = agg["filter"]["mean_relative_difference"]
        return pen <= gnn <= filt


def _teacher_targets(taps, g: Graph, X: np.ndarray, rng) -> np.ndarray:
    Y = np.column_stack([apply_graph_filter(taps, g, X[:, j], "normalized")
                         for j in range(X.shape[1])])
    return Y


# Smooth basis for random input signals: constant, linear, two harmonics.
def _smooth_basis(u: np.ndarray) -> np.ndarray:
    return np.column_stack([
        np.ones_like(u), u - 0.5,
        np.cos(2 * np.pi * u), np.sin(2 * np.pi * u),
        np.cos(4 * np.pi * u), np.sin(4 * np.pi * u),
    ])


def _draw_signals(rng, labels: np.ndarray, count: int, scale: float,
                  jitter: float) -> np.ndarray:
    basis = _smooth_basis(labels)
    decay = 1.0 / np.arange(1, basis.shape[1] + 1)
    coeffs = scale * decay[:, None] * rng.standard_normal(size=(basis.shape[1], count))
    X = basis @ coeffs
    if jitter > 0:
        X = X + jitter * rng.standard_normal(size=X.shape)
    return X


def _mse(tensor, cfg, g, X, Y) -> float:
    total = 0.0
    for j in range(X.shape[1]):
        pred = gnn_forward(tensor, cfg, g, X[:, j])[:, 0]
        total += float(np.mean((pred - Y[:, j]) ** 2))
    return total / X.shape[1]


def _student_specs(tc: TrainTransferConfig):
    return {
        "filter": (GnnConfig((1, 1), tc.filter_taps, "identity"), 0.0),
        "gnn": (GnnConfig((1, tc.gnn_width, 1), tc.gnn_taps, tc.gnn_nonlinearity), 0.0),
        "gnn-penalized": (GnnConfig((1, tc.gnn_width, 1), tc.gnn_taps,
                                    tc.gnn_nonlinearity), tc.penalty),
    }


def _train_trial(tc: TrainTransferConfig, trial: int) -> list:
    big_seed = _derive_seed(tc.seed, "train:big")
    g_big = bernoulli_from_weighted(
        sample_weighted(tc.graphon, tc.big_size, big_seed, trial=trial),
        big_seed, trial=trial)
    rng_big = rng_stream(_derive_seed(tc.seed, "train:big-signals"), trial)
    X_big = _draw_signals(rng_big, g_big.labels, tc.test_signals,
                          tc.signal_scale, tc.node_jitter)
    Y_big = _teacher_targets(tc.teacher_taps, g_big, X_big, rng_big)
    Y_big += tc.noise * rng_big.standard_normal(Y_big.shape)

    rows = []
    for n in tc.sizes:
        if n == tc.big_size:
            g_small, X_test, Y_test = g_big, X_big, Y_big
        else:
            small_seed = _derive_seed(tc.seed, f"train:small:n{n}")
            g_small = bernoulli_from_weighted(
                sample_weighted(tc.graphon, n, small_seed, trial=trial),
                small_seed, trial=trial)
            rng_small = rng_stream(_derive_seed(tc.seed, f"train:test:n{n}"), trial)
            X_test = _draw_signals(rng_small, g_small.labels, tc.test_signals,
                                   tc.signal_scale, tc.node_jitter)
            Y_test = _teacher_targets(tc.teacher_taps, g_small, X_test, rng_small)
            Y_test += tc.noise * rng_small.standard_normal(Y_test.shape)

        rng_tr = rng_stream(_derive_seed(tc.seed, f"train:data:n{n}"), trial)
        X_tr = _draw_signals(rng_tr, g_small.labels, tc.train_signals,
                             tc.signal_scale, tc.node_jitter)
        Y_tr = _teacher_targets(tc.teacher_taps, g_small, X_tr, rng_tr)
        Y_tr += tc.noise * rng_tr.standard_normal(Y_tr.shape)
        dataset = [(g_small, X_tr[:, j], Y_tr[:, j]) for j in range(X_tr.shape[1])]

        for name, (gcfg, mu) in _student_specs(tc).items():
            # One fixed starting point per architecture: trial-to-trial
            # spread then reflects graphs and data, not initialization.
            init_seed = _derive_seed(tc.seed, f"train:init:{gcfg.widths}:{gcfg.taps}")
            tensor0 = init_coefficients(gcfg, init_seed, 0, cap_response=0.99)
            train_cfg = TrainConfig(lr=tc.lr, steps=tc.steps, batch_size=tc.batch_size,
                                    seed=_derive_seed(tc.seed, f"train:sgd:{name}:n{n}") + trial,
                                    lipschitz_penalty=mu)
            trained, _ = train_adam(tensor0, gcfg, dataset, train_cfg)
            perf_small = _mse(trained, gcfg, g_small, X_test, Y_test)
            perf_big = _mse(trained, gcfg, g_big, X_big, Y_big)
            rel = 0.0 if n == tc.big_size else (perf_big - perf_small) / perf_small
            rows.append(TrainRow(name, n, trial, perf_small, perf_big, rel))
    return rows


def run_train_transfer(tc: TrainTransferConfig) -> TrainTransferReport:
    """Train students per size and seed, evaluate on the shared big graph.

    Training failures surface per trial; both network series and the
    filter series come from one configuration so their ordering is a
    single column comparison.
    """
    tasks = [(lambda t=t: _train_trial(tc, t)) for t in range(tc.seeds)]
    rows = [row for chunk in _run_pool(tasks) for row in chunk]
    rows.sort(key=lambda r: (r.size, r.trial, r.model))
    return TrainTransferReport(config=tc.to_json(), rows=rows)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

_TRANSFER_HEADER = ("size,trial,error,rmse,bound,term_transferability,"
                    "term_discretization,term_nontransferable,confidence,"
                    "assumptions_pass,vacuous,quadrature_error")
_TRAIN_HEADER = "model,size,trial,perf_small,perf_big,relative_difference"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_report(report, outdir, prefix: str = "sweep") -> dict:
    """Write rows CSV, JSON summary, and gnuplot-style curve columns.

    Returns the paths written. CSVs are byte-stable for a fixed master
    seed regardless of worker count.
    """
    os.makedirs(outdir, exist_ok=True)
    paths = {}
    rows_path = os.path.join(outdir, f"{prefix}_rows.csv")
    summary_path = os.path.join(outdir, f"{prefix}_summary.json")
    paths["rows"] = rows_path
    paths["summary"] = summary_path
    if isinstance(report, TransferReport):
        with open(rows_path, "w") as f:
            f.write(_TRANSFER_HEADER + "\n")
            for r in report.rows:
                f.write(",".join(_fmt(v) for v in (
                    r.size, r.trial, r.error, r.rmse, r.bound,
                    r.term_transferability, r.term_discretization,
                    r.term_nontransferable, r.confidence,
                    r.assumptions_pass, r.vacuous, r.quadrature_error)) + "\n")
        agg = report.aggregates()
        curve_path = os.path.join(outdir, f"{prefix}_curve.dat")
        paths["curve"] = curve_path
        with open(curve_path, "w") as f:
            f.write("# n mean stderr bound\n")
            for n, a in agg.items():
                f.write(f"{n} {_fmt(a['mean_error'])} {_fmt(a['stderr'])} "
                        f"{_fmt(a['mean_bound'])}\n")
        summary = {"kind": report.kind, "config": report.config, "aggregates": agg}
    elif isinstance(report, TrainTransferReport):
        with open(rows_path, "w") as f:
            f.write(_TRAIN_HEADER + "\n")
            for r in report.rows:
                f.write(",".join(_fmt(v) for v in (
                    r.model, r.size, r.trial, r.perf_small, r.perf_big,
                    r.relative_difference)) + "\n")
        agg = report.aggregates()
        for model in sorted({r.model for r in report.rows}):
            curve_path = os.path.join(outdir, f"{prefix}_{model}_curve.dat")
            paths[f"curve:{model}"] = curve_path
            with open(curve_path, "w") as f:
                f.write("# n mean stderr\n")
                for n, per_model in agg.items():
                    a = per_model[model]
                    f.write(f"{n} {_fmt(a['mean_relative_difference'])} "
                            f"{_fmt(a['stderr'])}\n")
        summary = {"kind": report.kind, "config": report.config, "aggregates": agg}
    else:
        raise TypeError(f"cannot emit report of type {type(report).__name__}")
    with open(summary_path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return paths


def load_rows_csv(path):
    """Re-parse an emitted rows CSV into row objects (round-trip check)."""
    with open(path) as f:
        header = f.readline().strip()
        rows = []
        for line in f:
            parts = line.strip().split(",")
            if not line.strip():
                continue
            if header == _TRANSFER_HEADER:
                rows.append(TransferRow(
                    size=int(parts[0]), trial=int(parts[1]), error=float(parts[2]),
                    rmse=float(parts[3]), bound=float(parts[4]),
                    term_transferability=float(parts[5]),
                    term_discretization=float(parts[6]),
                    term_nontransferable=float(parts[7]), confidence=float(parts[8]),
                    assumptions_pass=parts[9] == "1", vacuous=parts[10] == "1",
                    quadrature_error=float(parts[11])))
            elif header == _TRAIN_HEADER:
                rows.append(TrainRow(
                    model=parts[0], size=int(parts[1]), trial=int(parts[2]),
                    perf_small=float(parts[3]), perf_big=float(parts[4]),
                    relative_difference=float(parts[5])))
            else:
                raise ValueError(f"unrecognized CSV header in {path}")
    return rows
