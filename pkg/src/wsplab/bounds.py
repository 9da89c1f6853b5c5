"""Transfer-error bound evaluators, assumption checkers, and Monte Carlo
verification of the concentration inequalities behind them.

Every bound splits into three reported terms: a transferability term
proportional to the input norm, a fixed discretization term, and a
non-transferable-energy term contributed by spectral content inside the
band (-c, c), which does not vanish with graph size. Probabilistic
bounds carry their confidence level.

The discretization term's constant exists in two forms differing in
which filter slope multiplies c: the derivation-of-record form uses the
outer-band slope (default here) and the statement form uses the inner
slope; `main_text_constants=True` selects the latter.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .graphon import Graphon, GraphonSignal, max_degree
from .gnn import nonlinearity_check
from .filters import estimate_spectral_profile
from .sampling import rng_stream, sample_weighted, bernoulli_from_weighted

__all__ = [
    "BoundIngredients",
    "BoundReport",
    "AssumptionReport",
    "node_stochasticity_alpha",
    "edge_stochasticity_beta",
    "check_assumptions",
    "min_size_for_spacing_risk",
    "bound_generic_filter",
    "bound_template_filter",
    "bound_weighted_filter",
    "bound_weighted_to_stochastic",
    "bound_stochastic_filter",
    "bound_filter_transfer",
    "bound_network_approx",
    "bound_network_transfer",
    "BOUND_EVALUATORS",
    "mc_verify_spacing",
    "mc_verify_edge_norm",
]


def node_stochasticity_alpha(n: int, chi: float) -> float:
    """log((n+1)^2 / log(1/(1-chi))): label-randomness inflation factor."""
    if not 0.0 < chi < 1.0:
        raise ValueError("risk level must lie in (0, 1)")
    if n < 1:
        raise ValueError("need at least one node")
    return math.log((n + 1) ** 2 / math.log(1.0 / (1.0 - chi)))


def edge_stochasticity_beta(n: int, chi: float) -> float:
    """sqrt(n log(2n/chi)): spectral-norm scale of Bernoulli edge noise."""
    if not 0.0 < chi < 1.0:
        raise ValueError("risk level must lie in (0, 1)")
    if 2 * n / chi <= 1.0:
        raise ValueError("need 2n/chi > 1")
    return math.sqrt(n * math.log(2 * n / chi))


def min_size_for_spacing_risk(chi2: float) -> int:
    """Smallest admissible size for spacing risk chi2 (integer sizes, so
    the fractional threshold 4/chi2 rounds down)."""
    return int(4.0 / chi2)


@dataclass(frozen=True)
class BoundIngredients:
    """Everything a bound evaluator may consume.

    Band quantities (band_count = number of eigenvalues with magnitude at
    least c; band_margin = smallest cross-spectrum gap over in-band
    eigenvalues) default to measured values from the sampled graphs.
    kernel_lipschitz/signal_lipschitz are properties of the limiting
    objects and must be supplied explicitly for step kernels.
    """

    band_threshold: float                 # c in (0, 1]
    filter_lipschitz: float               # slope bound outside the band
    filter_lipschitz_inner: float         # slope bound inside (-c, c)
    signal_norm: float = 1.0
    kernel_lipschitz: float | None = None
    signal_lipschitz: float | None = None
    size: int | None = None
    size2: int | None = None
    label_risk: float = 0.05              # node-label randomness
    spacing_risk: float = 0.05            # order-statistics approximation
    edge_risk: float = 0.05               # Bernoulli edge randomness
    band_count: float | None = None
    band_margin: float | None = None
    band_count_max: float | None = None
    band_margin_min: float | None = None
    layers: int = 1
    width: int = 1
    kernel_max_degree: float | None = None
    kernel_distance: float | None = None  # measured L2 kernel gap
    signal_distance: float | None = None  # measured L2 signal gap

    def __post_init__(self):
        if not 0.0 < self.band_threshold <= 1.0:
            raise ValueError("band threshold must lie in (0, 1]")
        if self.filter_lipschitz < 0 or self.filter_lipschitz_inner < 0:
            raise ValueError("slope bounds must be nonnegative")
        if self.filter_lipschitz_inner > self.filter_lipschitz:
            raise ValueError("inner slope bound must not exceed the outer one")
        for risk in (self.label_risk, self.spacing_risk, self.edge_risk):
            if not 0.0 < risk <= 0.3:
                raise ValueError("risk levels must lie in (0, 0.3]")

    @classmethod
    def from_json(cls, obj: dict) -> "BoundIngredients":
        return cls(**obj)


@dataclass(frozen=True)
class BoundReport:
    """Bound value with per-term breakdown; value always equals the sum."""

    value: float
    terms: dict
    confidence: float
    assumptions: "AssumptionReport | None" = None
    notes: tuple = ()

    @staticmethod
    def build(transferability: float, discretization: float,
              nontransferable: float, confidence: float, notes=()) -> "BoundReport":
        terms = {
            "transferability": float(transferability),
            "discretization": float(discretization),
            "nontransferable": float(nontransferable),
        }
        return BoundReport(value=float(sum(terms.values())), terms=terms,
                           confidence=float(confidence), notes=tuple(notes))

    def to_json(self) -> dict:
        out = {"value": self.value, "terms": dict(self.terms),
               "confidence": self.confidence, "notes": list(self.notes)}
        if self.assumptions is not None:
            out["assumptions"] = asdict(self.assumptions)
        return out


@dataclass(frozen=True)
class AssumptionReport:
    smooth_kernel: bool
    filter_band: bool
    smooth_signal: bool
    graph_size: bool
    activation: bool
    reasons: tuple = ()

    @property
    def all_pass(self) -> bool:
        return (self.smooth_kernel and self.filter_band and self.smooth_signal
                and self.graph_size and self.activation)


def check_assumptions(w: Graphon | None, x: GraphonSignal | None, filters,
                      nonlinearity: str | None, n: int, edge_risk: float,
                      kernel_lipschitz: float | None = None) -> AssumptionReport:
    """Per-assumption pass/fail for a planned experiment.

    filters is an iterable of tap vectors paired with the band threshold,
    i.e. (taps, c) tuples; every one must have bounded response and
    restricted inner-band slope. The size check requires
    n - log(2n/chi)/d > 2 A_w / d with d the kernel's max degree.
    """
    reasons = []
    a_w = kernel_lipschitz
    if a_w is None and w is not None:
        a_w = w.lipschitz
    smooth_kernel = bool(a_w is not None and np.isfinite(a_w))
    if not smooth_kernel:
        reasons.append("kernel smoothness constant unknown")

    filter_band = True
    for taps, c in filters:
        prof = estimate_spectral_profile(taps, c)
        if not prof.compliant:
            filter_band = False
            reasons.append(
                f"filter response not band-compliant (sup={prof.sup_norm:.4g}, "
                f"inner={prof.inner_lipschitz:.4g}, outer={prof.outer_lipschitz:.4g})")
            break

    smooth_signal = bool(x is not None and x.lipschitz is not None
                         and np.isfinite(x.lipschitz))
    if not smooth_signal:
        reasons.append("signal smoothness constant unknown")

    graph_size = False
    if w is not None:
        d = max_degree(w)
        if d <= 0.0:
            reasons.append("size condition undefined: kernel max degree is zero")
        else:
            lhs = n - math.log(2 * n / edge_risk) / d
            rhs = 2 * (a_w if smooth_kernel else 0.0) / d
            graph_size = lhs > rhs
            if not graph_size:
                reasons.append(f"size condition fails: {lhs:.4g} <= {rhs:.4g}")
    else:
        reasons.append("size condition needs the kernel")

    activation = True
    if nonlinearity is not None:
        rep = nonlinearity_check(nonlinearity)
        activation = rep.passes
        if not activation:
            reasons.append(f"activation rejected: {rep.reason}")

    return AssumptionReport(smooth_kernel, filter_band, smooth_signal,
                            graph_size, activation, tuple(reasons))


def _transfer_factor(ing: BoundIngredients, band_count, band_margin) -> float:
    if band_count is None or band_margin is None:
        raise ValueError("band count and margin are required")
    if band_margin <= 0:
        raise ValueError("band margin must be positive")
    return ing.filter_lipschitz + math.pi * band_count / band_margin


def _disc_slope(ing: BoundIngredients, main_text_constants: bool) -> float:
    return ing.filter_lipschitz_inner if main_text_constants else ing.filter_lipschitz


def _require(ing: BoundIngredients, *names: str):
    missing = [n for n in names if getattr(ing, n) is None]
    if missing:
        raise ValueError(f"missing ingredients: {', '.join(missing)}")


def _check_size_condition(ing: BoundIngredients, *sizes: int):
    """Enforce n - log(2n/chi)/d > 2 A_w/d when the max degree is known.

    Without the degree ingredient the condition is the caller's burden
    (the bounds assume it rather than measure it)."""
    d = ing.kernel_max_degree
    if d is None:
        return
    if d <= 0:
        raise ValueError("size condition undefined: kernel max degree is zero")
    a_w = ing.kernel_lipschitz or 0.0
    for n in sizes:
        if n - math.log(2 * n / ing.edge_risk) / d <= 2 * a_w / d:
            raise ValueError(f"size condition fails at n={n} "
                             f"(degree {d:.4g}, smoothness {a_w:.4g})")


def bound_generic_filter(ing: BoundIngredients,
                         main_text_constants: bool = False) -> BoundReport:
    """Filter approximation bound from measured kernel and signal gaps."""
    _require(ing, "kernel_distance", "signal_distance")
    t1 = (_transfer_factor(ing, ing.band_count, ing.band_margin)
          * ing.kernel_distance * ing.signal_norm)
    t2 = (_disc_slope(ing, main_text_constants) * ing.band_threshold + 2.0) * ing.signal_distance
    t3 = 2.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    return BoundReport.build(t1, t2, t3, confidence=1.0)


def bound_template_filter(ing: BoundIngredients,
                          main_text_constants: bool = False) -> BoundReport:
    """Deterministic bound on regular-label graphs: kernel gap <= 2 A_w/n,
    signal gap <= A_x/n."""
    _require(ing, "kernel_lipschitz", "signal_lipschitz", "size")
    t1 = (_transfer_factor(ing, ing.band_count, ing.band_margin)
          * (2.0 * ing.kernel_lipschitz / ing.size) * ing.signal_norm)
    t2 = (ing.signal_lipschitz
          * (_disc_slope(ing, main_text_constants) * ing.band_threshold + 2.0) / ing.size)
    t3 = 2.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    return BoundReport.build(t1, t2, t3, confidence=1.0)


def bound_weighted_filter(ing: BoundIngredients,
                          main_text_constants: bool = False) -> BoundReport:
    """Random-label bound: the 1/n terms inflate by the label factor."""
    _require(ing, "kernel_lipschitz", "signal_lipschitz", "size")
    if ing.size < min_size_for_spacing_risk(ing.spacing_risk):
        raise ValueError(
            f"size {ing.size} below the minimum {min_size_for_spacing_risk(ing.spacing_risk)} "
            f"for spacing risk {ing.spacing_risk}")
    a = node_stochasticity_alpha(ing.size, ing.label_risk)
    t1 = (_transfer_factor(ing, ing.band_count, ing.band_margin)
          * (2.0 * ing.kernel_lipschitz * a / ing.size) * ing.signal_norm)
    t2 = (ing.signal_lipschitz * a
          * (_disc_slope(ing, main_text_constants) * ing.band_threshold + 2.0) / ing.size)
    t3 = 2.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    conf = (1 - 2 * ing.label_risk) * (1 - ing.spacing_risk)
    return BoundReport.build(t1, t2, t3, confidence=conf)


def bound_weighted_to_stochastic(ing: BoundIngredients,
                                 main_text_constants: bool = False) -> BoundReport:
    """Same labels, Bernoulli edges: inputs coincide, so no signal term."""
    _require(ing, "size")
    _check_size_condition(ing, ing.size)
    n = ing.size
    t1 = (_transfer_factor(ing, ing.band_count, ing.band_margin)
          * 2.0 * math.sqrt(math.log(2 * n / ing.edge_risk) / n) * ing.signal_norm)
    t3 = 2.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    return BoundReport.build(t1, 0.0, t3, confidence=1 - ing.edge_risk)


def bound_stochastic_filter(ing: BoundIngredients,
                            main_text_constants: bool = False) -> BoundReport:
    """Random labels and Bernoulli edges combined by a triangle step."""
    _require(ing, "kernel_lipschitz", "signal_lipschitz", "size")
    if ing.size < min_size_for_spacing_risk(ing.spacing_risk):
        raise ValueError(
            f"size {ing.size} below the minimum for spacing risk {ing.spacing_risk}")
    _check_size_condition(ing, ing.size)
    a = node_stochasticity_alpha(ing.size, ing.label_risk)
    b = edge_stochasticity_beta(ing.size, ing.edge_risk)
    t1 = (_transfer_factor(ing, ing.band_count, ing.band_margin)
          * 2.0 * (ing.kernel_lipschitz * a + b) / ing.size * ing.signal_norm)
    t2 = (ing.signal_lipschitz * a
          * (_disc_slope(ing, main_text_constants) * ing.band_threshold + 2.0) / ing.size)
    t3 = 4.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    conf = (1 - 2 * ing.label_risk) * (1 - ing.spacing_risk) * (1 - ing.edge_risk)
    return BoundReport.build(t1, t2, t3, confidence=conf)


def _two_graph_pieces(ing: BoundIngredients, mode: str):
    _require(ing, "kernel_lipschitz", "signal_lipschitz", "size", "size2",
             "band_count_max", "band_margin_min")
    if mode not in ("stochastic", "weighted", "template"):
        raise ValueError(f"unknown mode {mode!r}")
    sizes = (ing.size, ing.size2)
    if mode == "stochastic":
        _check_size_condition(ing, *sizes)
    if mode != "template":
        n_min = min_size_for_spacing_risk(ing.spacing_risk)
        for n in sizes:
            if n < n_min:
                raise ValueError(f"size {n} below the minimum {n_min} "
                                 f"for spacing risk {ing.spacing_risk}")
    # Remark form: edge factor drops for weighted/template graphs, and the
    # label factor collapses to one on regular labels.
    def alpha(n):
        return 1.0 if mode == "template" else node_stochasticity_alpha(n, ing.label_risk)

    def beta(n):
        return edge_stochasticity_beta(n, ing.edge_risk) if mode == "stochastic" else 0.0

    stoch = max((ing.kernel_lipschitz * alpha(n) + beta(n)) / n for n in sizes)
    label = max(alpha(n) / n for n in sizes)
    if mode == "template":
        conf = 1.0
    elif mode == "weighted":
        conf = ((1 - 2 * ing.label_risk) * (1 - ing.spacing_risk)) ** 2
    else:
        conf = ((1 - 2 * ing.label_risk) * (1 - ing.spacing_risk)
                * (1 - ing.edge_risk)) ** 2
    return stoch, label, conf


def bound_filter_transfer(ing: BoundIngredients, main_text_constants: bool = False,
                          mode: str = "stochastic") -> BoundReport:
    """Filter moved between two independently sampled graphs; the graph
    with the worst stochasticity-to-size ratio dominates. The default is
    0/1 graphs; weighted/template modes drop the edge (and label)
    factors."""
    stoch, label, conf = _two_graph_pieces(ing, mode)
    t1 = (4.0 * _transfer_factor(ing, ing.band_count_max, ing.band_margin_min)
          * stoch * ing.signal_norm)
    t2 = (2.0 * ing.signal_lipschitz
          * (_disc_slope(ing, main_text_constants) * ing.band_threshold + 2.0) * label)
    t3 = 8.0 * ing.filter_lipschitz_inner * ing.band_threshold * ing.signal_norm
    return BoundReport.build(t1, t2, t3, confidence=conf)


_DEPTH_NOTE = ("energy term uses the inner-band slope per the statement form; "
               "the derivation carries the outer slope instead")


def _depth_factor(ing: BoundIngredients) -> float:
    if ing.layers < 1 or ing.width < 1:
        raise ValueError("network depth and width must be at least 1")
    return ing.layers * ing.width ** (ing.layers - 1)


def bound_network_approx(ing: BoundIngredients,
                         main_text_constants: bool = False) -> BoundReport:
    """Deep variant of the single-graph bound: transferability and energy
    terms scale with L F^(L-1); the discretization term does not."""
    base = bound_stochastic_filter(ing, main_text_constants)
    lf = _depth_factor(ing)
    return BoundReport.build(lf * base.terms["transferability"],
                             base.terms["discretization"],
                             lf * base.terms["nontransferable"],
                             confidence=base.confidence, notes=(_DEPTH_NOTE,))


def bound_network_transfer(ing: BoundIngredients, main_text_constants: bool = False,
                           mode: str = "stochastic") -> BoundReport:
    """Deep variant of the two-graph transfer bound."""
    base = bound_filter_transfer(ing, main_text_constants, mode)
    lf = _depth_factor(ing)
    return BoundReport.build(lf * base.terms["transferability"],
                             base.terms["discretization"],
                             lf * base.terms["nontransferable"],
                             confidence=base.confidence, notes=(_DEPTH_NOTE,))


def flags_from_ingredients(ing: BoundIngredients) -> AssumptionReport:
    """Assumption flags derivable from an ingredients file alone.

    Smoothness checks reduce to the constants being supplied; the size
    condition is checkable when the kernel's max degree is given; the
    activation cannot be checked here and passes with a note.
    """
    reasons = []
    smooth_kernel = ing.kernel_lipschitz is not None
    if not smooth_kernel:
        reasons.append("kernel smoothness constant not supplied")
    smooth_signal = ing.signal_lipschitz is not None
    if not smooth_signal:
        reasons.append("signal smoothness constant not supplied")
    filter_band = ing.filter_lipschitz_inner <= ing.filter_lipschitz
    graph_size = False
    if ing.kernel_max_degree is None or ing.size is None:
        reasons.append("size condition needs kernel_max_degree and size")
    elif ing.kernel_max_degree <= 0:
        reasons.append("size condition undefined: kernel max degree is zero")
    else:
        lhs = ing.size - math.log(2 * ing.size / ing.edge_risk) / ing.kernel_max_degree
        rhs = 2 * (ing.kernel_lipschitz or 0.0) / ing.kernel_max_degree
        graph_size = lhs > rhs
        if not graph_size:
            reasons.append(f"size condition fails: {lhs:.4g} <= {rhs:.4g}")
    reasons.append("activation not checkable from ingredients; assumed")
    return AssumptionReport(smooth_kernel, filter_band, smooth_signal,
                            graph_size, True, tuple(reasons))


# CLI names for each evaluator; the short aliases are part of the
# published command surface.
BOUND_EVALUATORS = {
    "lemma-generic": bound_generic_filter,
    "prop1": bound_template_filter,
    "prop2": bound_weighted_filter,
    "lemma1": bound_weighted_to_stochastic,
    "thm1": bound_stochastic_filter,
    "thm2": bound_filter_transfer,
    "thm3": bound_network_approx,
    "thm4": bound_network_transfer,
}


@dataclass(frozen=True)
class McResult:
    frequency: float
    trials: int
    target: float
    threshold: float
    gate_satisfied: bool = True

    @property
    def stderr(self) -> float:
        p = self.frequency
        return math.sqrt(max(p * (1 - p), 1e-12) / self.trials)


def mc_verify_spacing(n: int, chi1: float, chi2: float, trials: int,
                      seed: int = 0) -> McResult:
    """Empirical frequency of the largest uniform spacing staying below
    alpha(n, chi1)/n; should reach (1-2 chi1)(1-chi2) minus noise.

    The target confidence is only guaranteed for n at least 4/chi2; the
    event itself is well defined for any n, so the verifier runs anyway
    and records whether the size gate held.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    threshold = node_stochasticity_alpha(n, chi1) / n
    rng = rng_stream(seed, 0, "spacing")
    u = np.sort(rng.uniform(size=(trials, n)), axis=1)
    padded = np.concatenate([np.zeros((trials, 1)), u, np.ones((trials, 1))], axis=1)
    max_spacing = np.diff(padded, axis=1).max(axis=1)
    freq = float(np.mean(max_spacing <= threshold))
    return McResult(freq, trials, target=(1 - 2 * chi1) * (1 - chi2),
                    threshold=threshold,
                    gate_satisfied=n >= min_size_for_spacing_risk(chi2))


def mc_verify_edge_norm(w: Graphon, n: int, chi: float, trials: int,
                        seed: int = 0) -> McResult:
    """Empirical frequency of ||S_edges - S_weights||_2 <= sqrt(4n log(2n/chi)).

    Each trial draws fresh labels and fresh Bernoulli edges; the realized
    max expected degree must exceed 4 log(2n/chi)/9 for the deviation
    bound to apply.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    degree_floor = 4.0 * math.log(2 * n / chi) / 9.0
    threshold = math.sqrt(4.0 * n * math.log(2 * n / chi))
    hits = 0
    for t in range(trials):
        gw = sample_weighted(w, n, seed, trial=t)
        d = float(np.max(gw.gso.sum(axis=1)))
        if d <= degree_floor:
            raise ValueError(
                f"max expected degree {d:.4g} does not clear the floor {degree_floor:.4g}")
        gs = bernoulli_from_weighted(gw, seed, trial=t)
        dev = float(np.max(np.abs(np.linalg.eigvalsh(gs.gso - gw.gso))))
        hits += dev <= threshold
    return McResult(hits / trials, trials, target=1 - chi, threshold=threshold)
