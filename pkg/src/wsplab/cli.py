"""Command line interface.

Subcommands: sample, spectrum, filter, gnn (train/eval), bounds,
homdensity, sweep, train-transfer, report. Graphs travel as "i,j,w"
edge-list CSVs with a label file alongside; graphons, signals, models,
ingredients, and reports travel as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import bounds as bnd
from .experiments import (ExperimentConfig, TrainTransferConfig, emit_report,
                          run_train_transfer, run_transfer_sweep)
from .filters import apply_graph_filter, estimate_spectral_profile
from .gnn import (GnnConfig, TrainConfig, gnn_forward, init_coefficients,
                  model_from_json, model_to_json, train_adam)
from .graphon import (builtin_graphon, graphon_from_json, load_graph_csv,
                      load_json, save_graph_csv, save_labels)
from .homdensity import builtin_motif, hom_density_graph, hom_density_graphon
from .reporting import render_report_figures
from .sampling import SampleSpec, sample_graph
from .spectral import eigendecompose


def _load_graphon_arg(spec: str):
    if spec.startswith("builtin:"):
        return builtin_graphon(spec[len("builtin:"):])
    return graphon_from_json(load_json(spec))


def _load_signal_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=1)


def _save_signal_csv(values: np.ndarray, path) -> None:
    with open(path, "w") as f:
        for v in np.asarray(values, float).reshape(-1):
            f.write(repr(float(v)) + "\n")


def _cmd_sample(args) -> int:
    w = _load_graphon_arg(args.graphon)
    spec = SampleSpec(n=args.n, mode=args.mode, seed=args.seed, trial=args.trial)
    g = sample_graph(w, spec, self_loops=not args.no_self_loops)
    save_graph_csv(g, args.out)
    save_labels(g, args.labels_out or args.out + ".labels")
    return 0


def _cmd_spectrum(args) -> int:
    g = load_graph_csv(args.infile, labels_path=args.labels, n=args.n)
    scale = "normalized" if args.normalized else "raw"
    d = eigendecompose(g, scale=scale)
    out = {"scale": d.scale,
           "indices": d.indices.tolist(),
           "eigenvalues": d.eigenvalues.tolist()}
    if args.full:
        out["eigenvectors"] = d.eigenvectors.tolist()
    with open(args.out, "w") as f:
        json.dump(out, f)
        f.write("\n")
    return 0


def _cmd_filter(args) -> int:
    taps = np.array([float(t) for t in args.taps.split(",")])
    g = load_graph_csv(args.graph, labels_path=args.labels, n=args.n)
    x = _load_signal_csv(args.signal)
    scale = "normalized" if args.normalized else "raw"
    y = apply_graph_filter(taps, g, x, scale=scale)
    _save_signal_csv(y, args.out)
    if args.profile_out:
        prof = estimate_spectral_profile(taps, args.band_threshold)
        with open(args.profile_out, "w") as f:
            json.dump({"band_threshold": prof.band_threshold,
                       "outer_lipschitz": prof.outer_lipschitz,
                       "inner_lipschitz": prof.inner_lipschitz,
                       "sup_norm": prof.sup_norm,
                       "compliant": prof.compliant}, f)
            f.write("\n")
    return 0


def _cmd_gnn_train(args) -> int:
    cfg_obj = load_json(args.config)
    gcfg = GnnConfig(widths=tuple(cfg_obj["widths"]), taps=int(cfg_obj["taps"]),
                     nonlinearity=cfg_obj.get("nonlinearity", "relu"),
                     scale=cfg_obj.get("scale", "normalized"))
    g = load_graph_csv(f"{args.data}/graph.csv",
                       labels_path=cfg_obj.get("labels") and f"{args.data}/graph.csv.labels")
    X = np.loadtxt(f"{args.data}/signals.csv", delimiter=",", ndmin=2)
    Y = np.loadtxt(f"{args.data}/targets.csv", delimiter=",", ndmin=2)
    if X.shape[0] != g.n:
        raise SystemExit(f"signals have {X.shape[0]} rows, graph has {g.n} nodes")
    dataset = [(g, X[:, j], Y[:, j]) for j in range(X.shape[1])]
    tensor0 = init_coefficients(gcfg, seed=int(cfg_obj.get("seed", 0)),
                                cap_response=cfg_obj.get("cap_response"))
    tc = TrainConfig(lr=float(cfg_obj.get("lr", 5e-4)),
                     steps=int(cfg_obj.get("steps", 1000)),
                     batch_size=int(cfg_obj.get("batch_size", 16)),
                     seed=int(cfg_obj.get("seed", 0)),
                     lipschitz_penalty=float(cfg_obj.get("lipschitz_penalty", 0.0)))
    tensor, trace = train_adam(tensor0, gcfg, dataset, tc)
    out = model_to_json(tensor, gcfg)
    out["final_loss"] = float(trace[-1])
    with open(args.out, "w") as f:
        json.dump(out, f)
        f.write("\n")
    return 0


def _cmd_gnn_eval(args) -> int:
    tensor, gcfg = model_from_json(load_json(args.model))
    g = load_graph_csv(args.graph, labels_path=args.labels, n=args.n)
    x = _load_signal_csv(args.signal)
    y = gnn_forward(tensor, gcfg, g, x)
    flat = y[:, 0] if y.shape[1] == 1 else y.reshape(-1)
    if args.out:
        _save_signal_csv(flat, args.out)
    else:
        for v in flat:
            print(repr(float(v)))
    return 0


def _cmd_bounds(args) -> int:
    ing = bnd.BoundIngredients.from_json(load_json(args.ingredients))
    evaluator = bnd.BOUND_EVALUATORS[args.which]
    report = evaluator(ing, args.main_text_constants)
    out = report.to_json()
    out["flags"] = asdict(bnd.flags_from_ingredients(ing))
    with open(args.out, "w") as f:
        json.dump(out, f, indent=2)
        f.write("\n")
    return 0


def _cmd_homdensity(args) -> int:
    motif = builtin_motif(args.motif)
    if args.target.endswith(".json"):
        w = graphon_from_json(load_json(args.target))
        est = hom_density_graphon(motif, w, mc_samples=args.samples, seed=args.seed)
        out = {"density": est.value, "stderr": est.stderr, "exact": est.exact}
    else:
        g = load_graph_csv(args.target, labels_path=args.labels, n=args.n)
        out = {"density": hom_density_graph(motif, g), "stderr": 0.0, "exact": True}
    with open(args.out, "w") as f:
        json.dump(out, f)
        f.write("\n")
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_json(load_json(args.config))
    report = run_transfer_sweep(cfg)
    emit_report(report, args.out, prefix=args.prefix)
    return 0


def _cmd_train_transfer(args) -> int:
    cfg = TrainTransferConfig.from_json(load_json(args.config))
    report = run_train_transfer(cfg)
    emit_report(report, args.out, prefix=args.prefix)
    return 0


def _cmd_report(args) -> int:
    written = render_report_figures(args.indir, args.out)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsplab")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a graph from a graphon")
    s.add_argument("--graphon", required=True,
                   help="graphon JSON file or builtin:NAME[:params]")
    s.add_argument("--mode", choices=["template", "weighted", "stochastic"],
                   default="template")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--no-self-loops", action="store_true",
                   help="zero the diagonal of sampled 0/1 graphs")
    s.add_argument("--out", required=True)
    s.add_argument("--labels-out", default=None,
                   help="label file path (default: OUT.labels)")
    s.set_defaults(fn=_cmd_sample)

    s = sub.add_parser("spectrum", help="eigendecompose a graph")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--labels", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--normalized", action="store_true")
    s.add_argument("--full", action="store_true", help="include eigenvectors")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_spectrum)

    s = sub.add_parser("filter", help="apply a polynomial filter to a signal")
    s.add_argument("--taps", required=True, help="comma-separated taps h0,h1,...")
    s.add_argument("--graph", required=True)
    s.add_argument("--labels", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--signal", required=True)
    s.add_argument("--normalized", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--profile-out", default=None,
                   help="also emit the spectral profile JSON here")
    s.add_argument("--band-threshold", type=float, default=0.3)
    s.set_defaults(fn=_cmd_filter)

    g = sub.add_parser("gnn", help="train or evaluate a network")
    gsub = g.add_subparsers(dest="gnn_command", required=True)
    s = gsub.add_parser("train")
    s.add_argument("--config", required=True)
    s.add_argument("--data", required=True,
                   help="directory with graph.csv, signals.csv, targets.csv")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_gnn_train)
    s = gsub.add_parser("eval")
    s.add_argument("--model", required=True)
    s.add_argument("--graph", required=True)
    s.add_argument("--labels", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--signal", required=True)
    s.add_argument("--out", default=None, help="output CSV (default: stdout)")
    s.set_defaults(fn=_cmd_gnn_eval)

    s = sub.add_parser("bounds", help="evaluate a transfer bound")
    s.add_argument("--which", required=True, choices=sorted(bnd.BOUND_EVALUATORS))
    s.add_argument("--ingredients", required=True)
    s.add_argument("--main-text-constants", action="store_true",
                   help="use the statement-form discretization constant")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_bounds)

    s = sub.add_parser("homdensity", help="motif density in a graph or graphon")
    s.add_argument("--motif", required=True,
                   help="edge | path2 | triangle | custom motif JSON path")
    s.add_argument("--target", required=True, help="graph CSV or graphon JSON")
    s.add_argument("--labels", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=_cmd_homdensity)

    s = sub.add_parser("sweep", help="run a transfer sweep from a config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--prefix", default="sweep")
    s.set_defaults(fn=_cmd_sweep)

    s = sub.add_parser("train-transfer",
                       help="train-small/test-big protocol on the teacher task")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--prefix", default="train")
    s.set_defaults(fn=_cmd_train_transfer)

    s = sub.add_parser("report", help="render figures from emitted sweep data")
    s.add_argument("--in", dest="indir", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(fn=_cmd_report)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
