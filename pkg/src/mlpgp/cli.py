"""Command-line front end: deterministic, file-based experiment pipelines.

Every subcommand emits plot-ready CSV/JSON (17-significant-digit floats);
plotting itself is left to external tools.  All randomness flows from the
single --seed flag through named substreams, so identical flags give
byte-identical outputs.
"""

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import data as datamod
from .finite_net import IIDGaussian, NetworkShape, activations, get_scheme, \
    sample_weights
from .gp import GPModel, posterior_predictive, sample_prior, circle_traversal
from .hyper import GridSpec, HyperPrior, MHConfig, grid_eval, \
    marginal_predictive, mh_sample, substitute_hyper
from .kernels import LayerHyper, NetworkHyper, kernel_matrix
from .mmd import convergence_experiment

__all__ = ["main"]

ESTIMATORS = ("mle", "map", "mle-mu0", "map-mu0", "marginal")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _subseed(seed: int, label: str) -> int:
    """Named substream of the master seed (stable across platforms)."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2 ** 63)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dataset_arg(text: str) -> str:
    if text in ("sine", "xor") or text.startswith("snelson:"):
        return text
    raise argparse.ArgumentTypeError(
        f"unknown dataset {text!r}; expected sine, xor or snelson:PATH")


def _load_dataset(spec: str, seed: int) -> datamod.Dataset:
    if spec == "sine":
        return datamod.gen_sine(_subseed(seed, "dataset"))
    if spec == "xor":
        return datamod.gen_smooth_xor(_subseed(seed, "dataset"))
    return datamod.load_snelson(spec.split(":", 1)[1])


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise argparse.ArgumentTypeError(
            "grid must be mu_lo:mu_hi:sig_lo:sig_hi[:res]")
    try:
        lo, hi, slo, shi = (float(p) for p in parts[:4])
        res = int(parts[4]) if len(parts) == 5 else 200
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return GridSpec((lo, hi), (slo, shi), res)


def _parse_widths(text: str):
    try:
        widths = tuple(int(w) for w in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not widths:
        raise argparse.ArgumentTypeError("need at least one width")
    return widths


def _template(args, input_dim: int) -> NetworkHyper:
    layers = [LayerHyper(args.mu, np.sqrt(args.sigma2))] * (args.depth - 1)
    layers.append(LayerHyper(0.0, 1.0))
    if args.depth == 1:
        layers = [LayerHyper(args.mu, np.sqrt(args.sigma2))]
    return NetworkHyper(args.slope, input_dim, tuple(layers), True)


def _mse(pred, truth) -> float:
    return float(np.mean((np.asarray(pred) - np.asarray(truth)) ** 2))


def cmd_kernel_curve(args) -> int:
    """Normalised kernel against the input angle, optionally with an
    empirical estimate from a sampled finite network."""
    if args.n_theta < 1:
        raise SystemExit("--n-theta must be >= 1")
    thetas = np.linspace(0.0, np.pi, args.n_theta)
    rot_rng = np.random.default_rng(_subseed(args.seed, "rotations"))
    weight_rng = np.random.default_rng(_subseed(args.seed, "weights"))
    net = NetworkHyper(args.slope, 2,
                       tuple([LayerHyper(args.mu, np.sqrt(args.sigma2))] * args.depth),
                       final_layer_linear=False)
    rows = []
    header = ["theta0", "kernel"]
    if args.empirical_width:
        header.append("kernel_empirical")
    for theta in thetas:
        q, r = np.linalg.qr(rot_rng.standard_normal((2, 2)))
        q = q * np.sign(np.diag(r))
        x = q @ np.array([1.0, 0.0])
        y = q @ np.array([np.cos(theta), np.sin(theta)])
        K = kernel_matrix(np.stack([x, y]), np.stack([x, y]), net)
        row = [_fmt(theta), _fmt(K[0, 1] / np.sqrt(K[0, 0] * K[1, 1]))]
        if args.empirical_width:
            shape = NetworkShape(2, (args.empirical_width,) * args.depth, 1)
            netw = sample_weights(shape, IIDGaussian(args.mu, np.sqrt(args.sigma2)),
                                  args.slope, weight_rng.spawn(1)[0])
            acts = activations(netw, np.stack([x, y]))[args.depth - 1]
            gram = acts @ acts.T / acts.shape[1]
            row.append(_fmt(gram[0, 1] / np.sqrt(gram[0, 0] * gram[1, 1])))
        rows.append(row)
    _write_csv(args.out, header, rows)
    return 0


def _fit_point(dataset, template, spec, estimator, noise_var):
    target = "log-ml" if estimator.startswith("mle") else "log-posterior"
    result = grid_eval(dataset.X_train, dataset.y_train, template, spec,
                       target=target, noise_var=noise_var)
    point = result.argmax_mu0 if estimator.endswith("-mu0") else result.argmax
    return point, result


def cmd_fit(args) -> int:
    """Fit by grid MLE/MAP (optionally mu = 0 constrained) or by the
    MH-marginalised predictive; writes a JSON report and a predictive CSV."""
    dataset = _load_dataset(args.dataset, args.seed)
    template = _template(args, dataset.input_dim)
    spec = args.grid
    report = {
        "dataset": args.dataset,
        "estimator": args.estimator,
        "depth": args.depth,
        "slope": args.slope,
        "noise_var": args.noise_var,
        "seed": args.seed,
    }
    if args.estimator == "marginal":
        surface = grid_eval(dataset.X_train, dataset.y_train, template, spec,
                            target="log-posterior", noise_var=args.noise_var)
        init = surface.argmax[:2]
        config = MHConfig(burn_in=args.burn_in, thin=args.thin,
                          n_samples=args.mh_samples,
                          seed=_subseed(args.seed, "chain"))
        chain = mh_sample(dataset.X_train, dataset.y_train, template,
                          HyperPrior(), config, init, noise_var=args.noise_var)
        pred_test = marginal_predictive(dataset.X_test, dataset.X_train,
                                        dataset.y_train, template, chain,
                                        noise_var=args.noise_var)
        pred_train = marginal_predictive(dataset.X_train, dataset.X_train,
                                         dataset.y_train, template, chain,
                                         noise_var=args.noise_var)
        mean_test, var_test = pred_test.mean, pred_test.var
        mean_train = pred_train.mean
        report["chain"] = {
            "acceptance_rate": chain.acceptance_rate,
            "map": chain.map_estimate(),
            "posterior_mean": chain.samples.mean(axis=0).tolist(),
            "n_samples": len(chain),
            "init": list(init),
            "skipped_predictions": pred_test.n_skipped,
        }
    else:
        (mu, sig2, value), surface = _fit_point(dataset, template, spec,
                                                args.estimator, args.noise_var)
        net = substitute_hyper(template, mu, sig2)
        model = GPModel(net, args.noise_var)
        pp_test = posterior_predictive(dataset.X_test, dataset.X_train,
                                       dataset.y_train, model)
        pp_train = posterior_predictive(dataset.X_train, dataset.X_train,
                                        dataset.y_train, model)
        mean_test, var_test = pp_test.mean, pp_test.var
        mean_train = pp_train.mean
        report["hyperparameters"] = {"mu": mu, "sigma2": sig2,
                                     "objective": value}
        report["grid_failed_cells"] = surface.n_failed
    report["train_mse"] = _mse(mean_train, dataset.y_train)
    report["test_mse"] = _mse(mean_test, dataset.y_test)
    out = Path(args.out)
    _write_json(out, report)
    d = dataset.input_dim
    header = [f"x{i + 1}" for i in range(d)] + ["y_true", "pred_mean", "pred_var"]
    rows = [[_fmt(v) for v in row] + [_fmt(t), _fmt(m), _fmt(s)]
            for row, t, m, s in zip(dataset.X_test, dataset.y_test,
                                    mean_test, var_test)]
    _write_csv(out.with_suffix(".csv"), header, rows)
    return 0


def cmd_grid(args) -> int:
    """Evidence or hyper-posterior surface as CSV plus argmax metadata."""
    dataset = _load_dataset(args.dataset, args.seed)
    template = _template(args, dataset.input_dim)
    result = grid_eval(dataset.X_train, dataset.y_train, template, args.grid,
                       target=args.target, noise_var=args.noise_var)
    header = ["mu/sigma2"] + [_fmt(s) for s in result.sig2_axis]
    rows = [[_fmt(mu)] + [_fmt(v) for v in row]
            for mu, row in zip(result.mu_axis, result.values)]
    out = Path(args.out)
    _write_csv(out, header, rows)
    meta = {
        "target": result.target,
        "argmax": {"mu": result.argmax[0], "sigma2": result.argmax[1],
                   "value": result.argmax[2]},
        "argmax_mu0": {"mu": result.argmax_mu0[0],
                       "sigma2": result.argmax_mu0[1],
                       "value": result.argmax_mu0[2]},
        "failed_cells": result.n_failed,
        "jitter_events": result.jitter_events,
        "mu_range": list(args.grid.mu_range),
        "sig2_range": list(args.grid.sig2_range),
        "resolution": args.grid.resolution,
    }
    _write_json(out.with_suffix(".json"), meta)
    if result.n_failed:
        print(f"warning: {result.n_failed} grid cells failed to factorise",
              file=sys.stderr)
    return 0


def cmd_mh(args) -> int:
    """Hyper-posterior MH chain as CSV (mu, sigma2, log_density)."""
    dataset = _load_dataset(args.dataset, args.seed)
    template = _template(args, dataset.input_dim)
    surface = grid_eval(dataset.X_train, dataset.y_train, template, args.grid,
                        target="log-posterior", noise_var=args.noise_var)
    init = surface.argmax[:2]
    config = MHConfig(burn_in=args.burn_in, thin=args.thin,
                      n_samples=args.mh_samples,
                      seed=_subseed(args.seed, "chain"))
    chain = mh_sample(dataset.X_train, dataset.y_train, template, HyperPrior(),
                      config, init, noise_var=args.noise_var)
    rows = [[_fmt(mu), _fmt(s2), _fmt(ld)]
            for (mu, s2), ld in zip(chain.samples, chain.log_densities)]
    _write_csv(args.out, ["mu", "sigma2", "log_density"], rows)
    print(f"acceptance rate {chain.acceptance_rate:.3f}; "
          f"chain MAP {chain.map_estimate()}; grid init {init}")
    return 0


def cmd_mmd(args) -> int:
    """Finite-width vs limiting-GP MMD^2 curve as CSV."""
    if args.scheme == "iid":
        scheme = IIDGaussian(args.mu, np.sqrt(args.sigma2))
    else:
        scheme = get_scheme(args.scheme, f4_sigma=args.f4_sigma)
    result = convergence_experiment(
        scheme, args.depth, args.widths, d_probe=args.probes,
        n_samples=args.mmd_samples, input_dim=args.input_dim,
        seed=_subseed(args.seed, "mmd"), a=args.slope)
    rows = [[str(w), _fmt(m), _fmt(lo), _fmt(hi)]
            for w, m, lo, hi in zip(result.widths, result.mmd2,
                                    result.null_lo, result.null_hi)]
    _write_csv(args.out, ["width", "mmd2", "null_low", "null_high"], rows)
    return 0


def cmd_prior_draws(args) -> int:
    """GP prior draws along a random great circle, as CSV columns."""
    points = circle_traversal(args.dim, args.n_points,
                              _subseed(args.seed, "probes"))
    net = NetworkHyper(args.slope, args.dim,
                       tuple([LayerHyper(args.mu, np.sqrt(args.sigma2))] * (args.depth - 1)
                             + [LayerHyper(0.0, 1.0)]),
                       final_layer_linear=True)
    draws = sample_prior(points, GPModel(net, 0.0), args.n_draws,
                         _subseed(args.seed, "draws"))
    t = np.linspace(0.0, 2.0 * np.pi, args.n_points, endpoint=False)
    header = ["t"] + [f"draw_{i + 1}" for i in range(args.n_draws)]
    rows = [[_fmt(tv)] + [_fmt(v) for v in draws[:, i]]
            for i, tv in enumerate(t)]
    _write_csv(args.out, header, rows)
    return 0


def _add_common(p, dataset=False, grid=False, hyper=True):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="output path (CSV or JSON)")
    if dataset:
        p.add_argument("--dataset", required=True, type=_dataset_arg,
                       help="sine | xor | snelson:PATH")
        p.add_argument("--noise-var", type=float, default=0.1,
                       help="observation noise variance")
    if grid:
        p.add_argument("--grid", type=_parse_grid,
                       default=GridSpec(),
                       help="mu_lo:mu_hi:sig_lo:sig_hi[:res], default "
                            "-2.5:1.0:0.1:8.0:200")
    if hyper:
        p.add_argument("--depth", type=int, default=2, help="number of layers")
        p.add_argument("--slope", type=float, default=0.0, help="LReLU slope")
        p.add_argument("--mu", type=float, default=0.0, help="layer weight mean")
        p.add_argument("--sigma2", type=float, default=2.0,
                       help="layer weight variance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlpgp",
        description="Limiting-GP models of wide LReLU networks: experiment "
                    "pipelines with deterministic CSV/JSON outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-curve",
                       help="normalised kernel vs input angle")
    _add_common(p)
    p.add_argument("--n-theta", type=int, default=50)
    p.add_argument("--empirical-width", type=int, default=0,
                   help="if > 0, add an empirical column from one finite "
                        "network of this width")
    p.set_defaults(func=cmd_kernel_curve)

    p = sub.add_parser("fit", help="GP regression with a chosen estimator")
    _add_common(p, dataset=True, grid=True)
    p.add_argument("--estimator", choices=ESTIMATORS, required=True)
    p.add_argument("--mh-samples", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=20)
    p.add_argument("--thin", type=int, default=20)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("grid", help="evidence / hyper-posterior surface")
    _add_common(p, dataset=True, grid=True)
    p.add_argument("--target", choices=("log-ml", "log-posterior"),
                   default="log-ml")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("mh", help="hyper-posterior MH chain")
    _add_common(p, dataset=True, grid=True)
    p.add_argument("--mh-samples", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=20)
    p.add_argument("--thin", type=int, default=20)
    p.set_defaults(func=cmd_mh)

    p = sub.add_parser("mmd", help="finite-width convergence MMD^2 curve")
    _add_common(p)
    p.add_argument("--scheme", choices=("iid", "f1", "f2", "f3", "f4"),
                   required=True)
    p.add_argument("--widths", type=_parse_widths, default=(16, 64, 256, 1024))
    p.add_argument("--mmd-samples", type=int, default=2000)
    p.add_argument("--probes", type=int, default=4)
    p.add_argument("--input-dim", type=int, default=10)
    p.add_argument("--f4-sigma", choices=("table", "analytic"),
                   default="table")
    p.set_defaults(func=cmd_mmd)

    p = sub.add_parser("prior-draws", help="GP prior draws on a great circle")
    _add_common(p)
    p.add_argument("--dim", type=int, default=10)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--n-draws", type=int, default=5)
    p.set_defaults(func=cmd_prior_draws)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "depth", 1) < 1:
        build_parser().error("--depth must be >= 1")
    if getattr(args, "sigma2", 1.0) <= 0.0:
        build_parser().error("--sigma2 must be positive")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
