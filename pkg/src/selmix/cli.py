"""Command-line interface.

Subcommands: simulate, fit, analyze, prior-ma, elicit-zeta, dist.  Exit
status is 0 on success, 1 on runtime failure (message on stderr) and 2 on
argument errors.  ``fit`` writes a manifest capturing the configuration,
seed and package version; re-running with ``--config manifest.json``
reproduces the outputs bit for bit.  Multi-chain runs derive the seed of
chain i as seed XOR i.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import binder_estimate, elicit_zeta, posterior_similarity, prior_ma_simulation
from .ensemble import GeParams, ge_log_density, ge_log_norm_const
from .io import (
    read_dataset,
    read_json,
    read_trace,
    write_dataset,
    write_json,
    write_matrix_csv,
    write_trace,
)
from .model import Hyperparams, shifted_poisson_log_pmf, simulate_benchmark
from .sampler import SamplerConfig, run_sampler
from .selberg import (
    SdirParams,
    internal_dispersion_expectation,
    sdir_log_density,
    sdir_log_norm_const,
    sdir_moments,
)

RNG_NAME = "numpy.random.PCG64"

HYPER_KEYS = (
    "alpha0", "lam", "v0", "nu0",
    "gamma_fixed", "gamma_shape", "gamma_rate",
    "zeta_mode", "zeta_fixed", "zeta_shape", "zeta_rate", "rho",
    "q_birth", "step_mu", "step_gamma",
    "burn_in", "thin", "n_samples", "covariance_update", "birth_death", "adapt",
)


def hyperparams_to_dict(hyper):
    out = {}
    for key in HYPER_KEYS:
        value = getattr(hyper, key)
        if isinstance(value, np.ndarray):
            value = value.tolist()
        out[key] = value
    return out


def hyperparams_from_dict(payload):
    kwargs = {}
    for key in HYPER_KEYS:
        if key in payload and payload[key] is not None:
            kwargs[key] = payload[key]
        elif key in payload and key in ("gamma_fixed", "v0", "nu0"):
            kwargs[key] = None
    if "v0" in kwargs and kwargs["v0"] is not None:
        kwargs["v0"] = np.asarray(kwargs["v0"], dtype=float)
    return Hyperparams(**kwargs)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="selmix",
        description="Repulsive Gaussian mixtures with Selberg Dirichlet weight priors",
    )
    parser.add_argument("--version", action="version", version=f"selmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate the planted benchmark dataset")
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--labels-out")
    p_sim.add_argument("--n", type=int, default=300)

    p_fit = sub.add_parser("fit", help="run the MCMC sampler on a CSV dataset")
    p_fit.add_argument("--data")
    p_fit.add_argument("--out-dir", required=True)
    p_fit.add_argument("--config", help="JSON config or manifest; flags override")
    p_fit.add_argument("--seed", type=int)
    p_fit.add_argument("--chains", type=int)
    p_fit.add_argument("--record-weights", action="store_true", default=None)
    p_fit.add_argument("--alpha0", type=float)
    p_fit.add_argument("--lam", type=float)
    p_fit.add_argument("--nu0", type=float)
    p_fit.add_argument("--v0-diag", help="comma-separated diagonal of the scale matrix")
    p_fit.add_argument("--gamma", type=float, help="fix gamma at this value")
    p_fit.add_argument("--gamma-shape", type=float)
    p_fit.add_argument("--gamma-rate", type=float)
    p_fit.add_argument("--zeta-mode", choices=["fixed", "gamma", "ratio"])
    p_fit.add_argument("--zeta", type=float, help="value used when zeta is fixed")
    p_fit.add_argument("--zeta-shape", type=float)
    p_fit.add_argument("--zeta-rate", type=float)
    p_fit.add_argument("--rho", type=float)
    p_fit.add_argument("--q-birth", type=float)
    p_fit.add_argument("--step-mu", type=float)
    p_fit.add_argument("--step-gamma", type=float)
    p_fit.add_argument("--burn-in", type=int)
    p_fit.add_argument("--thin", type=int)
    p_fit.add_argument("--n-samples", type=int)
    p_fit.add_argument("--covariance-update", choices=["centered", "literal"])
    p_fit.add_argument("--birth-death", choices=["reversible", "append"])
    p_fit.add_argument("--no-adapt", action="store_true", default=None)

    p_an = sub.add_parser("analyze", help="summarize one or more trace files")
    p_an.add_argument("--trace", action="append", required=True)
    p_an.add_argument("--out-dir", required=True)

    p_pma = sub.add_parser("prior-ma", help="simulate the prior allocated-component count")
    p_pma.add_argument("--alpha0", type=float, default=1.0)
    p_pma.add_argument("--gamma", type=float, required=True)
    p_pma.add_argument("--m", type=int, required=True)
    p_pma.add_argument("--n", type=int, default=100)
    p_pma.add_argument("--reps", type=int, default=10000)
    p_pma.add_argument("--seed", type=int, default=0)
    p_pma.add_argument("--out")

    p_ez = sub.add_parser("elicit-zeta", help="match cluster spread against the ensemble")
    p_ez.add_argument("--data", required=True)
    p_ez.add_argument("--k", type=int, required=True)
    p_ez.add_argument("--grid", default="0.01,0.05,0.1,0.5,1")
    p_ez.add_argument("--reps", type=int, default=200)
    p_ez.add_argument("--seed", type=int, default=0)

    p_dist = sub.add_parser("dist", help="evaluate distribution quantities")
    p_dist.add_argument(
        "quantity",
        choices=[
            "sdir-mean", "sdir-variance", "sdir-second-moment",
            "sdir-marginal-moment", "sdir-product-moment",
            "sdir-log-const", "sdir-log-pdf", "dispersion",
            "ge-log-const", "ge-log-pdf", "count-log-pmf",
        ],
    )
    p_dist.add_argument("--alpha", type=float)
    p_dist.add_argument("--gamma", type=float)
    p_dist.add_argument("--m", type=int)
    p_dist.add_argument("--k", type=int, default=1)
    p_dist.add_argument("--tau", type=float)
    p_dist.add_argument("--zeta", type=float)
    p_dist.add_argument("--lam", type=float)
    p_dist.add_argument("--w", help="comma-separated weight vector")
    p_dist.add_argument("--x", help="comma-separated location vector")
    return parser


def _parse_vector(text):
    return np.asarray([float(v) for v in text.split(",")], dtype=float)


def _cmd_simulate(args):
    y, labels = simulate_benchmark(args.seed, n_obs=args.n)
    write_dataset(args.out, y)
    if args.labels_out:
        write_dataset(args.labels_out, (labels + 1).reshape(-1, 1).astype(float), header=["label"])
    return 0


def _fit_config(args):
    payload = dict(read_json(args.config)) if args.config else {}
    overrides = {
        "alpha0": args.alpha0, "lam": args.lam, "nu0": args.nu0,
        "gamma_fixed": args.gamma,
        "gamma_shape": args.gamma_shape, "gamma_rate": args.gamma_rate,
        "zeta_mode": args.zeta_mode, "zeta_fixed": args.zeta,
        "zeta_shape": args.zeta_shape, "zeta_rate": args.zeta_rate,
        "rho": args.rho, "q_birth": args.q_birth,
        "step_mu": args.step_mu, "step_gamma": args.step_gamma,
        "burn_in": args.burn_in, "thin": args.thin, "n_samples": args.n_samples,
        "covariance_update": args.covariance_update,
        "birth_death": args.birth_death,
    }
    if args.v0_diag is not None:
        overrides["v0"] = np.diag(_parse_vector(args.v0_diag)).tolist()
    if args.no_adapt:
        overrides["adapt"] = False
    for key, value in overrides.items():
        if value is not None:
            payload[key] = value
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.chains is not None:
        payload["chains"] = args.chains
    if args.record_weights:
        payload["record_weights"] = True
    if args.data is not None:
        payload["data"] = args.data
    payload.setdefault("seed", 0)
    payload.setdefault("chains", 1)
    payload.setdefault("record_weights", False)
    if "data" not in payload:
        raise ValueError("no dataset given: pass --data or a config with a 'data' entry")
    return payload


def _cmd_fit(args):
    payload = _fit_config(args)
    hyper = hyperparams_from_dict(payload)
    y = read_dataset(payload["data"])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    seed, chains = int(payload["seed"]), int(payload["chains"])
    if chains < 1:
        raise ValueError("chains must be >= 1")
    summary = {"chains": {}, "seed": seed, "n_chains": chains}
    ma_hist = {}
    for i in range(chains):
        config = SamplerConfig(
            hyper=hyper, seed=seed ^ i, record_weights=bool(payload["record_weights"])
        )
        trace, diag = run_sampler(y, config)
        write_trace(out_dir / f"trace_chain{i}.ndjson", trace)
        summary["chains"][str(i)] = {
            "acceptance_rates": diag.acceptance_rates(),
            "step_mu_final": diag.step_mu_final,
            "step_gamma_final": diag.step_gamma_final,
            "mean_m": float(trace.m.mean()),
            "mean_m_a": float(trace.m_allocated.mean()),
        }
        for value, count in zip(*np.unique(trace.m_allocated, return_counts=True)):
            ma_hist[int(value)] = ma_hist.get(int(value), 0) + int(count)
    # flat copy of chain-0 rates so a single-chain summary is directly consumable
    summary["acceptance_rates"] = summary["chains"]["0"]["acceptance_rates"]
    summary["ma_histogram"] = ma_hist

    manifest = hyperparams_to_dict(hyper.resolved(y.shape[1]))
    manifest.update(
        {
            "data": str(payload["data"]),
            "seed": seed,
            "chains": chains,
            "record_weights": bool(payload["record_weights"]),
            "version": __version__,
            "rng": RNG_NAME,
        }
    )
    write_json(out_dir / "summary.json", summary)
    write_json(out_dir / "manifest.json", manifest)
    return 0


def _cmd_analyze(args):
    traces = [read_trace(p) for p in args.trace]
    n_obs = {t.n_obs for t in traces}
    if len(n_obs) != 1:
        raise ValueError("traces disagree on the number of observations")
    if n_obs.pop() == 0:
        raise ValueError("cannot analyze traces with zero observations")
    merged = traces[0]
    if len(traces) > 1:
        from .analysis import PosteriorTrace

        merged = PosteriorTrace(
            m=np.concatenate([t.m for t in traces]),
            m_allocated=np.concatenate([t.m_allocated for t in traces]),
            alloc=np.vstack([t.alloc for t in traces]),
            gamma=np.concatenate([t.gamma for t in traces]),
            zeta=np.concatenate([t.zeta for t in traces]),
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sim = posterior_similarity(merged)
    write_matrix_csv(out_dir / "psm.csv", sim)
    partition = binder_estimate(merged, sim)
    write_matrix_csv(out_dir / "binder.csv", (partition + 1).reshape(1, -1))
    hist = {
        str(int(v)): int(c)
        for v, c in zip(*np.unique(merged.m_allocated, return_counts=True))
    }
    write_json(
        out_dir / "summary.json",
        {
            "n_samples": int(merged.n_samples),
            "ma_histogram": hist,
            "mean_m": float(merged.m.mean()),
            "mean_m_a": float(merged.m_allocated.mean()),
            "mean_gamma": float(merged.gamma.mean()),
            "mean_zeta": float(merged.zeta.mean()),
        },
    )
    return 0


def _cmd_prior_ma(args):
    rng = np.random.default_rng(args.seed)
    probs = prior_ma_simulation(args.alpha0, args.gamma, args.m, args.n, args.reps, rng)
    lines = [f"{k},{repr(float(p))}" for k, p in enumerate(probs)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_elicit_zeta(args):
    y = read_dataset(args.data)
    rng = np.random.default_rng(args.seed)
    grid = [float(z) for z in args.grid.split(",")]
    chosen = elicit_zeta(y, args.k, grid, rng, reps=args.reps)
    print(f"{chosen:.12g}")
    return 0


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"dist {args.quantity} requires --{name.replace('_', '-')}")


def _cmd_dist(args):
    q = args.quantity
    if q.startswith("sdir") or q == "dispersion":
        _require(args, "alpha", "gamma", "m")
        params = SdirParams(args.alpha, args.gamma, args.m)
        if q == "sdir-mean":
            value = sdir_moments(params).mean
        elif q == "sdir-variance":
            value = sdir_moments(params).variance
        elif q == "sdir-second-moment":
            value = sdir_moments(params).second_moment
        elif q == "sdir-marginal-moment":
            value = sdir_moments(params, k=args.k).marginal_k_moment
        elif q == "sdir-product-moment":
            value = sdir_moments(params, k=args.k).product_moment_k
        elif q == "sdir-log-const":
            value = sdir_log_norm_const(params)
        elif q == "sdir-log-pdf":
            _require(args, "w")
            value = sdir_log_density(_parse_vector(args.w), params)
        else:
            _require(args, "tau")
            value = internal_dispersion_expectation(params, args.tau)
    elif q == "ge-log-const":
        _require(args, "zeta", "m")
        value = ge_log_norm_const(GeParams(args.zeta, args.m))
    elif q == "ge-log-pdf":
        _require(args, "zeta", "m", "x")
        value = ge_log_density(_parse_vector(args.x), GeParams(args.zeta, args.m))
    else:
        _require(args, "m", "lam")
        value = shifted_poisson_log_pmf(args.m, args.lam)
    print(f"{value:.12g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "analyze": _cmd_analyze,
    "prior-ma": _cmd_prior_ma,
    "elicit-zeta": _cmd_elicit_zeta,
    "dist": _cmd_dist,
}


def cli_dispatch(argv=None):
    """Parse ``argv`` and run the selected subcommand; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"selmix: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
