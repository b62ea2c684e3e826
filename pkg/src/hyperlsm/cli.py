"""Command-line interface.

Every option can also be given in a JSON configuration file passed with
``--config``; keys are the option names with dashes replaced by
underscores. Options on the command line override the file, and unknown
keys are rejected.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
divergence.
"""

import argparse
import json
import logging
import os
import sys

from .exceptions import DimensionError, DivergenceError, ManifoldError, ParseError, UndefinedAUCError
from .formats import read_edge_list, read_embedding, write_edge_list, write_embedding, write_report
from .inference import (
    bootstrap_ci,
    estimate,
    information_criteria,
    link_prediction_auc,
    lrt_test,
    relative_errors,
)
from .initialization import InitConfig
from .model import EUCLIDEAN, HYPERBOLIC, LINKS, get_link
from .netgen import SimConfig, graph_stats, simulate
from .optim import FitConfig

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4

#: Environment variable holding the default worker count.
THREADS_ENV = "HYPERLSM_THREADS"

log = logging.getLogger(__name__)


class ConfigError(Exception):
    pass


def _floats(text):
    return tuple(float(x) for x in str(text).split(","))


# option name -> (type, default, help); shared by several commands
_OPTIONS = {
    "n": (int, 500, "number of nodes"),
    "d": (int, 2, "latent dimension"),
    "k": (float, 1.0, "curvature magnitude; 0 simulates the Euclidean model"),
    "radius": (float, 3.0, "radius of the latent disk"),
    "seed": (int, 0, "random seed"),
    "link": (str, "logistic2", f"link function ({', '.join(sorted(LINKS))})"),
    "geometry": (str, HYPERBOLIC, "hyperbolic or euclidean"),
    "freeze_k": (float, None, "fix the curvature at this value"),
    "eta_k": (float, None, "curvature step size (default 1/n^2)"),
    "eta_z": (float, None, "position step size (default 1/n)"),
    "epsilon": (float, 1e-4, "stop when the loss decrease is at most this"),
    "max_iters": (int, 2000, "iteration cap"),
    "k_min": (float, 1e-3, "lower curvature bound"),
    "k_max": (float, 1e3, "upper curvature bound"),
    "backtrack": (int, 30, "step halvings allowed when a step increases the loss"),
    "tau": (float, None, "singular value threshold (default 2.01 sqrt(n density))"),
    "k_candidates": (_floats, "0.1,1,10", "comma-separated initial curvatures"),
    "prefit_dim": (int, 20, "dimension of the Euclidean refinement, 0 disables it"),
    "candidate_iters": (int, 200, "iterations per curvature candidate"),
    "prefit_iters": (int, 200, "iterations of the Euclidean refinement"),
    "clip_eps": (float, 1e-6, "probability clipping in the spectral estimate"),
    "bootstrap": (int, 100, "number of bootstrap replicates"),
    "level": (float, 0.95, "confidence level"),
    "holdout_fraction": (float, 0.2, "fraction of pairs held out for AUC"),
    "threads": (int, None, f"worker count (default ${THREADS_ENV} or 1)"),
    "nodes": (int, None, "node count, overriding the edge-list header"),
    "edges": (str, None, "input edge list"),
    "truth": (str, None, "true embedding file"),
    "estimate": (str, None, "estimated embedding file"),
    "out_edges": (str, None, "output edge list"),
    "out_embedding": (str, None, "output embedding file"),
    "out": (str, None, "output report (stdout when omitted)"),
}

_FIT = ["d", "link", "eta_k", "eta_z", "epsilon", "max_iters", "k_min", "k_max", "backtrack", "tau",
        "k_candidates", "prefit_dim", "candidate_iters", "prefit_iters", "clip_eps", "nodes"]

COMMANDS = {
    "simulate": (["n", "d", "k", "radius", "link", "seed", "out_edges", "out_embedding", "out"],
                 ["out_edges", "out_embedding"], "simulate a network from the latent space model"),
    "fit": (["edges", "geometry", "freeze_k", "out_embedding", "out"] + _FIT, ["edges"],
            "fit the model to an edge list"),
    "test-curvature": (["edges", "bootstrap", "seed", "threads", "out"] + _FIT, ["edges"],
                       "bootstrap likelihood-ratio test of zero curvature"),
    "ci": (["edges", "bootstrap", "level", "seed", "threads", "out"] + _FIT, ["edges"],
           "bootstrap confidence interval for the curvature"),
    "stats": (["edges", "nodes", "out"], ["edges"], "descriptive graph statistics"),
    "eval": (["truth", "estimate", "edges", "holdout_fraction", "seed", "geometry", "out"] + _FIT,
             ["truth", "estimate"], "estimation errors and, with --edges, link-prediction AUC"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="hyperlsm", description="Hyperbolic latent space network models.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts, _, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", help="JSON file with option values")
        for opt in dict.fromkeys(opts):
            typ, default, text = _OPTIONS[opt]
            shown = f" (default {default})" if default is not None else ""
            p.add_argument("--" + opt.replace("_", "-"), dest=opt, type=typ, default=argparse.SUPPRESS,
                           help=text + shown)
    return parser


def _coerce(key, val):
    typ = _OPTIONS[key][0]
    if val is None:
        return None
    if isinstance(val, list) and typ is _floats:
        val = ",".join(map(str, val))
    if isinstance(val, bool) or typ is int and isinstance(val, float) and not val.is_integer():
        raise ConfigError(f"invalid value for {key}: {val!r}")
    try:
        return typ(val)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {val!r}") from None


def resolve_options(args):
    """Merge defaults, the configuration file and command-line values."""
    opts, required, _ = COMMANDS[args.command]
    values = {opt: _OPTIONS[opt][1] for opt in opts}
    if isinstance(values.get("k_candidates"), str):
        values["k_candidates"] = _floats(values["k_candidates"])
    cli = {k: v for k, v in vars(args).items() if k in values}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(cfg) - set(values))
        if unknown:
            raise ConfigError(f"unknown config keys for '{args.command}': {', '.join(unknown)}")
        for key, val in cfg.items():
            values[key] = _coerce(key, val)
    values.update(cli)
    missing = [o for o in required if values.get(o) is None]
    if missing:
        raise ConfigError("missing required options: " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return values


def _link(values):
    try:
        return get_link(values["link"])
    except (KeyError, ValueError):
        raise ConfigError(f"unknown link {values['link']!r}") from None


def _geometry(values):
    g = values.get("geometry", HYPERBOLIC)
    if g not in (HYPERBOLIC, EUCLIDEAN):
        raise ConfigError(f"geometry must be '{HYPERBOLIC}' or '{EUCLIDEAN}'")
    return g


def _configs(values):
    """``(InitConfig, FitConfig)`` from merged option values."""
    freeze = values.get("freeze_k")
    try:
        init = InitConfig(
            tau=values["tau"],
            k_candidates=(freeze,) if freeze is not None else values["k_candidates"],
            prefit_dim=values["prefit_dim"] or None,
            clip_eps=values["clip_eps"],
            candidate_iters=values["candidate_iters"],
            prefit_iters=values["prefit_iters"],
        )
        fit_cfg = FitConfig(
            eta_K=values["eta_k"],
            eta_Z=values["eta_z"],
            epsilon=values["epsilon"],
            max_iters=values["max_iters"],
            k_bounds=(values["k_min"], values["k_max"]),
            freeze_K=freeze is not None,
            backtrack=values["backtrack"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if freeze is not None and not values["k_min"] <= freeze <= values["k_max"]:
        raise ConfigError("--freeze-k lies outside [k-min, k-max]")
    return init, fit_cfg


def _threads(values):
    t = values.get("threads")
    if t is None:
        env = os.environ.get(THREADS_ENV)
        try:
            t = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"${THREADS_ENV} must be an integer") from None
    if t < 1:
        raise ConfigError("threads must be at least 1")
    return t


def cmd_simulate(values):
    k = values["k"]
    if k < 0:
        raise ConfigError("k must be non-negative")
    try:
        cfg = SimConfig(n=values["n"], d=values["d"], k=k or None, radius=values["radius"], link=_link(values),
                        seed=values["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    emb, net = simulate(cfg)
    write_edge_list(values["out_edges"], net)
    write_embedding(values["out_embedding"], emb)
    write_report(values["out"], {"k": k, "geometry": cfg.geometry, "n": cfg.n, "d": cfg.d, "radius": cfg.radius,
                                 "link": cfg.link.name, "seed": cfg.seed, "edges": net.n_edges})


def cmd_fit(values):
    geometry = _geometry(values)
    if geometry == EUCLIDEAN and values["freeze_k"] is not None:
        raise ConfigError("--freeze-k applies to the hyperbolic model only")
    init, fit_cfg = _configs(values)
    link = _link(values)
    net = read_edge_list(values["edges"], values["nodes"])
    est = estimate(net, values["d"], init, fit_cfg, link, geometry)
    if values["out_embedding"]:
        write_embedding(values["out_embedding"], est.embedding)
    bic, aic = information_criteria(est.loglik, net.n, values["d"], geometry)
    write_report(values["out"], {
        "geometry": geometry,
        "k": est.embedding.k if geometry == HYPERBOLIC else 0.0,
        "n": net.n,
        "d": values["d"],
        "link": link.name,
        "loglik": est.loglik,
        "bic": bic,
        "aic": aic,
        "iterations": est.iterations,
        "converged": est.converged,
        "loss_history": est.loss_history,
    })


def cmd_test_curvature(values):
    init, fit_cfg = _configs(values)
    if values["bootstrap"] < 1:
        raise ConfigError("bootstrap must be at least 1")
    link, threads = _link(values), _threads(values)
    net = read_edge_list(values["edges"], values["nodes"])
    rep = lrt_test(net, values["d"], values["bootstrap"], init, fit_cfg, link, values["seed"], n_jobs=threads)
    write_report(values["out"], {
        "statistic": rep.statistic,
        "p_value": rep.p_value,
        "B": rep.B,
        "failed": rep.failed,
        "loglik_euclidean": rep.loglik_euclidean,
        "loglik_hyperbolic": rep.loglik_hyperbolic,
        "bootstrap_statistics": rep.bootstrap_statistics,
    })


def cmd_ci(values):
    init, fit_cfg = _configs(values)
    if values["bootstrap"] < 20:
        raise ConfigError("bootstrap must be at least 20")
    if not 0 < values["level"] < 1:
        raise ConfigError("level must lie in (0, 1)")
    link, threads = _link(values), _threads(values)
    net = read_edge_list(values["edges"], values["nodes"])
    rep = bootstrap_ci(net, values["d"], values["bootstrap"], values["level"], init, fit_cfg, link,
                       values["seed"], n_jobs=threads)
    write_report(values["out"], {
        "k_hat": rep.k_hat,
        "level": rep.level,
        "interval": list(rep.interval),
        "B": rep.B,
        "failed": rep.failed,
        "bootstrap_estimates": rep.bootstrap_estimates,
    })


def cmd_stats(values):
    net = read_edge_list(values["edges"], values["nodes"])
    s = graph_stats(net)
    write_report(values["out"], {"n": net.n, "edges": net.n_edges, **vars(s)})


def cmd_eval(values):
    link = _link(values)
    truth = read_embedding(values["truth"])
    est = read_embedding(values["estimate"])
    try:
        err = relative_errors(truth, est, link)
    except DimensionError as exc:
        raise ParseError(str(exc)) from None
    record = dict(vars(err))
    if values["edges"]:
        init, fit_cfg = _configs(values)
        net = read_edge_list(values["edges"], values["nodes"])
        record["auc"] = link_prediction_auc(net, values["d"], init, fit_cfg, link, values["holdout_fraction"],
                                            values["seed"], _geometry(values))
    write_report(values["out"], record)


HANDLERS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "test-curvature": cmd_test_curvature,
    "ci": cmd_ci,
    "stats": cmd_stats,
    "eval": cmd_eval,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        values = resolve_options(args)
        HANDLERS[args.command](values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ParseError, ManifoldError, UndefinedAUCError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
