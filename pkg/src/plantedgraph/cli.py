"""Command-line front end.

Verbs: ``generate``, ``thresholds``, ``detect``, ``identify``, ``certificate``,
``experiment`` and ``sweep``. Exit status is 0 on success, 2 for invalid
input or configuration and 3 when a method fails (budget, convergence).
"""

from __future__ import annotations

import argparse
import json
import sys

from .certificate import null_certificate
from .exceptions import InvalidArgumentError, PlantedGraphError
from .experiment import METHODS, ExperimentConfig, run_experiment, sweep
from .graphs import FAMILIES, build_family, er_sample, plant, read_graph, write_graph
from .sdp import SdpParams, dump_matrix, sdp_solve, sdp_test
from .spectral import identify, spectral_test
from .stats import exhaustive_test, regime_report, second_moment_report

EXIT_OK, EXIT_CONFIG, EXIT_METHOD = 0, 2, 3


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ helpers

def _add_family(p, required=True):
    g = p.add_argument_group("hidden graph H")
    g.add_argument("--family", choices=sorted(FAMILIES) + ["custom-file"], default="clique" if required else None)
    g.add_argument("--k", type=int, help="clique / cycle-power size")
    g.add_argument("--m", type=int, help="hypercube dimension or cycle-power exponent")
    g.add_argument("--d", type=int, help="tree degree")
    g.add_argument("--r", type=int, help="tree generations")
    g.add_argument("--graph-file", help="H from a JSON or edge-list file (family custom-file)")


def _add_model(p):
    g = p.add_argument_group("random graph")
    g.add_argument("--n", type=int, default=100)
    g.add_argument("--q0", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)


def _add_output(p, formats=("json",)):
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])


def _family_params(args) -> dict:
    if args.family == "custom-file":
        return {}
    names = FAMILIES[args.family][1]
    params = {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}
    missing = [name for name in names if name not in params]
    if missing:
        raise ConfigError(f"family {args.family!r} needs --{' --'.join(missing)}")
    return params


def _hidden(args):
    if args.family == "custom-file":
        if not args.graph_file:
            raise ConfigError("family custom-file needs --graph-file")
        return read_graph(args.graph_file)
    return build_family(args.family, **_family_params(args))


def _observed(args, H):
    """The graph to test: ``--input`` if given, else a fresh null or planted sample."""
    if args.input:
        return read_graph(args.input), None
    if args.hypothesis == "planted":
        inst = plant(args.n, args.q0, H, seed=args.seed)
        return inst.graph, inst
    return er_sample(args.n, args.q0, seed=args.seed), None


def _add_observed(p):
    p.add_argument("--input", help="observed graph file (JSON or edge list)")
    p.add_argument("--hypothesis", choices=("null", "planted"), default="null",
                   help="model to sample from when --input is absent")


def _emit(text: str, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


# --------------------------------------------------------------------- verbs

def cmd_generate(args):
    if args.hypothesis == "null":
        G = er_sample(args.n, args.q0, seed=args.seed)
        if args.out and not args.out.endswith(".json"):
            write_graph(G, args.out)
            return
        _emit(_dumps({"graph": G.to_dict(), "q0": args.q0, "seed": args.seed}), args)
        return
    inst = plant(args.n, args.q0, _hidden(args), seed=args.seed)
    if args.out and not args.out.endswith(".json"):
        write_graph(inst.graph, args.out)
        return
    _emit(_dumps(inst.to_dict()), args)


def cmd_thresholds(args):
    H = _hidden(args)
    out = {"regime": regime_report(H, args.n, args.q0).to_dict()}
    try:
        out["second_moment"] = second_moment_report(H, args.n, args.q0, budget=args.budget).to_dict()
    except InvalidArgumentError as exc:
        out["second_moment"] = {"error": str(exc)}
    _emit(_dumps(out), args)


def cmd_detect(args):
    # the spectral test never looks at H
    H = _hidden(args) if args.method != "spectral" or not args.input else None
    G, _ = _observed(args, H)
    if args.method == "spectral":
        o = spectral_test(G, args.q0, tol=args.tol or 1e-8)
        rec = o.to_dict()
    elif args.method == "exhaustive":
        rec = exhaustive_test(G, H, args.q0, budget=args.budget).to_dict()
    else:
        params = SdpParams(tol=args.tol or 1e-5, max_iter=args.max_iter, slack_rel=args.slack_rel,
                           route=args.route)
        if args.dump_y:
            sol = sdp_solve(G, H, params)
            dump_matrix(sol.Y, G.n, H.n, args.dump_y)
        o = sdp_test(G, H, params)
        rec = o.to_dict()
        rec.update(value=rec["statistic"], slack=o.metadata["slack"],
                   residuals=o.metadata["residuals"], iterations=o.metadata["iterations"])
    _emit(_dumps(rec), args)


def cmd_identify(args):
    H = _hidden(args) if args.size is None or not args.input else None
    G, inst = _observed(args, H)
    k = args.size if args.size is not None else H.n
    res = identify(G, args.q0, k, refine_eps=args.refine_eps)
    rec = res.to_dict()
    if inst is not None:
        truth = set(inst.planted_vertices.tolist())
        rec["planted"] = sorted(i + 1 for i in truth)
        rec["exact"] = set(res.selected) == truth
    _emit(_dumps(rec), args)


def cmd_certificate(args):
    H = _hidden(args)
    G, _ = _observed(args, H)
    cert = null_certificate(G, H, q0=args.q0, branch=args.branch, keep_matrix=bool(args.dump_y))
    if args.dump_y:
        dump_matrix(cert.Y, G.n, H.n, args.dump_y)
    _emit(_dumps(cert.to_dict()), args)


def _experiment_config(args) -> ExperimentConfig:
    base = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    over = {"n": args.n, "q0": args.q0, "method": args.method, "trials": args.trials,
            "base_seed": args.seed}
    if args.family is not None:
        over["family"] = args.family
        if args.family == "custom-file":
            over["graph_file"] = args.graph_file
        else:
            # a family switch replaces the parameters, a bare size flag updates them
            over["family_params"] = _family_params(args)
    else:
        for name in ("k", "m", "d", "r"):
            if getattr(args, name) is not None:
                over[f"family_params.{name}"] = getattr(args, name)
    if args.time_budget is not None:
        over["time_budget"] = args.time_budget
    if args.timing:
        over["record_timing"] = True
    return base.with_overrides(**over).validate()


def _add_experiment_flags(p):
    _add_family(p, required=False)
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--n", type=int)
    p.add_argument("--q0", type=float)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--trials", type=int)
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--time-budget", type=float, help="per-trial wall-clock seconds")
    p.add_argument("--timing", action="store_true", help="record per-trial wall time")


def cmd_experiment(args):
    cfg = _experiment_config(args)
    rep = run_experiment(cfg, n_jobs=args.n_jobs)
    _emit(rep.to_csv() if args.format == "csv" else rep.to_json(), args)
    if rep.aggregates["errors"] == len(rep.records):
        print("every trial failed", file=sys.stderr)
        return EXIT_METHOD
    return EXIT_OK


def _parse_grid(args) -> dict:
    grid = {}
    if args.config:
        with open(args.config) as fh:
            grid.update(json.load(fh).get("grid", {}))
    for item in args.grid or ():
        key, _, vals = item.partition("=")
        if not key or not _:
            raise ConfigError(f"--grid expects KEY=V1,V2,..., got {item!r}")
        grid[key] = [json.loads(v) for v in vals.split(",") if v]
    return grid


def cmd_sweep(args):
    cfg = _experiment_config(args)
    res = sweep(cfg, _parse_grid(args), n_jobs=args.n_jobs)
    _emit(res.to_json() if args.format == "json" else res.to_csv(), args)


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plantedgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("generate", help="sample a null or planted graph")
    _add_family(p)
    _add_model(p)
    p.add_argument("--hypothesis", choices=("null", "planted"), default="planted")
    _add_output(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("thresholds", help="regime verdicts and second-moment diagnostic for H")
    _add_family(p)
    _add_model(p)
    p.add_argument("--budget", type=int, default=10**8)
    _add_output(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("detect", help="run a detection test on one graph")
    _add_family(p)
    _add_model(p)
    _add_observed(p)
    p.add_argument("--method", choices=("spectral", "exhaustive", "sdp"), default="spectral")
    p.add_argument("--tol", type=float)
    p.add_argument("--budget", type=int, default=10**8)
    p.add_argument("--max-iter", type=int, default=20_000)
    p.add_argument("--slack-rel", type=float, default=1e-3)
    p.add_argument("--route", choices=("auto", "solver"), default="auto")
    p.add_argument("--dump-y", help="write the ADMM matrix in the binary dump format")
    _add_output(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("identify", help="spectral identification of the planted vertices")
    _add_family(p)
    _add_model(p)
    _add_observed(p)
    p.set_defaults(hypothesis="planted")
    p.add_argument("--size", type=int, help="number of planted vertices (default v(H))")
    p.add_argument("--refine-eps", type=float)
    _add_output(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("certificate", help="explicit relaxation point on a null graph")
    _add_family(p)
    _add_model(p)
    _add_observed(p)
    p.add_argument("--branch", choices=("lambda_k_high", "lambda_k_low"))
    p.add_argument("--dump-y", help="write Y in the binary dump format")
    _add_output(p)
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("experiment", help="Monte Carlo error rates for one configuration")
    _add_experiment_flags(p)
    _add_output(p, ("json", "csv"))
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", help="experiments over a cartesian grid")
    _add_experiment_flags(p)
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                   help="grid axis; KEY is a config field, family_params.X, method_params.X or k_ratio")
    _add_output(p, ("csv", "json"))
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (ConfigError, InvalidArgumentError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlantedGraphError as exc:
        print(f"method failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
