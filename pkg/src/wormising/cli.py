"""Command-line entry point: ``wormising {sample,fpras,oracle,flows,bench}``.

Common options select the graph (``--graph k4|path5|cycle5|grid3x3|torus16x16``
or ``--graph-file``), the temperature (exactly one of ``--x`` or ``--beta``),
the seed and the output. ``--config file.json`` supplies defaults for any
option; flags given on the command line win.

Exit status: 0 ok, 1 usage or input error, 2 a verified inequality failed.

sample CSV columns: t (step index), size (|A|), defect_u, defect_v (-1 in
C0), in_c0 (0/1). One row per ``--stride`` steps, starting at t = 0.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import flows, measure, oracle
from .graph import GraphError, parse_graph_spec, read_graph
from .worm import GENERATOR_ID, ChainParams, make_rng, run

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
TOL = 1e-12

DEFAULTS = {
    "graph": None,
    "graph_file": None,
    "x": None,
    "beta": None,
    "seed": 0,
    "out": None,
    "format": "json",
    "steps": 100_000,
    "stride": 1,
    "target": "chi",
    "pair": None,
    "k": None,
    "epsilon": 0.2,
    "eta": 0.2,
    "run_length": None,
    "inner": None,
    "outer": None,
    "dry_run": False,
    "max_total_steps": 10**10,
    "delta": [0.25],
    "top": 10,
}


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--graph", help="generator spec: k<n>, path<n>, cycle<n>, grid<r>x<c>, torus<r>x<c>")
    p.add_argument("--graph-file", help="edge-list file: 'n m' header then m lines 'u v'")
    p.add_argument("--x", type=float, help="x = tanh(beta), in (0, 1)")
    p.add_argument("--beta", type=float, help="inverse temperature (converted to x)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wormising", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="run the worm chain and emit a trace",
                       description="Run the chain from the empty set. CSV columns: "
                       "t, size, defect_u, defect_v, in_c0; metadata goes to <out>.json.")
    _common(p)
    p.add_argument("--steps", type=int)
    p.add_argument("--stride", type=int, help="record every stride-th state")

    p = sub.add_parser("fpras", help="median-of-means estimate of chi or a two-point function")
    _common(p)
    p.add_argument("--target", choices=("chi", "pi0", "two-point"))
    p.add_argument("--pair", type=int, nargs=2, metavar=("U", "V"))
    p.add_argument("--k", type=int, help="distance bound for two-point (default d(u,v))")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--run-length", type=int, help="override the mixing-time bound (voids the guarantee)")
    p.add_argument("--inner", type=int, help="override inner repetitions (voids the guarantee)")
    p.add_argument("--outer", type=int, help="override outer repetitions (voids the guarantee)")
    p.add_argument("--max-total-steps", type=int, help="refuse plans needing more chain steps")
    p.add_argument("--dry-run", action="store_true", default=None, help="print the plan only")

    p = sub.add_parser("oracle", help="exact stationarity, observables and mixing checks")
    _common(p)
    p.add_argument("--delta", type=float, action="append")

    p = sub.add_parser("flows", help="canonical-path congestion and the mixing-bound chain")
    _common(p)
    p.add_argument("--delta", type=float, action="append")
    p.add_argument("--top", type=int, help="number of most-loaded transitions to report")

    p = sub.add_parser("bench", help="worm steps per second")
    _common(p)
    p.add_argument("--steps", type=int)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    out = {"command": args.command}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        val = getattr(args, key)
        out[key] = val if val is not None else cfg.get(key, default)
    if args.command == "bench":
        out["graph"] = out["graph"] or (None if out["graph_file"] else "torus32x32")
        out["x"] = out["x"] if out["x"] is not None or out["beta"] is not None else 0.4
        out["steps"] = args.steps or cfg.get("steps", 10**7)

    if (out.get("x") is None) == (out.get("beta") is None):
        raise UsageError("give exactly one of --x or --beta")
    try:
        params = ChainParams(out["x"]) if out["x"] is not None else ChainParams.from_beta(out["beta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out["x"] = params.x
    if (out.get("graph") is None) == (out.get("graph_file") is None):
        raise UsageError("give exactly one of --graph or --graph-file")
    return out


def _load(cfg):
    try:
        if cfg["graph_file"]:
            return read_graph(cfg["graph_file"])
        return parse_graph_spec(cfg["graph"])
    except (GraphError, OSError) as exc:
        raise UsageError(f"graph: {exc}") from None


def _provenance(cfg: dict, graph) -> dict:
    blob = json.dumps(cfg, sort_keys=True).encode()
    return {
        "version": _version(),
        "generator": GENERATOR_ID,
        "seed": cfg.get("seed"),
        "graph_sha256": graph.digest(),
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "config": cfg,
    }


def _dump_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# -- subcommands -------------------------------------------------------------

def cmd_sample(cfg: dict) -> int:
    g = _load(cfg)
    if cfg["steps"] < 0 or cfg["stride"] < 1:
        raise UsageError("need steps >= 0 and stride >= 1")
    params = ChainParams(cfg["x"])
    stats = run(g, None, cfg["steps"], params, make_rng(cfg["seed"]), stride=cfg["stride"])
    t = np.arange(len(stats.size_trace)) * stats.stride
    d = stats.defect_trace
    summary = {
        "steps": stats.steps,
        "fraction_c0": stats.fraction_c0,
        "acceptance_rate": stats.acceptance_rate,
        "mean_size": float(stats.size_trace.mean()),
        "final_size": stats.final.size,
        "final_boundary": list(stats.final.boundary),
    }
    if stats.pair_counts is not None:
        nz = np.argwhere(stats.pair_counts)
        summary["pair_defect_counts"] = [[int(u), int(v), int(stats.pair_counts[u, v])] for u, v in nz]
    meta = {"provenance": _provenance(cfg, g), "summary": summary}
    if cfg["format"] == "csv":
        rows = zip(t.tolist(), stats.size_trace.tolist(), d[:, 0].tolist(), d[:, 1].tolist(),
                   (d[:, 0] < 0).astype(int).tolist())
        _write_csv(cfg["out"], ["t", "size", "defect_u", "defect_v", "in_c0"], rows)
        if cfg["out"]:
            _dump_json(meta, cfg["out"] + ".json")
        else:
            sys.stderr.write(json.dumps(meta["summary"], sort_keys=True) + "\n")
    else:
        meta["trace"] = {"t": t.tolist(), "size": stats.size_trace.tolist(),
                         "defects": d.tolist()}
        _dump_json(meta, cfg["out"])
    return EXIT_OK


def _plans(g, cfg):
    x = cfg["x"]
    eps, eta = cfg["epsilon"], cfg["eta"]
    kw = {"run_length": cfg["run_length"]}
    try:
        if cfg["target"] == "chi":
            return [measure.make_plan(g, x, eps / (1 + eps), eta, measure.C0, **kw)]
        if cfg["target"] == "pi0":
            return [measure.make_plan(g, x, eps, eta, measure.C0, **kw)]
        if cfg["pair"] is None:
            raise UsageError("two-point target needs --pair U V")
        u, v = cfg["pair"]
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise UsageError(f"pair vertices must lie in 0..{g.n - 1}")
        return [
            measure.make_plan(g, x, eps / 3, eta / 2, (u, v), k=cfg["k"], **kw),
            measure.make_plan(g, x, eps / 3, eta / 2, measure.C0, **kw),
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _override(plan, cfg):
    from dataclasses import replace
    changes = {}
    if cfg["inner"] is not None:
        changes["inner"] = cfg["inner"]
    if cfg["outer"] is not None:
        changes["outer"] = cfg["outer"]
    if any(v is not None and v < 1 for v in changes.values()):
        raise UsageError("inner/outer must be >= 1")
    return replace(plan, **changes) if changes else plan


def cmd_fpras(cfg: dict) -> int:
    g = _load(cfg)
    params = ChainParams(cfg["x"])
    plans = [_override(p, cfg) for p in _plans(g, cfg)]
    guaranteed = cfg["run_length"] is None and cfg["inner"] is None and cfg["outer"] is None
    report = {
        "provenance": _provenance(cfg, g),
        "target": cfg["target"],
        "plans": [p.as_dict() for p in plans],
        "guarantee": guaranteed,
    }
    total = sum(p.total_steps for p in plans)
    if cfg["dry_run"]:
        _dump_json(report, cfg["out"])
        return EXIT_OK
    if total > cfg["max_total_steps"]:
        raise UsageError(
            f"plan needs {total:.3e} chain steps (> --max-total-steps {cfg['max_total_steps']:.3e}); "
            "use --dry-run, or --run-length/--inner/--outer to run a reduced scheme"
        )
    rng = make_rng(cfg["seed"])
    t0 = time.perf_counter()
    results = [measure.fpras(g, params, p, rng) for p in plans]
    wall = time.perf_counter() - t0
    report["estimates"] = [r.estimate for r in results]
    if cfg["target"] == "chi":
        report["value"] = measure.susceptibility(results[0].estimate, params.beta)
    elif cfg["target"] == "pi0":
        report["value"] = results[0].estimate
    else:
        if results[1].estimate == 0:
            raise UsageError("estimated pi(C0) is zero; increase repetitions")
        report["value"] = measure.two_point(results[0].estimate, results[1].estimate, g.n)
    _dump_json(report, cfg["out"])
    sys.stderr.write(f"wall time {wall:.3f}s\n")
    return EXIT_OK


def oracle_report(g, x: float, deltas) -> dict:
    """Exact checks for one graph and temperature; ``checks`` maps name -> bool."""
    dist = oracle.enumerate_subsets(g, x)
    P = oracle.transition_matrix(g, x, dist).P
    pi = dist.pi
    flux = pi[:, None] * P
    stationarity = float(np.abs(pi @ P - pi).max())
    balance = float(np.abs(flux - flux.T).max())
    row_err = float(np.abs(P.sum(axis=1) - 1).max())
    diag_min = float(np.diag(P).min())
    mix = oracle.mixing_report(P, pi, deltas)
    bounds = {d: measure.theorem1_bound(g, x, d) for d in deltas}
    lo, hi = measure.ratio_bounds(g, x)
    ratio = dist.pi_c2 / dist.pi_c0
    n = g.n
    pair_ok = all(
        dist.pi_pair(u, v) >= measure.pair_lower_bound(g, x, u, v) * (1 - TOL)
        for u in range(n) for v in range(u + 1, n)
    )
    route_gap = max(
        abs(oracle.exact_two_point(g, x, u, v, dist) - oracle.exact_two_point_from_pi(g, x, u, v, dist))
        for u in range(n) for v in range(u + 1, n)
    )
    chi = oracle.exact_chi(g, x, dist)
    chi_gap = abs(chi - oracle.exact_chi_from_correlations(g, x, dist))
    checks = {
        "stationarity": stationarity <= TOL,
        "detailed_balance": balance <= TOL,
        "rows_sum_to_one": row_err <= TOL,
        "lazy_diagonal": diag_min >= 0.5 - TOL,
        "normalisation": abs(pi.sum() - 1) <= TOL,
        "total_weight": abs(dist.total_weight - (1 + x) ** g.m) <= TOL * (1 + x) ** g.m,
        "pi_c0_lower": dist.pi_c0 >= 1 / (2 * n + 1),
        "pi_pair_lower": pair_ok,
        "ratio_bounds": lo <= ratio <= hi,
        "class_weights_below_c0": all(w <= dist.lambda_c0 * (1 + TOL) for w in dist.class_weights.values()),
        "two_point_routes_agree": route_gap <= TOL,
        "chi_routes_agree": chi_gap <= TOL * chi,
        "mix_below_bound": all(mix.mix[d] <= bounds[d] for d in deltas),
        "tv_nonincreasing": bool(np.all(np.diff(mix.tv) <= TOL)),
    }
    return {
        "n": g.n, "m": g.m, "states": len(dist.states),
        "pi_c0": dist.pi_c0, "chi": chi,
        "stationarity_error": stationarity, "detailed_balance_error": balance,
        "row_sum_error": row_err, "min_diagonal": diag_min,
        "mix": {str(d): mix.mix[d] for d in deltas},
        "theorem1_bound": {str(d): bounds[d] for d in deltas},
        "relaxation_time": mix.relaxation_time, "spectral_gap": mix.spectral_gap,
        "ratio": ratio, "ratio_bounds": [lo, hi],
        "checks": checks,
    }


def cmd_oracle(cfg: dict) -> int:
    g = _load(cfg)
    try:
        body = oracle_report(g, cfg["x"], cfg["delta"])
    except oracle.CapExceeded as exc:
        raise UsageError(str(exc)) from None
    _dump_json({"provenance": _provenance(cfg, g), **body}, cfg["out"])
    return EXIT_OK if all(body["checks"].values()) else EXIT_VERIFY


def cmd_flows(cfg: dict) -> int:
    g = _load(cfg)
    records = []
    try:
        for d in cfg["delta"]:
            records.append(flows.verify_theorem_chain(g, cfg["x"], d))
        rep = flows.congestion(g, cfg["x"])
    except oracle.CapExceeded as exc:
        raise UsageError(str(exc)) from None
    top = [[int(a), int(b), load] for (a, b), load in rep.top(cfg["top"])]
    if cfg["format"] == "csv":
        _write_csv(cfg["out"], ["from_state", "to_state", "load"], top)
        if cfg["out"]:
            _dump_json({"provenance": _provenance(cfg, g), "phi": rep.phi, "bound": rep.bound},
                       cfg["out"] + ".json")
    else:
        _dump_json({
            "provenance": _provenance(cfg, g),
            "phi": rep.phi,
            "phi_bound": rep.bound,
            "longest_path": rep.longest,
            "top_loads": top,
            "verifications": [
                {"delta": r.delta, "checks": r.checks, "values": r.values,
                 "counterexamples": r.counterexamples[:20]}
                for r in records
            ],
        }, cfg["out"])
    return EXIT_OK if all(r.ok for r in records) else EXIT_VERIFY


def cmd_bench(cfg: dict) -> int:
    g = _load(cfg)
    params = ChainParams(cfg["x"])
    rng = make_rng(cfg["seed"])
    run(g, None, 1000, params, rng)  # compile outside the timed region
    steps = cfg["steps"]
    stride = max(1, steps // 1000)
    t0 = time.perf_counter()
    stats = run(g, None, steps, params, rng, stride=stride)
    wall = time.perf_counter() - t0
    _dump_json({
        "provenance": _provenance(cfg, g),
        "steps": steps,
        "seconds": wall,
        "steps_per_second": steps / wall if wall > 0 else math.inf,
        "fraction_c0": stats.fraction_c0,
    }, cfg["out"])
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "fpras": cmd_fpras,
    "oracle": cmd_oracle,
    "flows": cmd_flows,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"wormising {args.command}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
