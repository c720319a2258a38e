"""Command-line front end.

Four data subcommands (theory, simulate, experiment, kscheck) plus
`serve`.  By default everything runs in-process against the core package;
with --server URL the same subcommands become thin HTTP clients of a
running service, sending the identical payloads the service endpoints
accept.

Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
numerical-verification failures.
"""

from __future__ import annotations

import argparse
import os
import sys

from .limit_theory import theory_report
from .linear_process import path_to_csv, simulate_path
from .mc_harness import (
    ConfigError,
    build_experiment_config,
    build_simulate_config,
    ks_distance,
    load_config,
    parse_limit_law,
    read_samples_csv,
    run_experiment,
)
from .stable_numerics import NumericError

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longtail",
        description="Limit theorems for long-memory linear processes: "
                    "closed forms, simulation, Monte Carlo certification.",
    )
    parser.add_argument("--server", metavar="URL", default=None,
                        help="run against a longtail service at URL instead of in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="print the closed-form limit constants")
    p.add_argument("--alpha", type=float, required=True, help="stability index in (1, 2]")
    p.add_argument("--d", type=float, required=True, help="memory parameter in (0, 1 - 1/alpha)")
    p.add_argument("--ca", type=float, default=1.0, help="coefficient prefactor (default 1)")
    p.add_argument("--A-const", type=float, default=None, dest="A_const",
                   help="innovation tail constant (default: unit-scale stable)")

    p = sub.add_parser("simulate", help="simulate one path to a CSV file")
    p.add_argument("--config", required=True, help="config file (key=value or JSON)")
    p.add_argument("--out", required=True, help="output CSV path (header row `x`)")

    p = sub.add_parser("experiment", help="run a replicated experiment")
    p.add_argument("--config", required=True, help="config file (key=value or JSON)")
    p.add_argument("--out", required=True, help="output directory for rows/aggregates CSVs")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("kscheck", help="KS distance of samples to a stated limit law")
    p.add_argument("--samples", required=True, help="single-column CSV of samples")
    p.add_argument("--limit", required=True,
                   help="limit law: stable:ALPHA:ETA or normal:SIGMA2")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


# ----------------------------------------------------------------------
# in-process handlers
# ----------------------------------------------------------------------

def _cmd_theory(args) -> int:
    rep = theory_report(args.d, alpha=args.alpha, c_a=args.ca, A=args.A_const)
    sys.stdout.write(rep.to_text())
    return 0


def _cmd_simulate(args) -> int:
    spec, n, seed, method = build_simulate_config(load_config(args.config))
    path = simulate_path(spec, n, seed, method=method)
    path_to_csv(path, args.out)
    print(f"wrote {n} values to {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    config = build_experiment_config(load_config(args.config))
    table = run_experiment(config, workers=args.workers)
    rows_path, agg_path = table.write(args.out)
    print(f"{config.corollary_id}: {config.replications} replications over n_grid={list(config.n_grid)}")
    for a in table.aggregates:
        print(f"n={a.n}  ks={a.ks:.6g}  empirical_scale={a.empirical_scale:.6g}  "
              f"lr_norm={a.lr_norm:.6g}  count_ok={a.count_ok}")
    print(f"rate_slope={table.rate_slope:.6g}  rate_intercept={table.rate_intercept:.6g}")
    print(f"rows: {rows_path}")
    print(f"aggregates: {agg_path}")
    return 0


def _cmd_kscheck(args) -> int:
    samples = read_samples_csv(args.samples)
    cdf, label = parse_limit_law(args.limit)
    ks = ks_distance(samples, cdf)
    print(f"ks = {ks:.8g} (m = {samples.size}, limit = {label})")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ----------------------------------------------------------------------
# HTTP client mode
# ----------------------------------------------------------------------

def _post(server: str, route: str, payload: dict):
    import httpx

    resp = httpx.post(server.rstrip("/") + route, json=payload, timeout=600.0)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        code = 3 if "NumericError" in str(detail) else 2
        raise _RemoteError(code, f"server error {resp.status_code}: {detail}")
    return resp.json()


class _RemoteError(RuntimeError):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _nest(flat: dict) -> dict:
    nested: dict = {}
    for key, val in flat.items():
        node = nested
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    return nested


def _remote_theory(server: str, args) -> int:
    data = _post(server, "/theory", {
        "alpha": args.alpha, "d": args.d, "ca": args.ca, "A_const": args.A_const,
    })
    for key in ("alpha", "d", "regime", "gamma0", "r0", "kappa0", "rate_exponent",
                "eta_or_sigma2"):
        print(f"{key} = {data[key]!r}")
    return 0


def _remote_simulate(server: str, args) -> int:
    flat = load_config(args.config)
    spec, n, seed, method = build_simulate_config(dict(flat))  # validate locally first
    nested = _nest(flat)
    payload = {"process": nested["process"], "n": n, "seed": seed, "method": method}
    data = _post(server, "/simulate", payload)
    path_to_csv(data["x"], args.out)
    print(f"wrote {data['n']} values to {args.out}")
    return 0


def _remote_experiment(server: str, args) -> int:
    flat = load_config(args.config)
    data = _post(server, "/experiment", {"config": flat, "workers": args.workers})
    os.makedirs(args.out, exist_ok=True)
    rows_path = os.path.join(args.out, "rows.csv")
    agg_path = os.path.join(args.out, "aggregates.csv")
    with open(rows_path, "w", newline="\n") as fh:
        fh.write(data["rows_csv"])
    with open(agg_path, "w", newline="\n") as fh:
        fh.write(data["aggregates_csv"])
    print(f"{data['corollary_id']}: aggregates over {len(data['aggregates'])} grid points")
    for a in data["aggregates"]:
        print(f"n={a['n']}  ks={a['ks']}  empirical_scale={a['empirical_scale']}  "
              f"lr_norm={a['lr_norm']}  count_ok={a['count_ok']}")
    print(f"rate_slope={data['rate_slope']}  rate_intercept={data['rate_intercept']}")
    print(f"rows: {rows_path}")
    print(f"aggregates: {agg_path}")
    return 0


def _remote_kscheck(server: str, args) -> int:
    samples = read_samples_csv(args.samples)
    data = _post(server, "/kscheck", {
        "samples": [float(v) for v in samples], "limit": args.limit,
    })
    print(f"ks = {data['ks']:.8g} (m = {data['m']}, limit = {data['limit']})")
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

_LOCAL = {"theory": _cmd_theory, "simulate": _cmd_simulate,
          "experiment": _cmd_experiment, "kscheck": _cmd_kscheck, "serve": _cmd_serve}
_REMOTE = {"theory": _remote_theory, "simulate": _remote_simulate,
           "experiment": _remote_experiment, "kscheck": _remote_kscheck}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.server and args.command in _REMOTE:
            return _REMOTE[args.command](args.server, args)
        return _LOCAL[args.command](args)
    except _RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
