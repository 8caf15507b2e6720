"""Command-line front end. Each subcommand is a thin client of the HTTP
service: by default the requests are dispatched in-process against the
FastAPI app; --server sends them to a running instance instead.

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataFileError(Exception):
    pass


def _sig6(x) -> str:
    if x is None:
        return "n/a"
    return f"{x:.6g}"


def read_data_file(path: str) -> list[float]:
    """One finite decimal per line; blank and '#'-comment lines ignored."""
    values = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataFileError(f"cannot read data file {path}: {exc}")
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            value = float(stripped)
        except ValueError:
            raise DataFileError(f"{path}: line {lineno}: not a number: {stripped!r}")
        if value != value or value in (float("inf"), float("-inf")):
            raise DataFileError(f"{path}: line {lineno}: non-finite value")
        values.append(value)
    if not values:
        raise DataFileError(f"{path}: no data lines")
    return values


class Client:
    """Posts to a live server when a base URL is given, otherwise calls the
    FastAPI app in-process."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code != 200:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(detail)
        return response.json()


class ServiceError(Exception):
    """Service-side validation failure; maps to the usage/config exit code."""


def _write_report(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_estimate(args) -> int:
    try:
        values = read_data_file(args.data)
    except DataFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    payload = {
        "values": values,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "delta": args.delta,
        "eta": args.eta,
        "eps": args.eps,
        "sigma_m": args.sigma_m,
        "m": args.m,
    }
    r = Client(args.server).post("/estimate", payload)
    lines = [
        f"n            {r['n']}",
        f"eps          {_sig6(r['eps'])}",
        f"simple_ok    {r['simple_ok']}",
        f"lambert_ok   {r['lambert_ok']}",
        f"implementable {r['implementable']}",
        f"alpha_hat    {_sig6(r['alpha_hat'])}",
        f"beta_hat     {_sig6(r['beta_hat'])}",
        f"estimate     {_sig6(r['estimate'])}",
    ]
    if r["bound"] is not None:
        lines.append(f"bound        {_sig6(r['bound'])}")
    _write_report(lines, args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    payload = {
        "m": args.m,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "sigma_m": args.sigma_m,
        "n": args.n,
        "delta": args.delta,
        "eta": args.eta,
        "rho": args.rho,
        "eta_min": args.eta_min,
    }
    r = Client(args.server).post("/bound", payload)
    lines = [
        f"frak_l         {_sig6(r['frak_l'])}",
        f"frak_u         {_sig6(r['frak_u'])}",
        f"frak_A         {_sig6(r['frak_A'])}",
        f"frak_B         {_sig6(r['frak_B'])}",
        f"frak_C         {_sig6(r['frak_C'])}",
        f"eta_term_zero  {r['eta_term_zero']}",
        f"bound          {_sig6(r['theorem1_bound'])}",
    ]
    if r["theorem2_bound"] is not None:
        lines.append(f"adaptive_bound {_sig6(r['theorem2_bound'])}")
    _write_report(lines, args.out)
    return EXIT_OK


def cmd_feasible(args) -> int:
    payload = {
        "n": args.n,
        "delta": args.delta,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "eta": args.eta,
    }
    r = Client(args.server).post("/feasible", payload)
    verdict = "implementable" if r["implementable"] else "not implementable"
    lm21 = "implementable" if r["lm21_implementable"] else "not implementable"
    lines = [
        f"eps          {_sig6(r['eps'])}",
        f"simple_lhs   {_sig6(r['simple_lhs'])} (ok={r['simple_ok']})",
        f"lambert_lhs  {_sig6(r['lambert_lhs'])} (ok={r['lambert_ok']})",
        f"verdict      {verdict}",
        f"lm21_eps     {_sig6(r['lm21_eps'])}",
        f"lm21         {lm21}",
    ]
    _write_report(lines, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {args.config}: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        cfg["master_seed"] = args.seed

    from pydantic import ValidationError

    from .simulation import SimConfig

    try:
        SimConfig.model_validate(cfg)  # report field paths before dispatch
    except ValidationError as exc:
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"])
            print(f"error: config field {loc}: {err['msg']}", file=sys.stderr)
        return EXIT_USAGE

    payload = {"config": cfg, "workers": args.workers, "keep_raw": args.raw_errors}
    r = Client(args.server).post("/simulate", payload)

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(r["summary_csv"])
    if args.raw_errors:
        raw_path = args.out + ".raw.csv"
        with open(raw_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(r["raw_errors_csv"])
    for row in r["estimators"]:
        print(
            f"{row['label']:<20} mae={_sig6(row['mae'])} "
            f"failures={row['failures']}/{row['failures'] + row['successes']}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="winsormean",
        description="Winsorized mean estimation, error bounds, feasibility "
        "checks and Monte Carlo studies.",
    )
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="winsorized mean of a data file")
    p.add_argument("data", help="file with one decimal per line")
    p.add_argument("--lambda1", type=float, default=1.01)
    p.add_argument("--lambda2", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=None,
                   help="explicit clipping fraction (overrides the rule)")
    p.add_argument("--sigma-m", dest="sigma_m", type=float, default=None)
    p.add_argument("-m", type=float, default=None, dest="m")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", help="evaluate the deviation bound")
    p.add_argument("-m", type=float, required=True, dest="m")
    p.add_argument("--lambda1", type=float, default=1.01)
    p.add_argument("--lambda2", type=float, default=0.2)
    p.add_argument("--sigma-m", dest="sigma_m", type=float, required=True)
    p.add_argument("-n", type=int, required=True, dest="n")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--rho", type=float, default=None,
                   help="grid ratio; also evaluates the adaptive bound")
    p.add_argument("--eta-min", dest="eta_min", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("feasible", help="feasibility / implementability check")
    p.add_argument("-n", type=int, required=True, dest="n")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--lambda1", type=float, default=1.01)
    p.add_argument("--lambda2", type=float, default=0.2)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a config")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--out", required=True, help="summary CSV output path")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--raw-errors", action="store_true",
                   help="also dump per-replication errors to <out>.raw.csv")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
