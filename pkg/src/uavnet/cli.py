"""Command-line client for the experiment service.

Every subcommand resolves an ExperimentConfig (config file, then flag
overrides), posts it to the HTTP service, and writes the CSV the
service rendered.  By default the service runs in-process over an ASGI
transport, so no server needs to be up; --server points the same client
at a remote instance.  `serve` starts that instance.

Exit codes: 0 success, 1 config/validation problem, 2 runtime failure
(including a failed selftest cross-check).
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from dataclasses import asdict, replace
from pathlib import Path

import httpx

from .errors import ConfigError, UavnetError
from .experiments import (ExperimentConfig, default_out_dir, load_config)

_EXPERIMENTS = ("a2g-sweep", "a2a-sinr", "a2a-coverage", "filter")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="uavnet",
                     description="UAV network experiments: curved-earth "
                                 "A2G path loss, A2A coverage, packet filter.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH",
                       help="YAML config file; unset keys stay at defaults")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--trials", type=int, metavar="N")
        p.add_argument("--out", metavar="PATH",
                       help="CSV destination (default: <kind>.csv in the "
                            "output dir, see UAVNET_OUT_DIR)")
        p.add_argument("--server", metavar="URL",
                       help="use a running service instead of in-process")

    p = sub.add_parser("a2g-sweep", help="path loss vs UAV height")
    common(p)
    p.add_argument("--fading", metavar="MODE",
                   help="off, rayleigh, or rice:<K>")

    common(sub.add_parser("a2a-sinr", help="mean SINR vs sub-UAV count"))
    common(sub.add_parser("a2a-coverage",
                          help="coverage probability grid, analytic + MC"))

    p = sub.add_parser("filter", help="run the packet filter on a trajectory")
    common(p)
    p.add_argument("--mode", choices=("paper-literal", "corrected"))
    p.add_argument("--trajectory", metavar="NAME_OR_PATH",
                   help="bundled name (hover, gap, line) or a CSV file")

    common(sub.add_parser("selftest",
                          help="cross-check analytic coverage against MC"))

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _resolve_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    kind = args.command if args.command != "selftest" else "a2a-coverage"
    overrides = {"kind": kind}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if getattr(args, "fading", None) is not None:
        overrides["fading"] = args.fading
    if getattr(args, "mode", None) is not None:
        overrides["filter_mode"] = args.mode
    if getattr(args, "trajectory", None) is not None:
        overrides["trajectory"] = args.trajectory
    try:
        return replace(config, **overrides)
    except ValueError as err:
        raise ConfigError(str(err)) from err


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    from .service.app import create_app
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(transport=transport, timeout=None,
                                 base_url="http://uavnet.internal") as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)
    return asyncio.run(_post_in_process(path, payload))


def _request(args, path: str, config: ExperimentConfig) -> dict:
    payload = asdict(config)
    del payload["kind"]
    try:
        response = _post(args.server, path, payload)
    except httpx.HTTPError as err:
        print(f"error: cannot reach service: {err}", file=sys.stderr)
        raise SystemExit(2) from err
    if response.status_code == 422:
        detail = response.json().get("detail", response.text)
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(1)
    if response.status_code != 200:
        print(f"error: service returned {response.status_code}: "
              f"{response.text}", file=sys.stderr)
        raise SystemExit(2)
    return response.json()


def _write_csv(text: str, out_path: Path) -> Path:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return out_path


def _out_path(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return default_out_dir() / default_name


def _run_experiment_command(args) -> int:
    config = _resolve_config(args)
    body = _request(args, f"/experiments/{config.kind}", config)
    path = _write_csv(body["csv"], _out_path(args, f"{config.kind}.csv"))
    print(f"wrote {len(body['rows'])} rows to {path}")
    if config.kind == "filter":
        s = body["summary"]
        print(f"kept {len(body['rows'])} of {s['total']} packets: "
              f"{s['abandoned_count']} abandoned, "
              f"{s['supplement_count']} supplements, "
              f"reduction ratio {s['reduction_ratio']:.4f} "
              f"({config.filter_mode} mode)")
    return 0


def _run_selftest(args) -> int:
    config = _resolve_config(args)
    body = _request(args, "/selftest", config)
    for row in body["rows"]:
        print(f"P_s={row['power_w']:g} W  theta={row['theta_db']:g} dB  "
              f"analytic={row['p_cov_analytic']:.6f}  "
              f"mc={row['p_cov_mc']:.6f}  |diff|={row['abs_diff']:.6f}  "
              f"tol={row['tolerance']:.6f}  {row['verdict']}")
    path = _write_csv(body["csv"], _out_path(args, "selftest.csv"))
    print(f"wrote {len(body['rows'])} rows to {path}")
    if body["ok"]:
        print("selftest: PASS")
        return 0
    print("selftest: FAIL", file=sys.stderr)
    return 2


def _run_serve(args) -> int:
    import uvicorn
    from .service.app import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "serve":
            return _run_serve(args)
        if args.command == "selftest":
            return _run_selftest(args)
        return _run_experiment_command(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0
    except UavnetError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
