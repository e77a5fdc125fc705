"""Command-line client for the experiment service.

The CLI is a thin HTTP client: every subcommand builds a request model,
posts it to the service, and writes the returned report to a run
directory.  By default the service app is called in-process (no network);
``--server URL`` targets a running instance instead, e.g. one started with
``fockml serve``.

Run directory layout:

    config.json    the request that was sent (re-running it reproduces
                   metrics.json and grids/ bit for bit)
    metrics.json   deterministic metrics
    run_info.json  wall time and endpoint (not deterministic)
    grids/*.csv    plot-ready column grids
    models/*.json  trained models, when the command produces them
    dataset.csv    for gen-data, the points in the standard CSV format

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMAND_ENDPOINTS = {
    "gen-data": "/datasets/generate",
    "fit-fourier": "/experiments/fit-fourier",
    "dof-table": "/experiments/dof-table",
    "classify-variational": "/experiments/classify-variational",
    "fit-kernel": "/experiments/fit-kernel",
    "classify-kernel": "/experiments/classify-kernel",
    "rks": "/experiments/rks",
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="JSON file with request fields")
    parser.add_argument("--seed", type=int, help="override the request seed")
    parser.add_argument("--out", type=Path, help="run directory for outputs")
    parser.add_argument("--server", help="service URL (default: in-process)")
    parser.add_argument("--threads", type=int, help="worker threads for batch work")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockml",
        description="Linear-optics circuit experiments: fitting, kernels, kitchen sinks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a toy dataset CSV")
    p.add_argument("--name", choices=["linear", "circles", "moons"])
    p.add_argument("--n", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--factor", type=float)
    _add_common(p)

    p = sub.add_parser("fit-fourier", help="fit the degree-3 series per input state")
    p.add_argument("--input-states", nargs="+", metavar="STATE")
    p.add_argument("--n-points", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--restarts", type=int)
    _add_common(p)

    p = sub.add_parser("dof-table", help="degrees-of-freedom table over (m, n)")
    p.add_argument("--m-max", type=int)
    p.add_argument("--n-max", type=int)
    _add_common(p)

    p = sub.add_parser("classify-variational", help="train the circuit classifier")
    p.add_argument("--dataset", choices=["linear", "circles", "moons"])
    p.add_argument("--input-states", nargs="+", metavar="STATE")
    p.add_argument("--alpha", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--factor", type=float)
    p.add_argument("--max-evals", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--grid-size", type=int)
    _add_common(p)

    p = sub.add_parser("fit-kernel", help="fit Gaussian kernels over (photons, sigma)")
    p.add_argument("--photons", nargs="+", type=int)
    p.add_argument("--sigma", nargs="+", type=float, dest="sigmas")
    p.add_argument("--grid-points", type=int)
    _add_common(p)

    p = sub.add_parser("classify-kernel", help="kernel-ridge classification")
    p.add_argument("--dataset", choices=["linear", "circles", "moons"])
    p.add_argument("--photons", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--factor", type=float)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--grid-points", type=int)
    _add_common(p)

    p = sub.add_parser("rks", help="random-kitchen-sinks classification")
    p.add_argument("--dataset", choices=["linear", "circles", "moons"])
    p.add_argument("--photons", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--k", nargs="+", type=int, dest="ks")
    p.add_argument("--features", nargs="+", type=int, dest="feature_counts")
    p.add_argument("--alpha", type=float)
    p.add_argument("--noise", type=float)
    p.add_argument("--grid-size", type=int)
    p.add_argument("--standardize", action="store_true", default=None)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


_COMMON_KEYS = {"command", "config", "out", "server", "func"}


def build_request(args: argparse.Namespace) -> dict:
    """Merge the config file (if any) with explicit CLI flags.

    Flags override file values; unset fields are omitted so the service
    applies its defaults.
    """
    request: dict = {}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise SystemExit(f"cannot read config file: {err}")
        # null in a config file means "use the default", matching omission
        request.update({k: v for k, v in loaded.items() if v is not None})
    for key, value in vars(args).items():
        if key in _COMMON_KEYS or value is None:
            continue
        request[key] = value
    return request


def post_request(command: str, request: dict, server: str | None) -> httpx.Response:
    endpoint = COMMAND_ENDPOINTS[command]
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(endpoint, json=request)
    # in-process dispatch against the ASGI app, same wire format
    import asyncio

    from .service import app

    async def call():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://fockml", timeout=None
        ) as client:
            return await client.post(endpoint, json=request)

    return asyncio.run(call())


def _grid_to_csv(grid: dict) -> str:
    names = list(grid.keys())
    columns = [grid[name] for name in names]
    lines = [",".join(names)]
    for row in zip(*columns):
        lines.append(",".join(str(v) if isinstance(v, int) else repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_report(report: dict, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(report["config"], indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "metrics.json").write_text(
        json.dumps(report["metrics"], indent=2, sort_keys=True) + "\n"
    )
    (out_dir / "run_info.json").write_text(
        json.dumps(
            {"command": report["command"], "wall_time_s": report["wall_time_s"]},
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    grids = report.get("grids") or {}
    if grids:
        grid_dir = out_dir / "grids"
        grid_dir.mkdir(exist_ok=True)
        for name, grid in grids.items():
            (grid_dir / f"{name}.csv").write_text(_grid_to_csv(grid))
    models = report.get("models") or {}
    if models:
        model_dir = out_dir / "models"
        model_dir.mkdir(exist_ok=True)
        for label, payload in models.items():
            (model_dir / f"{label}.json").write_text(
                json.dumps(payload, indent=2, sort_keys=True) + "\n"
            )
    if report["command"] == "gen-data":
        from .datasets import save_dataset
        from .experiments import dataset_from_grid

        data = dataset_from_grid(
            report["grids"]["dataset"],
            name=report["config"]["name"],
            seed=report["config"]["seed"],
        )
        data.params.update(
            {k: v for k, v in report["config"].items() if k in ("noise", "factor") and v is not None}
        )
        save_dataset(data, out_dir / "dataset.csv")


def _print_metrics_summary(report: dict):
    print(f"{report['command']}: done in {report['wall_time_s']} s")
    print(json.dumps(report["metrics"], indent=2, sort_keys=True))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    request = build_request(args)
    response = post_request(args.command, request, args.server)

    if response.status_code == 422:
        print("configuration rejected:", response.text, file=sys.stderr)
        return EXIT_CONFIG
    if response.status_code != 200:
        try:
            payload = response.json()
        except ValueError:
            payload = {"detail": response.text, "kind": "unknown"}
        kind = payload.get("kind", "unknown")
        print(f"{kind}: {payload.get('detail')}", file=sys.stderr)
        return EXIT_NUMERICAL if kind == "numerical-failure" else EXIT_CONFIG

    report = response.json()
    if args.out is not None:
        write_report(report, Path(args.out))
        print(f"run written to {args.out}")
    _print_metrics_summary(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
