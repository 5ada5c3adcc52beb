"""Command-line client of the simulator service.

By default requests are dispatched to the in-process application over
an ASGI transport, so no server needs to run; --server targets a
remote instance instead.  Exit status is 0 on success, 1 when any
detection or constraint is flagged, 2 on errors.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from .schema import RunOptions, load_scenario


def _post(path: str, payload: dict, server: str | None,
          timeout: float = 600.0) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=timeout) as client:
            return client.post(path, json=payload)

    from .service import app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://rtsim.local",
                                     timeout=timeout) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _build_payload(args: argparse.Namespace) -> dict:
    scenario = load_scenario(args.scenario)
    options = RunOptions(seed=args.seed, grid=args.grid, refine=args.refine,
                         quantize_delay=args.quantize_delay)
    return {"scenario": scenario.model_dump(mode="json"),
            "options": options.model_dump(mode="json")}


def _write_files(files: dict[str, str], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        with open(out_dir / name, "w", encoding="ascii", newline="") as fh:
            fh.write(content)
        print(f"wrote {out_dir / name}")


def _fail_http(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail", resp.text)
    except Exception:
        detail = resp.text
    print(f"error ({resp.status_code}): {detail}", file=sys.stderr)
    return 2


def _cmd_simulate(args: argparse.Namespace) -> int:
    resp = _post("/simulate", _build_payload(args), args.server)
    if resp.status_code != 200:
        return _fail_http(resp)
    body = resp.json()
    _write_files(body["files"], Path(args.out_dir))
    for w in body["warnings"]:
        print(f"warning: {w}")
    for det in body["detections"]:
        mark = "FLAGGED" if det["flagged"] else "ok"
        if det["range_m"] is None:
            print(f"target {det['target_id']}: not detected [{mark}]")
            continue
        print(f"target {det['target_id']}: R={det['range_m']:.4f} m "
              f"v={det['velocity_mps']:+.4f} m/s angle={det['angle_deg']:.3f} deg "
              f"(err {det['range_err_m']:+.4f} m, {det['velocity_err_mps']:+.4f} m/s, "
              f"{det['angle_err_deg']:+.3f} deg) [{mark}]")
    for con in body["constraints"]:
        mark = "ok" if con["ok"] else "VIOLATED"
        print(f"constraints target {con['target_id']}: {mark} "
              f"(phase offset {con['phase_offset_deg']:+.2f} deg)")
    return 1 if body["flagged"] else 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    resp = _post("/calibrate", _build_payload(args), args.server)
    if resp.status_code != 200:
        return _fail_http(resp)
    body = resp.json()
    _write_files(body["files"], Path(args.out_dir))
    period = body["period_estimate_s"]
    period_s = f"{period:.4e}" if period is not None else "n/a"
    print(f"best_offset_s={body['best_offset_s']:.6e} "
          f"period_estimate_s={period_s} "
          f"min_abs_error_deg={body['min_abs_error_deg']:.5f} "
          f"probe_alpha_deg={body['probe_alpha_deg']:.4f}")
    return 0


def _cmd_linearity(args: argparse.Namespace) -> int:
    resp = _post("/linearity", _build_payload(args), args.server)
    if resp.status_code != 200:
        return _fail_http(resp)
    body = resp.json()
    _write_files(body["files"], Path(args.out_dir))
    print(f"set-points: {len(body['rows'])} "
          f"max_abs_error_deg={body['max_abs_error_deg']:.5f}")
    return 0


def _cmd_dump_spectrum(args: argparse.Namespace) -> int:
    resp = _post("/dump-spectrum", _build_payload(args), args.server)
    if resp.status_code != 200:
        return _fail_http(resp)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "spectrum.bin"
    path.write_bytes(resp.content)
    print(f"wrote {path} ({len(resp.content)} bytes)")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help="scenario JSON file")
    parser.add_argument("--out-dir", default=".", help="artifact directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the scenario noise seed")
    parser.add_argument("--grid", type=int, default=8192,
                        help="angle grid size (uniform in sin)")
    parser.add_argument("--refine", action=argparse.BooleanOptionalAction,
                        default=True, help="quadratic peak refinement")
    parser.add_argument("--quantize-delay", action="store_true",
                        help="quantize loop delays to the 0.25 ns buffer step")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service "
                             "(default: in-process)")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rtsim",
        description="radar target simulator with steerable angle of arrival")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, doc in (
            ("simulate", _cmd_simulate, "run a multi-target frame"),
            ("calibrate", _cmd_calibrate, "run the coherency delay sweep"),
            ("linearity", _cmd_linearity, "steer through a set-point list"),
            ("dump-spectrum", _cmd_dump_spectrum,
             "write the binary range-spectrum dump")):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        p.set_defaults(fn=fn)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(fn=_cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
