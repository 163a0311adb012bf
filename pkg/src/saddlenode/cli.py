"""Command-line front end.

Every subcommand is a thin client of the HTTP service: by default the
requests go to the app in-process, with ``--server URL`` they go over the
network.  Exit codes: 0 success, 1 verification or numerical failure,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__

_VALUE_FLAGS = {"--a-range", "--b-range", "--grid", "--order", "--x", "--a"}


class InputError(Exception):
    pass


class RunFailure(Exception):
    pass


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--a-range -6:0" would be taken for an option; rewrite it as "--a-range=-6:0"
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok in _VALUE_FLAGS and nxt[:1] == "-" and (nxt[1:2].isdigit() or nxt[1:2] == "."):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _grid(text: str) -> tuple[int, int]:
    try:
        na, nb = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAxNB, got {text!r}") from None
    return na, nb


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", help="service URL; default runs the service in-process")
    common.add_argument("--output", help="output path (stdout when omitted)")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--input", required=True, help="system document (JSON)")
    system.add_argument("--order", type=int, default=70, help="truncation order N (default 70)")

    p = argparse.ArgumentParser(prog="saddlenode", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"saddlenode {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("expand", parents=[common, system], help="coefficient table")
    e.add_argument("--format", choices=["csv"], default="csv")

    s = sub.add_parser("sinf", parents=[common, system], help="estimate the limit of s_n")
    s.add_argument("--method", choices=["last", "aitken"], default="last")
    s.add_argument("--format", choices=["json"], default="json")

    sc = sub.add_parser("scan", parents=[common], help="sign map of S_N for the Riccati family")
    sc.add_argument("--a-range", type=_range, default=(-6.0, 0.0))
    sc.add_argument("--b-range", type=_range, default=(-2.0, 2.0))
    sc.add_argument("--grid", type=_grid, default=(64, 64))
    sc.add_argument("--order", type=int, default=70)
    sc.add_argument("--workers", type=int, default=1)
    sc.add_argument("--format", choices=["csv", "pgm", "json"], default=None,
                    help="write only this artifact (default: CSV, PGM and contour CSV)")

    n = sub.add_parser("normalize", parents=[common, system], help="reduce to a >= 2")
    n.add_argument("--format", choices=["json"], default="json")

    b = sub.add_parser("borel", parents=[common, system], help="Borel-plane profile")
    b.add_argument("--panels", type=int, default=64)
    b.add_argument("--pade-order", type=int, default=None)
    b.add_argument("--a", type=float, default=None, help="kernel exponent (default: system a)")
    b.add_argument("--x", type=float, default=None, help="also Borel-Pade sum at this x")
    b.add_argument("--format", choices=["csv"], default="csv")

    v = sub.add_parser("verify", parents=[common], help="sampled inequalities and special functions")
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    return p


def _client(server: str | None):
    if server:
        import httpx
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import app
    return TestClient(app, raise_server_exceptions=True)


def _post(client, path: str, payload: dict) -> dict:
    r = client.post(path, json=payload)
    if r.status_code == 200:
        return r.json()
    detail = _detail(r)
    # 400: domain errors; 422 with a list: request validation; 422 with text: numerics
    if r.status_code == 400 or (r.status_code == 422 and not _is_text_detail(r)):
        raise InputError(detail)
    raise RunFailure(detail)


def _is_text_detail(r) -> bool:
    try:
        return isinstance(r.json().get("detail"), str)
    except ValueError:
        return True


def _detail(r) -> str:
    try:
        d = r.json().get("detail")
    except ValueError:
        return r.text
    if isinstance(d, list):  # pydantic validation errors
        return "; ".join(f"{'.'.join(str(x) for x in e.get('loc', [])[1:])}: {e.get('msg')}" for e in d)
    return str(d)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _system_payload(args) -> dict:
    return {"system_text": _read(args.input), "order": args.order}


def run(args) -> int:
    if args.command == "serve":
        import uvicorn
        uvicorn.run("saddlenode.service.app:app", host=args.host, port=args.port)
        return 0
    with _client(args.server) as client:
        if args.command == "expand":
            _emit(_post(client, "/expand", _system_payload(args))["csv"], args.output)
        elif args.command == "sinf":
            payload = _system_payload(args)
            payload["method"] = "last_term" if args.method == "last" else "aitken"
            out = _post(client, "/sinf", payload)
            out.pop("meta")
            _emit(json.dumps(out, sort_keys=True) + "\n", args.output)
        elif args.command == "normalize":
            _emit(_post(client, "/normalize", _system_payload(args))["document"], args.output)
        elif args.command == "borel":
            payload = _system_payload(args)
            payload.update(a=args.a, panels=args.panels, pade_order=args.pade_order, x=args.x)
            _emit(_post(client, "/borel", payload)["csv"], args.output)
        elif args.command == "scan":
            return _scan(client, args)
        elif args.command == "verify":
            out = _post(client, "/verify", {"trials": args.trials, "seed": args.seed})
            lines = [f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}: {r['detail']}\n" for r in out["rows"]]
            _emit("".join(lines), args.output)
            return 0 if out["all_passed"] else 1
    return 0


def _scan(client, args) -> int:
    (a_lo, a_hi), (b_lo, b_hi) = args.a_range, args.b_range
    if not (a_lo < a_hi and b_lo < b_hi):
        raise InputError("ranges must satisfy lo < hi")
    na, nb = args.grid
    out = _post(client, "/scan", {"a_range": [a_lo, a_hi], "b_range": [b_lo, b_hi], "na": na,
                                  "nb": nb, "order": args.order, "workers": args.workers})
    fits = json.dumps(out["fits"], sort_keys=True) + "\n"
    if args.format == "json":
        _emit(fits, args.output)
        return 0
    if args.format in ("csv", "pgm"):
        _emit(out[args.format], args.output)
        return 0
    if args.output is None:
        raise InputError("scan writes three files; give --output BASE (or a single --format)")
    base = Path(args.output)
    base.with_suffix(".csv").write_text(out["csv"], encoding="utf-8")
    base.with_suffix(".pgm").write_text(out["pgm"], encoding="utf-8")
    base.with_name(base.stem + "_contours.csv").write_text(out["contours_csv"], encoding="utf-8")
    sys.stdout.write(fits)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RunFailure as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
