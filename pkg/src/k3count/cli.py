"""Command-line front end.

The CLI is a thin client of the HTTP service: every mode marshals its config
into one of the /v1 endpoints, by default against the app mounted in-process
(no socket, same process, deterministic), or against a remote server via
--server.  Reports come back as JSON and are emitted as CSV or JSON; emitted
artifacts are byte-stable for a fixed config and seed, which is why the
volatile elapsed_ms column is written as 0.

Exit codes: 0 success, 2 input error, 3 wall violation (the charge is not
generic), 4 budget refusal.  Every failure also prints a one-line JSON
diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import httpx

from .errors import InputError
from .rationals import format_rational, parse_rational

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_WALL = 3
EXIT_BUDGET = 4

_STATUS_EXIT = {422: EXIT_INPUT, 409: EXIT_WALL, 413: EXIT_BUDGET}

CSV_COLUMNS = (
    "R", "total", "square_nonneg", "spherical_multiples", "normalized",
    "analytic_C", "rel_err", "elapsed_ms",
)

MODES = ("lattice-info", "count", "coefficient", "sweep", "volume", "twistor", "slag")

# modes whose natural artifact is a table of count rows
_ROW_MODES = ("count", "sweep", "twistor", "slag")


@dataclass
class RunConfig:
    """Everything one invocation needs, after merging config file and flags."""

    mode: str
    document: dict = field(default_factory=dict)  # parsed config file
    R: Optional[str] = None
    R_list: Optional[list] = None
    seed: int = 1
    threads: int = 1
    output: Optional[str] = None
    format: str = "csv"
    svg: bool = False
    server: Optional[str] = None
    budget: Optional[int] = 10**9


def _diag(code: str, message: str, **extra):
    line = {"code": code, "message": message}
    line.update(extra)
    print(json.dumps(line, sort_keys=True), file=sys.stderr)


def _request(path: str, payload: dict, server: Optional[str]):
    """POST to the service; in-process ASGI unless a server URL is given."""
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            resp = client.post(path, json=payload)
            return resp.status_code, resp.json()

    from .service import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://k3count.internal", timeout=None
        ) as client:
            resp = await client.post(path, json=payload)
            return resp.status_code, resp.json()

    return asyncio.run(go())


def _fail_from_response(status: int, body) -> int:
    err = body.get("error") if isinstance(body, dict) else None
    if isinstance(err, dict):
        extra = {k: v for k, v in err.items() if k not in ("code", "message")}
        _diag(err.get("code", "error"), err.get("message", ""), **extra)
    else:
        # pydantic schema failures arrive as FastAPI's {"detail": [...]}
        _diag("input_error", json.dumps(body, sort_keys=True, default=str))
    return _STATUS_EXIT.get(status, 1)


# ---------------------------------------------------------------------------
# emission


def _report_rows(responses) -> list:
    """Normalize service responses into CSV-schema rows (elapsed_ms -> 0)."""
    rows = []
    for rep in responses:
        row = {
            "R": rep["R"],
            "total": rep["total"],
            "square_nonneg": rep["square_nonneg"],
            "spherical_multiples": rep["spherical_multiples"],
            "normalized": rep["normalized"],
            "analytic_C": rep.get("analytic_C", ""),
            "rel_err": rep.get("rel_err", ""),
            "elapsed_ms": 0,
        }
        rows.append(row)
    return rows


def _csv_text(rows) -> str:
    out = [",".join(CSV_COLUMNS)]
    for row in rows:
        out.append(",".join(str(row[c]) for c in CSV_COLUMNS))
    return "\n".join(out) + "\n"


def _svg_text(rows, coefficient=None) -> str:
    """A minimal line chart of normalized counts against R, no dependencies."""
    width, height, margin = 640, 400, 50.0
    xs = [float(parse_rational(r["R"])) for r in rows]
    ys = [float(r["normalized"]) for r in rows]
    levels = ys + ([float(coefficient)] if coefficient is not None else [])
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(levels), max(levels)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = (width - 2 * margin) / (x1 - x0)
    sy = (height - 2 * margin) / (y1 - y0)

    def px(x):
        return margin + (x - x0) * sx

    def py(y):
        return height - margin - (y - y0) * sy

    pts = " ".join("%.2f,%.2f" % (px(x), py(y)) for x, y in zip(xs, ys))
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (width, height, width, height),
        '<rect width="%d" height="%d" fill="white"/>' % (width, height),
        '<polyline points="%s" fill="none" stroke="black" stroke-width="1.5"/>' % pts,
    ]
    for x, y in zip(xs, ys):
        parts.append('<circle cx="%.2f" cy="%.2f" r="3" fill="black"/>' % (px(x), py(y)))
    if coefficient is not None:
        yc = py(float(coefficient))
        parts.append(
            '<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="gray" '
            'stroke-dasharray="6,4"/>' % (margin, yc, width - margin, yc)
        )
        parts.append(
            '<text x="%.2f" y="%.2f" font-size="12" fill="gray">C = %.6g</text>'
            % (margin + 4, yc - 6, float(coefficient))
        )
    parts.append(
        '<text x="%.2f" y="%.2f" font-size="12">R</text>'
        % (width - margin + 8, height - margin + 4)
    )
    parts.append(
        '<text x="%.2f" y="%.2f" font-size="12">N(R)/R^d</text>' % (8, margin - 10)
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError("cannot write output %s: %s" % (path, exc)) from exc


def emit_report(rows, fmt: str, path: Optional[str], meta: dict,
                svg: bool = False, coefficient=None, extra: Optional[dict] = None) -> None:
    """Write the rows as CSV (the pinned column schema) or JSON {meta, rows}.

    Identical rows and meta produce identical bytes; nothing volatile is
    written (elapsed_ms is zeroed upstream).
    """
    if not rows:
        raise InputError("nothing to report: empty row set")
    if fmt == "csv":
        _write_text(path, _csv_text(rows))
    elif fmt == "json":
        doc = {"meta": meta}
        if extra:
            doc.update(extra)
        doc["rows"] = rows
        _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        raise InputError("format must be csv or json")
    if svg:
        if path is None or path == "-":
            raise InputError("--svg needs --output to derive the image path")
        base, _ = os.path.splitext(path)
        _write_text(base + ".svg", _svg_text(rows, coefficient))


def _emit_json_doc(doc: dict, cfg: RunConfig) -> None:
    if cfg.format == "csv":
        raise InputError("mode %s emits JSON only; use --format json" % cfg.mode)
    _write_text(cfg.output, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# the modes


def _need(document: dict, key: str) -> dict:
    section = document.get(key)
    if not isinstance(section, dict):
        raise InputError("config needs a %r section for this mode" % key)
    return section


def _R_values(cfg: RunConfig) -> list:
    if cfg.R_list:
        parsed = [parse_rational(str(x)) for x in cfg.R_list]
        if not parsed:
            raise InputError("R_list must be nonempty")
        if any(R <= 0 for R in parsed):
            raise InputError("R values must be positive")
        if any(b <= a for a, b in zip(parsed, parsed[1:])):
            raise InputError("R_list must be strictly increasing")
        return [format_rational(R) for R in parsed]
    if cfg.R is None:
        raise InputError("mode %s needs --R or --R-list" % cfg.mode)
    R = parse_rational(str(cfg.R))
    if R < 0:
        raise InputError("R must be >= 0")
    return [format_rational(R)]


def run(cfg: RunConfig) -> int:
    """Execute one configured invocation and return the process exit code."""
    try:
        return _dispatch(cfg)
    except InputError as exc:
        _diag(exc.code, str(exc))
        return EXIT_INPUT
    except httpx.HTTPError as exc:
        _diag("server_error", "request failed: %s" % exc)
        return 1


def _dispatch(cfg: RunConfig) -> int:
    doc = cfg.document
    meta = {"schema_version": 1, "mode": cfg.mode, "seed": cfg.seed}

    if cfg.mode == "lattice-info":
        status, body = _request("/v1/lattice-info",
                                {"lattice": _need(doc, "lattice")}, cfg.server)
        if status != 200:
            return _fail_from_response(status, body)
        _emit_json_doc({"meta": meta, "lattice": body}, cfg)
        return EXIT_OK

    if cfg.mode == "coefficient":
        status, body = _request("/v1/coefficient", _need(doc, "coefficient"),
                                cfg.server)
        if status != 200:
            return _fail_from_response(status, body)
        _emit_json_doc({"meta": meta, "coefficient": body}, cfg)
        return EXIT_OK

    if cfg.mode == "volume":
        payload = dict(_need(doc, "volume"))
        payload.setdefault("samples", 10**6)
        payload["seed"] = cfg.seed
        payload["threads"] = cfg.threads
        status, body = _request("/v1/volume", payload, cfg.server)
        if status != 200:
            return _fail_from_response(status, body)
        _emit_json_doc({"meta": meta, "volume": body}, cfg)
        return EXIT_OK

    if cfg.mode == "sweep":
        payload = {
            "charge": _need(doc, "charge"),
            "R_list": _R_values(cfg),
            "threads": cfg.threads,
            "budget": cfg.budget,
        }
        status, body = _request("/v1/sweep", payload, cfg.server)
        if status != 200:
            return _fail_from_response(status, body)
        rows = _report_rows(body["rows"])
        emit_report(rows, cfg.format, cfg.output, meta, svg=cfg.svg,
                    coefficient=body["coefficient"]["value"],
                    extra={"coefficient": body["coefficient"]})
        return EXIT_OK

    if cfg.mode in ("count", "twistor", "slag"):
        responses = []
        for R in _R_values(cfg):
            if cfg.mode == "count":
                payload = {"charge": _need(doc, "charge"), "R": R,
                           "threads": cfg.threads, "budget": cfg.budget}
                path = "/v1/count"
            elif cfg.mode == "twistor":
                section = _need(doc, "twistor")
                payload = {"gram": section.get("gram"),
                           "plane": section.get("plane"), "R": R,
                           "threads": cfg.threads, "budget": cfg.budget}
                path = "/v1/twistor"
            else:
                payload = {"slag": _need(doc, "slag"), "R": R,
                           "threads": cfg.threads, "budget": cfg.budget}
                path = "/v1/slag"
            status, body = _request(path, payload, cfg.server)
            if status != 200:
                return _fail_from_response(status, body)
            responses.append(body)
        rows = _report_rows(responses)
        emit_report(rows, cfg.format, cfg.output, meta, svg=cfg.svg)
        return EXIT_OK

    raise InputError("unknown mode %r (one of %s)" % (cfg.mode, ", ".join(MODES)))


# ---------------------------------------------------------------------------
# argument handling


def _parse_threads(value: str) -> int:
    if value == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("threads must be an integer or 'auto'")
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="k3count",
        description="Exact lattice-point counts for stability and twistor "
                    "regions, with closed-form convergence targets.",
    )
    p.add_argument("--config", metavar="PATH",
                   help="JSON config file (schema_version 1)")
    p.add_argument("--mode", choices=MODES, help="what to run (overrides config)")
    p.add_argument("--R", metavar="p/q", help="single radius, as an exact rational")
    p.add_argument("--R-list", metavar="a,b,c", dest="R_list",
                   help="comma-separated increasing radii")
    p.add_argument("--seed", type=int, help="RNG seed for Monte Carlo modes")
    p.add_argument("--threads", type=_parse_threads, metavar="N|auto",
                   help="worker threads (deterministic results regardless)")
    p.add_argument("--output", metavar="PATH", help="report path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="report format")
    p.add_argument("--svg", action="store_true",
                   help="also render <output>.svg with a minimal line chart")
    p.add_argument("--server", metavar="URL",
                   help="talk to a running service instead of in-process")
    p.add_argument("--budget", type=int, metavar="N",
                   help="enumeration point budget (default 10^9)")
    p.add_argument("--serve", action="store_true",
                   help="run the HTTP service instead of a computation")
    p.add_argument("--host", default="127.0.0.1", help="bind address for --serve")
    p.add_argument("--port", type=int, default=8000, help="port for --serve")
    return p


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise InputError("cannot read config %s: %s" % (path, exc)) from exc
    except json.JSONDecodeError as exc:
        raise InputError("config %s is not valid JSON: %s" % (path, exc)) from exc
    if not isinstance(document, dict):
        raise InputError("config must be a JSON object")
    version = document.get("schema_version")
    if version != 1:
        raise InputError("unsupported schema_version %r (expected 1)" % (version,))
    return document


def make_run_config(args: argparse.Namespace) -> RunConfig:
    document = load_config(args.config)
    mode = args.mode or document.get("mode")
    if not mode:
        raise InputError("no mode given (flag --mode or config 'mode')")
    R_list = None
    if args.R_list:
        R_list = [part.strip() for part in args.R_list.split(",") if part.strip()]
    elif document.get("R_list"):
        R_list = [str(x) for x in document["R_list"]]
    threads = args.threads
    if threads is None:
        raw = document.get("threads", 1)
        threads = _parse_threads(str(raw))
    budget = args.budget if args.budget is not None else document.get("budget", 10**9)
    return RunConfig(
        mode=mode,
        document=document,
        R=args.R if args.R is not None else document.get("R"),
        R_list=R_list,
        seed=args.seed if args.seed is not None else int(document.get("seed", 1)),
        threads=threads,
        output=args.output if args.output is not None else document.get("output"),
        format=args.format or document.get("format", "csv"),
        svg=bool(args.svg),
        server=args.server,
        budget=budget,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.serve:
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK
    try:
        cfg = make_run_config(args)
    except InputError as exc:
        _diag(exc.code, str(exc))
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
