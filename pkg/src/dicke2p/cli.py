"""Command-line harness: deterministic data files for each figure-style scan.

Subcommands: fidelity-scan, rabi, wigner, ghz, bell, bell-timing.
Output is CSV with '#' metadata header lines plus a JSON sidecar
(<out>.meta.json), or a single JSON payload per table with --format json.
Flag precedence: explicit flags > --config file > built-in defaults.
Exit codes: 0 success, 2 configuration error, 3 validity warning under
--strict.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from importlib import resources

import numpy as np

from . import __version__, scans
from .hilbert import FockCutoff
from .models import FullModelParams, effective_coupling, validity_report
from .protocols import HomodyneConfig

_ENGINE = {"effective": "exact", "analytic": "analytic"}

_DEF_GG = 1.0
_DEF_GE = 1.0
_DEF_DELTA = 500.0


def _num(text: str) -> float | int:
    v = float(text)
    return int(v) if v.is_integer() else v


def _nbar_list(text: str) -> tuple[float | int, ...]:
    try:
        vals = tuple(_num(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad nbar list {text!r}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("nbar values must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dicke2p",
        description="Two-atom two-photon cavity model: scans and protocols.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, *, seeded: bool = False) -> None:
        sp.add_argument("--out", default=None, help="output path (default <command>.<fmt>)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--config", default=None, help="flat key=value config file")
        sp.add_argument("--strict", action="store_true",
                        help="escalate validity warnings to exit code 3")
        if seeded:
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--ensemble", type=int, default=100)

    def coupling(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--g", type=float, default=None,
                        help="effective two-photon coupling "
                             "(default -gg*ge/delta; passing it skips validity checks)")
        sp.add_argument("--gg", type=float, default=_DEF_GG)
        sp.add_argument("--ge", type=float, default=_DEF_GE)
        sp.add_argument("--delta", type=float, default=_DEF_DELTA)

    sp = sub.add_parser("fidelity-scan",
                        help="Haar-ensemble fidelity of reduced models vs the full one")
    sp.add_argument("--nbar", type=_nbar_list, default=(20, 50, 100))
    sp.add_argument("--gg", type=float, default=_DEF_GG)
    sp.add_argument("--ge", type=float, default=_DEF_GE)
    sp.add_argument("--delta", type=float, default=_DEF_DELTA)
    sp.add_argument("--time-points", type=int, default=101)
    common(sp, seeded=True)

    sp = sub.add_parser("rabi", help="collapse and revival of <S_ee> for |ee>|alpha>")
    sp.add_argument("--nbar", type=_nbar_list, default=(50,))
    sp.add_argument("--gt-max", type=float, default=1.2, help="window end in units of pi")
    sp.add_argument("--points", type=int, default=481)
    coupling(sp)
    common(sp)

    sp = sub.add_parser("wigner", help="field Wigner function at t=0, tr/4, tr/2")
    sp.add_argument("--nbar", type=_nbar_list, default=(50,))
    sp.add_argument("--phi", type=float, default=2.0 * math.pi / 3.0)
    sp.add_argument("--grid-points", type=int, default=201)
    coupling(sp)
    common(sp)

    sp = sub.add_parser("ghz", help="GHZ fidelity at half revival vs mean photon number")
    sp.add_argument("--nbar", type=_nbar_list, default=(10, 20, 50, 100))
    sp.add_argument("--phi", type=float, default=math.pi / 4.0)
    sp.add_argument("--engine", choices=tuple(_ENGINE), default="effective")
    coupling(sp)
    common(sp)

    sp = sub.add_parser("bell", help="Bell-protocol fidelity per outcome, Haar ensemble")
    sp.add_argument("--nbar", type=_nbar_list, default=(10, 20, 50))
    sp.add_argument("--phi", type=float, default=math.pi / 8.0)
    sp.add_argument("--engine", choices=tuple(_ENGINE), default="effective")
    sp.add_argument("--efficiency", type=float, default=None,
                    help="homodyne efficiency in (0,1]; omit for ideal detection")
    sp.add_argument("--lo-phase", type=float, default=None,
                    help="local-oscillator phase (default: the field phase phi)")
    coupling(sp)
    common(sp, seeded=True)

    sp = sub.add_parser("bell-timing", help="protocol fidelity around the optimal gt = pi/2")
    sp.add_argument("--nbar", type=_nbar_list, default=(50,))
    sp.add_argument("--phi", type=float, default=math.pi / 8.0)
    sp.add_argument("--half-width", type=float, default=0.08,
                    help="half width of the gt window")
    sp.add_argument("--points", type=int, default=321)
    coupling(sp)
    common(sp)

    return parser


def _load_config_tokens(path: str) -> list[str]:
    """Translate a flat key=value file into CLI tokens; inserted before the
    explicit flags so explicit flags win."""
    tokens: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip().replace("_", "-")
            value = value.strip()
            if key == "config":
                raise ValueError(f"{path}:{ln}: config cannot nest")
            if key == "strict":
                if value.lower() in ("1", "true", "yes"):
                    tokens.append("--strict")
                elif value.lower() not in ("0", "false", "no"):
                    raise ValueError(f"{path}:{ln}: strict must be boolean")
                continue
            tokens += [f"--{key}", value]
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    out: list[str] = []
    path: str | None = None
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise ValueError("--config needs a path")
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
            continue
        out.append(tok)
        i += 1
    if not out:
        raise ValueError("--config requires a subcommand")
    return [out[0]] + _load_config_tokens(str(path)) + out[1:]


def _effective_g(args: argparse.Namespace) -> float:
    if getattr(args, "g", None) is not None:
        return args.g
    return effective_coupling(args.gg, args.ge, args.delta)


def _check_validity(args: argparse.Namespace, nbar_max: float) -> int:
    """0 if fine, 3 when a failed validity report is escalated by --strict."""
    if getattr(args, "g", None) is not None:
        return 0
    params = FullModelParams(
        omega=0.0,
        delta=args.delta,
        g_g=args.gg,
        g_e=args.ge,
        cutoff=FockCutoff.for_mean_photon(float(nbar_max)),
    )
    report = validity_report(params, float(nbar_max))
    if report.ok:
        return 0
    parts = []
    if not report.stark_closeness_ok:
        parts.append("photon-dependent Stark shift is not negligible (|ge^2-gg^2| >= ge^3/delta)")
    if not report.revival_reachable_ok:
        parts.append(
            f"revival time exceeds the adiabatic horizon (ge*nbar*pi = "
            f"{args.ge * nbar_max * math.pi:.4g} vs 0.1*delta = {0.1 * args.delta:.4g})"
        )
    print("validity warning: " + "; ".join(parts), file=sys.stderr)
    return 3 if args.strict else 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _payload(command: str, seed, result: scans.ScanResult) -> dict:
    rows = [
        [None if math.isnan(v) else float(v) for v in row] for row in result.rows
    ]
    return {
        "command": command,
        "version": __version__,
        "seed": None if seed is None else int(seed),
        "params": _jsonable(result.meta),
        "columns": list(result.columns),
        "rows": rows,
    }


def _load_schema() -> dict:
    with resources.files("dicke2p").joinpath("data/output_schema.json").open(
        "r", encoding="utf-8"
    ) as fh:
        return json.load(fh)


def _check_schema(value, schema, path="$") -> None:
    """Minimal validator for the subset of JSON Schema used by the published
    output schema (types, required, properties, items, minItems)."""
    types = schema.get("type")
    if types is not None:
        allowed = types if isinstance(types, list) else [types]
        ok = False
        for t in allowed:
            if (
                (t == "object" and isinstance(value, dict))
                or (t == "array" and isinstance(value, list))
                or (t == "string" and isinstance(value, str))
                or (t == "integer" and isinstance(value, int) and not isinstance(value, bool))
                or (t == "number" and isinstance(value, (int, float)) and not isinstance(value, bool))
                or (t == "null" and value is None)
                or (t == "boolean" and isinstance(value, bool))
            ):
                ok = True
                break
        if not ok:
            raise ValueError(f"{path}: expected {allowed}, got {type(value).__name__}")
    if isinstance(value, dict):
        for req in schema.get("required", ()):
            if req not in value:
                raise ValueError(f"{path}: missing required key {req!r}")
        props = schema.get("properties", {})
        for key, sub in props.items():
            if key in value:
                _check_schema(value[key], sub, f"{path}.{key}")
        if schema.get("additionalProperties") is False:
            extra = set(value) - set(props)
            if extra:
                raise ValueError(f"{path}: unexpected keys {sorted(extra)}")
    if isinstance(value, list):
        if "minItems" in schema and len(value) < schema["minItems"]:
            raise ValueError(f"{path}: fewer than {schema['minItems']} items")
        items = schema.get("items")
        if items is not None:
            for i, v in enumerate(value):
                _check_schema(v, items, f"{path}[{i}]")


def _write_csv(path: str, payload: dict, wall_time: float) -> None:
    meta_line = json.dumps(payload["params"], separators=(",", ":"), sort_keys=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# command: {payload['command']}\n")
        fh.write(f"# version: {payload['version']}\n")
        fh.write(f"# seed: {payload['seed']}\n")
        fh.write(f"# wall_time_s: {wall_time:.3f}\n")
        fh.write(f"# params: {meta_line}\n")
        fh.write(",".join(payload["columns"]) + "\n")
        for row in payload["rows"]:
            fh.write(
                ",".join("nan" if v is None else format(v, ".17g") for v in row) + "\n"
            )


def _emit(args: argparse.Namespace, command: str, results: dict[str, scans.ScanResult]) -> None:
    """Write each named table; an empty name means no suffix on the path."""
    fmt = args.format
    base = args.out or f"{command.replace('-', '_')}.{fmt}"
    seed = getattr(args, "seed", None)
    schema = _load_schema()
    for name, result in results.items():
        stem, ext = os.path.splitext(base)
        path = base if not name else f"{stem}_{name}{ext or '.' + fmt}"
        wall = result.meta.get("wall_time_s", 0.0)
        payload = _payload(command, seed, result)
        _check_schema(payload, schema)
        if fmt == "json":
            body = dict(payload)
            body["wall_time_s"] = wall
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(body, fh, indent=1)
                fh.write("\n")
        else:
            _write_csv(path, payload, wall)
            sidecar = {
                "command": command,
                "version": __version__,
                "seed": payload["seed"],
                "params": payload["params"],
                "columns": payload["columns"],
                "wall_time_s": wall,
                "rows_file": os.path.basename(path),
            }
            with open(path + ".meta.json", "w", encoding="utf-8") as fh:
                json.dump(sidecar, fh, indent=1)
                fh.write("\n")
        print(path)


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    wall = time.perf_counter() - t0
    if isinstance(out, dict):
        for r in out.values():
            r.meta["wall_time_s"] = wall
    else:
        out.meta["wall_time_s"] = wall
    return out


def _run_fidelity_scan(args) -> dict[str, scans.ScanResult]:
    return {
        "": _timed(
            scans.fidelity_scan,
            tuple(args.nbar),
            args.gg,
            args.ge,
            args.delta,
            args.ensemble,
            args.seed,
            args.time_points,
        )
    }


def _run_rabi(args) -> dict[str, scans.ScanResult]:
    return {
        "": _timed(
            scans.rabi_curve,
            float(args.nbar[0]),
            _effective_g(args),
            args.gt_max,
            args.points,
        )
    }


def _run_wigner(args) -> dict[str, scans.ScanResult]:
    return _timed(
        scans.wigner_panels,
        float(args.nbar[0]),
        args.phi,
        _effective_g(args),
        args.grid_points,
    )


def _run_ghz(args) -> dict[str, scans.ScanResult]:
    return {
        "": _timed(
            scans.ghz_sweep,
            tuple(args.nbar),
            args.phi,
            _effective_g(args),
            _ENGINE[args.engine],
        )
    }


def _run_bell(args) -> dict[str, scans.ScanResult]:
    detection: str | HomodyneConfig = "ideal"
    if args.efficiency is not None:
        lo = args.phi if args.lo_phase is None else args.lo_phase
        detection = HomodyneConfig(lo_phase=lo, efficiency=args.efficiency)
    return {
        "": _timed(
            scans.bell_ensemble,
            tuple(args.nbar),
            args.phi,
            _effective_g(args),
            args.ensemble,
            args.seed,
            _ENGINE[args.engine],
            detection,
        )
    }


def _run_bell_timing(args) -> dict[str, scans.ScanResult]:
    return {
        "": _timed(
            scans.bell_timing,
            float(args.nbar[0]),
            args.phi,
            _effective_g(args),
            args.half_width,
            args.points,
        )
    }


_RUNNERS = {
    "fidelity-scan": _run_fidelity_scan,
    "rabi": _run_rabi,
    "wigner": _run_wigner,
    "ghz": _run_ghz,
    "bell": _run_bell,
    "bell-timing": _run_bell_timing,
}


def main(argv: list[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        spliced = _splice_config(raw)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(spliced)

    code = _check_validity(args, max(float(n) for n in args.nbar))
    if code:
        return code
    try:
        results = _RUNNERS[args.command](args)
        _emit(args, args.command, results)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
