"""Command-line front end: ``slanthelix analyze`` and ``slanthelix synthesize``.

Exit codes: 0 success (whatever the verdicts), 1 usage or parse error,
2 curve error (degenerate, irregular, invalid prescription), 3 internal error.
Every flag can also be set through a ``SLANTHELIX_<FLAG>`` environment
variable; flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import (
    Tolerances,
    brute_force_axis,
    classify_inclined,
    classify_v2_slant,
    classify_vn_slant,
    frame_index,
    reconstruct_axis,
)
from .errors import CurveError, DomainError, FixtureRejected, ParseError, SlantHelixError
from .expr import CurveSpec, parse_curve
from .frenet import build_apparatus, check_nondegenerate
from .harmonic import harmonic_H, harmonic_Hstar
from .synthesize import CurvaturePrescription, integrate_frenet

EXIT_OK, EXIT_USAGE, EXIT_CURVE, EXIT_INTERNAL = 0, 1, 2, 3
KIND_ALIASES = {"inclined": "inclined", "v2": "v2_slant", "vn": "vn_slant",
                "v2_slant": "v2_slant", "vn_slant": "vn_slant"}
KIND_ORDER = ("inclined", "v2_slant", "vn_slant")
ORACLE_RESOLUTION = {3: 64, 4: 32, 5: 12}
ENV_PREFIX = "SLANTHELIX_"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple
    grid: int = 512
    jet_order: int | None = None
    tol: Tolerances = Tolerances()
    kinds: tuple = KIND_ORDER
    oracle: bool = False
    fmt: str = "json"
    out: Path = Path(".")

    def __post_init__(self):
        if self.grid < 16:
            raise UsageError(f"grid too small: {self.grid} < 16")
        if self.fmt not in ("json", "csv", "both"):
            raise UsageError(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0" if x != 0 or math.copysign(1, x) > 0 else "-0.0"
    return format(x, ".17g")


def dump_json(obj, indent=0):
    """JSON text with floats at 17 significant digits and insertion key order."""
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dump_json(v, indent + 2)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if seq and all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dump_json(v) for v in seq) + "]"
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(inner + dump_json(v, indent + 2) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return json.dumps(str(obj))


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_csv(spec: CurveSpec) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["t"] + [f"x_{i}" for i in range(1, spec.n + 1)])
    for t, row in zip(spec.samples_t, spec.samples_x):
        w.writerow([format(float(v), ".17g") for v in (t, *row)])
    return out.getvalue()


def read_sampled_csv(text: str) -> CurveSpec:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty sampled-curve file")
    head = [c.strip() for c in rows[0]]
    if head[0] != "t":
        raise ParseError("sampled-curve CSV must start with a 't' column", 1, 1)
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        raise ParseError(f"bad number in sampled-curve CSV: {exc}") from None
    if data.ndim != 2 or data.shape[1] != len(head):
        raise ParseError("ragged sampled-curve CSV")
    coords = [i for i, c in enumerate(head) if c.startswith("x_")]
    if len(coords) < 3:
        raise ParseError(f"expected at least 3 coordinate columns, found {len(coords)}")
    try:
        return CurveSpec.sampled(data[:, 0], data[:, coords])
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_input(path: Path):
    """Return ``(spec, prescription)``; exactly one of them is not None."""
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            return None, CurvaturePrescription.from_json(text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"invalid prescription JSON: {exc}") from None
    if path.suffix.lower() == ".csv":
        return read_sampled_csv(text), None
    return parse_curve(text), None


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

def _verdict_record(v):
    rec = {
        "kind": v.helix_kind,
        "method": v.method,
        "is_helix": v.is_helix,
        "constancy_residual": v.constancy_residual,
        "nonzero_margin": v.nonzero_margin,
    }
    if "c0" in v.details:
        rec["c0"] = v.details["c0"]
    return rec


def _axis_record(est):
    c = est.verify
    return {
        "X": [float(x) for x in est.X],
        "phi": est.phi,
        "cos_phi": c.mean,
        "source": est.source,
        "verification": {
            "j": c.j, "mean": c.mean, "spread": c.spread, "min": c.min, "max": c.max, "passed": c.passed,
            "max_deviation": est.max_deviation, "max_dX_ds": est.max_dX_ds, "norm_error": est.norm_error,
        },
    }


def analyze_apparatus(app, cfg: RunConfig, label: str):
    """Classify an apparatus; returns ``(report, profiles)``."""
    n = app.n
    tol = cfg.tol
    verdicts, axes, profiles, oracle = [], {}, {}, {}
    for kind in KIND_ORDER:
        if kind not in cfg.kinds:
            continue
        if kind == "inclined":
            prof = profiles["H"] = harmonic_H(app)
            pair = [classify_inclined(prof, m, tol) for m in ("algebraic", "differential")]
        elif kind == "vn_slant":
            prof = profiles["Hstar"] = harmonic_Hstar(app)
            pair = [classify_vn_slant(prof, m, tol) for m in ("algebraic", "differential")]
        else:
            pair = [classify_v2_slant(app, m, tol) for m in ("algebraic", "differential")]
            prof = profiles["G"] = pair[0].profile
        verdicts.extend(pair)
        if pair[0].is_helix:
            axes[kind] = _axis_record(reconstruct_axis(kind, app, prof, pair[0], tol))
        if cfg.oracle and n <= 5:
            est = brute_force_axis(app, frame_index(kind, n), ORACLE_RESOLUTION[n], tol, kind=kind)
            oracle[kind] = None if est is None else _axis_record(est)
    nd = check_nondegenerate(app)
    report = {
        "curve": {"source": label, "type": app.spec.kind, "interval": list(app.spec.interval)},
        "n": n,
        "verdicts": [_verdict_record(v) for v in verdicts],
        "axis": axes,
        "tolerances": tol.as_dict(),
        "grid": {"N": app.N, "s_length": float(app.s[-1]), "min_abs_k": list(nd.min_abs)},
    }
    if cfg.oracle:
        report["oracle"] = oracle
    return report, profiles


def _outputs(cfg, stem, report, app, profiles):
    files = {}
    if cfg.fmt in ("json", "both"):
        files[f"{stem}.report.json"] = dump_json(report) + "\n"
    if cfg.fmt in ("csv", "both"):
        files[f"{stem}.frenet.csv"] = app.to_csv()
        for name, prof in profiles.items():
            files[f"{stem}.{name}.csv"] = prof.to_csv()
    return files


def run_one(path: Path, cfg: RunConfig):
    spec, presc = load_input(path)
    if presc is not None:
        app = integrate_frenet(presc, samples=cfg.grid).apparatus
    else:
        app = build_apparatus(spec, cfg.grid, jet_order=cfg.jet_order)
    report, profiles = analyze_apparatus(app, cfg, path.name)
    for name, text in _outputs(cfg, path.stem, report, app, profiles).items():
        write_atomic(cfg.out / name, text)
    return report


def _classify_error(exc):
    if isinstance(exc, (ParseError, UsageError, OSError, UnicodeDecodeError)):
        return EXIT_USAGE
    if isinstance(exc, (CurveError, DomainError, FixtureRejected)):
        return EXIT_CURVE
    return EXIT_INTERNAL


def _guard(fn, *args):
    try:
        fn(*args)
        return EXIT_OK
    except Exception as exc:  # mapped to an exit code below
        code = _classify_error(exc)
        prefix = {EXIT_USAGE: "error", EXIT_CURVE: "curve error", EXIT_INTERNAL: "internal error"}[code]
        print(f"slanthelix: {prefix}: {exc}", file=sys.stderr)
        return code


def cmd_analyze(cfg: RunConfig) -> int:
    codes = [_guard(run_one, Path(p), cfg) for p in cfg.inputs]
    return max(codes, default=EXIT_OK)


def cmd_synthesize(prescription: Path, out: Path, samples: int = 513) -> int:
    def work():
        try:
            p = CurvaturePrescription.from_json(prescription.read_text())
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ParseError(f"invalid prescription JSON: {exc}") from None
        except ValueError as exc:
            if isinstance(exc, SlantHelixError):
                raise
            raise CurveError(str(exc)) from None
        syn = integrate_frenet(p, samples=samples)
        stem = out.name[:-4] if out.name.endswith(".csv") else out.name
        write_atomic(out.with_name(stem + ".csv"), curve_csv(syn.curve))
        write_atomic(out.with_name(stem + ".frenet.csv"), syn.apparatus.to_csv())

    return _guard(work)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env(name, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def _kinds(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part not in KIND_ALIASES:
            raise argparse.ArgumentTypeError(f"unknown helix kind {part!r}")
        out.append(KIND_ALIASES[part])
    if not out:
        raise argparse.ArgumentTypeError("no helix kinds selected")
    return tuple(k for k in KIND_ORDER if k in out)


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _bool_env(name):
    return _env(name, "").strip().lower() in ("1", "true", "yes", "on")


def build_parser():
    p = _Parser(prog="slanthelix", description="Frenet apparatus and helix classification for curves in E^n.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    a = sub.add_parser("analyze", help="classify curve files and write reports")
    a.add_argument("inputs", nargs="+", help="curve (.curve/.txt), prescription (.json) or sampled (.csv) files")
    a.add_argument("--grid", type=int, default=_env("GRID", "512"))
    a.add_argument("--jet-order", type=int, default=_env("JET_ORDER"))
    a.add_argument("--tol-const", type=_positive, default=_env("TOL_CONST", "1e-6"))
    a.add_argument("--tol-zero", type=_positive, default=_env("TOL_ZERO", "1e-8"))
    a.add_argument("--tol-angle", type=_positive, default=_env("TOL_ANGLE", "1e-6"))
    a.add_argument("--kinds", type=_kinds, default=_env("KINDS", "inclined,v2,vn"))
    a.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=_bool_env("ORACLE"),
                   help="cross-check every kind with the brute-force axis search")
    a.add_argument("--format", dest="fmt", choices=("json", "csv", "both"), default=_env("FORMAT", "json"))
    a.add_argument("--out", type=Path, default=_env("OUT", "."))

    s = sub.add_parser("synthesize", help="integrate a curvature prescription")
    s.add_argument("prescription", type=Path)
    s.add_argument("out", type=Path, help="output path for the sampled curve CSV")
    s.add_argument("--samples", type=int, default=_env("SAMPLES", "513"), help="apparatus rows to export")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synthesize":
        return cmd_synthesize(args.prescription, args.out, int(args.samples))
    try:
        cfg = RunConfig(
            inputs=tuple(args.inputs),
            grid=int(args.grid),
            jet_order=None if args.jet_order is None else int(args.jet_order),
            tol=Tolerances(float(args.tol_const), float(args.tol_zero), float(args.tol_angle)),
            kinds=args.kinds if isinstance(args.kinds, tuple) else _kinds(args.kinds),
            oracle=bool(args.oracle),
            fmt=args.fmt,
            out=Path(args.out),
        )
    except (UsageError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"slanthelix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return cmd_analyze(cfg)


if __name__ == "__main__":
    sys.exit(main())
