"""Command-line front end.

Every command writes CSV (header ``# holomux v<version>`` then column names)
or JSON (with ``schema_version``). Floats use 17 significant digits and
unbounded values the literal ``inf``. Exit codes: 0 ok, 2 invalid
arguments, 3 numeric failure; errors go to stderr as JSON.
"""

import argparse
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import DomainError, HolomuxError, NumericError
from .geometry import PSI_INDICES, ScenarioGeometry, psi_closed, view_angle
from .holographic import aperture_delta, eigen_holographic, threshold_gaps
from .multiplexing import (
    ThresholdPair,
    n_active,
    snr_rx_from_reference,
    spectral_efficiency,
    threshold_reference,
    waterfill,
)
from .regions import DEFAULT_M_LIST, X_RANGE, boundary_curve, region_map, validation_error

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


# -- formatting -------------------------------------------------------------

def fmt(value):
    """17 significant digits, ``inf``/``-inf``/``nan`` literals, ints verbatim."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v + 0.0:.17g}"  # + 0.0 folds -0 into 0


def to_db(value):
    value = float(value)
    if value <= 0:
        return -math.inf
    return 10.0 * math.log10(value)


def _json_encode(obj):
    # json.dumps prints shortest round-trip reprs; the contract is 17 digits,
    # so numbers are emitted by hand. Non-finite values become strings.
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_json_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_encode(v) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    text = fmt(obj)
    return text if math.isfinite(float(obj)) else json.dumps(text)


def write_csv(stream, columns, rows):
    stream.write(f"# holomux v{__version__}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def write_table(stream, columns, rows, out_format, command):
    if out_format == "csv":
        write_csv(stream, columns, rows)
    else:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "holomux_version": __version__,
            "command": command,
            "columns": list(columns),
            "rows": [list(r) for r in rows],
        }
        stream.write(_json_encode(doc) + "\n")


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message, EXIT_USAGE)
        raise SystemExit(EXIT_USAGE)


def _emit_error(kind, message, code, diagnostics=None):
    doc = {"schema_version": SCHEMA_VERSION, "error": kind, "message": str(message),
           "exit_code": code}
    if diagnostics:
        doc["diagnostics"] = diagnostics
    sys.stderr.write(_json_encode(doc) + "\n")


def parse_grid(text):
    """``f`` or ``start:stop:count`` (inclusive linspace)."""
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            count = int(parts[2])
            if count < 0:
                raise ValueError
            return np.linspace(float(parts[0]), float(parts[1]), count)
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected <f> or <start:stop:count>, got {text!r}")


def parse_pair(text):
    parts = str(text).split(":")
    try:
        if len(parts) == 2:
            return float(parts[0]), float(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected <lo:hi>, got {text!r}")


def parse_int_list(text):
    try:
        return [int(v) for v in str(text).replace(":", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def parse_resolution(text):
    vals = parse_int_list(text)
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 0:
        raise argparse.ArgumentTypeError("resolution is <n> or <ny,nz> with n >= 0")
    return tuple(vals)


def _common(p, theta=True, dl=False, snr=True):
    if theta:
        p.add_argument("--theta-deg", type=parse_grid, default=parse_grid("0"),
                       help="angle in degrees, <f> or <start:stop:count>")
    if dl:
        p.add_argument("--d-over-l", type=parse_grid, default=parse_grid("1"),
                       help="distance ratio D/L, <f> or <start:stop:count>")
    if snr:
        p.add_argument("--snr0-db", type=float, default=20.0, help="reference SNR in dB")
    p.add_argument("--tpol", type=int, choices=(2, 3), default=3)
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="output format (default json for point, csv otherwise)")
    p.add_argument("--out", default="-", help="output path (default stdout)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="sampling seed (unused by exact commands)")
    p.add_argument("--x-range", type=parse_pair, default=X_RANGE, help="root-search range lo:hi")


def _which(p):
    p.add_argument("--which", type=int, choices=(1, 2), default=None,
                   help="restrict output to one boundary (other columns left empty)")


def _keep(args, which):
    return args.which is None or args.which == which


def build_parser():
    parser = _Parser(prog="holomux", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"holomux {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="full evaluation at one geometry")
    _common(p, dl=True)
    p.add_argument("--log-base", choices=("2", "e"), default="2")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("curves", help="reference SNR thresholds versus D/L")
    _common(p, dl=True, snr=False)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("boundary", help="exact and approximate boundaries versus theta")
    _common(p)
    _which(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("map", help="rasterized stream-count regions")
    _common(p, theta=False)
    p.add_argument("--y-range", type=parse_pair, default=(-4.0, 4.0))
    p.add_argument("--z-range", type=parse_pair, default=(0.0, 4.0))
    p.add_argument("--resolution", type=parse_resolution, default=(201, 201))
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("validate", help="finite-M versus holographic boundaries")
    _common(p)
    p.add_argument("--m-list", type=parse_int_list, default=list(DEFAULT_M_LIST))
    _which(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("psis", help="raw moment dump")
    _common(p, dl=True, snr=False)
    p.set_defaults(func=cmd_psis)
    return parser


def _pmap(func, items, workers):
    items = list(items)
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            return list(pool.map(func, items))
    return [func(i) for i in items]


def _single(grid, name):
    if grid.size != 1:
        raise DomainError(f"{name} must be a single value for this command")
    return float(grid[0])


# -- commands ---------------------------------------------------------------

def cmd_point(args, out):
    theta_deg = _single(args.theta_deg, "--theta-deg")
    dl = _single(args.d_over_l, "--d-over-l")
    snr0 = 10.0 ** (args.snr0_db / 10.0)
    geom = ScenarioGeometry.from_ratio(math.radians(theta_deg), dl)
    psis = psi_closed(geom)
    eigs = eigen_holographic(geom, args.tpol)
    gap1, gap2 = threshold_gaps(geom, args.tpol)
    snr_rx = snr_rx_from_reference(snr0, geom)
    alloc = waterfill(eigs, psis.psi2, snr_rx)
    base = 2 if args.log_base == "2" else "e"
    ref = [threshold_reference(geom.theta, dl, args.tpol, w) for w in (1, 2)]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "holomux_version": __version__,
        "command": "point",
        "inputs": {"theta_deg": theta_deg, "d_over_l": dl, "tpol": args.tpol,
                   "snr0_db": args.snr0_db, "snr0": snr0, "log_base": args.log_base},
        "psi": {k: float(psis.get(k)) for k in PSI_INDICES},
        "view_angle": float(view_angle(geom)),
        "delta": float(aperture_delta(geom)),
        "eigenvalues": [float(v) for v in eigs.as_array()],
        "thresholds": {"snr1": gap1, "snr2": gap2, "snr1_db": to_db(gap1), "snr2_db": to_db(gap2)},
        "thresholds_reference": {"th1": ref[0], "th2": ref[1],
                                 "th1_db": to_db(ref[0]), "th2_db": to_db(ref[1])},
        "snr_rx": snr_rx,
        "snr_rx_db": to_db(snr_rx),
        "n_plus": int(n_active(snr_rx, ThresholdPair(gap1, gap2))),
        "powers": [float(v) for v in alloc.s],
        "spectral_efficiency": float(spectral_efficiency(eigs, psis.psi2, alloc, base)),
    }
    if args.format == "json":
        out.write(_json_encode(doc) + "\n")
    else:
        flat = {}
        for key, val in doc.items():
            if isinstance(val, dict):
                flat.update({f"{key}.{k}": v for k, v in val.items()})
            elif isinstance(val, list):
                flat.update({f"{key}.{i + 1}": v for i, v in enumerate(val)})
            else:
                flat[key] = val
        write_csv(out, list(flat), [list(flat.values())])


def cmd_curves(args, out):
    dls = args.d_over_l

    def row_block(theta_deg):
        th = math.radians(theta_deg)
        rows = []
        for dl in dls:
            try:
                vals = [threshold_reference(th, dl, args.tpol, w) for w in (1, 2)]
                rows.append([theta_deg, dl, to_db(vals[0]), to_db(vals[1]), args.tpol, ""])
            except HolomuxError as exc:
                rows.append([theta_deg, dl, None, None, args.tpol, f"{type(exc).__name__}:{exc}"])
        return rows

    blocks = _pmap(row_block, [float(t) for t in args.theta_deg], args.workers)
    cols = ["theta_deg", "d_over_l", "snr0_th1_db", "snr0_th2_db", "tpol", "diagnostics"]
    write_table(out, cols, [r for b in blocks for r in b], args.format, "curves")


def _cartesian(dl, s, c):
    # inf * 0 would give nan on the broadside ray; keep y = 0 there.
    if math.isinf(dl):
        return (math.copysign(math.inf, s) if s else 0.0), math.inf
    return dl * s, dl * c


def cmd_boundary(args, out):
    snr0 = 10.0 ** (args.snr0_db / 10.0)
    theta = np.radians(args.theta_deg)
    exact = boundary_curve(theta, snr0, args.tpol, "exact", workers=args.workers,
                           x_range=args.x_range)
    approx = boundary_curve(theta, snr0, args.tpol, "approx", workers=args.workers)
    rows = []
    for i, t in enumerate(args.theta_deg):
        s, c = math.sin(theta[i]), math.cos(theta[i])
        e1, e2 = exact.d_over_l_th1[i], exact.d_over_l_th2[i]
        notes = ";".join(n for n in (exact.diagnostics[i], approx.diagnostics[i]) if n)
        b1 = [e1, approx.d_over_l_th1[i], *_cartesian(e1, s, c)] if _keep(args, 1) else [None] * 4
        b2 = [e2, approx.d_over_l_th2[i], *_cartesian(e2, s, c)] if _keep(args, 2) else [None] * 4
        rows.append([t, b1[0], b2[0], b1[1], b2[1], *b1[2:], *b2[2:], notes])
    cols = ["theta_deg", "dl_th1_exact", "dl_th2_exact", "dl_th1_approx", "dl_th2_approx",
            "y_th1", "z_th1", "y_th2", "z_th2", "diagnostics"]
    write_table(out, cols, rows, args.format, "boundary")


def cmd_map(args, out):
    snr0 = 10.0 ** (args.snr0_db / 10.0)
    ny, nz = args.resolution
    rows = []
    if ny and nz:
        z_all = np.linspace(args.z_range[0], args.z_range[1], nz)

        # One z row per task; labels are computed independently per cell.
        def row(j):
            z = float(z_all[j])
            m = region_map(args.y_range, (z, z), (ny, 1), snr0, args.tpol)
            return [[y, z, int(lab)] for y, lab in zip(m.y, m.labels[0])]

        for block in _pmap(row, range(nz), args.workers):
            rows.extend(block)
    write_table(out, ["y_over_l", "z_over_l", "n_plus"], rows, args.format, "map")


def cmd_validate(args, out):
    snr0 = 10.0 ** (args.snr0_db / 10.0)
    theta = math.radians(_single(args.theta_deg, "--theta-deg"))
    ms = args.m_list
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])) or ms[0] < 1:
        raise DomainError("--m-list must be increasing positive ints")

    def err(which):
        if not _keep(args, which):
            return [None] * len(ms)
        return validation_error(ms, theta, snr0, args.tpol, which, args.x_range)

    def cell(v):
        return "incomparable" if v is not None and np.isnan(v) else v

    e1, e2 = _pmap(err, (1, 2), args.workers)
    rows = [[m, 1.0 / m, cell(a), cell(b)] for m, a, b in zip(ms, e1, e2)]
    write_table(out, ["M", "delta_t_over_l", "rel_error_th1", "rel_error_th2"], rows,
                args.format, "validate")


def cmd_psis(args, out):
    def block(theta_deg):
        th = math.radians(theta_deg)
        geom = ScenarioGeometry.from_ratio(th, args.d_over_l)
        psis = psi_closed(geom)
        gam = np.atleast_1d(view_angle(geom))
        vals = [np.atleast_1d(psis.get(k)) for k in PSI_INDICES]
        return [[theta_deg, dl] + [v[i] for v in vals] + [gam[i]]
                for i, dl in enumerate(args.d_over_l)]

    rows = []
    if args.d_over_l.size:
        for b in _pmap(block, [float(t) for t in args.theta_deg], args.workers):
            rows.extend(b)
    cols = ["theta_deg", "d_over_l"] + [f"psi{k}" for k in PSI_INDICES] + ["view_angle"]
    write_table(out, cols, rows, args.format, "psis")


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _glue_negative_values(argv):
    """Rewrite ``--flag -60:60:5`` as ``--flag=-60:60:5``.

    argparse only recognizes plain negative numbers as values, not grids.
    """
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = "json" if args.command == "point" else "csv"
    if args.workers < 1:
        _emit_error("usage", "--workers must be >= 1", EXIT_USAGE)
        return EXIT_USAGE
    buf = io.StringIO()
    try:
        with np.errstate(all="ignore"):
            args.func(args, buf)
    except (DomainError, ValueError) as exc:
        _emit_error("invalid-argument", exc, EXIT_USAGE)
        return EXIT_USAGE
    except NumericError as exc:
        _emit_error("numeric-failure", exc, EXIT_NUMERIC, exc.diagnostics)
        return EXIT_NUMERIC
    except ArithmeticError as exc:
        _emit_error("numeric-failure", exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    text = buf.getvalue()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
