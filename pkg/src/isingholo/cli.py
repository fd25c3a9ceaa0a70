"""Command-line pipeline: coherence -> reconstruction -> central-charge fits.

Exit codes: 0 success, 2 validation error, 3 tolerance/reconstruction
failure, 4 capacity error.  Set ``ISINGHOLO_THREADS`` to evaluate grid
points on several threads.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from .coherence import TWO_PI, CoherenceSeries, coherence_series, fold_order, validate_points
from .errors import CapacityError, ContourError, ReconstructionError, ValidationError
from .holography import QuadratureConfig, estimate_free_energy, require_positive
from .ising import BETA_C, LatticeSpec, ModelParams
from .oracle import run_oracle
from .scaling import (
    direct_point,
    elongation_curve,
    fit_central_charge_aspect,
    fit_central_charge_strip,
    reconstructed_point,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TOLERANCE = 3
EXIT_CAPACITY = 4

DEFAULT_STRIP_ROWS = "6,7,8,9,10"
DEFAULT_STRIP_COLS = 50
DEFAULT_ELONGATION = "2x50,4x25,5x20,10x10"


def fmt(x: float) -> str:
    return format(x, ".17g")


def parse_period(text: str) -> float:
    """Accept ``2pi``, ``pi``, ``pi/2`` (any ``[k]pi[/n]``) or a plain number."""
    cleaned = text.strip().lower().replace(" ", "")
    match = re.fullmatch(r"(\d*\.?\d*)\*?pi(?:/(\d+))?", cleaned)
    if match:
        factor = float(match.group(1)) if match.group(1) else 1.0
        divisor = int(match.group(2)) if match.group(2) else 1
        return factor * math.pi / divisor
    try:
        return float(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse period {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_lattices(text: str) -> list[tuple[int, int]]:
    specs = []
    for token in text.split(","):
        match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", token)
        if not match:
            raise argparse.ArgumentTypeError(f"expected NxM lattice, got {token!r}")
        specs.append((int(match.group(1)), int(match.group(2))))
    return specs


# --------------------------------------------------------------------------
# file formats


def write_atomic(path: str | None, text: str) -> None:
    """Write to ``path`` via a temporary file and rename; ``None`` or ``-`` means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def coherence_csv(series: CoherenceSeries) -> str:
    out = io.StringIO()
    out.write(
        f"# coherence N={series.spec.rows} M={series.spec.cols} beta={series.beta!r} "
        f"h={series.field!r} eta={series.eta!r} period={series.period!r} points={series.points}\n"
    )
    out.write("u,re,im\n")
    for u, value in zip(series.grid, series.values):
        out.write(f"{fmt(u)},{fmt(value.real)},{fmt(value.imag)}\n")
    return out.getvalue()


def read_coherence_csv(path: str) -> CoherenceSeries:
    """Parse a file written by :func:`coherence_csv` back into a series."""
    with open(path) as handle:
        header = handle.readline()
        if not header.startswith("# coherence"):
            raise ValidationError(f"{path}: missing '# coherence' header line")
        meta = dict(re.findall(r"(\w+)=(\S+)", header))
        missing = {"N", "M", "beta", "h", "period", "points"} - meta.keys()
        if missing:
            raise ValidationError(f"{path}: header lacks {sorted(missing)}")
        columns = handle.readline().strip()
        if columns.replace(" ", "") != "u,re,im":
            raise ValidationError(f"{path}: expected columns 'u,re,im', got {columns!r}")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    spec = LatticeSpec(int(meta["N"]), int(meta["M"]))
    period = float(meta["period"])
    points = int(meta["points"])
    validate_points(points)
    fold_order(period)
    if data.shape != (points, 3):
        raise ValidationError(f"{path}: expected {points} rows of 3 columns, got {data.shape}")
    grid = np.linspace(0.0, period, points)
    if np.abs(data[:, 0] - grid).max() > 1e-12 * period:
        raise ValidationError(f"{path}: u column is not the uniform grid on [0, {period}]")
    params = ModelParams(float(meta["beta"]), float(meta["h"]))
    values = data[:, 1] + 1j * data[:, 2]
    eta = float(meta.get("eta", 1.0))
    return CoherenceSeries(spec, params.beta, params.field.real, period, values, eta=eta)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# commands


def _quad(args) -> QuadratureConfig:
    quad = QuadratureConfig(args.points, args.period)
    fold_order(quad.period)
    return quad


def cmd_coherence(args) -> int:
    if not (args.eta > 0 and math.isfinite(args.eta)):
        raise ValidationError(f"eta must be positive, got {args.eta!r}")
    quad = _quad(args)
    spec = LatticeSpec(args.rows, args.cols)
    series = coherence_series(spec, args.beta, args.h, quad.points, quad.period)
    series = CoherenceSeries(
        series.spec, series.beta, series.field, series.period, series.values, eta=args.eta
    )
    write_atomic(args.output, coherence_csv(series))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    if args.from_csv:
        series = read_coherence_csv(args.from_csv)
    else:
        if args.rows is None or args.cols is None:
            raise ValidationError("--rows and --cols are required without --from-csv")
        quad = _quad(args)
        spec = LatticeSpec(args.rows, args.cols)
        if not abs(args.lambda_prime) < args.h:
            # fail before the (possibly long) coherence simulation
            raise ContourError(f"|lambda'| = {abs(args.lambda_prime)!r} must be < h = {args.h!r}")
        series = coherence_series(spec, args.beta, args.h, quad.points, quad.period)
    estimate = require_positive(estimate_free_energy(series, args.lambda_prime))
    write_atomic(args.output, dump_json(estimate.to_report()))
    return EXIT_OK


def cmd_fit_c(args) -> int:
    rows = args.rows_list
    if len(rows) < 3:
        raise ValidationError(f"fit-c needs >= 3 lattices, got {len(rows)}")
    if len(set(rows)) < 2:
        raise ValidationError("fit-c needs at least two distinct widths")
    specs = [LatticeSpec(n, args.cols) for n in rows]
    quad = _quad(args)
    if not args.direct and not args.h > 0:
        raise ValidationError(f"h must be > 0 for reconstruction, got {args.h!r}")
    if args.direct:
        points = [direct_point(s, args.beta) for s in specs]
    else:
        points = [reconstructed_point(s, args.beta, args.h, quad) for s in specs]
    fit = fit_central_charge_strip(points)
    report = fit.to_report()
    report["method"] = "direct" if args.direct else "reconstructed"
    report["beta"] = args.beta
    if not args.direct:
        report.update(h=args.h, quad_points=quad.points, period=quad.period)
    write_atomic(args.output, dump_json(report))
    if args.points_csv:
        out = io.StringIO()
        out.write("N,M,f_per_site,F_total,residual,method\n")
        for p, r in zip(fit.points, fit.residuals):
            out.write(f"{p.spec.rows},{p.spec.cols},{fmt(p.f)},{fmt(p.F_total)},{fmt(r)},{p.method}\n")
        write_atomic(args.points_csv, out.getvalue())
    return EXIT_OK


def cmd_elongation(args) -> int:
    pairs = list(args.lattices)
    if args.swapped:
        pairs += [(m, n) for n, m in pairs if n != m]
    specs = [LatticeSpec(n, m) for n, m in pairs]
    if len({s.area() for s in specs}) != 1:
        raise ValidationError(f"lattices must share one area, got {[str(s) for s in specs]}")
    quad = _quad(args)
    if args.direct:
        points = [direct_point(s, args.beta) for s in specs]
    else:
        if not args.h > 0:
            raise ValidationError(f"h must be > 0 for reconstruction, got {args.h!r}")
        points = [reconstructed_point(s, args.beta, args.h, quad) for s in specs]
    table = elongation_curve(points)
    out = io.StringIO()
    out.write("N,M,x,ln_x,F_total,f_per_site,ln_abs_F_total\n")
    for row in table:
        out.write(
            f"{row.spec.rows},{row.spec.cols},{fmt(row.x)},{fmt(row.ln_x)},"
            f"{fmt(row.F_total)},{fmt(row.f_per_site)},{fmt(row.ln_abs_F)}\n"
        )
    write_atomic(args.output, out.getvalue())
    if args.fit_json:
        fit = fit_central_charge_aspect(points)
        write_atomic(args.fit_json, dump_json(fit.to_report()))
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.area_limit < 1:
        raise ValidationError(f"--area-limit must be >= 1, got {args.area_limit}")
    report = run_oracle(args.area_limit, args.partition_tol, args.reconstruction_tol)
    for line in report.lines:
        print(line)
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_TOLERANCE


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--beta", type=float, default=BETA_C, help="inverse temperature (J = 1)")
    shared.add_argument("--h", type=float, default=0.1, help="real bath field")
    shared.add_argument("--points", type=int, default=394, help="grid points, 1 mod 3")
    shared.add_argument(
        "--period", type=parse_period, default=TWO_PI, help="u-period: 2pi, pi, pi/2 or a number"
    )
    shared.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    parser = argparse.ArgumentParser(
        prog="isingholo",
        description="Central charge of the 2D Ising model from simulated probe-spin decoherence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", parents=[shared], help="emit a coherence CSV")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--eta", type=float, default=1.0, help="recorded only; u = eta*t")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("reconstruct", parents=[shared], help="reconstruct f from coherence")
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--lambda-prime", type=float, default=0.0)
    p.add_argument("--from-csv", default=None, help="coherence CSV written by 'coherence'")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("fit-c", parents=[shared], help="strip fit of f against 1/N^2")
    p.add_argument("--rows-list", type=parse_int_list, default=parse_int_list(DEFAULT_STRIP_ROWS))
    p.add_argument("--cols", type=int, default=DEFAULT_STRIP_COLS)
    p.add_argument("--direct", action="store_true", help="use zero-field transfer matrix f")
    p.add_argument("--points-csv", default=None)
    p.set_defaults(func=cmd_fit_c)

    p = sub.add_parser("elongation", parents=[shared], help="fixed-area F versus aspect ratio")
    p.add_argument("--lattices", type=parse_lattices, default=parse_lattices(DEFAULT_ELONGATION))
    p.add_argument("--swapped", action="store_true", help="also include every MxN partner")
    p.add_argument("--direct", action="store_true")
    p.add_argument("--fit-json", default=None, help="write the aspect-ratio fit here")
    p.set_defaults(func=cmd_elongation)

    p = sub.add_parser("oracle", help="brute force vs transfer matrix vs reconstruction")
    p.add_argument("--area-limit", type=int, default=16)
    p.add_argument("--partition-tol", type=float, default=1e-10)
    p.add_argument("--reconstruction-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ReconstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
