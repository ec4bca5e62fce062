"""CSV writers with fixed headers and 17-significant-digit numbers."""

from __future__ import annotations

import csv
from typing import IO, Iterable

from .error_analysis import ErrorReport, ErrorSurface
from .fde import FdeVerificationRecord

ERROR_CURVE_HEADER = ("x", "punctual_error")
SURFACE_HEADER = ("nu", "lambda", "global_error", "admissible")
OPTIMA_HEADER = ("nu", "lambda_min", "error_min")
FDE_HEADER = ("x", "exact_magnitude", "approx_magnitude", "product_rel_error", "caputo_residual")


def fmt(v) -> str:
    if isinstance(v, (bool, int)):
        return str(int(v))
    return format(float(v), ".17g")


def _write(stream: IO[str], header, rows: Iterable) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_error_curve(stream: IO[str], report: ErrorReport) -> None:
    _write(stream, ERROR_CURVE_HEADER, report.curve.tolist())


def write_surface(stream: IO[str], surface: ErrorSurface) -> None:
    adm = surface.admissible
    rows = (
        (nu, lam, surface.values[i, j], bool(adm[i, j]))
        for i, nu in enumerate(surface.nu_grid)
        for j, lam in enumerate(surface.lambda_grid)
    )
    _write(stream, SURFACE_HEADER, rows)


def write_optima(stream: IO[str], optima: Iterable[tuple[float, float, float]]) -> None:
    _write(stream, OPTIMA_HEADER, optima)


def write_fde_records(stream: IO[str], records: Iterable[FdeVerificationRecord]) -> None:
    rows = (
        (r.x, r.exact_magnitude, r.approx_magnitude, r.product_rel_error, r.caputo_residual)
        for r in records
    )
    _write(stream, FDE_HEADER, rows)
