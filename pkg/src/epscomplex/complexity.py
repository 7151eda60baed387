"""Complexity spectrum across the retention grid and the log-log coefficient fit.

The pair (a, b) is the least-squares intercept/slope of log eps against
log s over the grid, natural logs throughout.  Fractions recovered exactly
(eps below EPS_FLOOR) carry no information about the error decay and are
dropped from the fit; a record that is exact everywhere is flagged rather
than fitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParamsError, DegenerateFitError, FTrivialRecordError
from .recon import MethodFamily, RetentionGrid, SpectrumPoint, spectrum_point
from .signals import Record, normalize

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class ComplexitySpectrum:
    """One SpectrumPoint per retention-grid entry, in grid order."""

    points: tuple

    def __post_init__(self):
        if len(self.points) == 0:
            raise BadParamsError("spectrum has no points")
        if any(not np.isfinite(p.eps) for p in self.points):
            raise BadParamsError("spectrum contains non-finite errors")
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def fractions(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def eps_values(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    def usable_points(self) -> list:
        """Points above the exact-recovery floor, the ones a fit may use."""
        return [p for p in self.points if p.eps >= EPS_FLOOR]


@dataclass(frozen=True)
class ComplexityCoefficients:
    """Fitted intercept a and slope b of log eps = a + b log s, with diagnostics."""

    a: float
    b: float
    r_squared: float
    residuals: tuple

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0):
            raise BadParamsError(f"r_squared must lie in [0, 1], got {self.r_squared}")
        object.__setattr__(self, "residuals", tuple(float(r) for r in self.residuals))


def compute_spectrum(
    record: Record,
    grid: RetentionGrid | None = None,
    family: MethodFamily | None = None,
) -> ComplexitySpectrum:
    """Normalize the record and evaluate the error at every grid fraction.

    Raises FTrivialRecordError when the family reconstructs the record
    exactly at every fraction (e.g. low-degree polynomials), since no decay
    law can be fitted to rounding dust.
    """
    grid = grid or RetentionGrid()
    family = family or MethodFamily()
    normalized, _ = normalize(record)
    points = tuple(spectrum_point(normalized, s, family) for s in grid.fractions)
    if all(p.eps < EPS_FLOOR for p in points):
        raise FTrivialRecordError(
            f"record {record.subject_id!r} is exactly recoverable at every fraction "
            f"(all errors below {EPS_FLOOR:g})"
        )
    return ComplexitySpectrum(points)


def fit_coefficients(
    spectrum: ComplexitySpectrum,
    grid: RetentionGrid | None = None,
) -> ComplexityCoefficients:
    """Least-squares line through (log s, log eps) over the usable points.

    The optional grid is a consistency check against the spectrum.  Natural
    logarithms; requires at least two points above the exact-recovery floor.
    """
    if grid is not None and tuple(grid.fractions) != tuple(p.s for p in spectrum.points):
        raise BadParamsError("grid does not match the spectrum's fractions")
    usable = spectrum.usable_points()
    if len(usable) < 2:
        raise DegenerateFitError(
            f"only {len(usable)} spectrum point(s) above the floor, need 2 for a fit"
        )
    x = np.log([p.s for p in usable])
    y = np.log([p.eps for p in usable])
    design = np.column_stack([np.ones_like(x), x])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ beta
    resid = y - fitted
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    r2 = min(1.0, max(0.0, r2))
    return ComplexityCoefficients(
        a=float(beta[0]), b=float(beta[1]), r_squared=r2, residuals=tuple(resid)
    )


def estimate(
    record: Record,
    grid: RetentionGrid | None = None,
    family: MethodFamily | None = None,
) -> ComplexityCoefficients:
    """Full per-record estimator: spectrum over the grid, then the log-log fit."""
    return fit_coefficients(compute_spectrum(record, grid, family), grid)
