"""Subsample placement, piecewise-polynomial reconstruction, per-fraction error.

For a retention fraction s, a plan enumerates the phase-shifted placements of
retained grid indices (stride ~ 1/s).  Each discarded index is rebuilt from
the degree+1 nearest retained points by local polynomial interpolation, the
best degree in 0..max_degree is kept per channel, errors are averaged over
placements and summed over channels.

The interpolation uses Newton divided differences on indices recentered to
the evaluation point, which keeps the local bases well conditioned even for
records hundreds of thousands of samples long.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BadParamsError, InsufficientSupportError, TooFewPointsError
from .signals import Record

DEFAULT_FRACTIONS = (0.50, 0.33, 0.29, 0.25, 0.225, 0.20)

NORM_SUP = "sup"
NORM_MEAN = "mean"


def _round_half_up(x) -> np.ndarray:
    return np.floor(np.asarray(x) + 0.5)


@dataclass(frozen=True)
class RetentionGrid:
    """Ordered retention fractions, largest first."""

    fractions: tuple = DEFAULT_FRACTIONS

    def __post_init__(self):
        fr = tuple(float(s) for s in self.fractions)
        if len(fr) == 0:
            raise BadParamsError("retention grid is empty")
        if any(not (0.0 < s < 1.0) for s in fr):
            raise BadParamsError(f"retention fractions must lie in (0, 1): {fr}")
        if any(a >= b for a, b in zip(fr[1:], fr[:-1])):
            raise BadParamsError(f"retention fractions must be strictly decreasing: {fr}")
        object.__setattr__(self, "fractions", fr)


@dataclass(frozen=True)
class MethodFamily:
    """Piecewise-polynomial reconstruction family: degrees 0..max_degree.

    window bounds the retained neighborhood considered per discarded point;
    the degree-p fit itself always interpolates through the p+1 nearest
    retained points.  norm picks how per-channel errors aggregate over
    discarded points ("sup" or "mean").
    """

    max_degree: int = 4
    window: int | None = None
    norm: str = NORM_SUP

    def __post_init__(self):
        if not (0 <= self.max_degree <= 4):
            raise BadParamsError(f"max_degree must lie in 0..4, got {self.max_degree}")
        window = self.window if self.window is not None else self.max_degree + 1
        if window < self.max_degree + 1:
            raise BadParamsError(
                f"window {window} is smaller than max_degree+1 = {self.max_degree + 1}"
            )
        object.__setattr__(self, "window", window)
        if self.norm not in (NORM_SUP, NORM_MEAN):
            raise BadParamsError(f"norm must be '{NORM_SUP}' or '{NORM_MEAN}', got {self.norm!r}")


@dataclass(frozen=True)
class SubsamplePlan:
    """Retained-index placements for one retention fraction on an n-point grid."""

    s: float
    n: int
    placements: tuple

    @property
    def n_placements(self) -> int:
        return len(self.placements)


@dataclass(frozen=True)
class SpectrumPoint:
    """Aggregate reconstruction error at one retention fraction."""

    s: float
    eps: float
    per_channel_eps: np.ndarray

    def __post_init__(self):
        per = np.asarray(self.per_channel_eps, dtype=np.float64)
        if per.ndim != 1 or per.size == 0 or (per < 0).any():
            raise BadParamsError("per_channel_eps must be a vector of nonnegative reals")
        if float(np.sum(per)) != self.eps:
            raise BadParamsError("eps must equal the sum of per_channel_eps")
        per = per.copy()
        per.flags.writeable = False
        object.__setattr__(self, "per_channel_eps", per)


def n_placements_for(s: float) -> int:
    """Phase count for a retention fraction: 1/s rounded to the nearest integer."""
    return int(_round_half_up(1.0 / s))


def build_plan(s: float, n: int) -> SubsamplePlan:
    """Enumerate the phase-shifted retained-index placements for fraction s.

    Placement q retains indices round(j/s) + q below n.  For reciprocal
    fractions this degenerates to exact strides (phases 0..1/s-1); for the
    others it produces almost-uniform spacing with gaps of floor(1/s) or
    ceil(1/s).
    """
    if not (0.0 < s < 1.0):
        raise BadParamsError(f"retention fraction must lie in (0, 1), got {s}")
    if n < 2:
        raise BadParamsError(f"grid length must be >= 2, got {n}")
    if _round_half_up(s * n) < 2:
        raise TooFewPointsError(f"fraction {s} of {n} points retains fewer than 2 values")
    phases = n_placements_for(s)
    j = np.arange(int(np.ceil(n * s)) + 2, dtype=np.float64)
    base = _round_half_up(j / s).astype(np.int64)
    base = np.unique(base)
    placements = []
    for q in range(phases):
        idx = base + q
        idx = idx[idx < n]
        idx.flags.writeable = False
        placements.append(idx)
    return SubsamplePlan(s=float(s), n=int(n), placements=tuple(placements))


def discarded_indices(placement: np.ndarray, n: int) -> np.ndarray:
    """Complement of a retained-index placement on a grid of length n."""
    mask = np.ones(n, dtype=bool)
    mask[placement] = False
    return np.flatnonzero(mask)


def _window_starts(retained: np.ndarray, discarded: np.ndarray, width: int) -> np.ndarray:
    """Start of the `width` retained points nearest to each discarded index.

    Nearest means minimal max distance over the (contiguous) window; ties go
    to the lower-index window.  At the grid boundary the window shifts inward.
    """
    m = retained.size
    if m < width:
        raise InsufficientSupportError(
            f"placement holds {m} points, need {width} for a degree-{width - 1} fit"
        )
    pos = np.searchsorted(retained, discarded)
    cand = pos[:, None] + np.arange(-width, 1)[None, :]
    np.clip(cand, 0, m - width, out=cand)
    span_lo = discarded[:, None] - retained[cand]
    span_hi = retained[cand + (width - 1)] - discarded[:, None]
    maxdist = np.maximum(span_lo, span_hi)
    pick = np.argmin(maxdist, axis=1)  # first minimum = lowest start
    return cand[np.arange(cand.shape[0]), pick]


def _reconstruct_block(
    values: np.ndarray,
    retained: np.ndarray,
    discarded: np.ndarray,
    starts: np.ndarray,
    degree: int,
) -> np.ndarray:
    """Local polynomial reconstruction for all channels at once.

    values is (d, n); returns (d, len(discarded)).  Newton divided
    differences on the window indices recentered to each discarded index,
    evaluated by Horner at zero.
    """
    width = degree + 1
    win = starts[:, None] + np.arange(width)[None, :]
    y = values[:, retained[win]]
    if degree == 0:
        return y[..., 0]
    x = retained[win].astype(np.float64) - discarded[:, None]
    coef = y.copy()
    for j in range(1, width):
        coef[..., j:] = (coef[..., j:] - coef[..., j - 1 : -1]) / (x[:, j:] - x[:, : width - j])
    out = coef[..., width - 1]
    for j in range(width - 2, -1, -1):
        out = coef[..., j] - x[:, j] * out
    return out


def _as_placement(placement) -> np.ndarray:
    idx = np.asarray(placement, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise BadParamsError("placement must be a nonempty 1-D index set")
    if (np.diff(idx) <= 0).any():
        idx = np.unique(idx)
    return idx


def reconstruct_channel(values, placement, degree: int) -> np.ndarray:
    """Rebuild one channel's discarded values with a degree-`degree` local fit.

    Each discarded index gets the value of the unique polynomial through the
    degree+1 nearest retained points (ties toward the lower index).  Returns
    the reconstructed values in discarded-index order; retained values are
    untouched by construction.
    """
    if not (0 <= degree <= 4):
        raise BadParamsError(f"degree must lie in 0..4, got {degree}")
    values = np.asarray(values, dtype=np.float64)
    retained = _as_placement(placement)
    discarded = discarded_indices(retained, values.size)
    starts = _window_starts(retained, discarded, degree + 1)
    return _reconstruct_block(values[None, :], retained, discarded, starts, degree)[0]


def channel_error(values, placement, degree: int, norm: str = NORM_SUP) -> float:
    """Reconstruction error of one channel over its discarded points.

    Sup norm by default (max absolute deviation); "mean" gives the mean
    absolute deviation.  Relative error is implied by unit-max input.
    """
    values = np.asarray(values, dtype=np.float64)
    retained = _as_placement(placement)
    discarded = discarded_indices(retained, values.size)
    recon = reconstruct_channel(values, retained, degree)
    dev = np.abs(values[discarded] - recon)
    if dev.size == 0:
        return 0.0
    return float(dev.max()) if norm == NORM_SUP else float(dev.mean())


def min_error_over_family(values, placement, family: MethodFamily | None = None) -> float:
    """Smallest reconstruction error over degrees 0..max_degree.

    Degrees the placement cannot support (fewer than degree+1 retained
    points) are skipped; if even the constant fit is unsupported this raises
    InsufficientSupportError.
    """
    family = family or MethodFamily()
    values = np.asarray(values, dtype=np.float64)
    retained = _as_placement(placement)
    best = None
    for degree in range(family.max_degree + 1):
        if retained.size < degree + 1:
            break
        err = channel_error(values, retained, degree, norm=family.norm)
        best = err if best is None else min(best, err)
    if best is None:
        raise InsufficientSupportError("placement cannot support even a constant fit")
    return best


@lru_cache(maxsize=128)
def _cached_plan(s: float, n: int) -> SubsamplePlan:
    return build_plan(s, n)


@lru_cache(maxsize=2048)
def _cached_geometry(s: float, n: int, phase: int, degree: int):
    """(discarded, window starts) for one placement/degree; data-independent."""
    plan = _cached_plan(s, n)
    retained = plan.placements[phase]
    discarded = discarded_indices(retained, n)
    starts = _window_starts(retained, discarded, degree + 1)
    discarded.flags.writeable = False
    starts.flags.writeable = False
    return discarded, starts


def spectrum_point(record: Record, s: float, family: MethodFamily | None = None) -> SpectrumPoint:
    """Aggregate error at fraction s: mean over placements, summed over channels.

    Expects a normalized record (unit max per channel) so channel errors are
    already relative.
    """
    family = family or MethodFamily()
    n = record.n_samples
    plan = _cached_plan(float(s), n)
    values = record.samples.T
    reduce = np.max if family.norm == NORM_SUP else np.mean
    per_placement = []
    for phase, retained in enumerate(plan.placements):
        errs = None
        for degree in range(family.max_degree + 1):
            if retained.size < degree + 1:
                break
            discarded, starts = _cached_geometry(float(s), n, phase, degree)
            recon = _reconstruct_block(values, retained, discarded, starts, degree)
            dev = np.abs(values[:, discarded] - recon)
            err_d = reduce(dev, axis=1)
            errs = err_d if errs is None else np.minimum(errs, err_d)
        if errs is None:
            raise InsufficientSupportError(
                f"fraction {s}: placement {phase} cannot support even a constant fit"
            )
        per_placement.append(errs)
    per_channel = np.mean(np.stack(per_placement), axis=0)
    return SpectrumPoint(s=float(s), eps=float(np.sum(per_channel)), per_channel_eps=per_channel)
