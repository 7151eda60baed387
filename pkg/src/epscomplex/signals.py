"""Multichannel record type, normalization, finite differences, generators.

A record is an (n, d) float64 matrix: n uniformly spaced time samples of a
d-channel signal.  Index k corresponds to time k/f for sample rate f; all
operations here only ever use the dimensionless index grid, mapped onto
[0, 1] by the synthetic generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParamsError, DegenerateChannelError, TooShortError


@dataclass(frozen=True)
class Record:
    """An (n, d) sample matrix plus acquisition metadata.

    The sample array is frozen (non-writeable) after construction so records
    can be shared freely across threads.
    """

    samples: np.ndarray
    sample_rate_hz: float = 1.0
    subject_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2:
            raise BadParamsError(f"samples must be 2-D (n, d), got shape {samples.shape}")
        n, d = samples.shape
        if n < 2 or d < 1:
            raise BadParamsError(f"record needs n >= 2 samples and d >= 1 channels, got {samples.shape}")
        if not np.isfinite(samples).all():
            raise BadParamsError("record contains non-finite values")
        if self.sample_rate_hz <= 0:
            raise BadParamsError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel max absolute values of the original (pre-scaling) record."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1 or (r <= 0).any():
            raise BadParamsError("channel stats must be a vector of positive reals")
        r = r.copy()
        r.flags.writeable = False
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class HolderParams:
    """Constant and exponent of a Holder-continuity bound L * |t-s|**p."""

    l: float
    p: float

    def __post_init__(self):
        if not (self.l > 0):
            raise BadParamsError(f"Holder constant must be positive, got {self.l}")
        if not (0 < self.p <= 1):
            raise BadParamsError(f"Holder exponent must lie in (0, 1], got {self.p}")


def normalize(record: Record) -> tuple[Record, ChannelStats]:
    """Scale each channel to unit max absolute value.

    Returns the scaled record and the original per-channel maxima.  Raises
    DegenerateChannelError if any channel is identically zero.
    """
    r = np.abs(record.samples).max(axis=0)
    dead = np.flatnonzero(r == 0.0)
    if dead.size:
        raise DegenerateChannelError(f"channel(s) {dead.tolist()} are identically zero")
    scaled = record.samples / r
    out = Record(scaled, sample_rate_hz=record.sample_rate_hz, subject_id=record.subject_id)
    return out, ChannelStats(r)


def difference(record: Record, order: int) -> Record:
    """k-fold iterated first difference x[t+1] - x[t], channel-wise.

    The output has n - order rows.  No 1/f scaling is applied; any constant
    factor is removed later by normalization anyway.
    """
    if order < 1 or int(order) != order:
        raise BadParamsError(f"difference order must be an integer >= 1, got {order}")
    if record.n_samples <= order:
        raise TooShortError(
            f"record has {record.n_samples} samples, too short for difference order {order}"
        )
    out = np.diff(record.samples, n=order, axis=0)
    return Record(out, sample_rate_hz=record.sample_rate_hz, subject_id=record.subject_id)


def _grid(n: int) -> np.ndarray:
    # index grid 0..n-1 mapped onto [0, 1]
    return np.linspace(0.0, 1.0, n)


def gen_weierstrass(n: int, a: float, b: int, terms: int, subject_id: str = "weierstrass") -> Record:
    """Deterministic nowhere-smooth test signal.

    Samples sum_{j<terms} a**j * cos(b**j * pi * t) on the uniform grid over
    [0, 1].  Requires 0 < a < 1 and a*b > 1 so roughness survives in the
    limit; with terms=1 this is just cos(pi*t).
    """
    if n < 2:
        raise BadParamsError(f"need n >= 2 samples, got {n}")
    if not (0 < a < 1):
        raise BadParamsError(f"amplitude ratio a must lie in (0, 1), got {a}")
    if int(b) != b or b < 1:
        raise BadParamsError(f"frequency base b must be a positive integer, got {b}")
    if terms < 1:
        raise BadParamsError(f"need at least one term, got {terms}")
    if a * b <= 1:
        raise BadParamsError(f"need a*b > 1 for a nondegenerate signal, got a*b = {a * b}")
    t = _grid(n)
    x = np.zeros(n)
    for j in range(terms):
        x += a**j * np.cos(b**j * np.pi * t)
    return Record(x[:, None], subject_id=subject_id)


def _fractional_noise(rng: np.random.Generator, n: int, hurst: float) -> np.ndarray:
    """Stationary Gaussian noise with autocovariance of fractional increments.

    Circulant-embedding (Davies-Harte) synthesis.  At hurst=0.5 this is by
    construction exactly the rng's standard normal draw, which the cumsum
    identity in gen_fbm_like relies on.
    """
    if hurst == 0.5:
        return rng.standard_normal(n)
    k = np.arange(n, dtype=np.float64)
    two_h = 2.0 * hurst
    r = 0.5 * ((k + 1.0) ** two_h - 2.0 * k**two_h + np.abs(k - 1.0) ** two_h)
    circ = np.concatenate([r, [0.0], r[-1:0:-1]])
    eig = np.fft.fft(circ).real
    # known to be nonnegative for this embedding; clip rounding dust
    eig = np.where(eig < 0.0, 0.0, eig)
    m = 2 * n
    z = np.empty(m, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    v = rng.standard_normal((n - 1, 2))
    z[1:n] = (v[:, 0] + 1j * v[:, 1]) / np.sqrt(2.0)
    z[n + 1 :] = np.conj(z[1:n][::-1])
    return np.sqrt(m) * np.fft.ifft(np.sqrt(eig) * z).real[:n]


def gen_fbm_like(n: int, hurst: float, seed: int, channels: int = 1, subject_id: str = "fbm") -> Record:
    """Seeded random-walk-like signal with tunable roughness.

    Each channel is the cumulative sum of fractional Gaussian noise with the
    given Hurst exponent; channel c draws from an independent substream
    np.random.default_rng([seed, c]).  For hurst=0.5 the increments are
    exactly that substream's standard normal sequence.  Used as a
    Holder-class oracle; distributional exactness is not a goal.
    """
    if n < 2:
        raise BadParamsError(f"need n >= 2 samples, got {n}")
    if not (0 < hurst < 1):
        raise BadParamsError(f"hurst must lie in (0, 1), got {hurst}")
    if channels < 1:
        raise BadParamsError(f"need at least one channel, got {channels}")
    if seed < 0 or int(seed) != seed:
        raise BadParamsError(f"seed must be a nonnegative integer, got {seed}")
    cols = []
    for c in range(channels):
        rng = np.random.default_rng([seed, c])
        cols.append(np.cumsum(_fractional_noise(rng, n, hurst)))
    return Record(np.column_stack(cols), subject_id=subject_id)


def gen_polynomial(n: int, degree: int, coeffs, subject_id: str = "poly") -> Record:
    """Samples of a polynomial (ascending coeffs) on the uniform grid over [0, 1].

    Restricted to degree <= 4: this generator exists as the exact-recovery
    oracle for the reconstruction family, which tops out at degree 4.
    """
    if n < 2:
        raise BadParamsError(f"need n >= 2 samples, got {n}")
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise BadParamsError("coeffs must be a nonempty 1-D sequence")
    if degree != coeffs.size - 1:
        raise BadParamsError(f"degree {degree} does not match {coeffs.size} coefficients")
    if not (0 <= degree <= 4):
        raise BadParamsError(f"degree must lie in 0..4, got {degree}")
    x = np.polynomial.polynomial.polyval(_grid(n), coeffs)
    return Record(x[:, None], subject_id=subject_id)


def empirical_holder_ratio(record: Record, exponent: float, max_lag_fraction: float = 0.01) -> np.ndarray:
    """Max increment over each small lag, scaled by lag**exponent.

    Returns one ratio per lag 1..floor(max_lag_fraction*(n-1)), summed over
    channels as in the Holder bound.  A bounded profile (no blow-up at small
    lags) is the smoke-test signature of Holder-class behavior.
    """
    n = record.n_samples
    max_lag = max(1, int(max_lag_fraction * (n - 1)))
    ratios = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        inc = np.abs(record.samples[lag:] - record.samples[:-lag]).sum(axis=1).max()
        dt = lag / (n - 1)
        ratios[lag - 1] = inc / dt**exponent
    return ratios
