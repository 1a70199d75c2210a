"""Volume growth entropy: analytic values and ball-growth estimation.

The exponential growth rate of ball volumes is estimated by a
least-squares slope of log-measure over the top half of a radius
window; measures come from each oracle's own scheme (closed forms where
available, hit-or-miss Monte Carlo otherwise).  The fitted slope is a
desk-scale surrogate for an asymptotic quantity and is reported as an
estimate, never as the limit itself.
"""

import math
from dataclasses import dataclass

import numpy as np


def entropy_analytic(n):
    """Growth entropy of H^n: ball volumes grow like e^{(n-1)R}."""
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return float(n - 1)


@dataclass
class EntropyEstimate:
    """Fitted log-measure slope over the top half of the radius window."""

    radii: np.ndarray
    measures: np.ndarray
    stderrs: np.ndarray
    sample_counts: np.ndarray
    slope: float
    slope_stderr: float
    window: tuple

    @property
    def log_measures(self):
        return np.log(self.measures)


def _fit_slope(R, logm, sig):
    """Weighted least squares for logm = a + h R; returns (h, stderr)."""
    w = np.ones_like(R) if np.all(sig <= 0) else 1.0 / np.maximum(sig, 1e-12) ** 2
    W = np.sum(w)
    Rm = np.sum(w * R) / W
    Lm = np.sum(w * logm) / W
    Sxx = np.sum(w * (R - Rm) ** 2)
    slope = np.sum(w * (R - Rm) * (logm - Lm)) / Sxx
    if np.all(sig <= 0):
        resid = logm - (Lm + slope * (R - Rm))
        dof = max(len(R) - 2, 1)
        var = np.sum(resid ** 2) / dof / Sxx
    else:
        var = 1.0 / Sxx
    return float(slope), float(math.sqrt(max(var, 0.0)))


def entropy_estimate(o, base, radii, samples, rng):
    """Estimate the ball-growth slope of an oracle around a base point.

    Each radius gets a measure estimate with a binomial error bar from
    the oracle's ball_measure; the slope is fitted over the larger half
    of the radii, where the exponential regime dominates.
    """
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 3:
        raise ValueError("need at least 3 radii")
    measures = np.empty(len(radii))
    stderrs = np.empty(len(radii))
    counts = np.empty(len(radii), dtype=int)
    for i, R in enumerate(radii):
        mu, sig = o.ball_measure(base, R, samples, rng)
        if mu <= 0:
            raise ValueError("empty ball estimate; increase samples")
        measures[i] = mu
        stderrs[i] = sig
        counts[i] = samples
    half = len(radii) // 2
    sel = slice(half, None)
    log_sig = stderrs[sel] / measures[sel]
    slope, slope_err = _fit_slope(radii[sel], np.log(measures[sel]), log_sig)
    return EntropyEstimate(
        radii=radii, measures=measures, stderrs=stderrs, sample_counts=counts,
        slope=slope, slope_stderr=slope_err,
        window=(float(radii[half]), float(radii[-1])))


def closed_form_slope(n, radii):
    """Fitted slope of the exact H^n ball-volume curve over the window."""
    from .hyperboloid import ball_volume
    radii = np.asarray(sorted(float(r) for r in radii))
    if len(radii) < 3:
        raise ValueError("need at least 3 radii")
    half = len(radii) // 2
    vols = ball_volume(n, radii[half:])
    slope, _ = _fit_slope(radii[half:], np.log(vols), np.zeros(len(vols)))
    return slope


def kernel_norm_closed_form(c, n=2):
    """L^2 norm of the exponential distance kernel e^{-c d(x, .)} on H^2.

    Homogeneity makes the norm independent of the base point:
    the squared norm is 2 pi / (4 c^2 - 1).  Below the threshold
    c = 1/2 (half the growth entropy) the integral diverges.
    """
    if n != 2:
        raise ValueError("closed form implemented for n = 2 only")
    if c <= 0.5:
        raise ValueError("divergent")
    return math.sqrt(2.0 * math.pi / (4.0 * c * c - 1.0))
