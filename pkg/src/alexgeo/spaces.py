"""The geodesic-space contract and the model spaces H^2, H^3.

Every concrete space (model space, doubled convex body, cone chart)
implements the same small oracle surface so that the comparison,
entropy and embedding drivers never see anything but distances,
geodesic samples and measure samples.
"""

import math
from dataclasses import dataclass
from typing import Any, Protocol, runtime_checkable

import numpy as np

from . import hyperboloid as hp


@runtime_checkable
class GeodesicOracle(Protocol):
    """Uniform contract for a geodesic metric space.

    Required:
      dimension        -- Hausdorff dimension (2 or 3 here)
      distance(a, b)   -- the metric
      geodesic_sample(a, b, t) -- point at arclength fraction t on some
                          geodesic from a to b (fixed choice per pair)
      measure_sample(center, R, rng) -- point drawn uniformly w.r.t.
                          Hausdorff measure from the ball B(center, R)

    Optional fast paths and extras used where available:
      geodesic_points(a, b, t_arr) -> stacked points
      distance_batch(a, stacked)   -> ndarray of distances
      angle_at(at, b, c)           -- exact vertex angle
      ball_measure(center, R, n_samples, rng) -> (estimate, stderr)
      embedding_quadrature(center, radius, n_radial, n_angular)
      chart_exp(x, coeffs)         -- exponential in a fixed orthonormal
                                      chart frame at x
      singular_distance(x)         -- distance to the singular set
    """

    dimension: int

    def distance(self, a, b) -> float: ...

    def geodesic_sample(self, a, b, t) -> Any: ...

    def measure_sample(self, center, R, rng) -> Any: ...


@dataclass(frozen=True)
class QuadratureSet:
    """Weighted nodes for integrals over a truncated region of a space.

    `points` is in the owning oracle's stacked representation; weights
    are strictly positive.  `tail_fraction` estimates the relative mass
    of exp(-2c d) lost to truncation (0 for quadratures covering the
    whole space).
    """

    points: Any
    weights: np.ndarray
    tail_fraction: float = 0.0

    def integrate(self, values):
        return float(np.sum(self.weights * values))

    def inner(self, f, g):
        return float(np.sum(self.weights * f * g))

    def norm(self, f):
        return math.sqrt(max(self.inner(f, f), 0.0))


def exp_tail_fraction(c, R):
    """Relative tail of int_0^inf e^{-2cr} sinh r dr beyond radius R (H^2)."""
    if c <= 0.5:
        return 1.0
    total = 1.0 / (4.0 * c * c - 1.0)
    tail = math.exp(-(2.0 * c - 1.0) * R) / (2.0 * (2.0 * c - 1.0)) \
        - math.exp(-(2.0 * c + 1.0) * R) / (2.0 * (2.0 * c + 1.0))
    return tail / total


class HyperbolicSpace:
    """H^n itself as a geodesic oracle (n = 2 or 3); points are HPoints."""

    def __init__(self, n=2):
        if n not in (2, 3):
            raise ValueError("only n = 2, 3 supported")
        self.dimension = n

    # -- metric surface -------------------------------------------------

    def distance(self, a, b):
        return hp.dist(a, b)

    def distance_batch(self, a, pts):
        return hp.dist_arr(a.v, pts)

    def geodesic_sample(self, a, b, t):
        return hp.geodesic_point(a, b, t)

    def geodesic_points(self, a, b, t_arr):
        return hp.geodesic_points_arr(a.v, b.v, np.asarray(t_arr, dtype=float))

    def angle_at(self, at, b, c):
        return hp.angle(at, b, c)

    def measure_sample(self, center, R, rng):
        return hp.sample_ball(self.dimension, center, R, rng)

    def sample_batch(self, center, R, rng, size):
        return hp.sample_ball_arr(self.dimension, center, R, rng, size)

    # -- measure and embedding extras -----------------------------------

    def ball_measure(self, center, R, n_samples=None, rng=None):
        """Exact closed-form ball volume; stderr 0."""
        return hp.ball_volume(self.dimension, R), 0.0

    def singular_distance(self, x):
        return math.inf

    def chart_exp(self, x, coeffs):
        frame = hp.tangent_frame(x)
        u = np.asarray(coeffs, dtype=float) @ frame
        return hp.exp_map(hp.HTangent(x, u))

    def embedding_quadrature(self, center, radius, n_radial, n_angular, c):
        """Geodesic polar rule on B(center, radius); H^2 only.

        The tail fraction is the exact relative mass of exp(-2c d)
        beyond the truncation radius.
        """
        if self.dimension != 2:
            raise ValueError("embedding quadrature implemented for n = 2")
        nodes, w = np.polynomial.legendre.leggauss(n_radial)
        r = 0.5 * radius * (nodes + 1.0)
        wr = 0.5 * radius * w
        phi = (np.arange(n_angular) + 0.5) * (2.0 * math.pi / n_angular)
        wphi = 2.0 * math.pi / n_angular
        frame = hp.tangent_frame(center)
        U = np.cos(phi)[:, None] * frame[0] + np.sin(phi)[:, None] * frame[1]
        # the polar formula lands on the sheet; re-projection would only
        # amplify roundoff at the far (negligible-weight) nodes
        P = np.cosh(r)[:, None, None] * center.v \
            + np.sinh(r)[:, None, None] * U[None, :, :]
        W = (wr * np.sinh(r))[:, None] * wphi * np.ones(n_angular)
        return QuadratureSet(P.reshape(-1, 3), W.reshape(-1),
                             tail_fraction=exp_tail_fraction(c, radius))
