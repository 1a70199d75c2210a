"""Hyperbolic cone metrics: the one-cone-point plane and cone-surface areas.

The chart is the singular plane with metric dr^2 + sinh^2 r dphi^2 away
from the apex, total angle theta around the apex.  Geodesics avoiding
the apex develop isometrically into H^2; the apex is a genuine
singularity where geodesics branch once theta > 2 pi.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperboloid as hp
from .spaces import QuadratureSet, exp_tail_fraction

APEX = (0.0, 0.0)


def _develop(r, phi):
    """Embed polar coordinates into the hyperboloid around a model apex."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    out = np.empty(np.broadcast(r, phi).shape + (3,))
    out[..., 0] = np.cosh(r)
    out[..., 1] = np.sinh(r) * np.cos(phi)
    out[..., 2] = np.sinh(r) * np.sin(phi)
    return out


def cone_distance_arr(theta, ra, pa, rb, pb):
    """Distance on the cone chart of total angle theta, broadcasting."""
    ra = np.asarray(ra, dtype=float)
    pa = np.asarray(pa, dtype=float)
    rb = np.asarray(rb, dtype=float)
    pb = np.asarray(pb, dtype=float)
    gap = np.abs(pa - pb) % theta
    delta = np.minimum(gap, theta - gap)
    direct = hp.dist_arr(_develop(ra, 0.0), _develop(rb, delta))
    through_apex = ra + rb
    val = np.where(delta < math.pi, direct, through_apex)
    return float(val) if val.ndim == 0 else val


class ConeChart:
    """The hyperbolic plane with one cone point of angle theta at r = 0.

    Points are (r, phi) pairs with r >= 0 and phi taken mod theta.
    Implements the geodesic-oracle contract.
    """

    dimension = 2

    def __init__(self, theta):
        if theta <= 0:
            raise ValueError("cone angle must be positive")
        self.theta = float(theta)

    # -- metric surface -------------------------------------------------

    def _valid(self, p):
        r, phi = p
        if r < 0:
            raise ValueError("radial coordinate must be nonnegative")
        return float(r), float(phi) % self.theta

    def distance(self, a, b):
        ra, pa = self._valid(a)
        rb, pb = self._valid(b)
        return float(cone_distance_arr(self.theta, ra, pa, rb, pb))

    def distance_batch(self, a, pts):
        ra, pa = self._valid(a)
        pts = np.asarray(pts, dtype=float)
        return cone_distance_arr(self.theta, ra, pa, pts[:, 0], pts[:, 1])

    def _gap_and_sign(self, pa, pb):
        """Shortest signed angular route from pa to pb."""
        fwd = (pb - pa) % self.theta
        bwd = self.theta - fwd
        if fwd <= bwd:
            return fwd, 1.0
        return bwd, -1.0

    def geodesic_points(self, a, b, t_arr):
        ra, pa = self._valid(a)
        rb, pb = self._valid(b)
        t = np.asarray(t_arr, dtype=float)
        delta, sign = self._gap_and_sign(pa, pb)
        out = np.empty(t.shape + (2,))
        if delta < math.pi and ra > 0 and rb > 0:
            A = _develop(ra, 0.0)
            B = _develop(rb, delta)
            G = hp.geodesic_points_arr(A, B, t)
            r_t = np.arccosh(np.maximum(G[..., 0], 1.0))
            psi = np.arctan2(G[..., 2], G[..., 1])
            out[..., 0] = r_t
            out[..., 1] = (pa + sign * psi) % self.theta
        else:
            # through the apex: radial in, radial out
            L = ra + rb
            s = t * L
            inward = s <= ra
            out[..., 0] = np.where(inward, ra - s, s - ra)
            out[..., 1] = np.where(inward, pa, pb)
        return out

    def geodesic_sample(self, a, b, t):
        p = self.geodesic_points(a, b, np.asarray(float(t)))
        return (float(p[0]), float(p[1]))

    def measure_sample(self, center, R, rng):
        rc, pc = self._valid(center)
        if rc == 0.0:
            r = self._radial_sample(R, rng, 1)[0]
            return (float(r), float(rng.random() * self.theta))
        while True:
            cand = self._propose(rc + R, rng, 64)
            d = self.distance_batch(center, cand)
            hit = np.nonzero(d <= R)[0]
            if hit.size:
                i = hit[0]
                return (float(cand[i, 0]), float(cand[i, 1]))

    def _radial_sample(self, R, rng, size):
        u = rng.random(size)
        return np.arccosh(1.0 + u * (math.cosh(R) - 1.0))

    def _propose(self, R, rng, size):
        r = self._radial_sample(R, rng, size)
        phi = rng.random(size) * self.theta
        return np.column_stack([r, phi])

    # -- measure and embedding extras -----------------------------------

    def apex_ball_measure(self, R):
        """Exact area of the ball around the apex."""
        return self.theta * (math.cosh(R) - 1.0)

    def ball_measure(self, center, R, n_samples=None, rng=None):
        rc, _ = self._valid(center)
        if rc == 0.0:
            return self.apex_ball_measure(R), 0.0
        if n_samples is None or rng is None:
            raise ValueError("off-apex balls need Monte Carlo sampling")
        total = self.apex_ball_measure(rc + R)
        cand = self._propose(rc + R, rng, n_samples)
        p = np.mean(self.distance_batch(center, cand) <= R)
        return total * p, total * math.sqrt(max(p * (1 - p), 0.0) / n_samples)

    def singular_distance(self, x):
        r, _ = self._valid(x)
        return r

    def chart_exp(self, x, coeffs):
        """Exponential in the frame (radial away from apex, angular)."""
        r, phi = self._valid(x)
        if r <= 0:
            raise ValueError("chart frame undefined at the apex")
        P = hp.HPoint(_develop(r, 0.0))
        u_r = np.array([math.sinh(r), math.cosh(r), 0.0])
        u_phi = np.array([0.0, 0.0, 1.0])
        cr, cp = float(coeffs[0]), float(coeffs[1])
        Q = hp.exp_map(hp.HTangent(P, cr * u_r + cp * u_phi))
        r_new = math.acosh(max(float(Q.v[0]), 1.0))
        dphi = math.atan2(float(Q.v[2]), float(Q.v[1]))
        return (r_new, (phi + dphi) % self.theta)

    def embedding_quadrature(self, center, radius, n_radial, n_angular, c):
        """Apex-centered polar rule covering B(center, radius).

        The apex rule is an exact polar parameterization of the chart, so
        only the outer-radius truncation contributes a tail; the outer
        radius is enlarged until the conservative tail estimate is small.
        """
        rc, _ = self._valid(center)
        r_outer = rc + radius
        while self._tail_estimate(c, rc, r_outer) > 5e-4 and r_outer < 60 + rc + radius:
            r_outer += 2.0
        nodes, w = np.polynomial.legendre.leggauss(n_radial)
        r = 0.5 * r_outer * (nodes + 1.0)
        wr = 0.5 * r_outer * w
        phi = (np.arange(n_angular) + 0.5) * (self.theta / n_angular)
        wphi = self.theta / n_angular
        R, PHI = np.meshgrid(r, phi, indexing="ij")
        pts = np.column_stack([R.reshape(-1), PHI.reshape(-1)])
        W = (wr * np.sinh(r))[:, None] * (wphi * np.ones(n_angular))
        return QuadratureSet(pts, W.reshape(-1),
                             tail_fraction=self._tail_estimate(c, rc, r_outer))

    def _tail_estimate(self, c, rc, r_outer):
        # mass beyond r_outer, using d(x, y) >= r_y - r_x and a ball
        # around x of radius r_x as a lower bound for the total
        if c <= 0.5:
            return 1.0
        tail = self.theta * math.exp(2.0 * c * rc) \
            * (math.exp(-(2.0 * c - 1.0) * r_outer) / (2.0 * (2.0 * c - 1.0)))
        if rc > 0:
            lower = (2.0 * math.pi / (4.0 * c * c - 1.0)) \
                * (1.0 - exp_tail_fraction(c, rc))
        else:
            lower = self.theta / (4.0 * c * c - 1.0)
        if lower <= 0:
            return 1.0
        return tail / lower


@dataclass(frozen=True)
class ConeSurfaceSpec:
    """Combinatorial data for a closed hyperbolic cone surface.

    Either a genus g or an Euler characteristic chi, plus the list of
    cone angles.  Admissible means the generalized Gauss-Bonnet area
    -2 pi chi - sum(theta_i - 2 pi) is positive, so a hyperbolic cone
    metric exists.
    """

    genus: int | None = None
    chi: int | None = None
    angles: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if (self.genus is None) == (self.chi is None):
            raise ValueError("give exactly one of genus or chi")
        if self.genus is not None and self.genus < 2:
            raise ValueError("genus must be at least 2")
        if self.chi is not None and self.chi >= 0:
            raise ValueError("chi must be negative")
        if any(t <= 0 for t in self.angles):
            raise ValueError("cone angles must be positive")
        object.__setattr__(self, "angles", tuple(float(t) for t in self.angles))

    @property
    def euler_characteristic(self):
        return self.chi if self.chi is not None else 2 - 2 * self.genus

    @property
    def admissible(self):
        return self.area_if_admissible() > 0

    def area_if_admissible(self):
        chi = self.euler_characteristic
        return -2.0 * math.pi * chi + sum(2.0 * math.pi - t for t in self.angles)


def cone_area(spec):
    """Gauss-Bonnet area of the curvature -1 cone surface.

    Returns -2 pi chi + sum(2 pi - theta_i); raises if the spec admits
    no hyperbolic cone metric.
    """
    area = spec.area_if_admissible()
    if area <= 0:
        raise ValueError("spec admits no hyperbolic cone metric")
    return area


@dataclass(frozen=True)
class WitnessTriangle:
    """A triangle on a wide cone chart violating the triangle comparison.

    q and r sit at angular gap pi so the midpoint of the side qr is the
    apex; p faces them symmetrically.  The measured midpoint distance
    |ps| = rho falls short of the comparison median by `expected_slack`
    (a negative number).
    """

    theta: float
    rho: float
    p: tuple
    q: tuple
    r: tuple
    sides: tuple
    midpoint_distance: float
    comparison_median: float
    expected_slack: float


def cone_witness_triangle(theta, rho):
    """Construct the comparison-violating triangle for a cone angle > 2 pi."""
    if theta <= 2.0 * math.pi + 1e-12:
        raise ValueError("no witness exists")
    if rho <= 0:
        raise ValueError("rho must be positive")
    chart = ConeChart(theta)
    q = (rho, 0.0)
    r = (rho, math.pi)
    p = (rho, (math.pi + theta) / 2.0 % theta)
    side_qr = 2.0 * rho
    side_pq = chart.distance(p, q)
    side_pr = chart.distance(p, r)
    # comparison median from p~ to the midpoint of q~r~
    beta = hp.comparison_angle(side_pr, side_pq, side_qr)  # angle at q~
    median = hp.opposite_side(side_pq, rho, beta)
    return WitnessTriangle(
        theta=theta,
        rho=rho,
        p=p,
        q=q,
        r=r,
        sides=(side_qr, side_pr, side_pq),
        midpoint_distance=rho,
        comparison_median=median,
        expected_slack=rho - median,
    )
