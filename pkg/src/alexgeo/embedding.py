"""Sphere-valued kernel embeddings and their pointwise metric bounds.

The map sends x to the exponential distance kernel e^{-c d(x, .)},
viewed in L^2 of the space and then projected radially to the unit
sphere.  At every smooth point the Gram matrix of the projected
differential has trace at most c^2 and determinant at most (c^2/n)^n,
which is the numerical content checked here; integrating the square
root of the determinant over a fundamental domain gives the volume-type
quantity compared against the spherical-volume constant.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import hyperboloid as hp
from .spaces import HyperbolicSpace, QuadratureSet

TAIL_GATE = 1e-3


@dataclass(frozen=True)
class EmbeddingConfig:
    """Kernel decay rate, truncation radius, quadrature sizes, FD step."""

    c: float
    r_trunc: float
    n_radial: int = 160
    n_angular: int = 128
    delta: float = 1e-4

    def validate_for(self, n):
        if self.c <= (n - 1) / 2.0:
            raise ValueError("below entropy threshold")

    def min_trunc_radius(self, n=2):
        """Radius keeping the kernel-norm truncation error under 1e-3."""
        return 8.0 / (2.0 * self.c - (n - 1))

    def meets_tail_bound(self, n=2):
        return self.r_trunc >= self.min_trunc_radius(n)


@dataclass
class SampledFunction:
    """A function known on a quadrature set; inner products reuse it."""

    quad: QuadratureSet
    values: np.ndarray

    def inner(self, other):
        return self.quad.inner(self.values, other.values)

    @property
    def norm(self):
        return self.quad.norm(self.values)


def kernel_map(o, cfg, x, quad=None):
    """The exponential distance kernel e^{-c d(x, .)} as a sampled function.

    Values are strictly positive; the value at x itself would be 1.
    """
    cfg.validate_for(o.dimension)
    if quad is None:
        quad = o.embedding_quadrature(x, cfg.r_trunc, cfg.n_radial,
                                      cfg.n_angular, cfg.c)
    d = o.distance_batch(x, quad.points)
    return SampledFunction(quad, np.exp(-cfg.c * d))


@dataclass
class EmbeddedMetricReport:
    """Gram data of the projected kernel differential at one point."""

    point: object
    psi_norm: float
    gram: np.ndarray
    trace: float
    det: float
    trace_bound: float
    det_bound: float
    slack_trace: float
    slack_det: float
    amgm_ok: bool
    tail_fraction: float


def _gram_on_quad(o, cfg, x, quad, method="analytic"):
    """Gram matrix of the projected differential on a fixed quadrature."""
    c, delta = cfg.c, cfg.delta
    sources = [x]
    for i in range(2):
        coeffs = np.zeros(2)
        coeffs[i] = delta
        sources.append(o.chart_exp(x, coeffs))
        sources.append(o.chart_exp(x, -coeffs))
    if hasattr(o, "distance_batch_group"):
        D = o.distance_batch_group(sources, quad.points)
    else:
        D = np.stack([o.distance_batch(s, quad.points) for s in sources])
    d0 = D[0]
    e0 = np.exp(-c * d0)
    norm2 = quad.inner(e0, e0)
    F = []
    for i in range(2):
        dp, dm = D[1 + 2 * i], D[2 + 2 * i]
        if method == "analytic":
            # differentiate through the displayed derivative formula
            F.append(-c * e0 * (dp - dm) / (2.0 * delta))
        else:
            # cross-check oracle: differentiate the kernel values directly
            F.append((np.exp(-c * dp) - np.exp(-c * dm)) / (2.0 * delta))
    G = np.empty((2, 2))
    b = np.empty(2)
    for i in range(2):
        b[i] = quad.inner(e0, F[i])
        for j in range(i, 2):
            G[i, j] = G[j, i] = quad.inner(F[i], F[j])
    gram = (G - np.outer(b, b) / norm2) / norm2
    return gram, math.sqrt(norm2)


def induced_metric(o, cfg, x, method="analytic"):
    """Metric report of the sphere-projected kernel map at x.

    Requires x to sit farther than 2*delta from the singular set and a
    quadrature whose truncation tail stays under 1e-3 relative.
    """
    cfg.validate_for(o.dimension)
    if o.singular_distance(x) <= 2.0 * cfg.delta:
        raise ValueError("too close to the singular set")
    quad = o.embedding_quadrature(x, cfg.r_trunc, cfg.n_radial,
                                  cfg.n_angular, cfg.c)
    if quad.tail_fraction > TAIL_GATE:
        raise ValueError("truncation too small")
    gram, psi_norm = _gram_on_quad(o, cfg, x, quad, method=method)
    n = o.dimension
    trace = float(np.trace(gram))
    det = float(np.linalg.det(gram))
    trace_bound = cfg.c ** 2
    det_bound = (cfg.c ** 2 / n) ** (n / 2.0)
    sqrt_det = math.sqrt(max(det, 0.0))
    amgm_ok = sqrt_det <= (max(trace, 0.0) / n) ** (n / 2.0) + 1e-12
    return EmbeddedMetricReport(
        point=x, psi_norm=psi_norm, gram=gram, trace=trace, det=det,
        trace_bound=trace_bound, det_bound=det_bound,
        slack_trace=trace_bound - trace, slack_det=det_bound - sqrt_det,
        amgm_ok=amgm_ok, tail_fraction=quad.tail_fraction)


@dataclass
class LipschitzReport:
    ratios: np.ndarray
    b_hat: float
    bound: float
    n_skipped: int

    @property
    def max_ratio(self):
        return float(np.max(self.ratios)) if self.ratios.size else 0.0

    @property
    def ok(self):
        return self.max_ratio <= self.bound * (1.0 + 1e-3)


def lipschitz_probe(o, cfg, pairs):
    """Max of |kernel(x) - kernel(y)| / d(x, y) against the 2bc bound.

    b is the largest sampled kernel norm; coincident pairs are skipped.
    Both endpoints of a pair share one quadrature set so the difference
    norm is meaningful.
    """
    cfg.validate_for(o.dimension)
    ratios = []
    b_hat = 0.0
    skipped = 0
    for x, y in pairs:
        d = o.distance(x, y)
        if d < 1e-12:
            skipped += 1
            continue
        mid = o.geodesic_sample(x, y, 0.5)
        quad = o.embedding_quadrature(mid, cfg.r_trunc + 0.5 * d + 1.0,
                                      cfg.n_radial, cfg.n_angular, cfg.c)
        fx = np.exp(-cfg.c * o.distance_batch(x, quad.points))
        fy = np.exp(-cfg.c * o.distance_batch(y, quad.points))
        nx = quad.norm(fx)
        ny = quad.norm(fy)
        b_hat = max(b_hat, nx, ny)
        ratios.append(quad.norm(fx - fy) / d)
    return LipschitzReport(ratios=np.asarray(ratios), b_hat=b_hat,
                           bound=2.0 * b_hat * cfg.c, n_skipped=skipped)


@dataclass
class GradCheck:
    value: float
    components: np.ndarray
    skipped: bool
    reason: str


def distance_gradient_check(o, cfg, x, y):
    """Squared norm of the FD gradient of x -> d(x, y) in a chart frame.

    The distance function is 1-Lipschitz, so the squared gradient norm
    is at most 1 almost everywhere; the check skips points too close to
    y or to the singular set, and points sitting on a cut-locus fold
    where the two one-sided slopes disagree.
    """
    delta = cfg.delta
    if o.distance(x, y) <= 2.0 * delta:
        return GradCheck(math.nan, np.array([]), True, "within 2 delta of y")
    if o.singular_distance(x) <= 2.0 * delta:
        return GradCheck(math.nan, np.array([]), True,
                         "within 2 delta of the singular set")
    comps = np.empty(2)
    d0 = o.distance(x, y)
    for i in range(2):
        coeffs = np.zeros(2)
        coeffs[i] = delta
        dp = o.distance(o.chart_exp(x, coeffs), y)
        dm = o.distance(o.chart_exp(x, -coeffs), y)
        fwd = (dp - d0) / delta
        bwd = (d0 - dm) / delta
        if abs(fwd - bwd) > 0.05:
            return GradCheck(math.nan, np.array([]), True, "cut-locus fold")
        comps[i] = (dp - dm) / (2.0 * delta)
    return GradCheck(float(np.sum(comps ** 2)), comps, False, "")


# -- the genus-2 octagon fundamental domain --------------------------------

OCTAGON_APOTHEM = math.acosh(1.0 / math.tan(math.pi / 8.0))
OCTAGON_CIRCUMRADIUS = math.acosh(1.0 / math.tan(math.pi / 8.0) ** 2)


def octagon_radial_extent(psi):
    """Distance from the center to the octagon side at sector angle psi.

    psi is measured from the apothem axis, |psi| <= pi/8.
    """
    return np.arctanh(math.tanh(OCTAGON_APOTHEM) / np.cos(psi))


def octagon_vertices():
    """The eight vertices of the regular octagon with vertex angles pi/4."""
    origin = hp.HPoint.origin(2)
    frame = hp.tangent_frame(origin)
    rv = OCTAGON_CIRCUMRADIUS
    verts = []
    for k in range(8):
        phi = (2 * k + 1) * math.pi / 8.0
        u = math.cos(phi) * frame[0] + math.sin(phi) * frame[1]
        verts.append(hp.exp_map(hp.HTangent(origin, rv * u)))
    return verts


def octagon_gauss_bonnet():
    """Measured vertex angles and the Gauss-Bonnet area of the octagon.

    Eight angles of pi/4 sum to 2 pi, so the sides glue to a genus-2
    surface and the area is (8 - 2) pi - 2 pi = 4 pi.
    """
    verts = octagon_vertices()
    angles = [hp.angle(verts[k], verts[k - 1], verts[(k + 1) % 8])
              for k in range(8)]
    area = 6.0 * math.pi - sum(angles)
    return np.asarray(angles), area


def genus2_octagon_quadrature(n_rad=5, n_ang=24):
    """Polar quadrature over the regular octagon with vertex angles pi/4.

    Sector rules need enough angular nodes: the radial extent has a
    branch point just past the vertex direction, so Gauss-Legendre wants
    n_ang around 24 for the weight sum to reach the exact area 4 pi at
    1e-6.
    """
    origin = hp.HPoint.origin(2)
    frame = hp.tangent_frame(origin)
    nodes_a, w_a = np.polynomial.legendre.leggauss(n_ang)
    nodes_r, w_r = np.polynomial.legendre.leggauss(n_rad)
    pts = []
    wts = []
    for k in range(8):
        psi = (math.pi / 8.0) * nodes_a
        wpsi = (math.pi / 8.0) * w_a
        rho = octagon_radial_extent(psi)
        phi = k * math.pi / 4.0 + psi
        r = 0.5 * rho[None, :] * (nodes_r[:, None] + 1.0)
        wr = 0.5 * rho[None, :] * w_r[:, None]
        U = np.cos(phi)[:, None] * frame[0] + np.sin(phi)[:, None] * frame[1]
        P = np.cosh(r)[..., None] * origin.v + np.sinh(r)[..., None] * U[None, :, :]
        pts.append(hp.project_to_hyperboloid(P.reshape(-1, 3)))
        wts.append((wr * np.sinh(r) * wpsi[None, :]).reshape(-1))
    return np.concatenate(pts), np.concatenate(wts)


def spherical_volume_reference(n, vol):
    """Reference spherical-volume constant for a closed hyperbolic manifold."""
    return ((n - 1) ** 2 / (4.0 * n)) ** (n / 2.0) * vol


@dataclass
class VolumeReport:
    value: float
    lower_bound: float
    upper_bound: float
    domain_area: float
    c: float

    @property
    def in_bounds(self):
        return self.lower_bound <= self.value <= self.upper_bound * 1.02


def embedded_volume(cfg, n_dom_rad=5, n_dom_ang=24):
    """Integral of sqrt(det) of the induced metric over the octagon.

    Validity gate: the measured vertex angles give Gauss-Bonnet area
    4 pi within 1e-6, and the quadrature mass reproduces it.  The value
    must land between the spherical-volume constant pi/2 of the genus-2
    surface and the upper bound (c^2/2) * 4 pi = 2 pi c^2.
    """
    o = HyperbolicSpace(2)
    cfg.validate_for(2)
    _, gb_area = octagon_gauss_bonnet()
    P, W = genus2_octagon_quadrature(n_dom_rad, n_dom_ang)
    area = float(np.sum(W))
    if abs(gb_area - 4.0 * math.pi) > 1e-6 or abs(area - 4.0 * math.pi) > 1e-6:
        raise ValueError("octagon fundamental domain failed the area check")
    total = 0.0
    for pv, w in zip(P, W):
        rep = induced_metric(o, cfg, hp.HPoint(pv))
        total += w * math.sqrt(max(rep.det, 0.0))
    return VolumeReport(
        value=total,
        lower_bound=spherical_volume_reference(2, area),
        upper_bound=(cfg.c ** 2 / 2.0) * area,
        domain_area=area, c=cfg.c)


# -- bilipschitz pushforward fixture ----------------------------------------

@dataclass(frozen=True)
class RadialStretch:
    """Radial diffeomorphism r -> r (1 + a r) of a disk about the origin."""

    amount: float
    disk_radius: float

    def radius_map(self, r):
        return r * (1.0 + self.amount * r)

    def radius_deriv(self, r):
        return 1.0 + 2.0 * self.amount * np.asarray(r, dtype=float)

    def jacobian(self, r):
        """Area distortion f'(r) sinh(f(r)) / sinh(r), with limit 1 at 0."""
        r = np.asarray(r, dtype=float)
        f = self.radius_map(r)
        small = r < 1e-12
        safe = np.where(small, 1.0, r)
        val = self.radius_deriv(r) * np.sinh(self.radius_map(safe)) / np.sinh(safe)
        return np.where(small, 1.0, val)

    def apply_arr(self, P):
        origin = np.array([1.0, 0.0, 0.0])
        r = hp.dist_arr(P, origin)
        f = self.radius_map(r)
        small = r < 1e-12
        safe_r = np.where(small, 1.0, r)
        U = (P - np.cosh(r)[..., None] * origin) / np.sinh(safe_r)[..., None]
        out = np.cosh(f)[..., None] * origin + np.sinh(f)[..., None] * U
        return np.where(small[..., None], P, hp.project_to_hyperboloid(out))

    def apply(self, p):
        return hp.HPoint(self.apply_arr(p.v[None, :])[0])


@dataclass
class PushforwardReport:
    max_inner_defect: float
    max_det_rel_err: float
    min_jacobian: float
    n_pairs: int
    n_det_points: int


def _disk_quadrature(radius, n_rad, n_ang):
    o = HyperbolicSpace(2)
    return o.embedding_quadrature(hp.HPoint.origin(2), radius, n_rad, n_ang,
                                  c=1.0)


def pushforward_isometry_check(stretch, cfg=None, rng=None, n_pairs=20,
                               n_det_points=100, n_rad=96, n_ang=128):
    """Verify the unitarity of f -> (f o F) |Jac F|^{1/2} and the
    determinant identity det(g through F) = Jac^2 det(g) o F.

    F is a radial stretch of a hyperbolic disk with a closed-form
    Jacobian.  Inner products are checked by change-of-variables
    quadrature on random Gaussian bumps; the determinant identity is
    checked pointwise with finite differences through F.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if cfg is None:
        cfg = EmbeddingConfig(c=0.75, r_trunc=16.0, n_radial=160, n_angular=96)
    o = HyperbolicSpace(2)
    origin = hp.HPoint.origin(2)
    Rd = stretch.disk_radius
    Rimg = stretch.radius_map(Rd)
    quad_x = _disk_quadrature(Rd, n_rad, n_ang)
    quad_y = _disk_quadrature(Rimg, n_rad, n_ang)
    r_x = hp.dist_arr(quad_x.points, origin.v)
    jac = stretch.jacobian(r_x)
    if np.min(jac) < 1e-8:
        raise ValueError("degenerate map")
    FX = stretch.apply_arr(quad_x.points)

    def bump(P, center, width):
        return np.exp(-(hp.dist_arr(P, center) / width) ** 2)

    max_defect = 0.0
    for _ in range(n_pairs):
        centers = hp.sample_ball_arr(2, origin, 0.6 * Rimg, rng, 2)
        widths = rng.uniform(0.35, 0.6, 2)
        fF = bump(FX, centers[0], widths[0])
        gF = bump(FX, centers[1], widths[1])
        fY = bump(quad_y.points, centers[0], widths[0])
        gY = bump(quad_y.points, centers[1], widths[1])
        lhs = float(np.sum(quad_x.weights * fF * gF * jac))
        rhs = float(np.sum(quad_y.weights * fY * gY))
        scale = max(quad_y.norm(fY) * quad_y.norm(gY), 1e-12)
        max_defect = max(max_defect, abs(lhs - rhs) / scale)

    # determinant identity, with one large quadrature shared by both sides
    big = _disk_quadrature(Rimg + cfg.r_trunc, cfg.n_radial, cfg.n_angular)
    max_rel = 0.0
    pts = hp.sample_ball_arr(2, origin, 0.75 * Rd, rng, n_det_points)
    for pv in pts:
        p = hp.HPoint(pv)
        fp = stretch.apply(p)
        gram_y, _ = _gram_on_quad(o, cfg, fp, big)
        det_y = float(np.linalg.det(gram_y))
        # differentiate the composed map through F
        e0 = np.exp(-cfg.c * o.distance_batch(fp, big.points))
        norm2 = big.inner(e0, e0)
        F = []
        for i in range(2):
            coeffs = np.zeros(2)
            coeffs[i] = cfg.delta
            xp = stretch.apply(o.chart_exp(p, coeffs))
            xm = stretch.apply(o.chart_exp(p, -coeffs))
            vp = np.exp(-cfg.c * o.distance_batch(xp, big.points))
            vm = np.exp(-cfg.c * o.distance_batch(xm, big.points))
            F.append((vp - vm) / (2.0 * cfg.delta))
        G = np.empty((2, 2))
        b = np.empty(2)
        for i in range(2):
            b[i] = big.inner(e0, F[i])
            for j in range(i, 2):
                G[i, j] = G[j, i] = big.inner(F[i], F[j])
        gram_x = (G - np.outer(b, b) / norm2) / norm2
        det_x = float(np.linalg.det(gram_x))
        r_p = hp.dist(origin, p)
        target = float(stretch.jacobian(np.asarray(r_p))) ** 2 * det_y
        max_rel = max(max_rel, abs(det_x - target) / max(abs(target), 1e-300))
    return PushforwardReport(
        max_inner_defect=max_defect, max_det_rel_err=max_rel,
        min_jacobian=float(np.min(jac)), n_pairs=n_pairs,
        n_det_points=n_det_points)
