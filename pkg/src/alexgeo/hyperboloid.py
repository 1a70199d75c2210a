"""Hyperbolic geometry in the hyperboloid model.

Points live on the upper sheet of <x,x> = -1 in Minkowski space R^{n,1}
(n = 2 or 3), where <x,y> = -x0*y0 + sum_i xi*yi.  Distances, geodesics,
angles and isometries reduce to linear algebra, which stays well
conditioned away from the ideal boundary.  All kernels accept numpy
arrays broadcasting over leading axes.
"""

import math

import numpy as np

HYPERBOLOID_TOL = 1e-12
ISOMETRY_TOL = 1e-10
_TINY = 1e-300


def minkowski_dot(x, y):
    """Bilinear form -x0*y0 + sum_i xi*yi; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def minkowski_matrix(n):
    J = np.eye(n + 1)
    J[0, 0] = -1.0
    return J


def project_to_hyperboloid(v):
    """Rescale an ambient vector onto the upper sheet <v,v> = -1, v0 > 0."""
    v = np.asarray(v, dtype=float)
    q = -minkowski_dot(v, v)
    if np.any(q <= 0):
        raise ValueError("vector is not timelike")
    v = v / np.sqrt(q)[..., None]
    return np.where(v[..., :1] < 0, -v, v)


class HPoint:
    """A point of H^n; re-projected onto the hyperboloid at construction."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = project_to_hyperboloid(np.asarray(v, dtype=float))
        if self.v.ndim != 1:
            raise ValueError("HPoint holds a single vector")

    @property
    def n(self):
        return self.v.size - 1

    @classmethod
    def origin(cls, n=2):
        v = np.zeros(n + 1)
        v[0] = 1.0
        return cls(v)

    @classmethod
    def from_xy(cls, coords):
        """Point exp_o(sum_i coords[i] e_i) in tangent coordinates at the origin."""
        coords = np.asarray(coords, dtype=float)
        n = coords.size
        u = np.concatenate([[0.0], coords])
        r = math.sqrt(float(np.dot(coords, coords)))
        if r == 0.0:
            return cls.origin(n)
        v = np.zeros(n + 1)
        v[0] = math.cosh(r)
        v[1:] = math.sinh(r) * coords / r
        return cls(v)

    def __repr__(self):
        return f"HPoint({np.array2string(self.v, precision=6)})"


class HTangent:
    """Tangent vector at a base point: <base, u> = 0."""

    __slots__ = ("base", "u")

    def __init__(self, base, u):
        self.base = base if isinstance(base, HPoint) else HPoint(base)
        u = np.asarray(u, dtype=float)
        # project out any base component picked up by roundoff
        self.u = u + minkowski_dot(u, self.base.v) * self.base.v

    @property
    def norm(self):
        return math.sqrt(max(float(minkowski_dot(self.u, self.u)), 0.0))

    def __repr__(self):
        return f"HTangent(base={self.base!r}, |u|={self.norm:.6g})"


def dist_arr(P, Q):
    """Distance between hyperboloid vectors, broadcasting.

    Pairs closer than about 1.3 use 2*asinh(|P-Q|_M / 2), which keeps
    full precision where acosh(-<P,Q>) would cancel; farther pairs use
    the acosh form, where the squared-difference form cancels (or
    overflows) instead.  The regime switch is decided by the acosh
    argument, which stays reliable whenever at least one endpoint sits
    at moderate coordinate radius.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        m = -minkowski_dot(P, Q)
        far = m >= 2.0
        if np.all(far):
            return np.arccosh(m)
        diff = P - Q
        s = minkowski_dot(diff, diff)
        d = 2.0 * np.arcsinh(0.5 * np.sqrt(np.clip(s, 0.0, None)))
        if np.any(far):
            d = np.where(far, np.arccosh(np.maximum(m, 1.0)), d)
    return d


def dist(p, q):
    """Geodesic distance between two HPoints."""
    return float(dist_arr(p.v, q.v))


def geodesic_points_arr(P, Q, t):
    """Points at parameter fractions t along the geodesic from P to Q."""
    t = np.asarray(t, dtype=float)
    d = dist_arr(P, Q)
    if np.ndim(d) == 0 and d < 1e-14:
        return np.broadcast_to(P, t.shape + P.shape).copy()
    sd = np.sinh(d)
    w0 = np.sinh((1.0 - t) * d) / sd
    w1 = np.sinh(t * d) / sd
    V = w0[..., None] * P + w1[..., None] * Q
    return project_to_hyperboloid(V)


def geodesic_point(p, q, t):
    """Point at fraction t in [0,1] along the geodesic from p to q.

    Coincident endpoints return p.
    """
    if dist(p, q) < 1e-14:
        return p
    return HPoint(geodesic_points_arr(p.v, q.v, float(t)))


def log_map(p, q):
    """Tangent at p pointing toward q with |u| = dist(p, q)."""
    d = dist(p, q)
    w = q.v + minkowski_dot(q.v, p.v) * p.v
    nw = math.sqrt(max(float(minkowski_dot(w, w)), 0.0))
    if nw < _TINY or d == 0.0:
        return HTangent(p, np.zeros_like(p.v))
    return HTangent(p, (d / nw) * w)


def exp_map(t):
    """Endpoint of the geodesic from t.base with initial velocity t.u.

    A zero tangent returns the base point.
    """
    theta = t.norm
    if theta < 1e-300:
        return t.base
    v = math.cosh(theta) * t.base.v + math.sinh(theta) * t.u / theta
    return HPoint(v)


def tangent_frame(p):
    """Orthonormal tangent frame at p, rows of shape (n, n+1).

    Built by Minkowski Gram-Schmidt on the projected spatial axes; the
    projections always span the tangent space on the upper sheet.
    """
    n = p.n
    basis = []
    for i in range(1, n + 1):
        e = np.zeros(n + 1)
        e[i] = 1.0
        w = e + minkowski_dot(e, p.v) * p.v
        for b in basis:
            w = w - minkowski_dot(w, b) * b
        nw = math.sqrt(max(float(minkowski_dot(w, w)), 0.0))
        if nw < 1e-12:
            raise ValueError("degenerate frame")
        basis.append(w / nw)
    return np.array(basis)


def tangent_angle(u1, u2):
    """Angle in [0, pi] between two tangent vectors at a common base."""
    a = np.asarray(u1, dtype=float)
    b = np.asarray(u2, dtype=float)
    na = math.sqrt(max(float(minkowski_dot(a, a)), 0.0))
    nb = math.sqrt(max(float(minkowski_dot(b, b)), 0.0))
    if na == 0.0 or nb == 0.0:
        raise ValueError("degenerate angle")
    a = a / na
    b = b / nb
    # 2*atan2 form is stable near 0 and pi, unlike plain arccos
    dm = math.sqrt(max(float(minkowski_dot(a - b, a - b)), 0.0))
    sm = math.sqrt(max(float(minkowski_dot(a + b, a + b)), 0.0))
    return 2.0 * math.atan2(dm, sm)


def angle(at, toward1, toward2):
    """Vertex angle at `at` between the geodesics to toward1 and toward2."""
    u1 = log_map(at, toward1)
    u2 = log_map(at, toward2)
    if u1.norm < 1e-14 or u2.norm < 1e-14:
        raise ValueError("degenerate angle")
    return tangent_angle(u1.u, u2.u)


def angle_arr(X, Y, Z):
    """Vertex angles at X between Y and Z for stacked hyperboloid vectors."""
    X = np.asarray(X, dtype=float)

    def _unit_toward(T):
        w = T + minkowski_dot(T, X)[..., None] * X
        nw = np.sqrt(np.maximum(minkowski_dot(w, w), _TINY))
        return w / nw[..., None]

    a = _unit_toward(np.asarray(Y, dtype=float))
    b = _unit_toward(np.asarray(Z, dtype=float))
    dm = np.sqrt(np.maximum(minkowski_dot(a - b, a - b), 0.0))
    sm = np.sqrt(np.maximum(minkowski_dot(a + b, a + b), 0.0))
    return 2.0 * np.arctan2(dm, sm)


def comparison_angle(a, b, c, tol=1e-12):
    """Angle opposite side a in the H^2 triangle with sides (a, b, c).

    Evaluated through the half-angle form of the hyperbolic law of
    cosines, which keeps full precision for very small triangles.
    Raises for side data violating the triangle inequality beyond `tol`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(b <= 0.0) or np.any(c <= 0.0):
        raise ValueError("sides b, c must be positive")
    if np.any(a < -tol):
        raise ValueError("negative side length")
    bad = (a > b + c + tol) | (b > a + c + tol) | (c > a + b + tol)
    if np.any(bad):
        raise ValueError("not a triangle")
    num = np.sinh(0.5 * (a + b - c)) * np.sinh(0.5 * (a - b + c))
    den = np.sinh(0.5 * (a + b + c)) * np.sinh(0.5 * (b + c - a))
    val = 2.0 * np.arctan2(np.sqrt(np.maximum(num, 0.0)),
                           np.sqrt(np.maximum(den, 0.0)))
    return float(val) if val.ndim == 0 else val


def opposite_side(b, c, alpha):
    """Side opposite the angle alpha enclosed by sides b and c in H^2.

    Stable rewrite of cosh x = cosh b cosh c - sinh b sinh c cos(alpha).
    """
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    u = 2.0 * np.sinh(0.5 * (b - c)) ** 2 \
        + 2.0 * np.sinh(b) * np.sinh(c) * np.sin(0.5 * alpha) ** 2
    val = 2.0 * np.arcsinh(np.sqrt(np.maximum(0.5 * u, 0.0)))
    return float(val) if val.ndim == 0 else val


class ComparisonTriangle:
    """An H^2 triangle recorded by side lengths and vertex angles."""

    __slots__ = ("a", "b", "c", "alpha", "beta", "gamma")

    def __init__(self, a, b, c, alpha, beta, gamma):
        self.a, self.b, self.c = a, b, c
        self.alpha, self.beta, self.gamma = alpha, beta, gamma

    @classmethod
    def from_sides(cls, a, b, c):
        """Triangle with the given side lengths; angles are opposite sides."""
        alpha = comparison_angle(a, b, c)
        beta = comparison_angle(b, c, a)
        gamma = comparison_angle(c, a, b)
        return cls(a, b, c, alpha, beta, gamma)

    def angle_sum(self):
        return self.alpha + self.beta + self.gamma

    def area(self):
        return math.pi - self.angle_sum()


def build_triangle(a, b, c):
    """Realize side lengths (a, b, c) as HPoints (P, Q, R) in H^2.

    Labelled so that |QR| = a, |PR| = b, |PQ| = c, with Q at the origin
    and R on the first axis.
    """
    q = HPoint.origin(2)
    r = HPoint.from_xy([a, 0.0])
    phi = comparison_angle(b, c, a)  # angle at Q
    p = HPoint.from_xy([c * math.cos(phi), c * math.sin(phi)])
    return p, q, r


def ball_volume(n, R):
    """Volume of the radius-R ball in H^n for n = 2 or 3."""
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise ValueError("radius must be nonnegative")
    if n == 2:
        val = 2.0 * np.pi * (np.cosh(R) - 1.0)
    elif n == 3:
        val = np.pi * (np.sinh(2.0 * R) - 2.0 * R)
    else:
        raise ValueError("only n = 2, 3 supported")
    return float(val) if val.ndim == 0 else val


class HIsometry:
    """Linear isometry of H^n: M^T J M = J, preserving the upper sheet."""

    __slots__ = ("M",)

    def __init__(self, M):
        self.M = np.asarray(M, dtype=float)

    @property
    def n(self):
        return self.M.shape[0] - 1

    def is_valid(self, tol=ISOMETRY_TOL):
        J = minkowski_matrix(self.n)
        defect = np.max(np.abs(self.M.T @ J @ self.M - J))
        return bool(defect <= tol and self.M[0, 0] > 0)

    def apply(self, p):
        return HPoint(self.M @ p.v)

    def apply_arr(self, P):
        return project_to_hyperboloid(np.asarray(P) @ self.M.T)

    def __matmul__(self, other):
        return HIsometry(self.M @ other.M)

    def inverse(self):
        J = minkowski_matrix(self.n)
        return HIsometry(J @ self.M.T @ J)

    @classmethod
    def identity(cls, n=2):
        return cls(np.eye(n + 1))

    @classmethod
    def x_translation(cls, d, n=2):
        """Translation by d along the first-axis geodesic through the origin."""
        M = np.eye(n + 1)
        M[0, 0] = M[1, 1] = math.cosh(d)
        M[0, 1] = M[1, 0] = math.sinh(d)
        return cls(M)

    @classmethod
    def rotation(cls, theta):
        """Rotation of H^2 about the origin."""
        M = np.eye(3)
        M[1, 1] = M[2, 2] = math.cos(theta)
        M[1, 2] = -math.sin(theta)
        M[2, 1] = math.sin(theta)
        return cls(M)


def geodesic_normal(p, direction):
    """Unit spacelike normal to the H^2 geodesic through p with the given tangent.

    The sign is arbitrary; <normal, x> is a side predicate for the geodesic.
    """
    u = direction.u if isinstance(direction, HTangent) else np.asarray(direction)
    if p.n != 2:
        raise ValueError("normal covector is specific to H^2")
    J = minkowski_matrix(2)
    m = np.cross(J @ p.v, J @ u)
    nm = math.sqrt(max(float(minkowski_dot(m, m)), 0.0))
    if nm < 1e-14:
        raise ValueError("degenerate geodesic")
    return m / nm


def reflect_across_geodesic(p, direction):
    """Reflection of H^2 across the geodesic through p with the given tangent.

    An involution fixing the geodesic pointwise and preserving the form.
    """
    m = geodesic_normal(p, direction)
    J = minkowski_matrix(2)
    M = np.eye(3) - 2.0 * np.outer(m, J @ m)
    return HIsometry(M)


def side_of_geodesic(normal, x):
    """Signed side of a point (or array) relative to a geodesic normal."""
    X = x.v if isinstance(x, HPoint) else np.asarray(x)
    return minkowski_dot(X, normal)


def _sample_radius(n, R, rng, size):
    u = rng.random(size)
    if n == 2:
        return np.arccosh(1.0 + u * (math.cosh(R) - 1.0))
    # n = 3: invert the CDF of sinh^2 by bisection
    total = 0.5 * (math.sinh(R) * math.cosh(R) - R)
    target = u * total
    lo = np.zeros(size)
    hi = np.full(size, R, dtype=float)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = 0.5 * (np.sinh(mid) * np.cosh(mid) - mid)
        smaller = val < target
        lo = np.where(smaller, mid, lo)
        hi = np.where(smaller, hi, mid)
    return 0.5 * (lo + hi)


def sample_ball_arr(n, center, R, rng, size):
    """Uniform samples (hyperbolic measure) in B(center, R), shape (size, n+1)."""
    r = _sample_radius(n, R, rng, size)
    g = rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    frame = tangent_frame(center)  # (n, n+1)
    U = g @ frame
    V = np.cosh(r)[:, None] * center.v + np.sinh(r)[:, None] * U
    return project_to_hyperboloid(V)


def sample_ball(n, center, R, rng):
    """One uniform sample from the hyperbolic ball B(center, R)."""
    return HPoint(sample_ball_arr(n, center, R, rng, 1)[0])
