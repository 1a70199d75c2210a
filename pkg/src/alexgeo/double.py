"""Metric doubles of strictly convex plane bodies.

A convex body C in H^2 is carried by a piecewise-analytic C^{1,1}
boundary curve plus an inside test.  The double glues two copies of C
along the boundary; same-sheet geodesics are the ambient ones (convexity
keeps them inside), cross-sheet geodesics reflect off the boundary at a
unique point where the angle of incidence equals the angle of
reflection.  Cross-sheet distances are found by a coarse grid over the
boundary parameter followed by golden-section refinement, since the
path length can be multimodal for non-ball bodies.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import hyperboloid as hp
from .spaces import QuadratureSet

BOUNDARY_TOL = 1e-9
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ConvexBody:
    """Shared machinery for bodies bounded by a closed convex curve.

    Subclasses provide boundary_point, depth (signed distance to the
    boundary: positive inside, exact within the outer collar) and
    perimeter; everything else works off those.
    """

    grid_size = 256

    def _finish_init(self):
        s = np.arange(self.grid_size) / self.grid_size
        self._grid_s = s
        self._grid_pts = self.boundary_point(s)
        dense = self.boundary_point(np.arange(2048) / 2048.0)
        self.max_radius = float(np.max(hp.dist_arr(self.anchor.v, dense)))
        idx = np.arange(0, 2048, 8)
        sub = dense[idx]
        pair = hp.dist_arr(sub[:, None, :], sub[None, :, :])
        self.diameter = float(np.max(pair))

    # -- geometry of the boundary curve ----------------------------------

    def boundary_point(self, s):
        raise NotImplementedError

    def depth(self, X):
        raise NotImplementedError

    def boundary_tangent(self, s, h=1e-6):
        """Unit tangent to the boundary at parameter s (central difference)."""
        s = np.asarray(s, dtype=float)
        p = self.boundary_point(s)
        diff = self.boundary_point(s + h) - self.boundary_point(s - h)
        t = diff + hp.minkowski_dot(diff, p)[..., None] * p
        nt = np.sqrt(np.maximum(hp.minkowski_dot(t, t), 0.0))
        return t / nt[..., None]

    def inward_normal(self, s):
        """Unit inward normal at boundary parameter s (scalar)."""
        s = float(s)
        p = hp.HPoint(self.boundary_point(np.asarray(s)))
        t = self.boundary_tangent(np.asarray(s))
        n = hp.geodesic_normal(p, np.asarray(t))
        toward = hp.log_map(p, self.anchor).u
        if float(hp.minkowski_dot(n, toward)) < 0:
            n = -n
        return p, n

    def closest_boundary_param(self, x):
        """Boundary parameter nearest to the point x."""
        d = hp.dist_arr(x.v, self._grid_pts)
        i = int(np.argmin(d))
        h = 1.0 / self.grid_size
        lo, hi = self._grid_s[i] - h, self._grid_s[i] + h
        for _ in range(48):
            x1 = hi - _GOLDEN * (hi - lo)
            x2 = lo + _GOLDEN * (hi - lo)
            f1 = float(hp.dist_arr(x.v, self.boundary_point(np.asarray(x1))))
            f2 = float(hp.dist_arr(x.v, self.boundary_point(np.asarray(x2))))
            if f1 < f2:
                hi = x2
            else:
                lo = x1
        return 0.5 * (lo + hi) % 1.0

    def contains(self, X, tol=BOUNDARY_TOL):
        return self.depth(X) >= -tol

    def validate(self, n=512, c1_gap=0.05):
        """Check the boundary is simple, strictly convex and C^1.

        Strict convexity: the tangent geodesic at each sample supports
        the body, every other sample strictly on the inner side.
        """
        s = np.arange(n) / n
        pts = self.boundary_point(s)
        tans = self.boundary_tangent(s)
        J = hp.minkowski_matrix(2)
        normals = np.cross(pts @ J, tans @ J)
        normals /= np.sqrt(np.maximum(
            hp.minkowski_dot(normals, normals), 1e-300))[..., None]
        toward = self.anchor.v + hp.minkowski_dot(
            self.anchor.v, pts)[..., None] * pts
        sign = np.sign(hp.minkowski_dot(normals, toward))
        normals *= sign[..., None]
        side = hp.minkowski_dot(pts[None, :, :], normals[:, None, :])
        near = np.abs((np.arange(n)[None, :] - np.arange(n)[:, None] + n // 2)
                      % n - n // 2) <= 1
        if np.any(side[~near] <= 1e-12):
            raise ValueError("boundary is not strictly convex")
        # C^1: tangent turning between adjacent samples stays small
        t_next = np.roll(tans, -1, axis=0)
        p_next = np.roll(pts, -1, axis=0)
        shifted = tans + hp.minkowski_dot(tans, p_next)[..., None] * p_next
        cosg = hp.minkowski_dot(shifted, t_next) / np.sqrt(np.maximum(
            hp.minkowski_dot(shifted, shifted), 1e-300))
        gaps = np.arccos(np.clip(cosg, -1.0, 1.0))
        if np.max(gaps) >= c1_gap:
            raise ValueError("boundary tangent turns too fast (not C^1)")
        return True


class BallBody(ConvexBody):
    """Metric ball of radius rho: the simplest strictly convex body."""

    def __init__(self, center, rho):
        if rho <= 0:
            raise ValueError("radius must be positive")
        self.center = center
        self.rho = float(rho)
        self.anchor = center
        self.frame = hp.tangent_frame(center)
        self.perimeter = 2.0 * math.pi * math.sinh(rho)
        self._finish_init()

    def boundary_point(self, s):
        phi = 2.0 * math.pi * np.asarray(s, dtype=float)
        U = np.cos(phi)[..., None] * self.frame[0] \
            + np.sin(phi)[..., None] * self.frame[1]
        # the polar formula is already on the sheet; skip re-projection
        return math.cosh(self.rho) * self.center.v + math.sinh(self.rho) * U

    def depth(self, X):
        return self.rho - hp.dist_arr(np.asarray(X), self.center.v)


class TubeBody(ConvexBody):
    """Closed epsilon-neighborhood of a geodesic segment or convex polygon.

    The boundary alternates hypercycle pieces (distance epsilon from an
    edge) and circular arcs around the core vertices; the two families
    meet tangentially, so the curve is C^{1,1} but not C^2.
    """

    def __init__(self, vertices, epsilon):
        if epsilon <= 0:
            raise ValueError("boundary not C^1 at vertices")
        verts = list(vertices)
        if len(verts) < 2:
            raise ValueError("need at least two core vertices")
        self.epsilon = float(epsilon)
        self.closed = len(verts) > 2
        if self.closed:
            mean = hp.HPoint(sum(v.v for v in verts))
            angles = []
            frame = hp.tangent_frame(mean)
            for v in verts:
                u = hp.log_map(mean, v).u
                angles.append(math.atan2(float(hp.minkowski_dot(u, frame[1])),
                                         float(hp.minkowski_dot(u, frame[0]))))
            verts = [v for _, v in sorted(zip(angles, verts), key=lambda t: t[0])]
            self.anchor = mean
        else:
            self.anchor = hp.geodesic_point(verts[0], verts[1], 0.5)
        self.vertices = verts
        self._build_pieces()
        self._finish_init()

    def _build_pieces(self):
        verts = self.vertices
        if self.closed:
            seq = [(verts[i], verts[(i + 1) % len(verts)])
                   for i in range(len(verts))]
        else:
            seq = [(verts[0], verts[1]), (verts[1], verts[0])]
        eps = self.epsilon
        edges = []
        for A, B in seq:
            ell = hp.dist(A, B)
            if ell < 1e-12:
                raise ValueError("degenerate core edge")
            u = hp.log_map(A, B).u / ell
            m = hp.geodesic_normal(A, u)
            probe = math.cosh(0.1) * A.v + math.sinh(0.1) * m
            if self.closed:
                inside = self.anchor.v + hp.minkowski_dot(self.anchor.v, A.v) * A.v
                if float(hp.minkowski_dot(m, inside)) > 0:
                    m = -m
            edges.append({"A": A.v, "u": u, "m": m, "ell": ell, "probe": probe})
        if not self.closed:
            edges[1]["m"] = -edges[0]["m"]
        pieces = []
        k = len(edges)
        for i, e in enumerate(edges):
            pieces.append(("edge", e, e["ell"] * math.cosh(eps)))
            nxt = edges[(i + 1) % k]
            W = nxt["A"]
            t_in = math.sinh(e["ell"]) * e["A"] + math.cosh(e["ell"]) * e["u"]
            chi = hp.tangent_angle(t_in, nxt["u"])
            if math.sin(chi) > 1e-8:
                edir = (nxt["m"] - math.cos(chi) * e["m"]) / math.sin(chi)
            else:
                edir = t_in
            if float(hp.minkowski_dot(edir, t_in)) <= 0:
                raise ValueError("core vertices are not in convex position")
            pieces.append(("arc", {"V": W, "m": e["m"], "e": edir, "chi": chi},
                           chi * math.sinh(eps)))
        self.edges = edges
        self.pieces = pieces
        lengths = np.array([p[2] for p in pieces])
        self.perimeter = float(np.sum(lengths))
        self._cum = np.concatenate([[0.0], np.cumsum(lengths)])

    def boundary_point(self, s):
        s = np.asarray(s, dtype=float)
        t = (s % 1.0) * self.perimeter
        idx = np.clip(np.searchsorted(self._cum, t, side="right") - 1,
                      0, len(self.pieces) - 1)
        flat_t = np.atleast_1d(t)
        flat_idx = np.atleast_1d(idx)
        out = np.empty(flat_t.shape + (3,))
        eps = self.epsilon
        for j, (kind, data, _) in enumerate(self.pieces):
            mask = flat_idx == j
            if not np.any(mask):
                continue
            tloc = flat_t[mask] - self._cum[j]
            if kind == "edge":
                u = tloc / math.cosh(eps)
                L = np.cosh(u)[:, None] * data["A"] + np.sinh(u)[:, None] * data["u"]
                out[mask] = math.cosh(eps) * L + math.sinh(eps) * data["m"]
            else:
                phi = tloc / math.sinh(eps)
                w = np.cos(phi)[:, None] * data["m"] + np.sin(phi)[:, None] * data["e"]
                out[mask] = math.cosh(eps) * data["V"] + math.sinh(eps) * w
        return out.reshape(s.shape + (3,)) if s.shape else out[0]

    def _core_distance(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, 3)
        best = np.full(flat.shape[0], np.inf)
        if self.closed:
            inside = np.ones(flat.shape[0], dtype=bool)
        n_edges = len(self.vertices) if self.closed else 1
        for e in self.edges[:n_edges]:
            g = hp.minkowski_dot(flat, e["m"])
            d_line = np.arcsinh(np.abs(g))
            proj = flat - g[:, None] * e["m"]
            q = np.maximum(-hp.minkowski_dot(proj, proj), 1e-300)
            foot = proj / np.sqrt(q)[:, None]
            ufoot = np.arcsinh(hp.minkowski_dot(foot, e["u"]))
            B = math.cosh(e["ell"]) * e["A"] + math.sinh(e["ell"]) * e["u"]
            d_end = np.minimum(hp.dist_arr(flat, e["A"]), hp.dist_arr(flat, B))
            d = np.where((ufoot >= 0.0) & (ufoot <= e["ell"]), d_line, d_end)
            best = np.minimum(best, d)
            if self.closed:
                inside &= g <= 0.0
        if self.closed:
            best = np.where(inside, 0.0, best)
        return best.reshape(X.shape[:-1])

    def depth(self, X):
        return self.epsilon - self._core_distance(X)


def make_ball_body(center, rho):
    """Strictly convex ball body; boundary is an analytic circle."""
    body = BallBody(center, rho)
    body.validate()
    return body


def make_neighborhood_body(core, epsilon):
    """Closed epsilon-neighborhood of a point, geodesic segment or polygon.

    A single point gives the ball of radius epsilon; a segment or convex
    polygon gives the C^{1,1} tube.  epsilon must be positive: the bare
    core has corners (or zero width), so its boundary is not C^1.
    """
    if isinstance(core, hp.HPoint):
        return make_ball_body(core, epsilon)
    core = list(core)
    if len(core) == 1:
        return make_ball_body(core[0], epsilon)
    body = TubeBody(core, epsilon)
    body.validate()
    return body


@dataclass(frozen=True)
class DoublePoint:
    """A point of the double: a sheet tag and a point of the body."""

    sheet: int
    pt: hp.HPoint


@dataclass(frozen=True)
class ReflectedPath:
    """A cross-sheet geodesic: two ambient legs meeting on the boundary."""

    a: DoublePoint
    b: DoublePoint
    crossing: hp.HPoint
    s_param: float
    length: float
    incidence: float
    reflection: float


class DoubledSpace:
    """The metric double of a convex body, as a geodesic oracle.

    Restricted to one sheet the metric is the ambient H^2 metric;
    opposite sheets connect through a unique boundary reflection point.
    Points within ``BOUNDARY_TOL`` of the boundary are canonicalized to
    sheet 1.
    """

    dimension = 2

    def __init__(self, body):
        self.body = body
        self._quad_cache = {}

    # -- points -----------------------------------------------------------

    def point(self, sheet, pt):
        return self.canonical(DoublePoint(sheet, pt))

    def canonical(self, p):
        depth = float(self.body.depth(p.pt.v))
        if depth < -1e-8:
            raise ValueError("point lies outside the body")
        if abs(depth) <= BOUNDARY_TOL and p.sheet != 1:
            return DoublePoint(1, p.pt)
        return p

    def on_boundary(self, p):
        return abs(float(self.body.depth(p.pt.v))) <= BOUNDARY_TOL

    def stack(self, points):
        sheets = np.array([p.sheet for p in points])
        P = np.array([p.pt.v for p in points])
        return sheets, P

    # -- metric -----------------------------------------------------------

    def _path_len(self, Pa, PB, s):
        C = self.body.boundary_point(s)
        return hp.dist_arr(Pa, C) + hp.dist_arr(C, PB)

    def _golden_cross(self, Pa, PB, s0, iters=32):
        h = 1.0 / self.body.grid_size
        lo = s0 - h
        hi = s0 + h
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        f1 = self._path_len(Pa, PB, x1)
        f2 = self._path_len(Pa, PB, x2)
        for _ in range(iters):
            left = f1 < f2
            hi = np.where(left, x2, hi)
            lo = np.where(left, lo, x1)
            x_old = np.where(left, x1, x2)
            f_old = np.where(left, f1, f2)
            x_new = np.where(left, hi - _GOLDEN * (hi - lo),
                             lo + _GOLDEN * (hi - lo))
            f_new = self._path_len(Pa, PB, x_new)
            x1 = np.where(left, x_new, x_old)
            f1 = np.where(left, f_new, f_old)
            x2 = np.where(left, x_old, x_new)
            f2 = np.where(left, f_old, f_new)
        s_best = np.where(f1 < f2, x1, x2)
        return s_best % 1.0, self._path_len(Pa, PB, s_best)

    def _cross_distance_batch(self, pa_vec, PB):
        """Boundary-crossing minimization: coarse grid, then golden section.

        The path length can have two near-tied basins (symmetric bodies),
        so the runner-up grid basin is refined as well whenever it comes
        within 0.01 of the best one (the grid mis-ranks basins only when
        the true gap is under f'' h^2 / 2, a few 1e-4 here).
        """
        D_a = hp.dist_arr(pa_vec, self.body._grid_pts)
        D_bz = hp.dist_arr(self.body._grid_pts[:, None, :], PB[None, :, :])
        tot = D_a[:, None] + D_bz
        idx = np.argmin(tot, axis=0)
        s0 = self.body._grid_s[idx]
        s_best, f_best = self._golden_cross(pa_vec, PB, s0)
        K = self.body.grid_size
        offsets = (np.arange(K)[:, None] - idx[None, :] + K // 2) % K - K // 2
        masked = np.where(np.abs(offsets) <= 2, np.inf, tot)
        idx2 = np.argmin(masked, axis=0)
        near_tie = masked[idx2, np.arange(len(idx))] - tot[idx, np.arange(len(idx))] < 0.01
        if np.any(near_tie):
            s2, f2 = self._golden_cross(
                pa_vec, PB[near_tie], self.body._grid_s[idx2[near_tie]])
            better = f2 < f_best[near_tie]
            sb = s_best[near_tie]
            fb = f_best[near_tie]
            sb[better] = s2[better]
            fb[better] = f2[better]
            s_best[near_tie] = sb
            f_best[near_tie] = fb
        return s_best, f_best

    def distance_batch(self, a, pts):
        a = self.canonical(a)
        sheets, P = pts
        sheets = np.asarray(sheets)
        depth = self.body.depth(P)
        same = (sheets == a.sheet) | (np.abs(depth) <= BOUNDARY_TOL) \
            | self.on_boundary(a)
        out = np.empty(len(sheets))
        if np.any(same):
            out[same] = hp.dist_arr(a.pt.v, P[same])
        if np.any(~same):
            _, f = self._cross_distance_batch(a.pt.v, P[~same])
            out[~same] = f
        return out

    def distance(self, a, b):
        return float(self.distance_batch(a, self.stack([b]))[0])

    def distance_batch_group(self, sources, pts):
        """Distances from several nearby sources to the same targets.

        The boundary crossing is optimized once, from the first source;
        the others reuse the crossing point.  Valid when the sources are
        within a few FD steps of each other (the reused crossing changes
        the path length only at second order, and a path through a fixed
        boundary point stays 1-Lipschitz in its endpoint).
        """
        base = self.canonical(sources[0])
        sheets, P = pts
        sheets = np.asarray(sheets)
        depth = self.body.depth(P)
        same = (sheets == base.sheet) | (np.abs(depth) <= BOUNDARY_TOL) \
            | self.on_boundary(base)
        out = np.empty((len(sources), len(sheets)))
        for k, src in enumerate(sources):
            out[k, same] = hp.dist_arr(src.pt.v, P[same])
        if np.any(~same):
            PB = P[~same]
            s_star, f0 = self._cross_distance_batch(base.pt.v, PB)
            C = self.body.boundary_point(s_star)
            out[0, ~same] = f0
            for k, src in enumerate(sources[1:], start=1):
                out[k, ~same] = hp.dist_arr(src.pt.v, C) + hp.dist_arr(C, PB)
        return out

    def _reflection_balance(self, s, pa, pb):
        """Arclength derivative of the two-leg path (up to a positive factor).

        Vanishes exactly where the angle of incidence equals the angle
        of reflection; root-finding on it localizes the crossing far
        better than the flat minimum of the path length does.
        """
        C = self.body.boundary_point(np.asarray(s))
        t = self.body.boundary_tangent(np.asarray(s))

        def unit_toward(target):
            w = target + hp.minkowski_dot(target, C) * C
            nw = math.sqrt(max(float(hp.minkowski_dot(w, w)), 1e-300))
            return w / nw

        return float(hp.minkowski_dot(t, unit_toward(pa))
                     + hp.minkowski_dot(t, unit_toward(pb)))

    def reflected_path(self, a, b):
        """The cross-sheet geodesic data for points on opposite sheets."""
        a = self.canonical(a)
        b = self.canonical(b)
        if a.sheet == b.sheet or self.on_boundary(a) or self.on_boundary(b):
            raise ValueError("points are not on strictly opposite sheets")
        s, f = self._cross_distance_batch(a.pt.v, b.pt.v[None, :])
        s = float(s[0])
        # polish the golden-section estimate with bisection on the
        # first-order condition
        h = 1e-6
        lo, hi = s - h, s + h
        g_lo = self._reflection_balance(lo, a.pt.v, b.pt.v)
        g_hi = self._reflection_balance(hi, a.pt.v, b.pt.v)
        while g_lo * g_hi > 0 and hi - lo < 2.0 / self.body.grid_size:
            lo, hi = s - 4 * (s - lo), s + 4 * (hi - s)
            g_lo = self._reflection_balance(lo, a.pt.v, b.pt.v)
            g_hi = self._reflection_balance(hi, a.pt.v, b.pt.v)
        if g_lo * g_hi <= 0:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                g_mid = self._reflection_balance(mid, a.pt.v, b.pt.v)
                if g_lo * g_mid <= 0:
                    hi, g_hi = mid, g_mid
                else:
                    lo, g_lo = mid, g_mid
            s = 0.5 * (lo + hi)
        c, n = self.body.inward_normal(s)
        length = hp.dist(a.pt, c) + hp.dist(c, b.pt)
        u_a = hp.log_map(c, a.pt).u
        u_b = hp.log_map(c, b.pt).u
        return ReflectedPath(
            a=a, b=b, crossing=c, s_param=s % 1.0, length=length,
            incidence=hp.tangent_angle(n, u_a),
            reflection=hp.tangent_angle(n, u_b),
        )

    # -- geodesics ----------------------------------------------------------

    def geodesic_points(self, a, b, t_arr):
        a = self.canonical(a)
        b = self.canonical(b)
        t = np.atleast_1d(np.asarray(t_arr, dtype=float))
        cross = (a.sheet != b.sheet) and not (
            self.on_boundary(a) or self.on_boundary(b))
        if not cross:
            sheet = b.sheet if self.on_boundary(a) else a.sheet
            P = hp.geodesic_points_arr(a.pt.v, b.pt.v, t)
            return np.full(t.shape, sheet), P
        s, f = self._cross_distance_batch(a.pt.v, b.pt.v[None, :])
        crossing = hp.HPoint(self.body.boundary_point(np.asarray(s[0])))
        d1 = hp.dist(a.pt, crossing)
        L = float(f[0])
        sheets = np.where(t * L <= d1, a.sheet, b.sheet)
        P = np.empty(t.shape + (3,))
        first = t * L <= d1
        if np.any(first):
            P[first] = hp.geodesic_points_arr(
                a.pt.v, crossing.v, t[first] * L / max(d1, 1e-300))
        if np.any(~first):
            d2 = max(L - d1, 1e-300)
            P[~first] = hp.geodesic_points_arr(
                crossing.v, b.pt.v, (t[~first] * L - d1) / d2)
        return sheets, P

    def geodesic_sample(self, a, b, t):
        sheets, P = self.geodesic_points(a, b, np.asarray([float(t)]))
        return DoublePoint(int(sheets[0]), hp.HPoint(P[0]))

    def geodesic_path(self, a, b, m):
        """A uniformly spaced geodesic path, plus the reflection record
        when it crosses the boundary."""
        a = self.canonical(a)
        b = self.canonical(b)
        if self.distance(a, b) < 1e-14:
            return [a], None
        t = np.linspace(0.0, 1.0, m)
        sheets, P = self.geodesic_points(a, b, t)
        pts = [DoublePoint(int(s), hp.HPoint(v)) for s, v in zip(sheets, P)]
        path = None
        cross = (a.sheet != b.sheet) and not (
            self.on_boundary(a) or self.on_boundary(b))
        if cross:
            path = self.reflected_path(a, b)
        return pts, path

    def geodesic_candidates(self, a, b):
        """Both geodesics between two boundary points (one per sheet)."""
        a = self.canonical(a)
        b = self.canonical(b)
        if not (self.on_boundary(a) and self.on_boundary(b)):
            return [lambda t: self.geodesic_sample(a, b, t)]

        def _in_sheet(sheet):
            def sample(t):
                p = hp.geodesic_point(a.pt, b.pt, t)
                return self.canonical(DoublePoint(sheet, p))
            return sample

        return [_in_sheet(1), _in_sheet(2)]

    # -- angles at the boundary ---------------------------------------------

    def boundary_angle(self, p, r, q):
        """Angle at a boundary point p between geodesics to r and q.

        When r and q lie on opposite sheets the second sheet is realized
        by reflecting across the tangent geodesic at p, which makes the
        two copies tangent from opposite sides.
        """
        if abs(float(self.body.depth(p.v))) > 1e-7:
            raise ValueError("p must lie on the boundary")
        r = self.canonical(r)
        q = self.canonical(q)
        if r.sheet == q.sheet or self.on_boundary(r) or self.on_boundary(q):
            return hp.angle(p, r.pt, q.pt)
        s = self.body.closest_boundary_param(p)
        t = self.body.boundary_tangent(np.asarray(s))
        refl = hp.reflect_across_geodesic(p, np.asarray(t))
        return hp.angle(p, r.pt, refl.apply(q.pt))

    # -- measure ------------------------------------------------------------

    def measure_sample(self, center, R, rng):
        center = self.canonical(center)
        full = R >= 2.0 * self.body.diameter
        while True:
            X = hp.sample_ball_arr(2, center.pt, R, rng, 128)
            sheets = rng.integers(1, 3, 128)
            ok = self.body.depth(X) >= 0.0
            if not full:
                d = self.distance_batch(center, (sheets, X))
                ok &= d <= R
            hit = np.nonzero(ok)[0]
            if hit.size:
                i = hit[0]
                return self.canonical(
                    DoublePoint(int(sheets[i]), hp.HPoint(X[i])))

    def sample_space(self, rng):
        """A point uniform w.r.t. Hausdorff measure on the whole double."""
        while True:
            X = hp.sample_ball_arr(
                2, self.body.anchor, self.body.max_radius + 1e-9, rng, 64)
            ok = np.nonzero(self.body.depth(X) >= 0.0)[0]
            if ok.size:
                sheet = int(rng.integers(1, 3))
                return self.canonical(DoublePoint(sheet, hp.HPoint(X[ok[0]])))

    def ball_measure(self, center, R, n_samples, rng):
        """Hit-or-miss estimate of the Hausdorff measure of B(center, R)."""
        center = self.canonical(center)
        X = hp.sample_ball_arr(2, center.pt, R, rng, n_samples)
        sheets = rng.integers(1, 3, n_samples)
        ok = self.body.depth(X) >= 0.0
        idx = np.nonzero(ok)[0]
        if idx.size:
            d = self.distance_batch(center, (sheets[idx], X[idx]))
            ok[idx] = d <= R
        total = 2.0 * hp.ball_volume(2, R)
        p = float(np.mean(ok))
        return total * p, total * math.sqrt(max(p * (1 - p), 0.0) / n_samples)

    # -- embedding extras -----------------------------------------------------

    def singular_distance(self, x):
        return abs(float(self.body.depth(x.pt.v)))

    def chart_exp(self, x, coeffs):
        frame = hp.tangent_frame(x.pt)
        u = np.asarray(coeffs, dtype=float) @ frame
        return DoublePoint(x.sheet, hp.exp_map(hp.HTangent(x.pt, u)))

    def embedding_quadrature(self, center, radius, n_radial, n_angular, c):
        """Region quadrature over both sheets: the double is compact, so
        this covers the whole space and leaves no truncation tail."""
        key = (n_radial, n_angular)
        if key not in self._quad_cache:
            anchor = self.body.anchor
            frame = hp.tangent_frame(anchor)
            phi = (np.arange(n_angular) + 0.5) * (2.0 * math.pi / n_angular)
            U = np.cos(phi)[:, None] * frame[0] + np.sin(phi)[:, None] * frame[1]
            lo = np.zeros(n_angular)
            hi = np.full(n_angular, self.body.max_radius + 0.5)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                P = np.cosh(mid)[:, None] * anchor.v + np.sinh(mid)[:, None] * U
                inside = self.body.depth(P) >= 0.0
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            rho = 0.5 * (lo + hi)
            nodes, w = np.polynomial.legendre.leggauss(n_radial)
            r = 0.5 * rho[None, :] * (nodes[:, None] + 1.0)
            wr = 0.5 * rho[None, :] * w[:, None]
            P = np.cosh(r)[..., None] * anchor.v \
                + np.sinh(r)[..., None] * U[None, :, :]
            P = hp.project_to_hyperboloid(P.reshape(-1, 3))
            W = (wr * np.sinh(r) * (2.0 * math.pi / n_angular)).reshape(-1)
            pts = np.concatenate([P, P])
            sheets = np.concatenate([np.ones(len(W), dtype=int),
                                     np.full(len(W), 2, dtype=int)])
            self._quad_cache[key] = QuadratureSet(
                (sheets, pts), np.concatenate([W, W]), tail_fraction=0.0)
        return self._quad_cache[key]


def double_distance(space, a, b):
    """Distance in the metric double (module-level convenience)."""
    return space.distance(a, b)


def double_geodesic(space, a, b, m):
    """Uniform samples along a geodesic of the double; see geodesic_path."""
    return space.geodesic_path(a, b, m)


def boundary_angle(space, p, r, q):
    """Angle at boundary point p between geodesics heading to r and q."""
    return space.boundary_angle(p, r, q)


class DoubledStrip:
    """Double of the epsilon-neighborhood of a complete geodesic.

    Points are (sheet, u, v) in Fermi coordinates along the core line
    (|v| <= epsilon); the body is unbounded, so this oracle exists
    mainly to exercise volume growth on a genuinely singular space.
    """

    dimension = 2

    def __init__(self, epsilon):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)

    @staticmethod
    def _embed(u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.empty(np.broadcast(u, v).shape + (3,))
        out[..., 0] = np.cosh(v) * np.cosh(u)
        out[..., 1] = np.cosh(v) * np.sinh(u)
        out[..., 2] = np.sinh(v)
        return out

    def canonical(self, p):
        sheet, u, v = p
        if abs(v) > self.epsilon + 1e-9:
            raise ValueError("point outside the strip")
        if self.epsilon - abs(v) <= BOUNDARY_TOL:
            return (1, u, v)
        return (int(sheet), float(u), float(v))

    def _wall_len(self, u1, v1, u2, v2, wall, u):
        E = self._embed(u, wall)
        return hp.dist_arr(self._embed(u1, v1), E) \
            + hp.dist_arr(E, self._embed(u2, v2))

    def _cross_distance(self, a, b):
        _, u1, v1 = a
        _, u2, v2 = b
        best = np.inf
        lo0, hi0 = min(u1, u2), max(u1, u2)
        for wall in (self.epsilon, -self.epsilon):
            grid = np.linspace(lo0, hi0, 33)
            f = self._wall_len(u1, v1, u2, v2, wall, grid)
            i = int(np.argmin(f))
            h = max((hi0 - lo0) / 32.0, 1e-12)
            lo, hi = grid[i] - h, grid[i] + h
            for _ in range(48):
                x1 = hi - _GOLDEN * (hi - lo)
                x2 = lo + _GOLDEN * (hi - lo)
                f1 = float(self._wall_len(u1, v1, u2, v2, wall, np.asarray(x1)))
                f2 = float(self._wall_len(u1, v1, u2, v2, wall, np.asarray(x2)))
                if f1 < f2:
                    hi = x2
                else:
                    lo = x1
            u_best = 0.5 * (lo + hi)
            best = min(best, float(self._wall_len(
                u1, v1, u2, v2, wall, np.asarray(u_best))))
        return best

    def distance(self, a, b):
        a = self.canonical(a)
        b = self.canonical(b)
        if a[0] == b[0]:
            return float(hp.dist_arr(self._embed(a[1], a[2]),
                                     self._embed(b[1], b[2])))
        return self._cross_distance(a, b)

    def distance_batch(self, a, pts):
        a = self.canonical(a)
        sheets, UV = pts
        sheets = np.asarray(sheets)
        UV = np.asarray(UV, dtype=float)
        same = (sheets == a[0]) | (self.epsilon - np.abs(UV[:, 1]) <= BOUNDARY_TOL)
        out = np.empty(len(sheets))
        A = self._embed(a[1], a[2])
        if np.any(same):
            out[same] = hp.dist_arr(A, self._embed(UV[same, 0], UV[same, 1]))
        cross = np.nonzero(~same)[0]
        if cross.size:
            u2 = UV[cross, 0]
            v2 = UV[cross, 1]
            best = np.full(cross.size, np.inf)
            lo0 = np.minimum(a[1], u2)
            hi0 = np.maximum(a[1], u2)
            for wall in (self.epsilon, -self.epsilon):
                lo, hi = lo0.copy(), hi0.copy()
                B = self._embed(u2, v2)

                def f(u):
                    E = self._embed(u, wall)
                    return hp.dist_arr(A, E) + hp.dist_arr(E, B)

                x1 = hi - _GOLDEN * (hi - lo)
                x2 = lo + _GOLDEN * (hi - lo)
                f1, f2 = f(x1), f(x2)
                for _ in range(60):
                    left = f1 < f2
                    hi = np.where(left, x2, hi)
                    lo = np.where(left, lo, x1)
                    x_old = np.where(left, x1, x2)
                    f_old = np.where(left, f1, f2)
                    x_new = np.where(left, hi - _GOLDEN * (hi - lo),
                                     lo + _GOLDEN * (hi - lo))
                    f_new = f(x_new)
                    x1 = np.where(left, x_new, x_old)
                    f1 = np.where(left, f_new, f_old)
                    x2 = np.where(left, x_old, x_new)
                    f2 = np.where(left, f_old, f_new)
                best = np.minimum(best, np.minimum(f1, f2))
            out[cross] = best
        return out

    def geodesic_sample(self, a, b, t):
        a = self.canonical(a)
        b = self.canonical(b)
        t = float(t)
        if a[0] == b[0]:
            P = hp.geodesic_points_arr(self._embed(a[1], a[2]),
                                       self._embed(b[1], b[2]),
                                       np.asarray(t))
            v = math.asinh(float(P[2]))
            u = math.asinh(float(P[1]) / math.cosh(v))
            return (a[0], u, v)
        # crossing geodesic: locate the better wall crossing
        best = (np.inf, None, None)
        for wall in (self.epsilon, -self.epsilon):
            grid = np.linspace(min(a[1], b[1]), max(a[1], b[1]), 65)
            f = self._wall_len(a[1], a[2], b[1], b[2], wall, grid)
            i = int(np.argmin(f))
            if f[i] < best[0]:
                best = (float(f[i]), wall, float(grid[i]))
        _, wall, u0 = best
        lo, hi = u0 - 0.05, u0 + 0.05
        for _ in range(48):
            x1 = hi - _GOLDEN * (hi - lo)
            x2 = lo + _GOLDEN * (hi - lo)
            if self._wall_len(a[1], a[2], b[1], b[2], wall, np.asarray(x1)) \
                    < self._wall_len(a[1], a[2], b[1], b[2], wall, np.asarray(x2)):
                hi = x2
            else:
                lo = x1
        uc = 0.5 * (lo + hi)
        crossing = (1, uc, wall)
        d1 = self.distance(a, crossing)
        d2 = self.distance(crossing, b)
        L = d1 + d2
        if t * L <= d1:
            return self.geodesic_sample(a, (a[0], uc, wall),
                                        t * L / max(d1, 1e-300))
        return self.geodesic_sample((b[0], uc, wall), b,
                                    (t * L - d1) / max(d2, 1e-300))

    def measure_sample(self, center, R, rng):
        center = self.canonical(center)
        while True:
            cand, _ = self._propose(center, R, rng, 64)
            d = self.distance_batch(center, cand)
            hit = np.nonzero(d <= R)[0]
            if hit.size:
                i = hit[0]
                return (int(cand[0][i]), float(cand[1][i, 0]),
                        float(cand[1][i, 1]))

    def _propose(self, center, R, rng, size):
        u = center[1] + (2.0 * rng.random(size) - 1.0) * R
        se = math.sinh(self.epsilon)
        v = np.arcsinh((2.0 * rng.random(size) - 1.0) * se)
        sheets = rng.integers(1, 3, size)
        total = 2.0 * (2.0 * R) * (2.0 * se)
        return (sheets, np.column_stack([u, v])), total

    def ball_measure(self, center, R, n_samples, rng):
        center = self.canonical(center)
        cand, total = self._propose(center, R, rng, n_samples)
        p = float(np.mean(self.distance_batch(center, cand) <= R))
        return total * p, total * math.sqrt(max(p * (1 - p), 0.0) / n_samples)

    def singular_distance(self, x):
        return self.epsilon - abs(x[2])
