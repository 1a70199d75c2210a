"""Triangle-comparison checkers for curvature bounded below by -1.

Everything here consumes a geodesic oracle and the H^2 triangle kernels:
distance comparison along a side, vertex angles as limits of comparison
angles, angle and adjacent-angle conditions, and the classical gluing
lemma of Alexandrov for planar quadrilaterals.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import hyperboloid as hp

DEGENERATE_SLACK = 1e-10


def _sides(o, p, q, r):
    return o.distance(q, r), o.distance(p, r), o.distance(p, q)


def _pair_distances(o, xs, ys):
    return np.array([o.distance(x, y) for x, y in zip(xs, ys)])


def _unstack(o, stacked):
    """Turn an oracle's stacked geodesic samples back into point objects."""
    if isinstance(stacked, tuple):  # doubled space: (sheets, coords)
        sheets, P = stacked
        from .double import DoublePoint
        return [DoublePoint(int(s), hp.HPoint(v)) for s, v in zip(sheets, P)]
    arr = np.asarray(stacked)
    if arr.ndim == 2 and arr.shape[1] == 2:  # cone chart rows
        return [(float(a), float(b)) for a, b in arr]
    return [hp.HPoint(v) for v in arr]


def _samples_on(o, a, b, t_arr):
    if hasattr(o, "geodesic_points"):
        return _unstack(o, o.geodesic_points(a, b, t_arr))
    return [o.geodesic_sample(a, b, float(t)) for t in t_arr]


@dataclass
class ComparisonReport:
    """Distance-comparison record for one triangle."""

    points: tuple
    sides: tuple
    slacks: np.ndarray
    min_slack: float
    degenerate: bool
    tolerance: float
    passed: bool


def check_point_comparison(o, p, q, r, m=32, tol=1e-5):
    """Compare |ps| against the comparison triangle for s sampled on qr.

    For m interior points s on the side qr, the slack |ps| - |p~ s~| is
    nonnegative exactly when the triangle is at least as fat as its H^2
    comparison triangle.  Near-degenerate triangles are reported, not
    judged: the comparison angle is ill conditioned there.
    """
    d_qr, d_pr, d_pq = _sides(o, p, q, r)
    sides = (d_qr, d_pr, d_pq)
    diam = max(sides)
    tolerance = tol * (1.0 + diam)
    if min(sides) <= 0 or max(sides) >= sum(sides) - max(sides) - DEGENERATE_SLACK:
        return ComparisonReport(
            points=(p, q, r), sides=sides, slacks=np.zeros(m),
            min_slack=0.0, degenerate=True, tolerance=tolerance, passed=True)
    t = np.arange(1, m + 1) / (m + 1.0)
    if hasattr(o, "distance_batch") and hasattr(o, "geodesic_points"):
        ps = o.distance_batch(p, o.geodesic_points(q, r, t))
    else:
        ps = np.array([o.distance(p, s) for s in _samples_on(o, q, r, t)])
    beta_q = hp.comparison_angle(d_pr, d_pq, d_qr)
    ps_comp = hp.opposite_side(d_pq, t * d_qr, beta_q)
    slacks = ps - ps_comp
    min_slack = float(np.min(slacks))
    return ComparisonReport(
        points=(p, q, r), sides=sides, slacks=slacks, min_slack=min_slack,
        degenerate=False, tolerance=tolerance, passed=min_slack >= -tolerance)


@dataclass
class AngleLimit:
    """Vertex angle obtained as a limit of shrinking comparison angles."""

    value: float
    raw: np.ndarray
    scales: np.ndarray
    converged: bool
    monotone: bool


def _richardson(values, max_depth=4):
    """Neville extrapolation for a sequence sampled at h, h/2, h/4, ..."""
    a = np.asarray(values, dtype=float)
    m = min(len(a), max_depth + 1)
    T = a[-m:].copy()
    last_corner = T[-1]
    for j in range(1, m):
        T = T[1:] + (T[1:] - T[:-1]) / (2.0 ** j - 1.0)
        prev, last_corner = last_corner, T[-1]
    correction = abs(last_corner - prev) if m > 1 else 0.0
    return float(last_corner), float(correction)


def angle_via_limit(o, p, r, q, k_max=12):
    """Angle at p between geodesics pr and pq, from comparison angles.

    Comparison angles of the triangle cut at scales 2^-k are Richardson
    extrapolated.  The raw sequence is expected to be monotone
    nonincreasing on curvature >= -1 spaces; violations are flagged but
    not fatal, as is failure to settle within 1e-3.
    """
    d_pr = o.distance(p, r)
    d_pq = o.distance(p, q)
    if d_pr < 1e-14 or d_pq < 1e-14:
        raise ValueError("degenerate angle")
    ks = np.arange(3, k_max + 1)
    t = 2.0 ** (-ks.astype(float))
    r_k = _samples_on(o, p, r, t)
    q_k = _samples_on(o, p, q, t)
    opp = _pair_distances(o, r_k, q_k)
    b = t * d_pr
    c = t * d_pq
    opp = np.minimum(opp, b + c)  # clamp roundoff at collinear configurations
    raw = hp.comparison_angle(opp, b, c)
    value, correction = _richardson(raw)
    # nonincreasing in the scale t: the angle grows as the points shrink in
    monotone = bool(np.all(np.diff(raw) >= -1e-6))
    converged = correction <= 1e-3
    return AngleLimit(value=float(np.clip(value, 0.0, math.pi)), raw=raw,
                      scales=t, converged=converged, monotone=monotone)


@dataclass
class AngleConditionReport:
    """Per-vertex angle deficits (measured minus comparison)."""

    deficits: np.ndarray
    angles: np.ndarray
    comparison_angles: np.ndarray
    converged: bool
    tolerance: float
    passed: bool


def check_angle_condition(o, p, q, r, k_max=12, tol=1e-5, use_exact="auto"):
    """Check no vertex angle is smaller than its comparison angle.

    Vertex angles come from the shrinking-comparison-angle limit, or
    from the oracle's exact angles where it has them (in the model space
    the two agree).
    """
    d_qr, d_pr, d_pq = _sides(o, p, q, r)
    comp = np.array([
        hp.comparison_angle(d_qr, d_pr, d_pq),  # at p
        hp.comparison_angle(d_pr, d_pq, d_qr),  # at q
        hp.comparison_angle(d_pq, d_qr, d_pr),  # at r
    ])
    exact = use_exact is True or (use_exact == "auto" and hasattr(o, "angle_at"))
    converged = True
    if exact:
        angles = np.array([
            o.angle_at(p, q, r), o.angle_at(q, p, r), o.angle_at(r, p, q)])
    else:
        lims = [angle_via_limit(o, p, q, r, k_max),
                angle_via_limit(o, q, p, r, k_max),
                angle_via_limit(o, r, p, q, k_max)]
        angles = np.array([l.value for l in lims])
        converged = all(l.converged for l in lims)
    deficits = angles - comp
    diam = max(d_qr, d_pr, d_pq)
    tolerance = tol * (1.0 + diam)
    return AngleConditionReport(
        deficits=deficits, angles=angles, comparison_angles=comp,
        converged=converged, tolerance=tolerance,
        passed=bool(np.min(deficits) >= -tolerance))


def check_adjacent_angles(o, p, q, s, r, k_max=12):
    """Defect |angle(p,s,r) + angle(r,s,q) - pi| for s interior to pq.

    Zero defect means geodesics do not branch at s.  Raises unless s
    lies on the geodesic pq within 1e-8.
    """
    gap = o.distance(p, s) + o.distance(s, q) - o.distance(p, q)
    if abs(gap) > 1e-8:
        raise ValueError("s does not lie on the geodesic pq")
    a1 = angle_via_limit(o, s, p, r, k_max).value
    a2 = angle_via_limit(o, s, r, q, k_max).value
    return abs(a1 + a2 - math.pi)


@dataclass
class QuadConfig:
    """Geodesic quadrilateral a, b, c, d in H^2 with diagonal ac.

    The two triangles abc and acd are glued along ac; gamma and
    gamma_prime are the angles at c on either side of the diagonal.
    """

    a: hp.HPoint
    b: hp.HPoint
    c: hp.HPoint
    d: hp.HPoint

    @property
    def gamma(self):
        return hp.angle(self.c, self.b, self.a)

    @property
    def gamma_prime(self):
        return hp.angle(self.c, self.a, self.d)

    def precondition_ok(self, slack=1e-12):
        return self.gamma + self.gamma_prime <= math.pi + slack


@dataclass
class LemmaReport:
    """Slacks for the four conclusions of Alexandrov's gluing lemma."""

    slack_alpha: float
    slack_beta: float
    slack_beta_prime: float
    slack_ac: float
    all_nonnegative: bool
    rigidity_triggered: bool
    rigidity_ok: bool

    def slacks(self):
        return np.array([self.slack_alpha, self.slack_beta,
                         self.slack_beta_prime, self.slack_ac])


def alexandrov_lemma_batch(A, B, C, D):
    """Vectorized lemma slacks for stacked quadrilateral vertices.

    Straightening the path b-c-d into one comparison side must open the
    angle at a, close the angles at b and d, and shorten the diagonal.
    Returns (s_alpha, s_beta, s_beta', s_ac), each nonnegative when the
    lemma applies.
    """
    gamma = hp.angle_arr(C, B, A)
    gamma_p = hp.angle_arr(C, A, D)
    if np.any(gamma + gamma_p > math.pi + 1e-12):
        raise ValueError("precondition violated")
    alpha = hp.angle_arr(A, B, C)
    alpha_p = hp.angle_arr(A, C, D)
    beta = hp.angle_arr(B, A, C)
    beta_p = hp.angle_arr(D, A, C)
    l_ab = hp.dist_arr(A, B)
    l_bc = hp.dist_arr(B, C)
    l_cd = hp.dist_arr(C, D)
    l_ad = hp.dist_arr(A, D)
    l_ac = hp.dist_arr(A, C)
    alpha_t = hp.comparison_angle(l_bc + l_cd, l_ab, l_ad)
    beta_t = hp.comparison_angle(l_ad, l_ab, l_bc + l_cd)
    beta_pt = hp.comparison_angle(l_ab, l_ad, l_bc + l_cd)
    ac_t = hp.opposite_side(l_ab, l_bc, beta_t)
    return (alpha_t - (alpha + alpha_p), beta - beta_t,
            beta_p - beta_pt, l_ac - ac_t)


def alexandrov_lemma_check(quad, trigger=1e-9, rigidity_tol=1e-7):
    """Check the four lemma conclusions on one quadrilateral.

    If any slack is an equality (below `trigger`) the rigidity clause is
    verified: all the others must also vanish within `rigidity_tol`.
    """
    if not quad.precondition_ok():
        raise ValueError("precondition violated")
    s = alexandrov_lemma_batch(quad.a.v[None, :], quad.b.v[None, :],
                               quad.c.v[None, :], quad.d.v[None, :])
    s = np.array([float(x[0]) for x in s])
    triggered = bool(np.min(s) < trigger)
    rigidity_ok = bool(np.max(np.abs(s)) <= rigidity_tol) if triggered else True
    return LemmaReport(
        slack_alpha=s[0], slack_beta=s[1], slack_beta_prime=s[2],
        slack_ac=s[3], all_nonnegative=bool(np.min(s) >= -1e-9),
        rigidity_triggered=triggered, rigidity_ok=rigidity_ok)


def sample_triangle(o, base, radius, rng):
    """Three independent uniform points from the ball around `base`."""
    return tuple(o.measure_sample(base, radius, rng) for _ in range(3))


@dataclass
class EquivalenceReport:
    """Verdict agreement between the two local curvature definitions."""

    point_verdicts: list = field(default_factory=list)
    angle_verdicts: list = field(default_factory=list)

    @property
    def agreements(self):
        return [a == b for a, b in zip(self.point_verdicts, self.angle_verdicts)]

    @property
    def all_agree(self):
        return all(self.agreements)

    @property
    def n(self):
        return len(self.point_verdicts)


def equivalence_probe(o, triangles, m=16, k_max=12, tol=1e-4):
    """Run the distance comparison and the angle condition side by side.

    The two notions of curvature bounded below agree on locally compact
    spaces, so pass/fail verdicts must match triangle by triangle at
    matched tolerances.
    """
    report = EquivalenceReport()
    for (p, q, r) in triangles:
        pc = check_point_comparison(o, p, q, r, m=m, tol=tol)
        if pc.degenerate:
            report.point_verdicts.append(True)
            report.angle_verdicts.append(True)
            continue
        ac = check_angle_condition(o, p, q, r, k_max=k_max, tol=tol,
                                   use_exact="auto")
        report.point_verdicts.append(bool(pc.passed))
        report.angle_verdicts.append(bool(ac.passed))
    return report
