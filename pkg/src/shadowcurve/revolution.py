"""Surfaces of revolution in R^n, Clairaut invariants, and canal surfaces.

A surface of revolution is the level set |y|^2 = R(x)^2 over an interval in
the axis coordinate x, with y ranging over the remaining n-1 coordinates.
The same machinery also covers canal surfaces built from a segment and its
distance profile: those are surfaces of revolution about the segment line.

Two equivalent conserved quantities are computed along unit-speed geodesics:
the signed wedge of (position, velocity, axis direction) and the product
R * sin(angle to the meridian).  Their node-wise agreement is itself a
useful internal consistency check and is asserted in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import InvalidInputError, PreconditionError
from .geometry import Surface, as_vec, norm, unit, wedge3_components

AXIS_EXCLUSION = 1e-9  # meridian/Clairaut queries are undefined closer to the axis


# ---------------------------------------------------------------------------
# profile functions R(x)
# ---------------------------------------------------------------------------


class Profile:
    """Positive C^1 radius profile over an interval, with two derivatives."""

    def __init__(self, name, params, r, dr, d2r, interval):
        self.name = name
        self.params = dict(params)
        self._r, self._dr, self._d2r = r, dr, d2r
        self.interval = (float(interval[0]), float(interval[1]))
        if not self.interval[0] < self.interval[1]:
            raise InvalidInputError("profile interval must satisfy lo < hi")

    def r(self, x):
        return float(self._r(float(x)))

    def dr(self, x):
        return float(self._dr(float(x)))

    def d2r(self, x):
        return float(self._d2r(float(x)))

    def describe(self):
        return {"profile": self.name, **self.params, "interval": list(self.interval)}


def constant_profile(radius, interval=(-1.0, 1.0)) -> Profile:
    radius = float(radius)
    if radius <= 0:
        raise InvalidInputError("constant profile needs radius > 0")
    return Profile("constant", {"radius": radius},
                   lambda x: radius, lambda x: 0.0, lambda x: 0.0, interval)


def affine_profile(r0, slope, interval=(-1.0, 1.0)) -> Profile:
    r0, slope = float(r0), float(slope)
    lo, hi = interval
    if min(r0 + slope * lo, r0 + slope * hi) <= 0:
        raise InvalidInputError("affine profile must stay positive on the interval")
    return Profile("affine", {"r0": r0, "slope": slope},
                   lambda x: r0 + slope * x, lambda x: slope, lambda x: 0.0, interval)


def sphere_cap_profile(radius=1.0, interval=(-0.9, 0.9)) -> Profile:
    """R(x) = sqrt(radius^2 - x^2); the interval must avoid the poles."""
    radius = float(radius)
    lo, hi = float(interval[0]), float(interval[1])
    if not (-radius < lo < hi < radius):
        raise InvalidInputError("sphere-cap interval must sit strictly inside (-radius, radius)")
    cap = radius - 1e-12

    def r(x):
        x = min(max(x, -cap), cap)
        return np.sqrt(radius * radius - x * x)

    def dr(x):
        x = min(max(x, -cap), cap)
        return -x / np.sqrt(radius * radius - x * x)

    def d2r(x):
        x = min(max(x, -cap), cap)
        s = radius * radius - x * x
        return -radius * radius / s**1.5

    return Profile("sphere_cap", {"radius": radius}, r, dr, d2r, interval)


def parabolic_profile(r0=1.0, curvature=1.0, interval=(-1.0, 1.0)) -> Profile:
    """R(x) = r0 + curvature * x^2."""
    r0, curvature = float(r0), float(curvature)
    lo, hi = interval
    xs = np.linspace(lo, hi, 65)
    if np.min(r0 + curvature * xs * xs) <= 0:
        raise InvalidInputError("parabolic profile must stay positive on the interval")
    return Profile("parabolic", {"r0": r0, "curvature": curvature},
                   lambda x: r0 + curvature * x * x,
                   lambda x: 2.0 * curvature * x,
                   lambda x: 2.0 * curvature, interval)


def table_profile(xs, rs) -> Profile:
    """Monotone-cubic interpolation through sampled (x, R) pairs."""
    xs = np.asarray(xs, dtype=float)
    rs = np.asarray(rs, dtype=float)
    if xs.ndim != 1 or xs.shape != rs.shape or xs.shape[0] < 4:
        raise InvalidInputError("profile table needs >= 4 matching samples")
    if np.any(np.diff(xs) <= 0):
        raise InvalidInputError("profile table abscissae must be strictly increasing")
    if np.any(rs <= 0):
        raise InvalidInputError("profile table radii must be positive")
    p = PchipInterpolator(xs, rs)
    d1, d2 = p.derivative(1), p.derivative(2)
    return Profile("table", {"n_samples": int(xs.shape[0])},
                   lambda x: float(p(x)), lambda x: float(d1(x)), lambda x: float(d2(x)),
                   (xs[0], xs[-1]))


_PROFILE_BUILDERS = {
    "constant": constant_profile,
    "affine": affine_profile,
    "sphere_cap": sphere_cap_profile,
    "parabolic": parabolic_profile,
}


def make_profile(spec: dict) -> Profile:
    """Build a profile from a scenario dictionary (named builtin or table)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "table":
        return table_profile(spec["x"], spec["r"])
    builder = _PROFILE_BUILDERS.get(kind)
    if builder is None:
        raise InvalidInputError(f"unknown profile kind {kind!r}")
    if "interval" in spec:
        spec["interval"] = tuple(spec["interval"])
    return builder(**spec)


# ---------------------------------------------------------------------------
# the surfaces
# ---------------------------------------------------------------------------


class RevolutionSurface(Surface):
    """Hypersurface |y|^2 = R(x)^2 in R^n, axis along the first coordinate."""

    def __init__(self, profile: Profile, dim: int = 3):
        self.profile = profile
        lo, hi = profile.interval
        rmax = max(profile.r(x) for x in np.linspace(lo, hi, 129))
        pad = 0.25 * rmax
        bbox = np.vstack([[lo, hi]] + [[-rmax - pad, rmax + pad]] * (dim - 1))
        super().__init__(dim, bbox)
        self.axis_point = np.zeros(dim)
        self.axis_dir = np.zeros(dim)
        self.axis_dir[0] = 1.0

    def f(self, p):
        p = np.asarray(p, dtype=float)
        r = self.profile.r(p[0])
        return float(p[1:] @ p[1:] - r * r)

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        x = p[0]
        g = 2.0 * p.copy()
        g[0] = -2.0 * self.profile.r(x) * self.profile.dr(x)
        return g

    def hess(self, p):
        p = np.asarray(p, dtype=float)
        x = p[0]
        h = 2.0 * np.eye(self.dim)
        dr, d2r = self.profile.dr(x), self.profile.d2r(x)
        h[0, 0] = -2.0 * (dr * dr + self.profile.r(x) * d2r)
        return h

    def in_domain(self, p):
        p = np.asarray(p, dtype=float)
        lo, hi = self.profile.interval
        return bool(lo <= p[0] <= hi) and super().in_domain(p)

    def point_at(self, x, radial_dir) -> np.ndarray:
        """On-surface point at axis coordinate x in a given radial direction."""
        w = unit(as_vec(radial_dir, self.dim - 1))
        p = np.empty(self.dim)
        p[0] = float(x)
        p[1:] = self.profile.r(x) * w
        return p

    def describe(self):
        return {"kind": "revolution", "dim": self.dim, **self.profile.describe()}


def axis_split(surface, p):
    """Decompose p into (axial coordinate, distance to axis, radial offset)."""
    rel = np.asarray(p, dtype=float) - surface.axis_point
    xi = float(rel @ surface.axis_dir)
    w = rel - xi * surface.axis_dir
    return xi, norm(w), w


@dataclass
class MeridianFrame:
    """Unit meridian tangent at a point of a revolution-symmetric surface."""

    point: np.ndarray
    mer: np.ndarray


def meridian_at(surface, p) -> MeridianFrame:
    """Meridian direction at p, oriented toward the positive axis direction.

    Computed by projecting the axis direction onto the tangent space, which
    lands in the meridian plane (the plane through the axis and p) and is
    independent of how the profile is stored.
    """
    p = as_vec(p, surface.dim)
    _, rho, _ = axis_split(surface, p)
    if rho <= AXIS_EXCLUSION:
        raise InvalidInputError("meridian undefined on the axis")
    nu = surface.normal(p)
    t = surface.axis_dir - (surface.axis_dir @ nu) * nu
    tn = norm(t)
    if tn <= 1e-12:
        raise InvalidInputError("meridian direction degenerate (vertical tangent)")
    mer = t / tn
    if mer @ surface.axis_dir < 0:
        mer = -mer
    return MeridianFrame(point=p, mer=mer)


# ---------------------------------------------------------------------------
# Clairaut invariants along curves
# ---------------------------------------------------------------------------


@dataclass
class ClairautTable:
    """Per-node invariants along a curve on a revolution-symmetric surface."""

    ell: np.ndarray
    radius: np.ndarray        # distance to the axis
    sin_theta: np.ndarray     # angle between velocity and meridian
    product: np.ndarray       # radius * sin_theta
    wedge: np.ndarray         # signed wedge of (position, velocity, axis)
    max_dev_product: float
    max_dev_wedge: float
    max_form_gap: float       # node-wise |abs(wedge) - product|
    length: float

    @property
    def invariant(self) -> float:
        return float(np.mean(self.wedge))

    @property
    def wedge_range(self) -> float:
        return float(np.max(self.wedge) - np.min(self.wedge))

    @property
    def wedge_total_variation(self) -> float:
        """Accumulated change of the invariant along the curve; the
        quantitative witness when a curve fails to conserve it."""
        return float(np.sum(np.abs(np.diff(self.wedge))))

    def drift_per_unit_length(self) -> float:
        scale = max(self.length, 1e-30)
        return float(self.wedge_range / scale)

    def rows(self):
        for i in range(self.ell.shape[0]):
            yield (self.ell[i], self.radius[i], self.sin_theta[i],
                   self.product[i], self.wedge[i])


def clairaut_invariants(surface, curve) -> ClairautTable:
    """Evaluate both Clairaut forms at every node of the curve carrying
    a first derivative.  Nodes must be on the surface and off the axis.
    """
    if curve.d1 is None:
        raise InvalidInputError("curve needs first derivatives (call derivatives first)")
    pts = curve.points
    idx = [i for i in range(pts.shape[0]) if np.all(np.isfinite(curve.d1[i]))]
    if not idx:
        raise InvalidInputError("curve has no nodes with derivatives")

    ax = surface.axis_dir
    ell, radius, sin_t, product, wedge = [], [], [], [], []
    ref = None
    for i in idx:
        p = pts[i]
        if not surface.on_surface(p, tol_scale=100.0):
            raise InvalidInputError(f"node {i} is off the surface")
        rel = p - surface.axis_point
        xi = float(rel @ ax)
        w = rel - xi * ax
        rho = norm(w)
        if rho <= AXIS_EXCLUSION:
            raise InvalidInputError(f"node {i} lies on the axis")
        v = curve.d1[i]
        mer = meridian_at(surface, p).mer
        cos_t = float(np.clip(v @ mer / max(norm(v), 1e-300), -1.0, 1.0))
        st = float(np.sqrt(max(1.0 - cos_t * cos_t, 0.0)))

        comps = wedge3_components(rel, v, ax)
        mag = norm(comps)
        if ref is None:
            ref = comps if mag > 1e-14 else None
            sign = 1.0
        else:
            sign = 1.0 if comps @ ref >= 0.0 else -1.0

        ell.append(curve.arclen[i])
        radius.append(rho)
        sin_t.append(st)
        product.append(rho * st)
        wedge.append(sign * mag)

    ell = np.array(ell)
    radius = np.array(radius)
    sin_t = np.array(sin_t)
    product = np.array(product)
    wedge = np.array(wedge)
    return ClairautTable(
        ell=ell, radius=radius, sin_theta=sin_t, product=product, wedge=wedge,
        max_dev_product=float(np.max(np.abs(product - np.mean(product)))),
        max_dev_wedge=float(np.max(np.abs(wedge - np.mean(wedge)))),
        max_form_gap=float(np.max(np.abs(np.abs(wedge) - product))),
        length=float(curve.arclen[-1] - curve.arclen[0]),
    )


# ---------------------------------------------------------------------------
# canal surfaces from a segment and its distance profile
# ---------------------------------------------------------------------------


@dataclass
class CanalProfileTable:
    """Characteristic-circle data: one row per interior segment sample.

    ``xi`` is the axial coordinate of the circle plane, ``radius`` its
    radius; ``r``/``r_prime`` are the distance to the surface and its
    derivative along the segment, kept separate from the canal profile
    because the two only coincide for constant distance.
    """

    ell: np.ndarray
    xi: np.ndarray
    radius: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray


class CanalSurface(Surface):
    """Envelope of the balls centered on a segment with radius r(x).

    A surface of revolution about the segment line: the ball family's
    characteristic circle at arc length l sits at axial offset -r*r' from
    the center and has radius r*sqrt(1 - r'^2).
    """

    def __init__(self, segment, table: CanalProfileTable):
        self.segment = segment
        self.table = table
        self.axis_point = segment.a.copy()
        self.axis_dir = segment.direction()
        self._spline = CubicSpline(table.xi, table.radius)
        self._dspline = self._spline.derivative(1)
        self._d2spline = self._spline.derivative(2)
        self.interval = (float(table.xi[0]), float(table.xi[-1]))

        rmax = float(np.max(table.radius))
        n = segment.a.shape[0]
        lo = np.minimum(segment.a, segment.b) - 2.0 * rmax
        hi = np.maximum(segment.a, segment.b) + 2.0 * rmax
        super().__init__(n, np.column_stack([lo, hi]))

    # profile access in the segment-aligned frame
    def profile_radius(self, xi):
        return float(self._spline(xi))

    def profile_slope(self, xi):
        return float(self._dspline(xi))

    def f(self, p):
        rel = np.asarray(p, dtype=float) - self.axis_point
        xi = float(rel @ self.axis_dir)
        rho2 = float(rel @ rel) - xi * xi
        rk = self._spline(xi)
        return float(rho2 - rk * rk)

    def grad(self, p):
        rel = np.asarray(p, dtype=float) - self.axis_point
        xi = float(rel @ self.axis_dir)
        rk, drk = self._spline(xi), self._dspline(xi)
        return 2.0 * rel - 2.0 * xi * self.axis_dir - 2.0 * rk * drk * self.axis_dir

    def hess(self, p):
        rel = np.asarray(p, dtype=float) - self.axis_point
        xi = float(rel @ self.axis_dir)
        rk, drk, d2rk = self._spline(xi), self._dspline(xi), self._d2spline(xi)
        outer = np.outer(self.axis_dir, self.axis_dir)
        return 2.0 * np.eye(self.dim) - 2.0 * outer - 2.0 * (drk * drk + rk * d2rk) * outer

    def in_domain(self, p):
        rel = np.asarray(p, dtype=float) - self.axis_point
        xi = float(rel @ self.axis_dir)
        return self.interval[0] <= xi <= self.interval[1]

    def circle_points(self, row: int, count: int = 8) -> np.ndarray:
        """Points on the characteristic circle of table row ``row``."""
        t = self.table
        basis = _orthocomplement(self.axis_dir)
        center = self.axis_point + t.xi[row] * self.axis_dir
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        pts = []
        for a in angles:
            w = np.cos(a) * basis[0] + np.sin(a) * basis[1]
            pts.append(center + t.radius[row] * w)
        return np.array(pts)

    def describe(self):
        return {"kind": "canal", "dim": self.dim,
                "interval": list(self.interval), "n_circles": int(self.table.xi.shape[0])}


def _orthocomplement(u):
    """Two (or more) orthonormal vectors completing u, deterministic."""
    n = u.shape[0]
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    return [q[:, k] for k in range(1, n)]


def canal_from_segment(surface, segment, n_samples: int = 256,
                       closest_point_fn=None) -> CanalSurface:
    """Build the canal surface of the segment's distance-ball family.

    Samples the distance r and its exact directional derivative
    r' = <u, x - m)/r at interior segment points (the derivative of a
    distance function is the unit offset to the footpoint), converts each
    sample to a characteristic circle, and fits a C^2 profile through the
    circles.  Requires r' bounded away from +-1 and a monotone axial
    coordinate; both fail exactly when the envelope would be singular.
    """
    from .projection import closest_point as _closest_point

    solve = closest_point_fn or (lambda x, seed_pt: _closest_point(
        surface, x, seeds=1, warm_start=seed_pt))
    if n_samples < 8:
        raise InvalidInputError("canal sampling needs n_samples >= 8")

    length = segment.length()
    u_hat = segment.direction()
    svals = np.linspace(0.0, 1.0, n_samples + 1)[1:-1]
    ell = svals * length

    prev = None
    r = np.empty(ell.shape[0])
    rp = np.empty(ell.shape[0])
    for k, s in enumerate(svals):
        x = segment.point_at(s)
        res = solve(x, prev)
        prev = res.footpoint
        r[k] = res.distance
        if res.distance <= 0.0:
            raise PreconditionError("segment touches the surface; canal is degenerate")
        rp[k] = float(u_hat @ (x - res.footpoint)) / res.distance

    scale = 1.0 + segment.length()
    if np.max(r) <= AXIS_EXCLUSION * scale:
        raise PreconditionError("distance profile is ~0; canal is degenerate")
    if np.max(np.abs(rp)) >= 1.0 - 1e-6:
        raise PreconditionError(
            f"distance profile too steep (max |r'| = {np.max(np.abs(rp)):.6f}); "
            "the envelope would be singular"
        )

    xi = ell - r * rp
    radius = r * np.sqrt(1.0 - rp * rp)
    if np.any(np.diff(xi) <= 0):
        raise PreconditionError("characteristic circles are not monotone along the axis")

    table = CanalProfileTable(ell=ell, xi=xi, radius=radius, r=r, r_prime=rp)
    return CanalSurface(segment, table)


def envelope_residuals(canal: CanalSurface) -> dict:
    """Max violation of the defining ball/tangency identities at the circles.

    For every characteristic circle point p with ball center c:
    |p - c| must equal r and <p - c, u> must equal -r*r'.
    """
    t = canal.table
    u_hat = canal.axis_dir
    worst_sphere = 0.0
    worst_tangency = 0.0
    for row in range(0, t.ell.shape[0], max(1, t.ell.shape[0] // 64)):
        center = canal.axis_point + t.ell[row] * u_hat
        for p in canal.circle_points(row, count=6):
            d = p - center
            worst_sphere = max(worst_sphere, abs(norm(d) - t.r[row]))
            worst_tangency = max(worst_tangency, abs(float(d @ u_hat) + t.r[row] * t.r_prime[row]))
    return {"sphere": worst_sphere, "tangency": worst_tangency}


@dataclass
class TangencyReport:
    max_angle: float
    n_checked: int
    n_skipped: int


def tangency_check(surface, canal: CanalSurface, curve, pass_tol=1e-5) -> TangencyReport:
    """Max angle between the two surfaces' normals along the curve.

    Nodes whose axial coordinate falls outside the canal's fitted interval
    (the singular tips near the endpoints) are skipped, not failed.
    """
    max_angle = 0.0
    checked = skipped = 0
    for p in curve.points:
        xi, _, _ = axis_split(canal, p)
        if not (canal.interval[0] <= xi <= canal.interval[1]):
            skipped += 1
            continue
        if not surface.on_surface(p, tol_scale=100.0):
            raise InvalidInputError("curve node off the base surface")
        fk = canal.f(p)
        if abs(fk) > 1e-5 * (1.0 + norm(p)):
            raise InvalidInputError(f"curve node off the canal surface (F = {fk:.3e})")
        nu_s = surface.normal(p)
        nu_k = canal.normal(p)
        c = min(abs(float(nu_s @ nu_k)), 1.0)
        max_angle = max(max_angle, float(np.arccos(c)))
        checked += 1
    if checked == 0:
        raise InvalidInputError("no curve nodes inside the canal interval")
    return TangencyReport(max_angle=max_angle, n_checked=checked, n_skipped=skipped)


@dataclass
class ReachRow:
    invariant: float
    min_radius: float
    bound: float
    ok: bool


@dataclass
class ReachReport:
    rows: list[ReachRow] = field(default_factory=list)

    @property
    def violations(self):
        return [r for r in self.rows if not r.ok]


def meridian_reach_audit(surface, curves, invariant_eps=1e-9,
                         slack=1e-6) -> ReachReport:
    """Check the axis barrier: a geodesic with invariant c keeps R >= |c|.

    Curves with |invariant| <= invariant_eps are meridian-like and may
    reach the axis; they always pass.
    """
    report = ReachReport()
    for curve in curves:
        table = clairaut_invariants(surface, curve)
        inv = table.invariant
        min_r = float(np.min([axis_split(surface, p)[1] for p in curve.points]))
        bound = abs(inv) - slack
        ok = abs(inv) <= invariant_eps or min_r >= bound
        report.rows.append(ReachRow(invariant=inv, min_radius=min_r, bound=bound, ok=ok))
    return report
