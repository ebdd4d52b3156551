"""Closest-point projection onto implicit surfaces and distance-field audits.

The footpoint problem min |x - p| s.t. F(p) = 0 is solved by Newton
iteration on the stationarity system of its Lagrangian,

    p - x + lam * grad F(p) = 0,      F(p) = 0,

with Armijo damping on the residual norm.  Multi-start over deterministic
seeds yields both the global footpoint and a uniqueness margin: the gap
between the best and second-best distinct local minima of the distance.
The margin is the numerical stand-in for staying clear of the medial axis
(points with two equally close footpoints have margin zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError, PreconditionError
from .geometry import ON_SURFACE_TOL, Surface, as_vec, norm

# Footpoints closer than this are considered the same local minimum.
CLUSTER_TOL = 1e-6
# Strict-inequality threshold for the contraction pass.
CONTRACTION_PASS = 1.0 - 1e-6
# A clearance below this (scaled) value is treated as a medial-axis hit.
CLEARANCE_TOL = 1e-9


class Segment:
    """Ordered endpoint pair with affine parametrization x(s) = A + s(B - A)."""

    def __init__(self, a, b):
        self.a = as_vec(a)
        self.b = as_vec(b, self.a.shape[0])
        if norm(self.b - self.a) <= 1e-12:
            raise InvalidInputError("degenerate segment: endpoints coincide")

    def length(self) -> float:
        return norm(self.b - self.a)

    def direction(self) -> np.ndarray:
        d = self.b - self.a
        return d / norm(d)

    def point_at(self, s) -> np.ndarray:
        return self.a + float(s) * (self.b - self.a)

    def validate_on(self, surface: Surface) -> None:
        for name, p in (("A", self.a), ("B", self.b)):
            if not surface.on_surface(p):
                raise InvalidInputError(
                    f"endpoint {name} is off the surface (|F| = {abs(surface.f(p)):.3e})"
                )


@dataclass
class ProjectionResult:
    query: np.ndarray
    footpoint: np.ndarray
    distance: float
    uniqueness_margin: float
    converged: bool


def _newton_footpoint(surface, x, p0, max_iter=60, tol=1e-12):
    """Damped Newton on the stationarity system from one start point."""
    n = x.shape[0]
    p = np.asarray(p0, dtype=float).copy()
    g = surface.grad(p)
    g2 = float(g @ g)
    if g2 < 1e-24:
        return None
    lam = float((x - p) @ g) / g2
    scale = 1.0 + norm(x)

    def residual(p, lam):
        g = surface.grad(p)
        return np.append(p - x + lam * g, surface.f(p)), g

    res, g = residual(p, lam)
    merit = float(res @ res)
    for _ in range(max_iter):
        if np.sqrt(merit) <= tol * scale:
            break
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = np.eye(n) + lam * surface.hess(p)
        jac[:n, n] = g
        jac[n, :n] = g
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            return None
        alpha = 1.0
        for _ in range(32):
            p_new = p + alpha * step[:n]
            lam_new = lam + alpha * step[n]
            res_new, g_new = residual(p_new, lam_new)
            merit_new = float(res_new @ res_new)
            if merit_new <= (1.0 - 1e-4 * alpha) * merit or merit_new <= (tol * scale) ** 2:
                p, lam, res, g, merit = p_new, lam_new, res_new, g_new, merit_new
                break
            alpha *= 0.5
        else:
            return None
        if not np.all(np.isfinite(p)):
            return None
    if np.sqrt(merit) > tol * scale * 10.0:
        return None
    p = surface.project_normal_steps(p, tol_scale=1e-3)
    return p


def footpoint_velocity(surface: Surface, x, footpoint, x_dot) -> np.ndarray:
    """Derivative of the footpoint map along a query motion x_dot.

    Obtained by implicit differentiation of the stationarity system at the
    converged footpoint; machine accurate, no finite differences.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(footpoint, dtype=float)
    n = x.shape[0]
    g = surface.grad(p)
    g2 = float(g @ g)
    if g2 < 1e-24:
        raise ConvergenceError("degenerate gradient at footpoint")
    lam = float((x - p) @ g) / g2
    jac = np.zeros((n + 1, n + 1))
    jac[:n, :n] = np.eye(n) + lam * surface.hess(p)
    jac[:n, n] = g
    jac[n, :n] = g
    rhs = np.append(np.asarray(x_dot, dtype=float), 0.0)
    sol = np.linalg.solve(jac, rhs)
    return sol[:n]


def _seed_points(surface, x, count, rng_seed):
    """Deterministic seed sequence; prefixes are nested so that increasing
    the seed count can only improve the best distance found."""
    seeds = []
    try:
        seeds.append(surface.project_normal_steps(x))
    except Exception:
        pass
    if count > len(seeds):
        rng = np.random.default_rng(rng_seed)
        lo, hi = surface.bbox[:, 0], surface.bbox[:, 1]
        draws = rng.uniform(lo, hi, size=(max(count * 3, 8), x.shape[0]))
        for q in draws:
            if len(seeds) >= count:
                break
            try:
                seeds.append(surface.project_normal_steps(q))
            except Exception:
                continue
    return seeds


def closest_point(surface: Surface, x, seeds: int = 8, warm_start=None,
                  rng_seed: int = 0) -> ProjectionResult:
    """Global closest point on the surface from x, with uniqueness margin.

    ``seeds`` counts the multi-start attempts; ``warm_start`` prepends an
    extra start (used when sweeping along a segment to stay on one branch).
    Queries already on the surface project to themselves with distance 0.
    """
    x = as_vec(x, surface.dim)
    if seeds < 1:
        raise InvalidInputError("seeds must be >= 1")
    if abs(surface.f(x)) <= ON_SURFACE_TOL * (1.0 + norm(x)):
        return ProjectionResult(query=x, footpoint=x.copy(), distance=0.0,
                                uniqueness_margin=np.inf, converged=True)

    starts = []
    if warm_start is not None:
        starts.append(np.asarray(warm_start, dtype=float))
    starts.extend(_seed_points(surface, x, seeds, rng_seed))

    found = []
    for p0 in starts:
        p = _newton_footpoint(surface, x, p0)
        if p is None:
            continue
        found.append((norm(x - p), p))
    if not found:
        raise ConvergenceError(f"no projection start converged for query {x}")

    found.sort(key=lambda t: t[0])
    clusters = []  # (distance, representative)
    for r, p in found:
        for _, rep in clusters:
            if norm(p - rep) <= CLUSTER_TOL:
                break
        else:
            clusters.append((r, p))
    best_r, best_p = clusters[0]
    margin = clusters[1][0] - best_r if len(clusters) > 1 else np.inf
    return ProjectionResult(query=x, footpoint=best_p, distance=best_r,
                            uniqueness_margin=float(margin), converged=True)


def medial_clearance(surface: Surface, segment: Segment, samples: int = 64,
                     seeds: int = 8, rng_seed: int = 0) -> float:
    """Minimum uniqueness margin over a uniform sweep of the segment.

    A strictly positive value is the (statistical) certificate that the
    sampled segment stays clear of the surface's medial axis.
    """
    if samples < 2:
        raise InvalidInputError("samples must be >= 2")
    worst = np.inf
    for i in range(samples + 1):
        s = i / samples
        try:
            res = closest_point(surface, segment.point_at(s), seeds=seeds,
                                rng_seed=rng_seed)
        except ConvergenceError as exc:
            raise ConvergenceError(f"projection failed at s = {s}", sample=s) from exc
        worst = min(worst, res.uniqueness_margin)
    return float(worst)


@dataclass
class ContractionReport:
    """Distance-field audit along the segment.

    ``lipschitz_ratio[i]`` compares samples i-1 and i (NaN at i = 0);
    ``r_prime`` is d r / d(arc length along the segment).
    """

    s: np.ndarray
    r: np.ndarray
    r_prime: np.ndarray
    lipschitz_ratio: np.ndarray
    uniqueness_margin: np.ndarray
    converged: np.ndarray
    max_ratio: float
    max_abs_r_prime: float
    passed: bool


def contraction_audit(surface: Surface, segment: Segment, samples: int = 256,
                      seeds: int = 6, rng_seed: int = 0) -> ContractionReport:
    """Audit the contraction property of the distance along the segment.

    Estimates dr/dl by central differences on a uniform sweep and the local
    Lipschitz ratio |r(x') - r(x)| / |x' - x| over consecutive samples.
    Passes when the max ratio stays strictly below 1, the regime in which
    the segment's canal surface is smooth away from the endpoints.
    """
    if samples < 2:
        raise InvalidInputError("samples must be >= 2")
    m = samples + 1
    svals = np.linspace(0.0, 1.0, m)
    length = segment.length()
    dl = length / samples

    r = np.empty(m)
    margin = np.empty(m)
    conv = np.ones(m, dtype=bool)
    for i, s in enumerate(svals):
        try:
            res = closest_point(surface, segment.point_at(s), seeds=seeds,
                                rng_seed=rng_seed)
        except ConvergenceError as exc:
            raise ConvergenceError(f"projection failed at s = {s}", sample=s) from exc
        r[i] = res.distance
        margin[i] = res.uniqueness_margin
    clearance = float(np.min(margin))
    if clearance <= CLEARANCE_TOL * (1.0 + length):
        raise PreconditionError(
            f"medial clearance violated (min margin = {clearance:.3e})"
        )

    rp = np.empty(m)
    rp[1:-1] = (r[2:] - r[:-2]) / (2.0 * dl)
    rp[0] = (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * dl)
    rp[-1] = (3.0 * r[-1] - 4.0 * r[-2] + r[-3]) / (2.0 * dl)

    ratio = np.full(m, np.nan)
    ratio[1:] = np.abs(np.diff(r)) / dl

    max_ratio = float(np.nanmax(ratio))
    return ContractionReport(
        s=svals, r=r, r_prime=rp, lipschitz_ratio=ratio,
        uniqueness_margin=margin, converged=conv,
        max_ratio=max_ratio,
        max_abs_r_prime=float(np.max(np.abs(rp))),
        passed=bool(max_ratio < CONTRACTION_PASS),
    )
