"""Geodesic verdicts, coplanarity measurement, and reference geodesics.

A unit-speed curve is a geodesic of the level set F = 0 exactly when its
acceleration is normal to the surface, equivalently

    gamma'' = -(gamma'^T HF gamma' / |grad F|^2) * grad F,

which follows from differentiating F(gamma) = 0 twice (see
docs/math-notes.md).  The defect measured here is the tangential part of
the second derivative; the dichotomy audit pairs it with the distance of
the curve from the best plane containing the segment's line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateSurfaceError, DomainExitError, InvalidInputError,
                     PreconditionError)
from .geometry import Surface, as_vec, frame_at, norm, unit
from .projection import CLEARANCE_TOL, Segment, medial_clearance
from .shadow import SampledCurve, build_shadow, derivatives, speed_constancy_check

VERDICT_GEODESIC = "geodesic"
VERDICT_NOT_GEODESIC = "not-geodesic"
VERDICT_INCONCLUSIVE = "inconclusive"

# Shadow nodes closer to an endpoint than this fraction of the curve
# diameter (in projection distance r) are excluded from the defect: the
# ball envelope degenerates as r -> 0 and derivative data is unreliable.
ENDPOINT_EXCLUSION_FRACTION = 1e-6

DEFAULT_DEFECT_TOL = 1e-5
DEFAULT_PLANAR_TOL = 1e-6


@dataclass
class GeodesicReport:
    defect: float
    speed_dev: float
    verdict: str
    tol: float
    defect_profile: np.ndarray  # per-node tangential acceleration, NaN if unset
    n_excluded: int = 0


@dataclass
class CoplanarityReport:
    residual: float
    plane_normal: np.ndarray
    plane_direction: np.ndarray  # in-plane direction orthogonal to the segment
    distances: np.ndarray


def _verdict(defect: float, tol: float) -> str:
    if defect <= tol:
        return VERDICT_GEODESIC
    if defect >= 10.0 * tol:
        return VERDICT_NOT_GEODESIC
    return VERDICT_INCONCLUSIVE


def geodesic_defect(surface: Surface, curve: SampledCurve,
                    tol: float = DEFAULT_DEFECT_TOL,
                    exclude: np.ndarray | None = None) -> GeodesicReport:
    """Max tangential second derivative over nodes carrying derivatives.

    ``exclude`` optionally masks nodes (True = skip) in addition to the
    endpoints, which never carry derivative estimates.
    """
    if tol <= 0:
        raise InvalidInputError("tolerance must be positive")
    if curve.d2 is None:
        raise InvalidInputError("curve has no second derivatives")
    profile = np.full(curve.n_nodes, np.nan)
    n_excluded = 0
    for i in curve.interior_indices():
        if exclude is not None and exclude[i]:
            n_excluded += 1
            continue
        fr = frame_at(surface, curve.points[i])
        profile[i] = norm(fr.project_tangential(curve.d2[i]))
    finite = profile[np.isfinite(profile)]
    if finite.size == 0:
        raise InvalidInputError("no nodes left to evaluate the defect on")
    defect = float(np.max(finite))
    return GeodesicReport(
        defect=defect,
        speed_dev=speed_constancy_check(curve),
        verdict=_verdict(defect, tol),
        tol=tol,
        defect_profile=profile,
        n_excluded=n_excluded,
    )


def coplanarity(segment: Segment, curve: SampledCurve) -> CoplanarityReport:
    """Distance of the curve from the best plane containing the segment line.

    Node offsets are projected orthogonally to the segment direction; the
    singular direction of largest energy spans, together with the segment,
    the best-fit plane (a 2-flat in any ambient dimension).  The residual
    is the max node distance to that plane, normalized by curve diameter.
    """
    if curve.n_nodes == 0:
        raise InvalidInputError("empty curve")
    diam = curve.diameter()
    if diam < 1e-12:
        raise InvalidInputError("degenerate curve: diameter ~ 0")
    u = segment.direction()
    q = curve.points - segment.a
    w = q - np.outer(q @ u, u)

    _, svals, vt = np.linalg.svd(w, full_matrices=False)
    if svals[0] > 1e-14 * diam:
        v = vt[0]
    else:
        # curve collinear with the segment: any plane through it works
        v = _complete_direction([u])
    v = v - (v @ u) * u  # numerical hygiene; already ~ orthogonal
    v = unit(v)
    dists = np.linalg.norm(w - np.outer(w @ v, v), axis=1)
    normal = _complete_direction([u, v])
    return CoplanarityReport(
        residual=float(np.max(dists) / diam),
        plane_normal=normal,
        plane_direction=v,
        distances=dists,
    )


def _complete_direction(spanning) -> np.ndarray:
    """First unit vector orthogonal to the given (orthonormal-ish) set."""
    base = np.column_stack(spanning)
    n = base.shape[0]
    q, _ = np.linalg.qr(np.column_stack([base, np.eye(n)]))
    return q[:, base.shape[1]]


def geodesic_acceleration(surface: Surface, p, v) -> np.ndarray:
    """Normal acceleration keeping a unit-speed curve on the level set."""
    g = surface.grad(p)
    g2 = float(g @ g)
    if g2 < 1e-20:
        raise DegenerateSurfaceError("gradient ~ 0 along trajectory")
    lam = -float(v @ (surface.hess(p) @ v)) / g2
    return lam * g


def integrate_geodesic(surface: Surface, p0, v0, length: float, step: float,
                       on_domain_exit: str = "raise") -> SampledCurve:
    """Trace a geodesic with a classical fourth-order one-step method.

    After every step the position is re-projected onto the level set and
    the velocity onto the unit tangent sphere, so adherence and unit speed
    hold to roundoff regardless of trajectory length.  Leaving the
    surface's sampling domain raises DomainExitError (carrying the partial
    curve) unless ``on_domain_exit='truncate'``.
    """
    if length <= 0 or step <= 0:
        raise InvalidInputError("length and step must be positive")
    if on_domain_exit not in ("raise", "truncate"):
        raise InvalidInputError("on_domain_exit must be 'raise' or 'truncate'")
    p = as_vec(p0, surface.dim).copy()
    if not surface.on_surface(p, tol_scale=10.0):
        raise InvalidInputError("initial point is off the surface")
    v = as_vec(v0, surface.dim).copy()
    nu = surface.normal(p)
    v_t = v - (v @ nu) * nu
    if abs(norm(v) - 1.0) > 1e-6 or norm(v - v_t) > 1e-6:
        raise InvalidInputError("initial velocity must be unit and tangent")
    v = v_t / norm(v_t)

    n_steps = max(1, int(round(length / step)))
    h = length / n_steps

    def rhs(p, v):
        return v, geodesic_acceleration(surface, p, v)

    points = [p.copy()]
    vels = [v.copy()]
    accs = [geodesic_acceleration(surface, p, v)]
    for k in range(n_steps):
        k1p, k1v = rhs(p, v)
        k2p, k2v = rhs(p + 0.5 * h * k1p, v + 0.5 * h * k1v)
        k3p, k3v = rhs(p + 0.5 * h * k2p, v + 0.5 * h * k2v)
        k4p, k4v = rhs(p + h * k3p, v + h * k3v)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        p = surface.project_normal_steps(p, tol_scale=1e-4)
        nu = surface.normal(p)
        v = v - (v @ nu) * nu
        v = v / norm(v)

        if not surface.in_domain(p):
            partial = _assemble(points, vels, accs, h)
            if on_domain_exit == "truncate":
                return partial
            raise DomainExitError(
                f"trajectory left the domain after {k + 1} steps", partial=partial
            )
        points.append(p.copy())
        vels.append(v.copy())
        accs.append(geodesic_acceleration(surface, p, v))
    return _assemble(points, vels, accs, h)


def _assemble(points, vels, accs, h) -> SampledCurve:
    m = len(points)
    return SampledCurve(
        points=np.asarray(points),
        arclen=h * np.arange(m),
        d1=np.asarray(vels),
        d2=np.asarray(accs),
    )


@dataclass
class Theorem1Report:
    """Joint geodesic/coplanarity audit of a shadow curve.

    ``consistent`` is the executable dichotomy: the defect verdict and the
    coplanarity verdict must point the same way.  ``definitive`` is False
    when the defect lands in the inconclusive band or a precondition
    downgraded the verdicts.
    """

    geodesic: GeodesicReport | None
    coplanarity: CoplanarityReport | None
    consistent: bool | None
    definitive: bool
    clearance: float
    defect_tol: float
    planar_tol: float
    curve: SampledCurve | None
    n_excluded: int = 0
    downgraded: str | None = None

    @property
    def verdicts(self):
        if self.geodesic is None or self.coplanarity is None:
            return (VERDICT_INCONCLUSIVE, VERDICT_INCONCLUSIVE)
        planar = self.coplanarity.residual <= self.planar_tol
        return (self.geodesic.verdict, "coplanar" if planar else "not-coplanar")


def theorem1_audit(surface: Surface, segment: Segment, n: int = 512,
                   tol: float = DEFAULT_DEFECT_TOL,
                   planar_tol: float = DEFAULT_PLANAR_TOL,
                   curve: SampledCurve | None = None,
                   clearance: float | None = None,
                   projection_seeds: int = 8, rng_seed: int = 0) -> Theorem1Report:
    """Run the geodesic-iff-coplanar audit on the segment's shadow curve."""
    if clearance is None:
        clearance = medial_clearance(surface, segment, samples=32,
                                     seeds=projection_seeds, rng_seed=rng_seed)
    if clearance <= CLEARANCE_TOL * (1.0 + segment.length()):
        return Theorem1Report(
            geodesic=None, coplanarity=None, consistent=None, definitive=False,
            clearance=clearance, defect_tol=tol, planar_tol=planar_tol,
            curve=None, downgraded="medial clearance violated",
        )
    if curve is None:
        curve = build_shadow(surface, segment, n, projection_seeds=projection_seeds,
                             rng_seed=rng_seed, clearance=clearance)
    if curve.d2 is None:
        curve = derivatives(curve)

    exclude = None
    n_excluded = 0
    if curve.seg_dist is not None:
        exclude = curve.seg_dist < ENDPOINT_EXCLUSION_FRACTION * curve.diameter()
        if np.all(exclude):
            # The segment lies on the surface (r ~ 0 everywhere); the curve
            # is the segment itself and the near-endpoint caveat is moot.
            exclude = None
        else:
            n_excluded = int(np.sum(exclude[curve.interior_indices()]))

    geo = geodesic_defect(surface, curve, tol=tol, exclude=exclude)
    cop = coplanarity(segment, curve)
    consistent = bool((geo.defect <= tol) == (cop.residual <= planar_tol))
    return Theorem1Report(
        geodesic=geo, coplanarity=cop, consistent=consistent,
        definitive=geo.verdict != VERDICT_INCONCLUSIVE,
        clearance=clearance, defect_tol=tol, planar_tol=planar_tol,
        curve=curve, n_excluded=n_excluded,
    )
