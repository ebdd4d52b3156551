"""Core geometric primitives: implicit hypersurfaces, frames, wedge norms.

A surface is the zero level set of a scalar field F with a nonvanishing
gradient on it (a regular level set).  Everything downstream only queries
F, its gradient and its Hessian, so any smooth implicit description works.
All functions are pure and all objects immutable after construction.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DegenerateSurfaceError, InvalidInputError, OffSurfaceError

# Dimension range supported by the scenario machinery.
MIN_DIM = 2
MAX_DIM = 8

# |F(p)| <= ON_SURFACE_TOL * (1 + |p|) counts as "on the surface".
ON_SURFACE_TOL = 1e-9
# Below this gradient norm the normal direction is considered undefined.
DEGENERATE_GRAD_TOL = 1e-10


def as_vec(x, dim=None) -> np.ndarray:
    """Coerce to a finite float vector, optionally checking its dimension."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise InvalidInputError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise InvalidInputError(f"expected dimension {dim}, got {v.shape[0]}")
    if not (MIN_DIM <= v.shape[0] <= MAX_DIM):
        raise InvalidInputError(
            f"dimension {v.shape[0]} outside supported range [{MIN_DIM}, {MAX_DIM}]"
        )
    return v


def norm(v) -> float:
    return float(np.linalg.norm(v))


def unit(v) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise InvalidInputError("cannot normalize the zero vector")
    return np.asarray(v, dtype=float) / n


class Surface:
    """Implicit hypersurface {p : F(p) = 0} in R^n.

    Subclasses provide ``f``, ``grad`` and ``hess``; ``bbox`` is an
    (n, 2) array of per-coordinate sampling bounds used for seeding and
    for the integrator's domain check.
    """

    def __init__(self, dim: int, bbox):
        if not (MIN_DIM <= dim <= MAX_DIM):
            raise InvalidInputError(f"unsupported ambient dimension {dim}")
        self.dim = dim
        bbox = np.asarray(bbox, dtype=float)
        if bbox.shape != (dim, 2) or np.any(bbox[:, 0] >= bbox[:, 1]):
            raise InvalidInputError("bbox must be (dim, 2) with lo < hi per row")
        self.bbox = bbox

    def f(self, p) -> float:
        raise NotImplementedError

    def grad(self, p) -> np.ndarray:
        raise NotImplementedError

    def hess(self, p) -> np.ndarray:
        raise NotImplementedError

    # -- convenience queries ------------------------------------------------

    def on_surface(self, p, tol_scale=1.0) -> bool:
        p = np.asarray(p, dtype=float)
        return abs(self.f(p)) <= tol_scale * ON_SURFACE_TOL * (1.0 + norm(p))

    def in_domain(self, p) -> bool:
        """True while p stays inside the sampling bbox (integrator guard)."""
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.bbox[:, 0]) and np.all(p <= self.bbox[:, 1]))

    def normal(self, p) -> np.ndarray:
        g = self.grad(p)
        gn = norm(g)
        if gn < DEGENERATE_GRAD_TOL:
            raise DegenerateSurfaceError(f"gradient ~ 0 at {p}")
        return g / gn

    def project_normal_steps(self, p, max_iter=25, tol_scale=1e-4) -> np.ndarray:
        """Pull p onto the level set by damped first-order normal steps.

        Used for seeding and for the integrator's per-step re-projection.
        Converges quadratically near the surface; far away the step is
        capped to avoid overshooting past the medial axis.
        """
        x = np.asarray(p, dtype=float).copy()
        for _ in range(max_iter):
            fx = self.f(x)
            if abs(fx) <= tol_scale * ON_SURFACE_TOL * (1.0 + norm(x)):
                return x
            g = self.grad(x)
            g2 = float(g @ g)
            if g2 < DEGENERATE_GRAD_TOL**2:
                raise DegenerateSurfaceError("normal-step projection hit a critical point")
            x = x - (fx / g2) * g
        return x

    def describe(self) -> dict:
        return {"kind": type(self).__name__, "dim": self.dim}


class FuncSurface(Surface):
    """Surface from explicit callables (used by builtins and generated surfaces)."""

    def __init__(self, dim, bbox, f, grad, hess, name="func"):
        super().__init__(dim, bbox)
        self._f, self._g, self._h = f, grad, hess
        self.name = name

    def f(self, p):
        return float(self._f(np.asarray(p, dtype=float)))

    def grad(self, p):
        return np.asarray(self._g(np.asarray(p, dtype=float)), dtype=float)

    def hess(self, p):
        return np.asarray(self._h(np.asarray(p, dtype=float)), dtype=float)


class Frame:
    """Orthonormal frame at a surface point: unit normal + tangent basis."""

    __slots__ = ("point", "normal", "tangent")

    def __init__(self, point, normal, tangent):
        self.point = point
        self.normal = normal
        self.tangent = tangent  # (n-1, n), rows orthonormal, all orthogonal to normal

    def project_tangential(self, v) -> np.ndarray:
        v = as_vec(v, self.point.shape[0])
        return v - (v @ self.normal) * self.normal


def frame_at(surface: Surface, p) -> Frame:
    """Orthonormal frame at an on-surface point p.

    The normal is the normalized gradient; the tangent basis completes it
    via a QR factorization, so the construction is deterministic.
    """
    p = as_vec(p, surface.dim)
    if not surface.on_surface(p):
        raise OffSurfaceError(
            f"point is off the surface: |F| = {abs(surface.f(p)):.3e}"
        )
    g = surface.grad(p)
    gn = norm(g)
    if gn < DEGENERATE_GRAD_TOL:
        raise DegenerateSurfaceError(f"gradient ~ 0 at {p}")
    nu = g / gn
    # Complete nu to an orthonormal basis: QR of [nu | I] keeps +-nu as the
    # first column; the remaining n-1 columns span the tangent space.
    n = surface.dim
    q, _ = np.linalg.qr(np.column_stack([nu, np.eye(n)]))
    tangent = q[:, 1:].T
    return Frame(point=p, normal=nu, tangent=tangent)


def project_tangential(frame: Frame, v) -> np.ndarray:
    """Component of v orthogonal to the frame's normal (idempotent)."""
    return frame.project_tangential(v)


def wedge_norm3(u, v, w) -> float:
    """Volume of the parallelepiped spanned by three vectors in R^n.

    Computed as sqrt(det G) with G the 3x3 Gram matrix, which works in any
    dimension and vanishes exactly on linearly dependent triples.
    """
    u = as_vec(u)
    v = as_vec(v, u.shape[0])
    w = as_vec(w, u.shape[0])
    if u.shape[0] < 3:
        raise InvalidInputError("wedge_norm3 requires ambient dimension >= 3")
    gram = np.array(
        [
            [u @ u, u @ v, u @ w],
            [v @ u, v @ v, v @ w],
            [w @ u, w @ v, w @ w],
        ]
    )
    det = float(np.linalg.det(gram))
    return float(np.sqrt(max(det, 0.0)))


_TRIPLE_INDEX_CACHE: dict[int, np.ndarray] = {}


def _triple_indices(n: int) -> np.ndarray:
    idx = _TRIPLE_INDEX_CACHE.get(n)
    if idx is None:
        idx = np.array(list(itertools.combinations(range(n), 3)), dtype=int)
        _TRIPLE_INDEX_CACHE[n] = idx
    return idx


def wedge3_components(u, v, w) -> np.ndarray:
    """Components of the trivector u ^ v ^ w over ordered index triples.

    The Euclidean norm of the returned array equals ``wedge_norm3(u, v, w)``;
    the components themselves carry the orientation, which the Clairaut
    machinery uses to assign a continuous sign along a curve.
    """
    u = as_vec(u)
    v = as_vec(v, u.shape[0])
    w = as_vec(w, u.shape[0])
    n = u.shape[0]
    if n < 3:
        raise InvalidInputError("wedge components require ambient dimension >= 3")
    idx = _triple_indices(n)
    mats = np.stack([u[idx], v[idx], w[idx]], axis=1)  # (C(n,3), 3, 3)
    return np.linalg.det(mats)


def fd_gradient(f, p, rel_step=1e-6) -> np.ndarray:
    """Central-difference gradient; guards user-supplied analytic gradients."""
    p = np.asarray(p, dtype=float)
    h = rel_step * (1.0 + np.abs(p))
    g = np.zeros_like(p)
    for i in range(p.shape[0]):
        e = np.zeros_like(p)
        e[i] = h[i]
        g[i] = (f(p + e) - f(p - e)) / (2.0 * h[i])
    return g


def check_surface_derivatives(surface: Surface, points, rtol=1e-6) -> float:
    """Max relative mismatch between analytic and finite-difference gradients.

    Raises InvalidInputError when the mismatch exceeds ``rtol`` and also
    when the Hessian is not symmetric to within 1e-12 relative.
    """
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        ga = surface.grad(p)
        gf = fd_gradient(surface.f, p)
        scale = max(norm(ga), norm(gf), 1e-30)
        worst = max(worst, norm(ga - gf) / scale)
        h = surface.hess(p)
        hs = max(float(np.max(np.abs(h))), 1e-30)
        if float(np.max(np.abs(h - h.T))) > 1e-12 * hs:
            raise InvalidInputError("Hessian is not symmetric")
    if worst > rtol:
        raise InvalidInputError(
            f"analytic gradient disagrees with finite differences: {worst:.3e}"
        )
    return worst
