"""Builtin surface catalog, addressable by name and parameters.

Every entry produces a Surface with analytic gradient and Hessian.  Graph
surfaces (z = f(x, y, ...)) accept a small expression grammar — arithmetic,
powers, sin/cos/exp/sqrt and numeric constants — which is validated
against a whitelist before being differentiated symbolically.
"""

from __future__ import annotations

import ast

import numpy as np
import sympy

from .errors import InvalidInputError
from .geometry import Surface, as_vec, norm
from .revolution import Profile, RevolutionSurface, make_profile


class Sphere(Surface):
    def __init__(self, radius=1.0, dim=3, center=None):
        radius = float(radius)
        if radius <= 0:
            raise InvalidInputError("sphere radius must be positive")
        self.radius = radius
        self.center = np.zeros(dim) if center is None else as_vec(center, dim)
        pad = 1.5 * radius
        bbox = np.column_stack([self.center - pad, self.center + pad])
        super().__init__(dim, bbox)

    def f(self, p):
        d = np.asarray(p, dtype=float) - self.center
        return float(d @ d - self.radius**2)

    def grad(self, p):
        return 2.0 * (np.asarray(p, dtype=float) - self.center)

    def hess(self, p):
        return 2.0 * np.eye(self.dim)

    def closest_point_exact(self, x):
        """Analytic radial projection (test oracle); undefined at the center."""
        d = np.asarray(x, dtype=float) - self.center
        dn = norm(d)
        if dn < 1e-14:
            raise InvalidInputError("projection undefined at the sphere center")
        return self.center + self.radius * d / dn

    def describe(self):
        return {"kind": "sphere", "dim": self.dim, "radius": self.radius}


class Cylinder(Surface):
    """Circular cylinder about one coordinate axis (default: the last)."""

    def __init__(self, radius=1.0, axis=2, dim=3, height=None):
        radius = float(radius)
        if radius <= 0:
            raise InvalidInputError("cylinder radius must be positive")
        if not (0 <= int(axis) < dim):
            raise InvalidInputError("cylinder axis index out of range")
        self.radius = radius
        self.axis = int(axis)
        self.height = None if height is None else float(height)
        pad = 1.5 * radius
        bbox = np.array([[-pad, pad]] * dim)
        bbox[self.axis] = [-2.0, 2.0] if self.height is None else [-0.5, self.height + 0.5]
        super().__init__(dim, bbox)
        self.axis_point = np.zeros(dim)
        self.axis_dir = np.zeros(dim)
        self.axis_dir[self.axis] = 1.0
        self._mask = np.ones(dim)
        self._mask[self.axis] = 0.0

    def f(self, p):
        p = np.asarray(p, dtype=float)
        q = p * self._mask
        return float(q @ q - self.radius**2)

    def grad(self, p):
        return 2.0 * np.asarray(p, dtype=float) * self._mask

    def hess(self, p):
        return 2.0 * np.diag(self._mask)

    def closest_point_exact(self, x):
        """Analytic radial projection (test oracle); undefined on the axis."""
        x = np.asarray(x, dtype=float)
        q = x * self._mask
        qn = norm(q)
        if qn < 1e-14:
            raise InvalidInputError("projection undefined on the cylinder axis")
        return x * (1.0 - self._mask) + self.radius * q / qn

    def describe(self):
        return {"kind": "cylinder", "dim": self.dim,
                "radius": self.radius, "axis": self.axis}


class Ellipsoid(Surface):
    def __init__(self, semi_axes):
        a = np.asarray(semi_axes, dtype=float)
        if a.ndim != 1 or np.any(a <= 0):
            raise InvalidInputError("semi-axes must be a positive vector")
        self.semi_axes = a
        dim = a.shape[0]
        pad = 1.5 * a
        super().__init__(dim, np.column_stack([-pad, pad]))

    def f(self, p):
        q = np.asarray(p, dtype=float) / self.semi_axes
        return float(q @ q - 1.0)

    def grad(self, p):
        return 2.0 * np.asarray(p, dtype=float) / self.semi_axes**2

    def hess(self, p):
        return np.diag(2.0 / self.semi_axes**2)

    def describe(self):
        return {"kind": "ellipsoid", "dim": self.dim,
                "semi_axes": self.semi_axes.tolist()}


class Torus(Surface):
    """Torus about the z axis: (sqrt(x^2 + y^2) - R)^2 + z^2 = r^2, in R^3."""

    def __init__(self, major_radius=2.0, minor_radius=0.5):
        R, r = float(major_radius), float(minor_radius)
        if not (R > r > 0):
            raise InvalidInputError("torus needs major_radius > minor_radius > 0")
        self.major_radius, self.minor_radius = R, r
        pad = 1.25 * (R + r)
        bbox = np.array([[-pad, pad], [-pad, pad], [-1.5 * r, 1.5 * r]])
        super().__init__(3, bbox)
        self.axis_point = np.zeros(3)
        self.axis_dir = np.array([0.0, 0.0, 1.0])

    def f(self, p):
        x, y, z = np.asarray(p, dtype=float)
        rho = np.hypot(x, y)
        return float((rho - self.major_radius) ** 2 + z * z - self.minor_radius**2)

    def grad(self, p):
        x, y, z = np.asarray(p, dtype=float)
        rho = np.hypot(x, y)
        if rho < 1e-14:
            return np.array([0.0, 0.0, 2.0 * z])
        c = 2.0 * (rho - self.major_radius) / rho
        return np.array([c * x, c * y, 2.0 * z])

    def hess(self, p):
        x, y, z = np.asarray(p, dtype=float)
        rho2 = x * x + y * y
        rho = np.sqrt(rho2)
        if rho < 1e-14:
            raise InvalidInputError("torus Hessian undefined on the axis")
        R = self.major_radius
        h = np.zeros((3, 3))
        rho3 = rho2 * rho
        h[0, 0] = 2.0 - 2.0 * R * y * y / rho3
        h[1, 1] = 2.0 - 2.0 * R * x * x / rho3
        h[0, 1] = h[1, 0] = 2.0 * R * x * y / rho3
        h[2, 2] = 2.0
        return h

    def closest_point_exact(self, x):
        """Two-stage radial projection (test oracle)."""
        p = np.asarray(x, dtype=float)
        rho = np.hypot(p[0], p[1])
        if rho < 1e-14:
            raise InvalidInputError("projection ambiguous on the torus axis")
        c = np.array([self.major_radius * p[0] / rho,
                      self.major_radius * p[1] / rho, 0.0])
        d = p - c
        dn = norm(d)
        if dn < 1e-14:
            raise InvalidInputError("projection ambiguous on the center circle")
        return c + self.minor_radius * d / dn

    def describe(self):
        return {"kind": "torus", "major_radius": self.major_radius,
                "minor_radius": self.minor_radius}


# ---------------------------------------------------------------------------
# graph surfaces from a restricted expression grammar
# ---------------------------------------------------------------------------

_ALLOWED_CALLS = {"sin", "cos", "exp", "sqrt"}
_ALLOWED_CONSTS = {"pi": sympy.pi, "e": sympy.E}

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Load,
)


def _validate_expression(text: str, var_names: set[str]) -> None:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise InvalidInputError(f"cannot parse expression: {exc}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise InvalidInputError(
                f"expression uses unsupported syntax: {type(node).__name__}"
            )
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise InvalidInputError("only sin, cos, exp, sqrt calls are allowed")
            if node.keywords or len(node.args) != 1:
                raise InvalidInputError("functions take exactly one positional argument")
        if isinstance(node, ast.Name):
            if node.id not in var_names and node.id not in _ALLOWED_CALLS \
                    and node.id not in _ALLOWED_CONSTS:
                raise InvalidInputError(f"unknown name {node.id!r} in expression")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise InvalidInputError("only numeric constants are allowed")


class GraphSurface(Surface):
    """Surface z = f(x, y, ...) given as an expression in the input variables.

    The expression grammar: + - * / ^ (or **), sin, cos, exp, sqrt, numeric
    constants, pi, e, and the variables x1..x{n-1} (aliases x, y in 3-d).
    """

    def __init__(self, expression: str, dim=3, box=None):
        if not (3 <= dim <= 8):
            raise InvalidInputError("graph surfaces support dimensions 3..8")
        text = str(expression).replace("^", "**")
        n_in = dim - 1
        base = [f"x{i + 1}" for i in range(n_in)]
        aliases = {}
        if n_in >= 1:
            aliases["x"] = base[0]
        if n_in >= 2:
            aliases["y"] = base[1]
        _validate_expression(text, set(base) | set(aliases))

        syms = list(sympy.symbols(base))
        local = {name: sym for name, sym in zip(base, syms)}
        for alias, target in aliases.items():
            local[alias] = local[target]
        local.update({name: getattr(sympy, name) for name in _ALLOWED_CALLS})
        local.update(_ALLOWED_CONSTS)
        try:
            expr = sympy.sympify(text, locals=local)
        except (sympy.SympifyError, TypeError) as exc:
            raise InvalidInputError(f"bad expression: {exc}") from None

        grads = [sympy.diff(expr, s) for s in syms]
        hesss = [[sympy.diff(g, s) for s in syms] for g in grads]
        self._height = sympy.lambdify(syms, expr, modules="numpy")
        self._hgrad = sympy.lambdify(syms, grads, modules="numpy")
        self._hhess = sympy.lambdify(syms, hesss, modules="numpy")
        self.expression = str(expression)

        if box is None:
            box = [[-3.0, 3.0]] * n_in + [[-5.0, 5.0]]
        bbox = np.asarray(box, dtype=float)
        if bbox.shape != (dim, 2):
            raise InvalidInputError("graph box must have one (lo, hi) row per coordinate")
        super().__init__(dim, bbox)

    def height(self, xy) -> float:
        return float(self._height(*np.asarray(xy, dtype=float)))

    def f(self, p):
        p = np.asarray(p, dtype=float)
        return float(self._height(*p[:-1]) - p[-1])

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        g = np.empty(self.dim)
        g[:-1] = np.asarray(self._hgrad(*p[:-1]), dtype=float)
        g[-1] = -1.0
        return g

    def hess(self, p):
        p = np.asarray(p, dtype=float)
        h = np.zeros((self.dim, self.dim))
        h[:-1, :-1] = np.asarray(self._hhess(*p[:-1]), dtype=float)
        return h

    def point_at(self, xy) -> np.ndarray:
        """Lift input coordinates onto the graph."""
        xy = np.asarray(xy, dtype=float)
        return np.append(xy, self.height(xy))

    def describe(self):
        return {"kind": "graph", "dim": self.dim, "expression": self.expression}


# ---------------------------------------------------------------------------
# catalog dispatch
# ---------------------------------------------------------------------------


def make_surface(spec: dict) -> Surface:
    """Build a catalog surface from a scenario dictionary."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "sphere":
        return Sphere(radius=spec.get("radius", 1.0), dim=spec.get("dim", 3))
    if kind == "cylinder":
        return Cylinder(radius=spec.get("radius", 1.0), axis=spec.get("axis", 2),
                        dim=spec.get("dim", 3), height=spec.get("height"))
    if kind == "ellipsoid":
        return Ellipsoid(semi_axes=spec["semi_axes"])
    if kind == "torus":
        return Torus(major_radius=spec.get("major_radius", 2.0),
                     minor_radius=spec.get("minor_radius", 0.5))
    if kind == "revolution":
        profile = spec["profile"]
        profile = profile if isinstance(profile, Profile) else make_profile(profile)
        return RevolutionSurface(profile, dim=spec.get("dim", 3))
    if kind == "graph":
        return GraphSurface(spec["expression"], dim=spec.get("dim", 3),
                            box=spec.get("box"))
    raise InvalidInputError(f"unknown surface kind {kind!r}")
