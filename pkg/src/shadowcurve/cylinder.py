"""Exact closed forms for the segment-on-a-cylinder scenario.

A segment joins X = (-R, 0, 0) on the lower rim of a radius-R, height-h
cylinder (axis = z) to Y = (a, b, h) on the upper rim.  Every quantity of
interest has a closed form in the height t of the segment point: the point
itself, its radial projection onto the cylinder wall, and the rate of
change of the angular coordinate.  These serve as ground truth for the
generic projection and curve machinery.

The angle alpha is chosen so that sin(alpha) is the x-coordinate quotient
of the projected point, i.e. alpha = atan2(x, y), reconstructed with
branch continuity in t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

TRIVIAL_TOL = 1e-12
AXIS_TOL_FACTOR = 1e-9


@dataclass(frozen=True)
class CylinderScenario:
    """Radius, height and upper endpoint (a, b, h) with a^2 + b^2 = R^2."""

    radius: float
    height: float
    a: float
    b: float

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise InvalidInputError("cylinder radius and height must be positive")
        r2 = self.a * self.a + self.b * self.b
        if abs(r2 - self.radius**2) > 1e-12 * self.radius**2:
            raise InvalidInputError(
                f"upper point must satisfy a^2 + b^2 = R^2 (got {r2:.17g})"
            )

    @property
    def lower(self) -> np.ndarray:
        return np.array([-self.radius, 0.0, 0.0])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.a, self.b, self.height])

    def is_antipodal(self) -> bool:
        """True when the segment meets the cylinder axis (excluded setup)."""
        return (abs(self.a - self.radius) <= TRIVIAL_TOL * self.radius
                and abs(self.b) <= TRIVIAL_TOL * self.radius)


def _check_t(sc: CylinderScenario, t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= sc.height:
        raise InvalidInputError(f"height parameter t = {t} outside [0, {sc.height}]")
    return t


def point_T(sc: CylinderScenario, t) -> np.ndarray:
    """Segment point at height t."""
    t = _check_t(sc, t)
    f = t / sc.height
    return np.array([-sc.radius + (sc.a + sc.radius) * f, sc.b * f, t])


def _radial(sc: CylinderScenario, t) -> tuple[float, float, float]:
    p = point_T(sc, t)
    rho = float(np.hypot(p[0], p[1]))
    if rho <= AXIS_TOL_FACTOR * sc.radius:
        raise InvalidInputError(
            "segment point lies on the cylinder axis (antipodal configuration)"
        )
    return p[0], p[1], rho


def point_Tprime(sc: CylinderScenario, t) -> np.ndarray:
    """Radial projection of the segment point onto the cylinder wall."""
    x, y, rho = _radial(sc, t)
    return np.array([sc.radius * x / rho, sc.radius * y / rho, _check_t(sc, t)])


def sin_alpha(sc: CylinderScenario, t) -> float:
    """Sine of the angular coordinate of the projected point."""
    x, _, rho = _radial(sc, t)
    return x / rho


def cos_alpha(sc: CylinderScenario, t) -> float:
    _, y, rho = _radial(sc, t)
    return y / rho


def alpha(sc: CylinderScenario, t) -> float:
    """Angular coordinate with sin(alpha) = x/rho (single-branch value)."""
    x, y, _ = _radial(sc, t)
    return float(np.arctan2(x, y))


def alpha_unwrapped(sc: CylinderScenario, ts) -> np.ndarray:
    """Angle along a t-grid with branch continuity."""
    vals = np.array([alpha(sc, t) for t in ts])
    return np.unwrap(vals)


def alpha_prime(sc: CylinderScenario, t) -> float:
    """Rate of change of the angle with height.

    Constant in t exactly in the trivial vertical-segment configuration;
    any other configuration produces a non-constant rate, which is what
    makes the projected curve fail to be a geodesic.
    """
    t = _check_t(sc, t)
    if abs(sc.b) <= TRIVIAL_TOL * sc.radius and abs(sc.a + sc.radius) <= TRIVIAL_TOL * sc.radius:
        return 0.0
    _, _, rho = _radial(sc, t)
    return (sc.b * sc.radius / sc.height) / (rho * rho)


def is_trivial_geodesic_case(sc: CylinderScenario) -> bool:
    """True when the upper point sits directly above the lower one."""
    return (abs(sc.a + sc.radius) <= TRIVIAL_TOL * max(1.0, sc.radius)
            and abs(sc.b) <= TRIVIAL_TOL * max(1.0, sc.radius))


def oracle_table(sc: CylinderScenario, n: int = 64):
    """Rows (t, T, T', sin_alpha, alpha_prime) on a uniform height grid."""
    if n < 2:
        raise InvalidInputError("oracle table needs n >= 2")
    rows = []
    for t in np.linspace(0.0, sc.height, n + 1):
        rows.append((float(t), point_T(sc, t), point_Tprime(sc, t),
                     sin_alpha(sc, t), alpha_prime(sc, t)))
    return rows
