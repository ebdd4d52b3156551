"""Scenario files: a single JSON document describing one pipeline run.

A scenario pins the surface, the segment endpoints, grid sizes, tolerances,
the multi-start seed and the list of requested reports.  Scenarios hash to
a stable key (used for curve caches and report merging) and generated
suites are byte-reproducible for a given (kind, count, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import DEFAULT_DEFECT_TOL, DEFAULT_PLANAR_TOL
from .errors import InvalidInputError
from .projection import Segment
from .revolution import make_profile
from .surfaces import GraphSurface, make_surface

SCHEMA_VERSION = 1
KNOWN_REPORTS = ("contraction", "theorem1", "clairaut", "canal")
SUITE_KINDS = ("sphere", "cylinder", "revolution", "graph")


@dataclass
class Scenario:
    name: str
    surface_spec: dict
    a: list
    b: list
    grid: int = 512
    defect_tol: float = DEFAULT_DEFECT_TOL
    planar_tol: float = DEFAULT_PLANAR_TOL
    clearance_samples: int = 32
    contraction_samples: int = 256
    projection_seeds: int = 8
    seed: int = 0
    reports: tuple = ("contraction", "theorem1")
    expected_inconclusive: bool = False

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "surface": self.surface_spec,
            "a": list(self.a),
            "b": list(self.b),
            "grid": self.grid,
            "defect_tol": self.defect_tol,
            "planar_tol": self.planar_tol,
            "clearance_samples": self.clearance_samples,
            "contraction_samples": self.contraction_samples,
            "projection_seeds": self.projection_seeds,
            "seed": self.seed,
            "reports": list(self.reports),
            "expected_inconclusive": self.expected_inconclusive,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]

    def save(self, path) -> None:
        Path(path).write_text(self.canonical_json())

    # -- validated construction of the runtime objects ----------------------

    def build(self):
        """Instantiate (surface, segment), validating the endpoints."""
        surface = make_surface(self.surface_spec)
        segment = Segment(self.a, self.b)
        segment.validate_on(surface)
        return surface, segment

    def validate(self) -> None:
        if self.grid < 16:
            raise InvalidInputError("grid must be >= 16")
        if self.defect_tol <= 0 or self.planar_tol <= 0:
            raise InvalidInputError("tolerances must be positive")
        if self.clearance_samples < 2 or self.contraction_samples < 2:
            raise InvalidInputError("sample counts must be >= 2")
        if self.projection_seeds < 1:
            raise InvalidInputError("projection_seeds must be >= 1")
        for r in self.reports:
            if r not in KNOWN_REPORTS:
                raise InvalidInputError(f"unknown report {r!r}")
        self.build()


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise InvalidInputError("scenario document must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported scenario schema_version {version!r}")
    missing = [k for k in ("name", "surface", "a", "b") if k not in data]
    if missing:
        raise InvalidInputError(f"scenario is missing fields: {missing}")
    sc = Scenario(
        name=str(data["name"]),
        surface_spec=dict(data["surface"]),
        a=list(data["a"]),
        b=list(data["b"]),
        grid=int(data.get("grid", 512)),
        defect_tol=float(data.get("defect_tol", DEFAULT_DEFECT_TOL)),
        planar_tol=float(data.get("planar_tol", DEFAULT_PLANAR_TOL)),
        clearance_samples=int(data.get("clearance_samples", 32)),
        contraction_samples=int(data.get("contraction_samples", 256)),
        projection_seeds=int(data.get("projection_seeds", 8)),
        seed=int(data.get("seed", 0)),
        reports=tuple(data.get("reports", ["contraction", "theorem1"])),
        expected_inconclusive=bool(data.get("expected_inconclusive", False)),
    )
    sc.validate()
    return sc


def load_scenario(path_or_name) -> Scenario:
    """Load a scenario from a JSON path, or by shipped-scenario name."""
    path = Path(path_or_name)
    if not path.exists():
        shipped = _shipped_scenario_path(str(path_or_name))
        if shipped is None:
            raise InvalidInputError(f"scenario not found: {path_or_name}")
        path = shipped
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"scenario file does not parse: {exc}") from None
    return scenario_from_dict(data)


def _shipped_scenario_path(name: str):
    name = name if name.endswith(".json") else name + ".json"
    base = resources.files("shadowcurve") / "scenarios" / name
    try:
        if base.is_file():
            return Path(str(base))
    except (OSError, TypeError):
        return None
    return None


def shipped_scenario_names() -> list[str]:
    base = resources.files("shadowcurve") / "scenarios"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------------------
# deterministic scenario families
# ---------------------------------------------------------------------------


def _unit_vector(rng, dim):
    while True:
        v = rng.normal(size=dim)
        n = np.linalg.norm(v)
        if n > 1e-8:
            return v / n


def _rotate_towards(a_hat, rng, angle):
    """Unit vector at the given angle from a_hat, in a random plane."""
    t = rng.normal(size=a_hat.shape[0])
    t -= (t @ a_hat) * a_hat
    t /= np.linalg.norm(t)
    return np.cos(angle) * a_hat + np.sin(angle) * t


def _sphere_scenario(rng, name, flagged):
    radius = float(rng.uniform(0.8, 2.5))
    a_hat = _unit_vector(rng, 3)
    angle = float(rng.uniform(0.5, 2.2))
    if flagged:
        b_hat = -a_hat  # antipodal chord: runs through the medial axis
    else:
        b_hat = _rotate_towards(a_hat, rng, angle)
    return Scenario(
        name=name,
        surface_spec={"kind": "sphere", "radius": radius, "dim": 3},
        a=(radius * a_hat).tolist(),
        b=(radius * b_hat).tolist(),
        grid=256,
        reports=("contraction", "theorem1"),
        expected_inconclusive=flagged,
    )


def _cylinder_scenario(rng, name, variant):
    radius = float(rng.uniform(0.7, 1.5))
    height = float(rng.uniform(0.8, 2.0))
    delta = float(rng.uniform(0.5, 2.1)) * (1 if rng.uniform() < 0.5 else -1)
    if variant == "trivial":
        phi = np.pi
    elif variant == "antipodal":
        phi = 0.0  # upper point diametrically opposite: segment meets the axis
    else:
        phi = np.pi - delta
    a_up, b_up = radius * np.cos(phi), radius * np.sin(phi)
    return Scenario(
        name=name,
        surface_spec={"kind": "cylinder", "radius": radius, "axis": 2,
                      "dim": 3, "height": height},
        a=[-radius, 0.0, 0.0],
        b=[a_up, b_up, height],
        grid=256,
        reports=("contraction", "theorem1", "clairaut"),
        expected_inconclusive=(variant == "antipodal"),
    )


_REV_PROFILES = (
    lambda rng: {"kind": "parabolic", "r0": 1.0,
                 "curvature": float(rng.uniform(0.4, 1.2)),
                 "interval": [-1.0, 1.0]},
    lambda rng: {"kind": "affine", "r0": 1.2,
                 "slope": float(rng.uniform(0.2, 0.5)),
                 "interval": [-1.0, 1.0]},
    lambda rng: {"kind": "sphere_cap", "radius": 1.0, "interval": [-0.8, 0.8]},
)


def _revolution_scenario(rng, name, index):
    dim = 3 if index % 2 == 0 else 4
    profile = _REV_PROFILES[index % len(_REV_PROFILES)](rng)
    prof = make_profile(profile)
    lo, hi = prof.interval
    span = hi - lo
    x1 = float(rng.uniform(lo + 0.25 * span, lo + 0.45 * span))
    x2 = float(rng.uniform(lo + 0.55 * span, lo + 0.75 * span))
    w1 = _unit_vector(rng, dim - 1)
    meridian_pair = index % 3 == 2
    if meridian_pair:
        w2 = w1
    else:
        w2 = _rotate_towards(w1, rng, float(rng.uniform(0.5, 1.1)))
    a = np.concatenate([[x1], prof.r(x1) * w1])
    b = np.concatenate([[x2], prof.r(x2) * w2])
    return Scenario(
        name=name,
        surface_spec={"kind": "revolution", "profile": profile, "dim": dim},
        a=a.tolist(),
        b=b.tolist(),
        grid=512,
        defect_tol=2e-5,
        reports=("contraction", "theorem1", "clairaut"),
    )


_GRAPH_EXPRESSIONS = (
    "0.4*sin(x)*cos(y)",
    "0.3*(x^2 + y^2)",
    "0.5*cos(x)*cos(y)",
)


def _graph_scenario(rng, name, index):
    expr = _GRAPH_EXPRESSIONS[index % len(_GRAPH_EXPRESSIONS)]
    surf = GraphSurface(expr)
    symmetric_pair = index % 3 == 1
    if symmetric_pair:
        # both endpoints on the y = 0 symmetry plane of cos(y): the shadow
        # stays in that plane and must come out geodesic
        xy_a = [float(rng.uniform(-1.2, -0.4)), 0.0]
        xy_b = [float(rng.uniform(0.4, 1.2)), 0.0]
    else:
        xy_a = [float(rng.uniform(-1.2, -0.3)), float(rng.uniform(-1.0, 1.0))]
        xy_b = [float(rng.uniform(0.3, 1.2)), float(rng.uniform(-1.0, 1.0))]
    return Scenario(
        name=name,
        surface_spec={"kind": "graph", "expression": expr, "dim": 3},
        a=surf.point_at(xy_a).tolist(),
        b=surf.point_at(xy_b).tolist(),
        grid=512,
        defect_tol=2e-5,
        reports=("contraction", "theorem1"),
    )


def generate_suite(kind: str, count: int, seed: int) -> list[Scenario]:
    """Deterministic family of valid scenarios of one kind.

    Cylinder families periodically include the trivial vertical pair (a
    geodesic) and an antipodal pair whose segment meets the axis; sphere
    families include an antipodal chord.  The degenerate members are
    flagged expected-inconclusive.
    """
    if kind not in SUITE_KINDS:
        raise InvalidInputError(f"unknown suite kind {kind!r}; choose from {SUITE_KINDS}")
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        name = f"{kind}-{seed:03d}-{i:02d}"
        if kind == "sphere":
            out.append(_sphere_scenario(rng, name, flagged=(i % 6 == 5)))
        elif kind == "cylinder":
            variant = {3: "trivial", 4: "antipodal"}.get(i % 5, "generic")
            out.append(_cylinder_scenario(rng, name, variant))
        elif kind == "revolution":
            out.append(_revolution_scenario(rng, name, i))
        else:
            out.append(_graph_scenario(rng, name, i))
    return out


def write_suite(scenarios, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for sc in scenarios:
        path = out_dir / f"{sc.name}.json"
        sc.save(path)
        paths.append(path)
    return paths
