"""Figure rendering for scenario runs (written next to the CSV output).

Matplotlib is imported lazily with the Agg backend so headless runs and
test environments never touch a display.
"""

from __future__ import annotations

import numpy as np


def _get_pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _surface_wireframe(ax, surface, curve):
    """Best-effort wireframe of the surface near the curve (3-d only)."""
    kind = surface.describe().get("kind", "")
    if kind == "sphere":
        r = surface.radius
        u = np.linspace(0, 2 * np.pi, 36)
        v = np.linspace(0, np.pi, 18)
        x = r * np.outer(np.cos(u), np.sin(v)) + surface.center[0]
        y = r * np.outer(np.sin(u), np.sin(v)) + surface.center[1]
        z = r * np.outer(np.ones_like(u), np.cos(v)) + surface.center[2]
    elif kind == "cylinder":
        r = surface.radius
        zlo = float(np.min(curve.points[:, surface.axis])) - 0.1
        zhi = float(np.max(curve.points[:, surface.axis])) + 0.1
        u = np.linspace(0, 2 * np.pi, 36)
        h = np.linspace(zlo, zhi, 12)
        uu, hh = np.meshgrid(u, h)
        cols = [None, None, None]
        free = [i for i in range(3) if i != surface.axis]
        cols[free[0]] = r * np.cos(uu)
        cols[free[1]] = r * np.sin(uu)
        cols[surface.axis] = hh
        x, y, z = cols
    elif kind == "revolution":
        lo, hi = surface.profile.interval
        xs = np.linspace(lo, hi, 24)
        u = np.linspace(0, 2 * np.pi, 36)
        xx, uu = np.meshgrid(xs, u)
        rr = np.vectorize(surface.profile.r)(xx)
        x, y, z = xx, rr * np.cos(uu), rr * np.sin(uu)
    elif kind == "graph":
        lo = np.min(curve.points[:, :2], axis=0) - 0.5
        hi = np.max(curve.points[:, :2], axis=0) + 0.5
        xs = np.linspace(lo[0], hi[0], 24)
        ys = np.linspace(lo[1], hi[1], 24)
        xx, yy = np.meshgrid(xs, ys)
        zz = np.vectorize(lambda a, b: surface.height([a, b]))(xx, yy)
        x, y, z = xx, yy, zz
    else:
        return
    ax.plot_wireframe(x, y, z, color="0.8", linewidth=0.4, alpha=0.6)


def render_curve_figure(path, surface, segment, curve) -> None:
    """Segment, shadow curve and surface wireframe (projected to 3-d)."""
    plt = _get_pyplot()
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(111, projection="3d")
    pts = curve.points[:, :3] if curve.dim >= 3 else None
    if pts is None:
        plt.close(fig)
        return
    if curve.dim == 3:
        _surface_wireframe(ax, surface, curve)
    a, b = segment.a[:3], segment.b[:3]
    ax.plot(*np.column_stack([a, b]), "k--", linewidth=1.2, label="segment")
    ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], "C0-", linewidth=1.8, label="shadow curve")
    ax.scatter(*a, color="k", s=18)
    ax.scatter(*b, color="k", s=18)
    if curve.dim > 3:
        ax.set_title(f"first 3 of {curve.dim} coordinates")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_diagnostics_figure(path, contraction=None, theorem1=None,
                              clairaut=None) -> None:
    """2x2 diagnostic panels: r(s), contraction ratios, defect, plane distance."""
    plt = _get_pyplot()
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5))

    ax = axes[0, 0]
    if contraction is not None:
        ax.plot(contraction.s, contraction.r, "C0-")
        ax.set_ylabel("r(s)")
    ax.set_xlabel("s")
    ax.set_title("distance to surface")

    ax = axes[0, 1]
    if contraction is not None:
        ax.plot(contraction.s, np.abs(contraction.r_prime), "C1-", label="|dr/dl|")
        ax.plot(contraction.s, contraction.lipschitz_ratio, "C2.", ms=2.5,
                label="pair ratio")
        ax.axhline(1.0, color="r", linewidth=0.8, linestyle=":")
        ax.legend(fontsize=8)
    ax.set_xlabel("s")
    ax.set_title("contraction audit")

    ax = axes[1, 0]
    if theorem1 is not None and theorem1.curve is not None:
        prof = theorem1.geodesic.defect_profile
        ax.semilogy(theorem1.curve.arclen, np.where(prof > 0, prof, np.nan), "C3-")
        ax.axhline(theorem1.defect_tol, color="k", linewidth=0.8, linestyle=":")
    ax.set_xlabel("arc length")
    ax.set_title("tangential acceleration (defect)")

    ax = axes[1, 1]
    if clairaut is not None:
        ax.plot(clairaut.ell, clairaut.wedge, "C4-", label="wedge")
        ax.plot(clairaut.ell, clairaut.product, "C5--", label="R sin(theta)")
        ax.legend(fontsize=8)
        ax.set_title("rotation invariant")
    elif theorem1 is not None and theorem1.curve is not None:
        ax.semilogy(theorem1.curve.arclen,
                    np.where(theorem1.coplanarity.distances > 0,
                             theorem1.coplanarity.distances, np.nan), "C4-")
        ax.set_title("distance to best plane")
    ax.set_xlabel("arc length")

    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_canal_figure(path, canal) -> None:
    """Canal profile radius vs axial coordinate, with the distance profile."""
    plt = _get_pyplot()
    t = canal.table
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t.xi, t.radius, "C0-", label="canal profile R(xi)")
    ax.plot(t.ell, t.r, "C1--", label="distance r(l)")
    ax.set_xlabel("axial coordinate")
    ax.set_ylabel("radius")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
