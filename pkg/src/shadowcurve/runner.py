"""Scenario pipeline: clearance, contraction, shadow curve, verdicts, reports.

Stage order: medial clearance -> contraction audit -> shadow curve ->
geodesic/coplanarity audit -> rotation-invariant and canal reports where
applicable.  Any precondition failure downgrades the dependent verdicts to
inconclusive instead of letting them pass (fail closed).

Exit codes: 0 all requested audits passed or returned definitive verdicts;
1 run completed but some verdict is inconclusive or an audit failed its
threshold; 2 invalid input; 3 numerical (convergence) failure.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import plots, reporting
from .analysis import theorem1_audit
from .errors import (ConvergenceError, InvalidInputError, PreconditionError,
                     ShadowCurveError)
from .projection import CLEARANCE_TOL, contraction_audit, medial_clearance
from .revolution import (canal_from_segment, clairaut_invariants,
                         envelope_residuals, tangency_check)
from .scenario import Scenario
from .shadow import (build_shadow, derivatives, max_adherence, save_curve_cache,
                     speed_constancy_check, write_curve_csv)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

TANGENCY_PASS = 1e-5
ENVELOPE_PASS = 1e-8


@dataclass
class RunResult:
    scenario: Scenario
    exit_code: int
    status: str
    summary: dict
    out_dir: Path | None = None

    @property
    def definitive(self) -> bool:
        return self.status == "definitive"


def _is_revolution_symmetric(surface) -> bool:
    return hasattr(surface, "axis_dir") and hasattr(surface, "axis_point")


def run_scenario(scenario: Scenario, out_dir=None, figures: bool = True,
                 threads: int | None = None) -> RunResult:
    """Execute the full pipeline for one scenario and write its reports."""
    t_start = time.perf_counter()
    if threads is None:
        env = os.environ.get("SHADOWCURVE_THREADS")
        threads = int(env) if env else None

    summary: dict = {
        "scenario_name": scenario.name,
        "scenario_hash": scenario.digest(),
        "scenario": scenario.to_dict(),
        "notes": [],
    }
    notes = summary["notes"]

    surface, segment = scenario.build()
    seed = scenario.seed
    requested = set(scenario.reports)

    # --- stage 1: medial clearance -----------------------------------------
    try:
        clearance = medial_clearance(surface, segment,
                                     samples=scenario.clearance_samples,
                                     seeds=scenario.projection_seeds, rng_seed=seed)
    except ConvergenceError as exc:
        summary["status"] = "failed"
        summary["error"] = {"stage": "clearance", "message": str(exc),
                            "sample": exc.sample}
        summary["exit_code"] = EXIT_NUMERICAL
        return _finish(scenario, summary, EXIT_NUMERICAL, "failed", out_dir, None, t_start)

    clearance_ok = clearance > CLEARANCE_TOL * (1.0 + segment.length())
    summary["clearance"] = {"min_margin": clearance, "passed": clearance_ok,
                            "samples": scenario.clearance_samples}
    if not clearance_ok:
        notes.append("medial clearance violated; dependent verdicts inconclusive")
        summary["theorem1"] = _inconclusive_theorem1(scenario)
        return _finish(scenario, summary, EXIT_INCONCLUSIVE, "inconclusive",
                       out_dir, None, t_start)

    artifacts = {}
    audits_ok = True

    # --- stage 2: contraction audit -----------------------------------------
    contraction = None
    if "contraction" in requested:
        try:
            contraction = contraction_audit(surface, segment,
                                            samples=scenario.contraction_samples,
                                            seeds=scenario.projection_seeds,
                                            rng_seed=seed)
        except (PreconditionError, ConvergenceError) as exc:
            notes.append(f"contraction audit unavailable: {exc}")
            summary["contraction"] = {"passed": False, "error": str(exc)}
            summary["theorem1"] = _inconclusive_theorem1(scenario)
            code = EXIT_NUMERICAL if isinstance(exc, ConvergenceError) else EXIT_INCONCLUSIVE
            return _finish(scenario, summary, code,
                           "failed" if code == EXIT_NUMERICAL else "inconclusive",
                           out_dir, artifacts, t_start)
        summary["contraction"] = {
            "max_ratio": contraction.max_ratio,
            "max_abs_r_prime": contraction.max_abs_r_prime,
            "passed": contraction.passed,
            "samples": scenario.contraction_samples,
        }
        artifacts["contraction"] = contraction
        audits_ok &= contraction.passed

    # --- stage 3: shadow curve ----------------------------------------------
    try:
        curve = build_shadow(surface, segment, scenario.grid,
                             projection_seeds=scenario.projection_seeds,
                             rng_seed=seed, clearance=clearance, threads=threads)
        curve = derivatives(curve)
    except ConvergenceError as exc:
        summary["status"] = "failed"
        summary["error"] = {"stage": "shadow", "message": str(exc), "sample": exc.sample}
        return _finish(scenario, summary, EXIT_NUMERICAL, "failed",
                       out_dir, artifacts, t_start)
    artifacts["curve"] = curve
    summary["shadow"] = {
        "nodes": curve.n_nodes,
        "length": curve.length(),
        "max_adherence": max_adherence(surface, curve),
        "speed_dev": speed_constancy_check(curve),
    }

    # --- stage 4: geodesic/coplanarity dichotomy ----------------------------
    theorem1 = None
    if "theorem1" in requested:
        theorem1 = theorem1_audit(surface, segment, n=scenario.grid,
                                  tol=scenario.defect_tol,
                                  planar_tol=scenario.planar_tol,
                                  curve=curve, clearance=clearance,
                                  projection_seeds=scenario.projection_seeds,
                                  rng_seed=seed)
        artifacts["theorem1"] = theorem1
        gv, cv = theorem1.verdicts
        summary["theorem1"] = {
            "defect": theorem1.geodesic.defect,
            "speed_dev": theorem1.geodesic.speed_dev,
            "defect_tol": scenario.defect_tol,
            "residual": theorem1.coplanarity.residual,
            "planar_tol": scenario.planar_tol,
            "geodesic_verdict": gv,
            "coplanarity_verdict": cv,
            "consistent": theorem1.consistent,
            "definitive": theorem1.definitive,
            "excluded_nodes": theorem1.n_excluded,
        }
        audits_ok &= theorem1.definitive

    # --- stage 5: rotation invariant ----------------------------------------
    if "clairaut" in requested:
        if _is_revolution_symmetric(surface):
            try:
                table = clairaut_invariants(surface, curve)
                artifacts["clairaut"] = table
                summary["clairaut"] = {
                    "invariant": table.invariant,
                    "max_dev_wedge": table.max_dev_wedge,
                    "max_dev_product": table.max_dev_product,
                    "wedge_range": table.wedge_range,
                    "wedge_total_variation": table.wedge_total_variation,
                    "max_form_gap": table.max_form_gap,
                }
            except InvalidInputError as exc:
                notes.append(f"rotation-invariant table unavailable: {exc}")
        else:
            notes.append("surface is not revolution-symmetric; invariant table skipped")

    # --- stage 6: canal surface ----------------------------------------------
    if "canal" in requested:
        try:
            canal = canal_from_segment(surface, segment,
                                       n_samples=max(scenario.grid, 128))
            residuals = envelope_residuals(canal)
            tangency = tangency_check(surface, canal, curve)
            artifacts["canal"] = canal
            env_ok = max(residuals["sphere"], residuals["tangency"]) <= ENVELOPE_PASS
            tan_ok = tangency.max_angle <= TANGENCY_PASS
            summary["canal"] = {
                "envelope_sphere_residual": residuals["sphere"],
                "envelope_tangency_residual": residuals["tangency"],
                "tangency_max_angle": tangency.max_angle,
                "nodes_checked": tangency.n_checked,
                "nodes_skipped": tangency.n_skipped,
                "passed": env_ok and tan_ok,
            }
            audits_ok &= env_ok and tan_ok
        except (PreconditionError, InvalidInputError) as exc:
            notes.append(f"canal construction unavailable: {exc}")
            summary["canal"] = {"passed": False, "error": str(exc)}
            audits_ok = False

    status = "definitive" if audits_ok else "inconclusive"
    code = EXIT_OK if audits_ok else EXIT_INCONCLUSIVE
    return _finish(scenario, summary, code, status, out_dir, artifacts, t_start,
                   figures=figures, surface=surface, segment=segment)


def _inconclusive_theorem1(scenario) -> dict:
    return {
        "defect": None, "residual": None,
        "defect_tol": scenario.defect_tol, "planar_tol": scenario.planar_tol,
        "geodesic_verdict": "inconclusive", "coplanarity_verdict": "inconclusive",
        "consistent": None, "definitive": False, "excluded_nodes": 0,
    }


def _finish(scenario, summary, code, status, out_dir, artifacts, t_start,
            figures=False, surface=None, segment=None) -> RunResult:
    summary["status"] = status
    summary["exit_code"] = code
    summary["elapsed_seconds"] = round(time.perf_counter() - t_start, 3)

    resolved = None
    if out_dir is not None:
        resolved = Path(out_dir)
        resolved.mkdir(parents=True, exist_ok=True)
        _write_outputs(scenario, summary, artifacts or {}, resolved, figures,
                       surface, segment)
    return RunResult(scenario=scenario, exit_code=code, status=status,
                     summary=summary, out_dir=resolved)


def _write_outputs(scenario, summary, artifacts, out_dir, figures,
                   surface, segment) -> None:
    reporting.write_summary(summary, out_dir / "summary.json")
    if "contraction" in artifacts:
        reporting.write_contraction_csv(artifacts["contraction"],
                                        out_dir / "contraction.csv")
    if "curve" in artifacts:
        write_curve_csv(artifacts["curve"], out_dir / "curve.csv")
        save_curve_cache(artifacts["curve"],
                         out_dir / f"curve_cache_{scenario.digest()}.npz",
                         scenario_hash=scenario.digest())
    if "theorem1" in artifacts and artifacts["theorem1"].curve is not None:
        reporting.write_defect_csv(artifacts["theorem1"], out_dir / "defect.csv")
    if "clairaut" in artifacts:
        reporting.write_clairaut_csv(artifacts["clairaut"], out_dir / "clairaut.csv")
    if "canal" in artifacts:
        reporting.write_canal_csv(artifacts["canal"], out_dir / "canal.csv")

    if figures and surface is not None and "curve" in artifacts:
        try:
            plots.render_curve_figure(out_dir / "shadow_curve.png", surface,
                                      segment, artifacts["curve"])
            plots.render_diagnostics_figure(
                out_dir / "diagnostics.png",
                contraction=artifacts.get("contraction"),
                theorem1=artifacts.get("theorem1"),
                clairaut=artifacts.get("clairaut"),
            )
            if "canal" in artifacts:
                plots.render_canal_figure(out_dir / "canal_profile.png",
                                          artifacts["canal"])
        except Exception as exc:  # rendering must never fail a run
            summary["notes"].append(f"figure rendering failed: {exc}")
            reporting.write_summary(summary, out_dir / "summary.json")
