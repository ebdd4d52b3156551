"""Command-line interface.

Verbs:
  run <scenario>        execute the full pipeline, write CSVs + figures
  suite <kind> <count>  generate a deterministic scenario family
  oracle cylinder       dump the closed-form cylinder tables
  canal <scenario>      build only the canal surface and its reports
  report --merge <dir>  merge run summaries into one CSV

The output directory defaults to ./shadowcurve-out (override with --out or
the SHADOWCURVE_OUT environment variable); SHADOWCURVE_THREADS sets the
worker count for cold projection sweeps.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .cylinder import CylinderScenario, oracle_table
from .errors import ConvergenceError, InvalidInputError, ShadowCurveError
from .projection import medial_clearance
from .reporting import (merge_summaries, write_canal_csv, write_merged_csv,
                        write_oracle_csv, write_summary)
from .revolution import canal_from_segment, envelope_residuals, tangency_check
from .runner import (EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, run_scenario)
from .scenario import (SUITE_KINDS, generate_suite, load_scenario,
                       shipped_scenario_names, write_suite)
from .shadow import build_shadow, derivatives


def _default_out() -> Path:
    return Path(os.environ.get("SHADOWCURVE_OUT", "shadowcurve-out"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shadowcurve",
        description="Project segments onto implicit surfaces and audit the result.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario end to end")
    p_run.add_argument("scenario",
                       help="scenario JSON path or shipped scenario name "
                            f"(one of: {', '.join(shipped_scenario_names())})")
    p_run.add_argument("--out", type=Path, default=None, help="output directory")
    p_run.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads for cold projection sweeps")

    p_suite = sub.add_parser("suite", help="generate a scenario family")
    p_suite.add_argument("kind", choices=SUITE_KINDS)
    p_suite.add_argument("count", type=int)
    p_suite.add_argument("--seed", type=int, default=0)
    p_suite.add_argument("--out", type=Path, default=None)

    p_oracle = sub.add_parser("oracle", help="dump closed-form oracle tables")
    p_oracle.add_argument("surface", choices=["cylinder"])
    p_oracle.add_argument("--radius", "--R", dest="radius", type=float, default=1.0)
    p_oracle.add_argument("--height", "--h", dest="height", type=float, default=1.0)
    p_oracle.add_argument("--a", type=float, default=0.0)
    p_oracle.add_argument("--b", type=float, default=1.0)
    p_oracle.add_argument("--nodes", type=int, default=64)
    p_oracle.add_argument("--out", type=Path, default=None)

    p_canal = sub.add_parser("canal", help="build the canal surface only")
    p_canal.add_argument("scenario")
    p_canal.add_argument("--samples", type=int, default=256)
    p_canal.add_argument("--out", type=Path, default=None)

    p_report = sub.add_parser("report", help="merge run summaries")
    p_report.add_argument("--merge", type=Path, required=True,
                          help="directory tree containing summary.json files")
    p_report.add_argument("--out", type=Path, default=None,
                          help="merged CSV path (default: <merge>/merged.csv)")
    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out = (args.out or _default_out() / scenario.name)
    result = run_scenario(scenario, out_dir=out, figures=not args.no_figures,
                          threads=args.threads)
    t1 = result.summary.get("theorem1") or {}
    print(f"[{scenario.name}] status={result.status} "
          f"geodesic={t1.get('geodesic_verdict')} "
          f"coplanarity={t1.get('coplanarity_verdict')} "
          f"consistent={t1.get('consistent')}")
    print(f"reports written to {result.out_dir}")
    return result.exit_code


def _cmd_suite(args) -> int:
    scenarios = generate_suite(args.kind, args.count, args.seed)
    out = args.out or _default_out() / "suites" / f"{args.kind}-{args.seed:03d}"
    paths = write_suite(scenarios, out)
    flagged = sum(sc.expected_inconclusive for sc in scenarios)
    print(f"wrote {len(paths)} scenarios to {out} "
          f"({flagged} flagged expected-inconclusive)")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    sc = CylinderScenario(radius=args.radius, height=args.height,
                          a=args.a, b=args.b)
    rows = oracle_table(sc, n=args.nodes)
    out = args.out or _default_out() / "oracle"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "cylinder_oracle.csv"
    write_oracle_csv(rows, path)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_canal(args) -> int:
    scenario = load_scenario(args.scenario)
    surface, segment = scenario.build()
    clearance = medial_clearance(surface, segment,
                                 samples=scenario.clearance_samples,
                                 seeds=scenario.projection_seeds,
                                 rng_seed=scenario.seed)
    canal = canal_from_segment(surface, segment, n_samples=args.samples)
    curve = derivatives(build_shadow(surface, segment, scenario.grid,
                                     clearance=clearance,
                                     rng_seed=scenario.seed))
    residuals = envelope_residuals(canal)
    tangency = tangency_check(surface, canal, curve)

    out = args.out or _default_out() / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    write_canal_csv(canal, out / "canal.csv")
    write_summary({
        "scenario_name": scenario.name,
        "scenario_hash": scenario.digest(),
        "canal": {
            "envelope_sphere_residual": residuals["sphere"],
            "envelope_tangency_residual": residuals["tangency"],
            "tangency_max_angle": tangency.max_angle,
            "nodes_checked": tangency.n_checked,
            "nodes_skipped": tangency.n_skipped,
        },
    }, out / "canal_summary.json")
    from . import plots
    plots.render_canal_figure(out / "canal_profile.png", canal)
    print(f"canal reports written to {out} "
          f"(tangency max angle {tangency.max_angle:.3e} rad)")
    return EXIT_OK


def _cmd_report(args) -> int:
    rows = merge_summaries(args.merge)
    out = args.out or (args.merge / "merged.csv")
    write_merged_csv(rows, out)
    print(f"merged {len(rows)} summaries into {out}")
    for row in rows:
        print(f"  {row['name']}: status={row['status']} "
              f"geodesic={row['geodesic_verdict']} consistent={row['consistent']}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "suite": _cmd_suite,
        "oracle": _cmd_oracle,
        "canal": _cmd_canal,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ShadowCurveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
