"""Command-line front end.

    stratgrid run --scenario case_study --mode both --out results/
    stratgrid scaffold --class Medium --path medium.json
    stratgrid verify --seed 42

Data goes to files under ``--out``; standard output carries only the summary
table and diagnostics go to standard error. ``STRATGRID_LOG`` sets the log
level (DEBUG, INFO, WARNING, ERROR).
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dispatch, engine, verify
from .errors import IoError, StratGridError
from .profiles import compute_profiles
from .scenario import HapClass, Scenario, load_scenario, preset, save_scenario, single_node_scenario
from .wptlink import link_budget

log = logging.getLogger("stratgrid")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INTERNAL = 3

MODES = ("cooperative", "independent", "both")


@dataclass(frozen=True)
class RunConfig:
    scenario_path: str
    mode: str = "both"
    output_dir: Path = Path("out")
    seed: int = 0
    emit_link_budgets: bool = False


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stratgrid", description="Stratospheric energy-grid dispatch toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="dispatch a scenario and write CSV series and reports")
    run.add_argument("--scenario", required=True,
                     help="scenario file, or the name of a bundled scenario (case_study, null)")
    run.add_argument("--mode", choices=MODES, default="both", help="dispatch mode (default: both)")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--seed", type=_u64, default=0, help="seed recorded with the run (default: 0)")
    run.add_argument("--emit-link-budgets", action="store_true", help="also write per-step link budgets")

    scaffold = sub.add_parser("scaffold", help="write a single-node scenario built from a size-class preset")
    scaffold.add_argument("--class", dest="hap_class", required=True, choices=["Small", "Medium", "Large"])
    scaffold.add_argument("--path", required=True, help="where to write the scenario file")

    check = sub.add_parser("verify", help="run calibration, size-class and LP-vs-oracle checks")
    check.add_argument("--seed", type=_u64, default=42, help="seed for the randomized oracle suite (default: 42)")
    check.add_argument("--instances", type=int, default=verify.ORACLE_INSTANCES,
                       help=f"number of oracle instances (default: {verify.ORACLE_INSTANCES})")
    check.add_argument("--solver-tol", type=float, default=1e-9,
                       help="reduced-cost tolerance handed to the LP solver; loosen it to see the suite fail")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("STRATGRID_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _mkdir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {str(path)!r}: {exc.strerror or exc}") from None


def link_budget_csv(scenario: Scenario) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from_id", "to_id", "modality", "step", "distance_km", "regime",
                "geometric_eff", "end_to_end_eff", "max_deliverable_w"])
    positions = scenario.positions()
    rx = {n.id: n.receiver_area for n in scenario.nodes}
    for link in scenario.links:
        for t in range(scenario.steps):
            b = link_budget(link, positions, t, rx.get(link.to_id))
            w.writerow([link.from_id, link.to_id, link.modality.value, t, engine._fmt(b.distance), b.regime.value,
                        engine._fmt(b.geometric_eff), engine._fmt(b.end_to_end_eff),
                        engine._fmt(b.max_deliverable_power)])
    return buf.getvalue()


def run(config: RunConfig) -> int:
    scenario = load_scenario(config.scenario_path)
    profiles = compute_profiles(scenario)
    out = Path(config.output_dir)
    _mkdir(out)
    results = {}
    if config.mode in ("cooperative", "both"):
        plan = dispatch.solve_cooperative(scenario, profiles)
        results["cooperative"] = engine.simulate(scenario, plan, profiles)
    if config.mode in ("independent", "both"):
        plan = dispatch.independent_baseline(scenario, profiles)
        results["independent"] = engine.simulate(scenario, plan, profiles)

    rows = [("mode", "objective_wh", "ground_wh", "curtail_wh", "dissipation_wh", "repair_wh")]
    for mode, result in results.items():
        engine.write_text(out / f"{mode}.csv", engine.to_csv(result))
        engine.write_text(out / f"{mode}_summary.txt",
                          f"seed: {config.seed}\n" + engine.summary_text(result))
        p = result.plan
        rows.append((mode, engine._fmt(p.repaired_objective_wh), engine._fmt(p.ground_total_wh),
                     engine._fmt(p.curtail_total_wh), engine._fmt(p.dissipation_wh),
                     engine._fmt(p.repair_cost_wh)))
        log.info("%s objective %.3f Wh", mode, p.repaired_objective_wh)
    if config.emit_link_budgets:
        engine.write_text(out / "link_budgets.csv", link_budget_csv(scenario))

    width = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    for r in rows:
        print("  ".join(f"{v:<{w}}" for v, w in zip(r, width)).rstrip())
    if config.mode == "both":
        report = engine.compare(results["cooperative"], results["independent"])
        engine.write_text(out / "comparison.txt", engine.report_text(report))
        flag = " (degenerate: independent objective is 0)" if report.degenerate else ""
        print(f"reduction_fraction {engine._fmt(report.reduction_fraction)}{flag}")
    return EXIT_OK


def scaffold(hap_class: str, path: str) -> int:
    node = preset(HapClass(hap_class), node_id="hap1")
    save_scenario(single_node_scenario(node), path)
    print(f"wrote {path}")
    return EXIT_OK


def run_verify(seed: int, instances: int, solver_tol: float) -> int:
    checks = verify.run_all(seed, solver_tol, instances)
    sys.stdout.write(verify.format_table(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging()
    try:
        if args.command == "run":
            return run(RunConfig(args.scenario, args.mode, Path(args.out), args.seed, args.emit_link_budgets))
        if args.command == "scaffold":
            return scaffold(args.hap_class, args.path)
        return run_verify(args.seed, args.instances, args.solver_tol)
    except StratGridError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # a bug, not a user error; keep the traceback in the debug log
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
