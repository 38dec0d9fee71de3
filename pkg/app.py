import argparse
import json
import logging
import os
import sys
import time
from datetime import datetime
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

import config
from errors import BudgetExceededError, CrossCheckError, MeshError, MeshRingError, ScenarioError
from fault_model import FaultComplex, Obstacle, ValidationReport, build_complex, coord_label, random_faults, validate
from hit_simulator import McConfig, MonteCarloSimulator
from mesh import MeshShape
from reliability_analyzer import PairConvention, ReliabilityAnalyzer, ReliabilityResult, check_budget, render_decimal
from scenario_loader import (CROSS_CHECKS, ENGINES, OBSTACLES, TABLE2_ROWS, ScenarioConfig, Table2Row, load_scenario,
                             table2_row)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_CROSS_CHECK = 4
EXIT_SKIPPED = 5

FORMATS = ("table", "csv", "json")

DEVIATION_TOLERANCE = Fraction(5, 1000)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive_list(text: str) -> List[int]:
    return [_positive_int(part.strip()) for part in text.split(",") if part.strip()]


def _row_list(text: str) -> List[int]:
    try:
        rows = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated row numbers, got '{text}'")
    known = {row.row for row in TABLE2_ROWS}
    for number in rows:
        if number not in known:
            raise argparse.ArgumentTypeError(f"no published row {number} (rows are 1..{len(TABLE2_ROWS)})")
    return rows


def _mesh_arg(text: str) -> MeshShape:
    """Mesh radices written as 7x8x11, 7×8×11 or 7,8,11."""
    parts = text.replace("×", "x").replace(",", "x").split("x")
    try:
        return MeshShape(tuple(int(p) for p in parts))
    except (ValueError, MeshError) as e:
        raise argparse.ArgumentTypeError(f"invalid mesh '{text}': {e}")


def _status(message: str):
    print(message, file=sys.stderr)


class MeshRingApp:
    def __init__(self):
        self.parser = self.setup_parser()

    def setup_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--engine", choices=ENGINES, help="exact engine (default: scenario or auto)")
        common.add_argument("--cross-check", choices=CROSS_CHECKS, dest="cross_check",
                            help="compare determinant and DP counts on no / some / all pairs")
        common.add_argument("--obstacle", choices=OBSTACLES,
                            help="fr: a path hits when it touches F or its ring (default); "
                                 "fault: only when it crosses a faulty node")
        common.add_argument("--precision", type=_non_negative_int, help="decimals in rendered probabilities")
        common.add_argument("--format", choices=FORMATS, default="table", dest="fmt")
        common.add_argument("--samples", type=_positive_int, help="Monte-Carlo samples")
        common.add_argument("--seed", type=_non_negative_int, help="Monte-Carlo (and fault generator) seed")
        common.add_argument("--workers", type=_positive_int, help="worker processes")
        common.add_argument("--budget", help="low, default, high, unlimited or an operation count")
        common.add_argument("--output", "-o", help="also write the report here (.xlsx, .csv, .json or text)")
        common.add_argument("--progress", action="store_true", help="show progress bars on stderr")
        common.add_argument("--verbose", "-v", action="count", default=0)
        common.add_argument("--fail-on-skip", action="store_true", dest="fail_on_skip",
                            help="exit with code 5 when a run is skipped by the budget")

        parser = argparse.ArgumentParser(
            prog="meshring",
            description="Probability that minimal paths in an n-D mesh meet a fault ring or chain.",
        )
        sub = parser.add_subparsers(dest="command", required=True)

        for name, text in (("analyze", "exact P_hit / P_miss of a scenario"),
                           ("simulate", "Monte-Carlo estimate of P_hit"),
                           ("validate", "check a scenario's fault set")):
            cmd = sub.add_parser(name, parents=[common], help=text)
            cmd.add_argument("--scenario", "-s", required=True, help="scenario JSON file")
            if name == "analyze":
                cmd.add_argument("--per-pair", action="store_true", dest="per_pair",
                                 help="one row per source-destination pair instead of the totals")

        table2 = sub.add_parser("table2", parents=[common], help="reproduce the published comparison table")
        table2.add_argument("--rows", type=_row_list, help="comma-separated row numbers, e.g. 1,4,8")
        table2.add_argument("--verify-samples", type=_positive_int, dest="verify_samples",
                            help="run a Monte-Carlo check with this many samples on deviating rows")

        sweep = sub.add_parser("sweep", parents=[common], help="exact P_hit over random rectangular faults")
        sweep.add_argument("--mesh", type=_mesh_arg, required=True, help="mesh radices, e.g. 7x8x11")
        sweep.add_argument("--faulty-nodes", type=_positive_list, dest="faulty_nodes",
                           help="comma-separated fault sizes; random block shapes when omitted")
        sweep.add_argument("--runs", type=_positive_int, default=10, help="random faults per size (default 10)")
        return parser

    # ------------------------------------------------------------------ helpers

    def _precision(self, args, scenario: Optional[ScenarioConfig] = None) -> int:
        if args.precision is not None:
            return args.precision
        return scenario.analysis.precision if scenario is not None else config.PRECISION

    def _workers(self, args, scenario: Optional[ScenarioConfig] = None) -> int:
        if args.workers is not None:
            return args.workers
        return scenario.mc.workers if scenario is not None else config.WORKERS

    def _obstacle(self, args, scenario: Optional[ScenarioConfig] = None) -> Obstacle:
        if args.obstacle is not None:
            return Obstacle(args.obstacle)
        return Obstacle(scenario.analysis.obstacle) if scenario is not None else Obstacle.RING

    def _seed(self, args, scenario: Optional[ScenarioConfig] = None) -> int:
        if args.seed is not None:
            return args.seed
        return scenario.mc.seed if scenario is not None else config.SEED

    def _analyzer(self, args, scenario: Optional[ScenarioConfig] = None) -> ReliabilityAnalyzer:
        convention = scenario.analysis.pair_convention if scenario is not None else "unordered"
        return ReliabilityAnalyzer(workers=self._workers(args, scenario), progress=args.progress,
                                   pair_convention=PairConvention(convention),
                                   obstacle=self._obstacle(args, scenario))

    def _simulator(self, args, scenario: Optional[ScenarioConfig] = None) -> MonteCarloSimulator:
        return MonteCarloSimulator(progress=args.progress, obstacle=self._obstacle(args, scenario))

    def _print_violations(self, report: ValidationReport):
        for v in report.violations:
            marker = "❌" if v.severity == "error" else "ℹ️"
            _status(f"{marker} {v.code}: {v.message}")

    def _result_columns(self, result: ReliabilityResult, precision: int) -> Dict:
        return {
            "classification": result.classification.value,
            "p_hit": render_decimal(result.p_hit, precision),
            "p_miss": render_decimal(result.p_miss, precision),
            "p_hit_exact": str(result.p_hit),
            "p_miss_exact": str(result.p_miss),
            "total_paths": str(result.total_paths),
            "miss_paths": str(result.miss_paths),
            "engine": result.engine.value,
            "cross_check": result.cross_check.value,
            "checked_pairs": result.checked_pairs,
            "pair_convention": result.pair_convention.value,
            "obstacle": result.obstacle.value,
        }

    def _base_row(self, complex_: FaultComplex) -> Dict:
        return {
            "mesh": complex_.shape.label(),
            "classification": complex_.classification.value,
            "origin": complex_.origin_label(),
            "fault": complex_.describe(),
        }

    def _mc_columns(self, complex_: FaultComplex, args, scenario: Optional[ScenarioConfig] = None) -> Dict:
        cfg = McConfig(samples=args.samples, seed=self._seed(args, scenario), workers=self._workers(args, scenario))
        estimate = self._simulator(args, scenario).estimate(complex_, cfg)
        return {"mc_p_hit": f"{estimate.p_hat:.6f}", "mc_std_error": f"{estimate.std_error:.6f}"}

    # ----------------------------------------------------------------- commands

    def cmd_analyze(self, scenario: ScenarioConfig, args) -> Tuple[List[Dict], int]:
        complex_ = scenario.build()
        report = validate(scenario.mesh, complex_)
        if not report.passed:
            self._print_violations(report)
            return [], EXIT_VALIDATION

        precision = self._precision(args, scenario)
        obstacle = self._obstacle(args, scenario)
        row = self._base_row(complex_)
        try:
            check_budget(complex_, config.resolve_budget(args.budget), obstacle)
        except BudgetExceededError as e:
            _status(f"⚠️ {e}; analysis skipped")
            row.update({"status": "SKIPPED", "note": str(e)})
            return [row], EXIT_SKIPPED if args.fail_on_skip else EXIT_OK

        engine = args.engine or scenario.analysis.engine
        if args.per_pair:
            return self._pair_rows(complex_, scenario, args, engine, precision), EXIT_OK

        cross_check = args.cross_check or scenario.analysis.cross_check
        started = time.perf_counter()
        result = self._analyzer(args, scenario).analyze(complex_, engine, cross_check)
        row.update(self._result_columns(result, precision))
        row["runtime_s"] = f"{time.perf_counter() - started:.3f}"
        _status(f"✅ P_hit = {row['p_hit']} ({row['p_hit_exact']})")
        return [row], EXIT_OK

    def _pair_rows(self, complex_: FaultComplex, scenario: ScenarioConfig, args, engine: str,
                   precision: int) -> List[Dict]:
        pairs = self._analyzer(args, scenario).pair_breakdown(complex_, engine)
        rows = []
        for pair in pairs:
            rows.append({
                "source": coord_label(pair.a),
                "destination": coord_label(pair.b),
                "paths": str(pair.paths),
                "avoiding": str(pair.avoiding),
                "p_hit": render_decimal(pair.p_hit, precision),
                "p_hit_exact": str(pair.p_hit),
            })
        _status(f"✅ {len(rows)} source-destination pairs")
        return rows

    def cmd_simulate(self, scenario: ScenarioConfig, args) -> Tuple[List[Dict], int]:
        complex_ = scenario.build()
        report = validate(scenario.mesh, complex_)
        if not report.passed:
            self._print_violations(report)
            return [], EXIT_VALIDATION

        cfg = McConfig(
            samples=args.samples if args.samples is not None else scenario.mc.samples,
            seed=self._seed(args, scenario),
            workers=self._workers(args, scenario),
        )
        estimate = self._simulator(args, scenario).estimate(complex_, cfg)
        precision = self._precision(args, scenario)
        row = self._base_row(complex_)
        # no runtime column: output must not change between identical runs
        row.update({
            "p_hit_estimate": render_decimal(estimate.ratio(), precision),
            "std_error": f"{estimate.std_error:.6f}",
            "p_hat": f"{estimate.p_hat:.6f}",
            "samples": estimate.samples,
            "seed": estimate.seed,
            "hit_weight": str(estimate.hit_weight),
            "total_weight": str(estimate.total_weight),
            "estimator": estimate.estimator,
            "obstacle": self._obstacle(args, scenario).value,
        })
        _status(f"✅ P_hit ≈ {row['p_hat']} ± {row['std_error']}")
        return [row], EXIT_OK

    def cmd_validate(self, scenario: ScenarioConfig, args) -> Tuple[List[Dict], int]:
        complex_ = scenario.build()
        report = validate(scenario.mesh, complex_)
        rows = [{"check": "RESULT", "severity": "-", "message": "PASS" if report.passed else "FAIL"}]
        for v in report.violations:
            rows.append({"check": v.code, "severity": v.severity, "message": v.message})
        if report.passed:
            _status(f"✅ {complex_.shape.label()} {complex_.describe()}: PASS")
        else:
            _status(f"❌ {complex_.shape.label()} {complex_.describe()}: FAIL")
        return rows, EXIT_OK if report.passed else EXIT_VALIDATION

    def _explain_deviation(self, complex_: FaultComplex, entry: Table2Row, args, budget: float,
                           obstacle: Obstacle, precision: int) -> Dict:
        """Recomputes a deviating row under the other obstacle convention."""
        other = obstacle.other()
        columns = {"alt_obstacle": other.value}
        try:
            check_budget(complex_, budget, other)
        except BudgetExceededError as e:
            columns["note"] = f"'{other.value}' obstacle not computed: {e}"
            return columns
        alt = self._analyzer(args).analyze(complex_, args.engine or "auto", args.cross_check, obstacle=other)
        columns["alt_p_hit"] = render_decimal(alt.p_hit, precision)
        if abs(alt.p_hit - Fraction(entry.published_p_hit)) <= DEVIATION_TOLERANCE:
            columns["note"] = (f"published value follows the '{other.value}' obstacle ({other.descriptor}), "
                               f"which gives {columns['alt_p_hit']}")
        else:
            columns["note"] = (f"published value matches neither obstacle; "
                               f"'{other.value}' gives {columns['alt_p_hit']}")
        return columns

    def _table2_one(self, entry: Table2Row, args, budget: float) -> Dict:
        scenario = entry.scenario()
        complex_ = scenario.build()
        precision = self._precision(args)
        obstacle = self._obstacle(args)
        row = {"row": entry.row}
        row.update(self._base_row(complex_))
        row["published_class"] = entry.published_class
        row["published_p_hit"] = entry.published_p_hit

        report = validate(scenario.mesh, complex_)
        if not report.passed:
            row.update({"status": "INVALID", "note": ", ".join(report.codes())})
            return row

        try:
            check_budget(complex_, budget, obstacle)
        except BudgetExceededError as e:
            logger.info("row %d skipped: %s", entry.row, e)
            row.update({"status": "SKIPPED", "note": str(e)})
            if args.samples is not None:
                row.update(self._mc_columns(complex_, args))
            return row

        started = time.perf_counter()
        result = self._analyzer(args).analyze(complex_, args.engine or "auto", args.cross_check)
        runtime = time.perf_counter() - started
        diff = abs(result.p_hit - Fraction(entry.published_p_hit))
        row.update(self._result_columns(result, precision))
        row["abs_diff"] = render_decimal(diff, precision)
        row["status"] = "OK" if diff <= DEVIATION_TOLERANCE else "DEVIATES"
        row["note"] = ""
        if row["status"] == "DEVIATES":
            row.update(self._explain_deviation(complex_, entry, args, budget, obstacle, precision))
            if args.verify_samples:
                cfg = McConfig(samples=args.verify_samples, seed=self._seed(args), workers=self._workers(args))
                comparison = self._simulator(args).compare(complex_, cfg, exact_p_hit=result.p_hit)
                verdict = "agrees" if comparison.passed else "DISAGREES"
                row["note"] += f"; Monte-Carlo {verdict} with exact value (z={comparison.z:.2f})"
        row["runtime_s"] = f"{runtime:.3f}"
        return row

    def cmd_table2(self, args) -> Tuple[List[Dict], int]:
        budget = config.resolve_budget(args.budget)
        entries = [table2_row(n) for n in args.rows] if args.rows else list(TABLE2_ROWS)
        rows = []
        for entry in entries:
            row = self._table2_one(entry, args, budget)
            marker = {"OK": "✅", "DEVIATES": "⚠️", "SKIPPED": "⚠️"}.get(row["status"], "❌")
            _status(f"{marker} row {entry.row}: {row['status']}")
            rows.append(row)
        skipped = any(r["status"] == "SKIPPED" for r in rows)
        return rows, EXIT_SKIPPED if skipped and args.fail_on_skip else EXIT_OK

    def cmd_sweep(self, args) -> Tuple[List[Dict], int]:
        shape = args.mesh
        budget = config.resolve_budget(args.budget)
        precision = self._precision(args)
        obstacle = self._obstacle(args)
        rows = []
        for size in args.faulty_nodes or [None]:
            for run, spec in enumerate(random_faults(shape, args.runs, self._seed(args), size), start=1):
                complex_ = build_complex(shape, spec)
                row = {"faulty_nodes": len(complex_.faulty), "run": run}
                row.update(self._base_row(complex_))
                report = validate(shape, complex_)
                if not report.passed:
                    row.update({"status": "INVALID", "note": ", ".join(report.codes())})
                    rows.append(row)
                    continue
                try:
                    check_budget(complex_, budget, obstacle)
                except BudgetExceededError as e:
                    row.update({"status": "SKIPPED", "note": str(e)})
                else:
                    result = self._analyzer(args).analyze(complex_, args.engine or "auto", args.cross_check)
                    row.update(self._result_columns(result, precision))
                    row["status"] = "OK"
                if args.samples is not None:
                    row.update(self._mc_columns(complex_, args))
                rows.append(row)
        done = sum(1 for r in rows if r["status"] == "OK")
        _status(f"✅ {done} of {len(rows)} random faults analyzed on {shape.label()}")
        skipped = any(r["status"] == "SKIPPED" for r in rows)
        return rows, EXIT_SKIPPED if skipped and args.fail_on_skip else EXIT_OK

    # ------------------------------------------------------------------ output

    def render(self, rows: List[Dict], fmt: str) -> str:
        if fmt == "json":
            return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
        df = pd.DataFrame(rows).fillna("")
        if fmt == "csv":
            return df.to_csv(index=False)
        if df.empty:
            return "(no rows)\n"
        return df.to_string(index=False) + "\n"

    def export_results(self, rows: List[Dict], path: str, fmt: str, command: str) -> str:
        """Writes the report; a directory gets a timestamped Excel file."""
        if os.path.isdir(path):
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            path = os.path.join(path, f"meshring_{command}_{timestamp}.xlsx")
        if path.lower().endswith(".xlsx"):
            pd.DataFrame(rows).to_excel(path, index=False, engine="openpyxl")
        else:
            ext = os.path.splitext(path)[1].lower().lstrip(".")
            text = self.render(rows, ext if ext in FORMATS else fmt)
            with open(path, "w", encoding="utf-8") as f:
                f.write(text)
        return path

    def display_results(self, rows: List[Dict], args, command: str):
        if not rows:
            return
        sys.stdout.write(self.render(rows, args.fmt))
        if args.output:
            written = self.export_results(rows, args.output, args.fmt, command)
            _status(f"✅ report written to {written}")

    # --------------------------------------------------------------------- run

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)

        level = logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else config.LOG_LEVEL
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

        try:
            config.resolve_budget(args.budget)
            if args.command == "table2":
                rows, code = self.cmd_table2(args)
            elif args.command == "sweep":
                rows, code = self.cmd_sweep(args)
            else:
                scenario = load_scenario(args.scenario)
                handler = {"analyze": self.cmd_analyze, "simulate": self.cmd_simulate,
                           "validate": self.cmd_validate}[args.command]
                rows, code = handler(scenario, args)
        except ScenarioError as e:
            _status(f"❌ scenario error: {e}")
            return EXIT_USAGE
        except OSError as e:
            _status(f"❌ cannot read scenario: {e}")
            return EXIT_USAGE
        except ValueError as e:
            _status(f"❌ {e}")
            return EXIT_USAGE
        except CrossCheckError as e:
            _status(f"❌ cross-check failed: {e}")
            return EXIT_CROSS_CHECK
        except MeshRingError as e:
            _status(f"❌ {e}")
            return EXIT_VALIDATION

        self.display_results(rows, args, args.command)
        return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    return MeshRingApp().run(argv)


if __name__ == "__main__":
    sys.exit(main())
