#!/usr/bin/env python3
"""
Path Competition Simulator - Main Entry Point

Command line interface for generating networks, solving for equilibria and
bargaining solutions, simulating competition dynamics, running experiment
plans and verification suites.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path as FilePath
from typing import Any, Dict, List, Optional

import numpy as np

sys.path.append(os.path.dirname(__file__))

from config.config import config
from core.errors import NUMERIC_ERRORS, ModelValidationError, SimulationError, UnsupportedScopeError
from logic.experiments import (
    aggregate_rows,
    emit_csv,
    emit_plot_data,
    load_plan,
    monotone_opportunity_findings,
    render_plots,
    run_plan,
    run_suite,
    suite_names,
)
from logic.experiments.plan import SyntheticRecipe
from logic.model.network import NetworkModel
from logic.model.serialization import load_model, model_to_json, save_model
from logic.model.specs import HomogeneousSpec, PathProfile, TwoIspMarket
from logic.netgen import (
    build_competition_pair_homogeneous,
    build_homogeneous,
    build_two_isp_market,
    build_two_path_model,
    build_two_path_pair,
)
from logic.netgen.as_graph import generate_synthetic_graph, sidecar_document, write_as_graph
from logic.solvers import (
    DynamicsConfig,
    DynamicsMode,
    StabilityReport,
    VisitOrder,
    construct_competition_decline,
    jacobian_homogeneous,
    jacobian_two_path,
    nbs_global,
    single_path_equilibrium,
    single_path_nbs,
    solve_homogeneous_model,
    two_path_equilibrium,
)
from logic.solvers.dynamics import initial_state, multi_start, random_starts
from logic.solvers.homogeneous import homogeneous_spec_from_model
from logic.solvers.quartic import quartic_two_path_equilibrium, two_isp_params_from_model
from logic.solvers.results import EquilibriumResult
from logic.solvers.stability import stability_of
from utils.utils import (
    configure_logging,
    display_equilibrium,
    display_metrics_summary,
    display_suite_reports,
    display_trace_summary,
    format_duration,
    print_document,
    print_error,
    print_header,
    print_info,
    print_success,
    print_warning,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

GENERATORS = ("homogeneous", "competition-pair", "two-path", "two-isp", "decline", "synthetic", "ingest")
SOLVERS = ("homogeneous", "single-path", "single-path-nbs", "two-path", "quartic", "nbs")


class CliUsageError(Exception):
    """Raised instead of argparse's own exit so usage errors map to exit code 1."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise CliUsageError(f"{self.prog}: {message}")


def read_document(file_path: Optional[str], what: str) -> Dict[str, Any]:
    """Load a JSON object from ``--config``."""
    if not file_path:
        raise ModelValidationError(f"--config <json> with the {what} is required")
    path = FilePath(file_path)
    if not path.exists():
        raise ModelValidationError(f"config file '{file_path}' not found")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelValidationError(f"config file '{file_path}' is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ModelValidationError(f"config file '{file_path}' must hold a JSON object")
    return document


def _build(factory, document: Dict[str, Any], what: str):
    try:
        return factory(**document)
    except TypeError as e:
        raise ModelValidationError(f"invalid {what}: {e}")


def solve_model(model: NetworkModel, solver: str, path_id: Optional[str] = None,
                seed: Optional[int] = None) -> EquilibriumResult:
    """Dispatch one of the named solvers; shared with the HTTP surface."""
    if solver == "homogeneous":
        return solve_homogeneous_model(model)
    if solver in ("single-path", "single-path-nbs"):
        if path_id is None:
            if len(model.paths) != 1:
                raise ModelValidationError(f"model has {len(model.paths)} paths; choose one with --path")
            path_id = model.paths[0].id
        return single_path_equilibrium(model, path_id) if solver == "single-path" else single_path_nbs(model, path_id)
    if solver == "two-path":
        return two_path_equilibrium(model)
    if solver == "quartic":
        return quartic_two_path_equilibrium(two_isp_params_from_model(model))
    if solver == "nbs":
        return nbs_global(model, seed=seed)
    raise UnsupportedScopeError(f"unknown solver '{solver}'; choose from {', '.join(SOLVERS)}")


def stability_report(model: NetworkModel, A: np.ndarray) -> StabilityReport:
    """Closed-form Jacobian where one exists, a finite-difference one otherwise."""
    try:
        return jacobian_homogeneous(homogeneous_spec_from_model(model))
    except UnsupportedScopeError:
        pass
    try:
        return jacobian_two_path(model)
    except UnsupportedScopeError:
        pass
    return stability_of(model, A)


class CompetitionSimulator:
    """Main application class behind the command line."""

    def __init__(self, seed: Optional[int] = None, tol: Optional[float] = None, out: Optional[str] = None):
        self.seed = config.seed if seed is None else seed
        self.tol = tol
        self.out = out

    # gen

    def generate(self, kind: str, document_file: Optional[str], args: argparse.Namespace) -> int:
        print_header(f"Generate: {kind}")
        if kind == "homogeneous":
            spec = _build(HomogeneousSpec, read_document(document_file, "homogeneous spec"), "homogeneous spec")
            self._emit_model(build_homogeneous(spec))
        elif kind == "two-isp":
            params = _build(TwoIspMarket, read_document(document_file, "two-ISP market"), "two-ISP market")
            self._emit_model(build_two_isp_market(params))
        elif kind == "two-path":
            self._generate_two_path(read_document(document_file, "path profiles"))
        elif kind == "competition-pair":
            document = read_document(document_file, "homogeneous spec")
            spec = _build(HomogeneousSpec, document, "homogeneous spec")
            pair = build_competition_pair_homogeneous(spec.Q, spec.I, spec.d, spec)
            self._emit_models({"isolated": pair.isolated, "competitive": pair.competitive, "reduced": pair.reduced})
        elif kind == "decline":
            construction = construct_competition_decline(args.d_r, args.d_rbar, args.margin)
            networks = construction.networks()
            self._emit_models({"isolated": networks.isolated, "competitive": networks.competitive},
                              construction.to_dict())
        elif kind in ("synthetic", "ingest"):
            self._generate_from_graph(kind, document_file, args)
        return EXIT_OK

    def _generate_two_path(self, document: Dict[str, Any]) -> None:
        try:
            profile_r = PathProfile(document["psi_r"], document.get("alpha_r0", 0.0))
            profile_rbar = PathProfile(document["psi_rbar"], document.get("alpha_rbar0", 0.0))
        except KeyError as e:
            raise ModelValidationError(f"path profiles need {e.args[0]}")
        if "d" in document:
            self._emit_model(build_two_path_model(profile_r, profile_rbar, float(document["d"])))
            return
        if "d_r" not in document or "d_rbar" not in document:
            raise ModelValidationError("give either d, or d_r and d_rbar")
        pair = build_two_path_pair(profile_r, profile_rbar, float(document["d_r"]), float(document["d_rbar"]))
        self._emit_models({"isolated": pair.isolated, "competitive": pair.competitive})

    def _generate_from_graph(self, kind: str, document_file: Optional[str], args: argparse.Namespace) -> None:
        settings = read_document(document_file, "graph recipe") if document_file else {}
        overrides = {
            "num_nodes": args.nodes,
            "paths": args.paths,
            "max_hops": args.max_hops,
            "max_markets": args.max_markets,
            "graph_file": args.graph,
            "sidecar": args.sidecar,
            "core_size": args.core_size,
        }
        settings.update({key: value for key, value in overrides.items() if value is not None})
        if kind == "synthetic":
            settings["graph_file"] = None
            settings.setdefault("graph_seed", self.seed)
        elif not settings.get("graph_file"):
            raise ModelValidationError("ingest needs --graph <file>")
        recipe = SyntheticRecipe.from_dict(settings)

        if kind == "synthetic" and args.save_graph:
            graph = generate_synthetic_graph(recipe.num_nodes, recipe.graph_seed,
                                             energy_intensity_range=recipe.profile.energy_intensity_range,
                                             idle_energy_range=recipe.profile.idle_energy_range)
            write_as_graph(graph, f"{args.save_graph}.txt")
            FilePath(f"{args.save_graph}.sidecar.json").write_text(
                json.dumps(sidecar_document(graph), indent=2, sort_keys=True), encoding="utf-8")
            print_info(f"Saved AS graph to {args.save_graph}.txt")

        model = recipe.build()
        print_info(f"{len(model.markets)} markets over {model.num_isps} ISPs and {len(model.paths)} paths")
        self._emit_model(model)

    def _emit_model(self, model: NetworkModel) -> None:
        if self.out:
            save_model(model, self.out)
            print_success(f"Model written to {self.out}")
        else:
            print_document(model_to_json(model))

    def _emit_models(self, models: Dict[str, NetworkModel], summary: Optional[Dict[str, Any]] = None) -> None:
        directory = FilePath(self.out or config.results_dir)
        written = {}
        for name, model in models.items():
            if model is None:
                continue
            path = directory / f"{name}.json"
            save_model(model, str(path))
            written[name] = str(path)
        print_success(f"Wrote {len(written)} models to {directory}")
        print_document(json.dumps({"models": written, **(summary or {})}, indent=2, sort_keys=True))

    # solve

    def solve(self, model_file: Optional[str], solver: str, path_id: Optional[str]) -> int:
        print_header(f"Solve: {solver}")
        model = self._load_model(model_file)
        result = solve_model(model, solver, path_id, self.seed)
        document = result.to_dict()
        display_equilibrium(document)
        for warning in result.warnings:
            print_warning(warning)
        self._write_or_print(document)
        return EXIT_OK

    # dynamics

    def run_dynamics(self, model_file: Optional[str], args: argparse.Namespace) -> int:
        print_header(f"Dynamics: {args.mode}")
        model = self._load_model(model_file)
        mode = DynamicsMode(args.mode)
        dynamics = DynamicsConfig.for_mode(
            mode,
            step=args.eta if mode == DynamicsMode.ROUND_ROBIN else args.step,
            tol=self.tol,
            max_rounds=args.max_rounds,
            order=args.order,
            seed=self.seed,
            relative=args.relative,
        )
        if args.starts > 1:
            starts = random_starts(model, args.starts, self.seed)
        else:
            starts = [initial_state(model, args.start)]

        started = time.time()
        traces = multi_start(model, starts, dynamics)
        print_info(f"Simulated {len(traces)} trajectories in {format_duration(time.time() - started)}")

        summaries = []
        for trace in traces:
            summary = trace.summary()
            if args.stability:
                summary["stability"] = stability_report(model, trace.final).to_dict()
            display_trace_summary(summary)
            if not trace.converged:
                print_warning(f"No convergence after {trace.rounds} rounds (residual {trace.final_residual:.3g})")
            summaries.append(summary)

        if args.trace_csv:
            traces[0].write_csv(args.trace_csv)
            print_info(f"Full trace written to {args.trace_csv}")
        self._write_or_print(summaries[0] if len(summaries) == 1 else {"runs": summaries})
        return EXIT_OK

    # experiment

    def run_experiment(self, plan_file: Optional[str], plots: bool, workers: Optional[int]) -> int:
        print_header("Experiment")
        if not plan_file:
            raise ModelValidationError("--config <plan.json> is required")
        plan = load_plan(plan_file, seed=self.seed, tol=self.tol)
        out_dir = FilePath(self.out or config.results_dir)

        started = time.time()
        run = run_plan(plan, max_workers=workers)
        print_info(f"Ran {len(run.cells)} cells in {format_duration(time.time() - started)}")

        csv_path = out_dir / "metrics.csv"
        emit_csv(run.rows, str(csv_path))
        written = [str(csv_path)] + emit_plot_data(run.rows, str(out_dir / "plot"))
        if plots:
            written += render_plots(run.rows, str(out_dir / "plot"))
        plan_path = out_dir / "plan.json"
        plan_path.write_text(json.dumps(plan.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
        written.append(str(plan_path))

        findings = monotone_opportunity_findings(run.rows)
        self._display_summary(run.rows)
        if run.nonconverged:
            print_warning(f"{len(run.nonconverged)} cells did not converge")
        print_success(f"Results written to {out_dir}")
        print_document(json.dumps({
            "files": written,
            "nonconverged": [list(cell) for cell in run.nonconverged],
            "monotone_opportunity_findings": findings,
        }, indent=2))
        return EXIT_OK

    def _display_summary(self, rows) -> None:
        summary = aggregate_rows(rows)
        overall = summary[summary["tier"] == "all"]
        table = overall.pivot_table(index="path_count", columns="metric", values="mean", sort=False)
        columns = [c for c in ("frac_attr_improved", "frac_profit_improved",
                               "frac_pairs_max_val_improved", "frac_pairs_min_val_improved") if c in table]
        frame = table[columns].reset_index()
        display_metrics_summary(frame.to_dict(orient="records"))

    # verify

    def verify(self, suite: str, count: Optional[int]) -> int:
        print_header(f"Verify: {suite}")
        reports = run_suite(suite, count=count, seed=self.seed)
        documents = [report.to_dict() for report in reports]
        display_suite_reports(documents)
        for report in reports:
            for failure in report.failures[:5]:
                print_warning(f"{report.suite}: {failure}")
        if self.out:
            self._write_or_print({"reports": documents})
        if all(report.ok for report in reports):
            print_success("All checks passed")
            return EXIT_OK
        print_error(f"{sum(report.failed for report in reports)} checks failed")
        return EXIT_NUMERIC

    # helpers

    def _load_model(self, model_file: Optional[str]) -> NetworkModel:
        if not model_file:
            raise ModelValidationError("--config <model.json> is required")
        model = load_model(model_file)
        print_info(f"Loaded model with {model.num_isps} ISPs, {len(model.paths)} paths, {len(model.markets)} markets")
        return model

    def _write_or_print(self, document: Dict[str, Any]) -> None:
        text = json.dumps(document, indent=2)
        if self.out:
            path = FilePath(self.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + "\n", encoding="utf-8")
            print_success(f"Written to {self.out}")
        else:
            print_document(text)


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument('--seed', type=int, default=default,
                        help=f'Seed of every generator (default: SIM_SEED or {config.seed})')
    parser.add_argument('--out', '-o', type=str, default=default,
                        help='Output file or directory (default: stdout, or RESULTS_DIR for directories)')
    parser.add_argument('--config', '-c', type=str, default=default,
                        help='JSON document describing the model, spec or plan')
    parser.add_argument('--tol', type=float, default=default,
                        help='Convergence tolerance of the dynamics')


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        description="Path Competition Simulator - multi-attribute quality competition among ISPs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py gen homogeneous --config spec.json --out model.json     # Homogeneous network
  python main.py gen decline --d-r 1 --d-rbar 1 --margin 0.5 --out n34/   # Competition lowers valuation
  python main.py gen synthetic --nodes 50 --seed 7 --out synthetic.json  # Synthetic AS topology
  python main.py solve --solver two-path --config model.json             # Equilibrium JSON on stdout
  python main.py dynamics --config model.json --mode ode-euler --stability
  python main.py experiment --config plan.json --out results/ --plots
  python main.py verify --suite homogeneous --count 100
        """
    )
    _global_flags(parser, suppress=False)
    parser.add_argument('--verbose', '-v', action='store_true', help='Log at DEBUG level')

    common = _ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='command')

    gen = subparsers.add_parser('gen', parents=[common], help='Generate a network model')
    gen.add_argument('kind', choices=GENERATORS, help='Network family to build')
    gen.add_argument('--d-r', type=float, default=1.0, help='Demand of the first isolated market (decline)')
    gen.add_argument('--d-rbar', type=float, default=1.0, help='Demand of the second isolated market (decline)')
    gen.add_argument('--margin', type=float, default=0.5, help='Base valuation margin of the rival path (decline)')
    gen.add_argument('--nodes', type=int, help='Number of ASes of a synthetic graph')
    gen.add_argument('--paths', type=int, help='Valley-free paths required per market')
    gen.add_argument('--max-hops', type=int, help='Maximum ASes per path')
    gen.add_argument('--max-markets', type=int, help='Keep at most this many markets')
    gen.add_argument('--graph', type=str, help='AS relationship file to ingest')
    gen.add_argument('--sidecar', type=str, help='JSON sidecar with masses and energy profiles')
    gen.add_argument('--core-size', type=int, help='Prune the ingested graph to its core of this size')
    gen.add_argument('--save-graph', type=str, help='Save the synthetic graph as <prefix>.txt and sidecar')

    solve = subparsers.add_parser('solve', parents=[common], help='Solve a model for an equilibrium or NBS')
    solve.add_argument('--solver', choices=SOLVERS, required=True, help='Solver to apply')
    solve.add_argument('--path', type=str, help='Path id for the single-path solvers')

    dynamics = subparsers.add_parser('dynamics', parents=[common], help='Simulate competition dynamics')
    dynamics.add_argument('--mode', choices=[m.value for m in DynamicsMode], default=DynamicsMode.ROUND_ROBIN.value)
    dynamics.add_argument('--eta', type=float, help='Damping of round-robin better responses')
    dynamics.add_argument('--step', type=float, help='Explicit Euler step')
    dynamics.add_argument('--max-rounds', type=int, help='Round limit')
    dynamics.add_argument('--start', type=str, default='zeros', help='zeros, random:<seed> or a JSON matrix file')
    dynamics.add_argument('--starts', type=int, default=1, help='Number of seeded random starts')
    dynamics.add_argument('--order', choices=[o.value for o in VisitOrder], default=VisitOrder.INDEX.value)
    dynamics.add_argument('--relative', action='store_true', help='Measure changes relative to max(1, |a|)')
    dynamics.add_argument('--stability', action='store_true', help='Attach the Jacobian spectrum at the endpoint')
    dynamics.add_argument('--trace-csv', type=str, help='Write the full trace of the first run as CSV')

    experiment = subparsers.add_parser('experiment', parents=[common], help='Run an experiment plan')
    experiment.add_argument('--plots', action='store_true', help='Also render PNG plots')
    experiment.add_argument('--workers', type=int, help='Cap on parallel cells (default: COMPETITION_SIM_THREADS)')

    verify = subparsers.add_parser('verify', parents=[common], help='Run verification suites')
    verify.add_argument('--suite', default='all', help=f"One of: {', '.join(suite_names())}")
    verify.add_argument('--count', type=int, help='Instances per suite (default: the suite size)')
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    simulator = CompetitionSimulator(seed=args.seed, tol=args.tol, out=args.out)
    if args.command == 'gen':
        return simulator.generate(args.kind, args.config, args)
    if args.command == 'solve':
        return simulator.solve(args.config, args.solver, args.path)
    if args.command == 'dynamics':
        return simulator.run_dynamics(args.config, args)
    if args.command == 'experiment':
        return simulator.run_experiment(args.config, args.plots, args.workers)
    return simulator.verify(args.suite, args.count)


def cli(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except CliUsageError as e:
        print_error(str(e))
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK

    configure_logging("DEBUG" if args.verbose else config.log_level, config.log_file)
    try:
        return _dispatch(args)
    except KeyboardInterrupt:
        print_error("Interrupted by user")
        return EXIT_USAGE
    except NUMERIC_ERRORS as e:
        print_error(f"Solver failure: {e}")
        return EXIT_NUMERIC
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print_error(f"Numeric failure: {e}")
        return EXIT_NUMERIC
    except SimulationError as e:
        print_error(str(e))
        return EXIT_USAGE
    except OSError as e:
        print_error(f"I/O error: {e}")
        return EXIT_USAGE


def main():
    """Main entry point."""
    sys.exit(cli())


if __name__ == "__main__":
    main()
