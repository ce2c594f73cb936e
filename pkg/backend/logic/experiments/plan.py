"""
Experiment plans and their execution.

A plan names a base model (embedded, or synthesized from an AS graph recipe),
the path counts to sweep, the number of perturbed parameter samples and the
dynamics settings. Every (sample, path count) cell runs independently; the
path count 1 cell of a sample is its baseline.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any, Dict, List, Optional, Tuple

from config.config import config
from core.errors import ModelValidationError, SolverFailure
from logic.experiments.metrics import CellOutcome, MetricsRow, compute_rows
from logic.experiments.perturbation import FunctionalForm, form_variant, perturb, truncate_paths
from logic.model.network import NetworkModel
from logic.model.serialization import model_from_dict, model_to_dict
from logic.netgen.as_graph import generate_synthetic_graph, ingest_as_graph, prune_to_core
from logic.netgen.builder import build_market_model
from logic.netgen.gravity import GravitySpec
from logic.netgen.params import ParamProfile
from logic.solvers.dynamics import DynamicsConfig, DynamicsMode, simulate

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass(frozen=True)
class SyntheticRecipe:
    """How to build the base model from an AS graph.

    Without ``graph_file`` a seeded synthetic hierarchy of ``num_nodes`` ASes
    is generated; with it the file (and optional sidecar) is ingested and,
    when ``core_size`` is set, pruned to its core.
    """

    num_nodes: int = 50
    graph_seed: int = 0
    paths: int = 5
    max_hops: int = 4
    max_markets: Optional[int] = None
    graph_file: Optional[str] = None
    sidecar: Optional[str] = None
    core_size: Optional[int] = None
    profile: ParamProfile = field(default_factory=ParamProfile)
    gravity: GravitySpec = field(default_factory=GravitySpec)

    def build(self) -> NetworkModel:
        if self.graph_file:
            graph = ingest_as_graph(self.graph_file, self.sidecar)
            if self.core_size:
                graph = prune_to_core(graph, self.core_size)
        else:
            graph = generate_synthetic_graph(self.num_nodes, self.graph_seed,
                                             energy_intensity_range=self.profile.energy_intensity_range,
                                             idle_energy_range=self.profile.idle_energy_range)
        return build_market_model(graph, k=self.paths, max_hops=self.max_hops, gravity=self.gravity,
                                  profile=self.profile, max_markets=self.max_markets)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "num_nodes": self.num_nodes,
            "graph_seed": self.graph_seed,
            "paths": self.paths,
            "max_hops": self.max_hops,
            "max_markets": self.max_markets,
            "graph_file": self.graph_file,
            "sidecar": self.sidecar,
            "core_size": self.core_size,
            "profile": self.profile.to_dict(),
            "gravity": {"total_traffic": self.gravity.total_traffic, "exponent": self.gravity.exponent},
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "SyntheticRecipe":
        settings = dict(document)
        settings["profile"] = ParamProfile.from_dict(settings.get("profile", {}))
        settings["gravity"] = GravitySpec(**settings.get("gravity", {}))
        try:
            return cls(**settings)
        except TypeError as e:
            raise ModelValidationError(f"invalid synthetic recipe: {e}")


def default_dynamics() -> DynamicsConfig:
    return DynamicsConfig.for_mode(DynamicsMode.ROUND_ROBIN, relative=True)


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    base_model: Optional[NetworkModel] = None
    synthetic: Optional[SyntheticRecipe] = None
    path_counts: Tuple[int, ...] = (1, 2, 3, 4, 5)
    samples: int = 10
    seed: int = 0
    functional_form: FunctionalForm = FunctionalForm.AFFINE
    dynamics: DynamicsConfig = field(default_factory=default_dynamics)
    perturb: bool = True

    def __post_init__(self):
        object.__setattr__(self, "path_counts", tuple(int(k) for k in self.path_counts))
        object.__setattr__(self, "functional_form", FunctionalForm(self.functional_form))
        if (self.base_model is None) == (self.synthetic is None):
            raise ModelValidationError("a plan needs exactly one of base_model and synthetic")
        if not self.path_counts or min(self.path_counts) < 1:
            raise ModelValidationError("path_counts must be non-empty with every entry at least 1")
        if list(self.path_counts) != sorted(set(self.path_counts)):
            raise ModelValidationError("path_counts must be strictly ascending")
        if int(self.samples) < 1:
            raise ModelValidationError("samples must be a positive integer")

    def resolve_model(self) -> NetworkModel:
        model = self.base_model if self.base_model is not None else self.synthetic.build()
        return form_variant(model, self.functional_form)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "base_model": model_to_dict(self.base_model) if self.base_model is not None else None,
            "synthetic": self.synthetic.to_dict() if self.synthetic is not None else None,
            "path_counts": list(self.path_counts),
            "samples": self.samples,
            "seed": self.seed,
            "functional_form": self.functional_form.value,
            "dynamics": self.dynamics.to_dict(),
            "perturb": self.perturb,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any], seed: Optional[int] = None,
                  tol: Optional[float] = None) -> "ExperimentPlan":
        """Plan from its JSON document; ``seed`` and ``tol`` override the document."""
        dynamics = dict(document.get("dynamics") or {})
        if tol is not None:
            dynamics["tol"] = tol
        mode = dynamics.pop("mode", DynamicsMode.ROUND_ROBIN.value)
        dynamics.setdefault("relative", True)
        try:
            return cls(
                base_model=model_from_dict(document["base_model"]) if document.get("base_model") else None,
                synthetic=SyntheticRecipe.from_dict(document["synthetic"]) if document.get("synthetic") else None,
                path_counts=tuple(document.get("path_counts", (1, 2, 3, 4, 5))),
                samples=int(document.get("samples", 10)),
                seed=int(seed if seed is not None else document.get("seed", config.seed)),
                functional_form=document.get("functional_form", FunctionalForm.AFFINE.value),
                dynamics=DynamicsConfig.for_mode(mode, **dynamics),
                perturb=bool(document.get("perturb", True)),
            )
        except ModelValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise ModelValidationError(f"invalid experiment plan: {e}")


def load_plan(file_path: str, seed: Optional[int] = None, tol: Optional[float] = None) -> ExperimentPlan:
    path = FilePath(file_path)
    if not path.exists():
        raise ModelValidationError(f"plan file '{file_path}' not found")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ModelValidationError(f"plan file '{file_path}' is not valid JSON: {e}")
    return ExperimentPlan.from_dict(document, seed=seed, tol=tol)


@dataclass
class ExperimentRun:
    plan: ExperimentPlan
    rows: List[MetricsRow]
    cells: Dict[Cell, CellOutcome]

    @property
    def nonconverged(self) -> List[Cell]:
        return sorted(cell for cell, outcome in self.cells.items() if not outcome.converged)


def _run_cell(model: NetworkModel, path_count: int, dynamics: DynamicsConfig) -> CellOutcome:
    truncated = truncate_paths(model, path_count)
    start = truncated.lower_matrix()
    try:
        trace = simulate(truncated, start, dynamics)
    except SolverFailure as e:
        logger.warning("cell with %d paths failed: %s", path_count, e)
        return CellOutcome(model=truncated, attributes=start, converged=False, error=str(e))
    return CellOutcome(model=truncated, attributes=trace.final, converged=trace.converged,
                       rounds=trace.rounds, residual=trace.final_residual)


def run_plan(plan: ExperimentPlan, max_workers: Optional[int] = None) -> ExperimentRun:
    """Simulate every (sample, path count) cell and compare it with the sample's single-path cell.

    Cells run on a thread pool of ``max_workers`` (default
    ``COMPETITION_SIM_THREADS``). Threads overlap only in numpy and scipy
    sections; best-response rounds written in Python are serialized by the GIL.
    Results do not depend on the worker count.
    """
    model = plan.resolve_model()
    samples = [
        perturb(model, plan.seed + s) if plan.perturb else model
        for s in range(plan.samples)
    ]
    counts = sorted(set(plan.path_counts) | {1})
    cells: List[Cell] = [(s, k) for s in range(plan.samples) for k in counts]
    logger.info("running %d cells (%d samples x %d path counts, %s form)",
                len(cells), plan.samples, len(counts), plan.functional_form.value)

    workers = max(1, min(max_workers or config.sim_threads, len(cells)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(lambda cell: _run_cell(samples[cell[0]], cell[1], plan.dynamics), cells))
    store = dict(zip(cells, outcomes))

    rows: List[MetricsRow] = []
    for s, k in sorted(store):
        if k not in plan.path_counts:
            continue
        rows.extend(compute_rows(s, k, store[(s, 1)], store[(s, k)]))
    run = ExperimentRun(plan=plan, rows=rows, cells=store)
    if run.nonconverged:
        logger.warning("%d of %d cells did not converge: %s", len(run.nonconverged), len(cells),
                       run.nonconverged)
    return run
