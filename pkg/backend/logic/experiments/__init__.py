"""
Experiment harness: perturbed samples, path-count sweeps, metrics, output and verification suites.
"""

from .perturbation import FunctionalForm, form_variant, perturb, truncate_paths
from .metrics import (
    CellOutcome,
    MetricsRow,
    aggregate_rows,
    compare_pair_valuations,
    compute_rows,
    monotone_opportunity_findings,
    pair_valuation_metrics,
)
from .plan import ExperimentPlan, ExperimentRun, SyntheticRecipe, load_plan, run_plan
from .output import emit_csv, emit_plot_data, render_plots
from .verification import SuiteReport, run_suite, suite_names

__all__ = [
    'FunctionalForm',
    'form_variant',
    'perturb',
    'truncate_paths',
    'CellOutcome',
    'MetricsRow',
    'aggregate_rows',
    'compare_pair_valuations',
    'compute_rows',
    'monotone_opportunity_findings',
    'pair_valuation_metrics',
    'ExperimentPlan',
    'ExperimentRun',
    'SyntheticRecipe',
    'load_plan',
    'run_plan',
    'emit_csv',
    'emit_plot_data',
    'render_plots',
    'SuiteReport',
    'run_suite',
    'suite_names',
]
