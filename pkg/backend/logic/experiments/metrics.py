"""
Tier-segmented comparison of an experiment cell against its single-path baseline.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import ModelValidationError
from logic.model.evaluation import path_valuations
from logic.model.network import AttributeMatrix, NetworkModel, Tier

logger = logging.getLogger(__name__)

IMPROVEMENT_SLACK = 1e-9
ALL_TIERS = "all"
TIER_ORDER = [t.value for t in Tier] + [ALL_TIERS]


@dataclass
class MetricsRow:
    sample: int
    path_count: int
    tier: str
    frac_attr_improved: float
    frac_profit_improved: float
    mean_attr: Dict[str, float]
    frac_pairs_max_val_improved: float
    frac_pairs_min_val_improved: float
    nonconverged: int = 0

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "sample": self.sample,
            "path_count": self.path_count,
            "tier": self.tier,
            "frac_attr_improved": self.frac_attr_improved,
            "frac_profit_improved": self.frac_profit_improved,
        }
        record.update({f"mean_attr_{k}": value for k, value in self.mean_attr.items()})
        record["frac_pairs_max_val_improved"] = self.frac_pairs_max_val_improved
        record["frac_pairs_min_val_improved"] = self.frac_pairs_min_val_improved
        record["nonconverged"] = self.nonconverged
        return record


@dataclass(frozen=True)
class CellOutcome:
    """Final state of one (sample, path count) trajectory."""

    model: NetworkModel
    attributes: AttributeMatrix
    converged: bool
    rounds: int = 0
    residual: float = 0.0
    error: Optional[str] = None


@dataclass
class PairComparison:
    max_improved: Dict[str, bool] = field(default_factory=dict)
    min_improved: Dict[str, bool] = field(default_factory=dict)

    def fractions(self) -> Dict[str, float]:
        if not self.max_improved:
            return {"max": 0.0, "min": 0.0}
        count = len(self.max_improved)
        return {
            "max": sum(self.max_improved.values()) / count,
            "min": sum(self.min_improved.values()) / count,
        }


def market_valuations(model: NetworkModel, A: AttributeMatrix) -> Dict[str, List[float]]:
    """Valuations of each market's paths, keyed by market."""
    valuations = path_valuations(model, A)
    return {market.key: [valuations[p] for p in market.paths] for market in model.markets}


def compare_pair_valuations(baseline: Mapping[str, Sequence[float]],
                            candidate: Mapping[str, Sequence[float]]) -> PairComparison:
    """Whether the best and the worst candidate path beat the baseline's best path, per pair."""
    if set(baseline) != set(candidate):
        missing = sorted(set(baseline) ^ set(candidate))
        raise ModelValidationError(f"pairs missing in one of the compared runs: {', '.join(missing)}")
    comparison = PairComparison()
    for key in sorted(baseline):
        reference = max(baseline[key])
        comparison.max_improved[key] = max(candidate[key]) > reference + IMPROVEMENT_SLACK
        comparison.min_improved[key] = min(candidate[key]) > reference + IMPROVEMENT_SLACK
    return comparison


def pair_valuation_metrics(baseline_model: NetworkModel, baseline_A: AttributeMatrix,
                           candidate_model: NetworkModel, candidate_A: AttributeMatrix) -> PairComparison:
    return compare_pair_valuations(market_valuations(baseline_model, baseline_A),
                                   market_valuations(candidate_model, candidate_A))


def _tier_members(model: NetworkModel) -> Dict[str, List[int]]:
    members: Dict[str, List[int]] = {}
    for n, isp in enumerate(model.isps):
        members.setdefault(isp.tier.value, []).append(n)
    members[ALL_TIERS] = list(range(model.num_isps))
    return {tier: members[tier] for tier in TIER_ORDER if tier in members}


def compute_rows(sample: int, path_count: int, baseline: CellOutcome, candidate: CellOutcome) -> List[MetricsRow]:
    """One row per tier present, plus the ``all`` row.

    Cells whose run or baseline did not converge get NaN fractions and
    ``nonconverged = 1``. Pair fractions cover all markets and repeat on
    every tier row.
    """
    flagged = not (baseline.converged and candidate.converged)
    A_base, A_cand = baseline.attributes, candidate.attributes
    attr_gain = A_cand.sum(axis=1) - A_base.sum(axis=1) > IMPROVEMENT_SLACK
    profit_gain = (candidate.model.arrays.profits(A_cand) - baseline.model.arrays.profits(A_base)
                   > IMPROVEMENT_SLACK)
    pairs = pair_valuation_metrics(baseline.model, A_base, candidate.model, A_cand).fractions()

    rows = []
    for tier, members in _tier_members(candidate.model).items():
        mean_attr = {
            name: float(np.mean(A_cand[members, k]))
            for k, name in enumerate(candidate.model.attributes)
        }
        rows.append(MetricsRow(
            sample=sample,
            path_count=path_count,
            tier=tier,
            frac_attr_improved=math.nan if flagged else float(np.mean(attr_gain[members])),
            frac_profit_improved=math.nan if flagged else float(np.mean(profit_gain[members])),
            mean_attr=mean_attr,
            frac_pairs_max_val_improved=math.nan if flagged else pairs["max"],
            frac_pairs_min_val_improved=math.nan if flagged else pairs["min"],
            nonconverged=int(flagged),
        ))
    return rows


def rows_frame(rows: Sequence[MetricsRow]) -> pd.DataFrame:
    return pd.DataFrame.from_records([row.to_record() for row in rows])


def metric_columns(frame: pd.DataFrame) -> List[str]:
    return [c for c in frame.columns if c not in ("sample", "path_count", "tier", "nonconverged")]


def aggregate_rows(rows: Sequence[MetricsRow]) -> pd.DataFrame:
    """Mean and sample standard deviation across samples per (path_count, tier, metric).

    NaN entries of non-converged cells are skipped; one sample gives stddev 0.
    """
    frame = rows_frame(rows)
    long = frame.melt(id_vars=["sample", "path_count", "tier"], value_vars=metric_columns(frame),
                      var_name="metric", value_name="value")
    grouped = long.groupby(["metric", "path_count", "tier"], sort=False)["value"]
    summary = grouped.agg(mean="mean", stddev="std").reset_index()
    summary["stddev"] = summary["stddev"].fillna(0.0)
    summary["tier_rank"] = summary["tier"].map(TIER_ORDER.index)
    summary = summary.sort_values(["metric", "path_count", "tier_rank"]).drop(columns="tier_rank")
    return summary.reset_index(drop=True)


def monotone_opportunity_findings(rows: Sequence[MetricsRow]) -> List[Dict[str, Any]]:
    """Places where the share of pairs with an improved best path drops as paths are added."""
    findings = []
    overall = sorted((r for r in rows if r.tier == ALL_TIERS), key=lambda r: (r.sample, r.path_count))
    previous: Dict[int, MetricsRow] = {}
    for row in overall:
        value = row.frac_pairs_max_val_improved
        last = previous.get(row.sample)
        if last is not None and not (math.isnan(value) or math.isnan(last.frac_pairs_max_val_improved)):
            if value < last.frac_pairs_max_val_improved - IMPROVEMENT_SLACK:
                findings.append({
                    "sample": row.sample,
                    "path_count": row.path_count,
                    "previous_path_count": last.path_count,
                    "previous": last.frac_pairs_max_val_improved,
                    "value": value,
                })
        previous[row.sample] = row
    for finding in findings:
        logger.warning("sample %d: share of pairs with an improved best path fell from %.4g to %.4g "
                       "between %d and %d paths", finding["sample"], finding["previous"], finding["value"],
                       finding["previous_path_count"], finding["path_count"])
    return findings
