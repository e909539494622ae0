"""
Analyzer for sweep results
This module turns sweep rows into the numbers the experiments report: per-key savings
of F-RAN over C-RAN, the average saving with its exclusions, and how closely power
tracks the active-user profile over the day.
"""

import logging # Diagnostics stream
import math
from dataclasses import dataclass, field # Summary records
from typing import Dict, List, Sequence, Tuple # Type hints for documentation

import pandas as pd # Tabular view of sweep rows
from scipy.stats import spearmanr # Rank correlation for load tracking

from config import CSV_COLUMNS

logger = logging.getLogger(__name__)

CRAN, FRAN = "cran", "fran"


def saving_pct(p_cran: float, p_fran: float) -> float:
    """100 * (p_cran - p_fran) / p_cran; raises ZeroDivisionError when p_cran is 0"""
    if p_cran == 0:
        raise ZeroDivisionError("C-RAN power is 0 W, saving is undefined")
    return 100.0 * (p_cran - p_fran) / p_cran


@dataclass(frozen=True)
class SavingsSummary:
    """Average saving over the keys where both policies solved to optimality"""
    average_pct: float
    per_key: Dict[str, float] = field(default_factory=dict)
    excluded: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "average_saving_pct": self.average_pct if math.isfinite(self.average_pct) else None,
            "per_key_saving_pct": dict(self.per_key),
            "excluded": dict(self.excluded),
        }


class SweepAnalyzer:
    """Analyzes the rows of one sweep"""

    def __init__(self, rows: Sequence):
        # Rows are SweepRow records, ordered by key then policy
        self.rows = list(rows)

    def to_dataframe(self) -> pd.DataFrame:
        """One line per (key, policy) with the CSV columns"""
        records = [row.as_record() for row in self.rows]
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)

    def pairs(self) -> List[Tuple[str, dict]]:
        """(key, {policy: row}) in key order"""
        grouped: Dict[str, dict] = {}
        for row in self.rows:
            grouped.setdefault(row.key, {})[row.policy] = row
        return list(grouped.items())

    def savings(self) -> SavingsSummary:
        """
        Mean saving over keys; zero-power and unsolved keys are excluded and listed

        Returns:
            SavingsSummary (average is NaN when every key was excluded)
        """
        per_key: Dict[str, float] = {}
        excluded: Dict[str, str] = {}
        for key, by_policy in self.pairs():
            cran, fran = by_policy.get(CRAN), by_policy.get(FRAN)
            if cran is None or fran is None:
                excluded[key] = "missing policy row"
            elif not (cran.is_optimal and fran.is_optimal):
                excluded[key] = f"status cran={cran.status} fran={fran.status}"
            else:
                try:
                    per_key[key] = saving_pct(cran.total_w, fran.total_w)
                except ZeroDivisionError:
                    excluded[key] = "zero C-RAN power"
        average = sum(per_key.values()) / len(per_key) if per_key else math.nan
        if excluded:
            logger.info("saving average excludes %d keys: %s", len(excluded), ", ".join(excluded))
        return SavingsSummary(average, per_key, excluded)

    def load_tracking(self, fractions: Sequence[float]) -> Dict[str, float]:
        """Spearman rank correlation of each policy's power with the active fractions"""
        result = {}
        for policy in (CRAN, FRAN):
            powers = [row.total_w for row in self.rows if row.policy == policy]
            if len(powers) != len(fractions) or len(powers) < 2:
                result[policy] = math.nan
                continue
            rho, _ = spearmanr(fractions, powers)
            result[policy] = float(rho)
        return result

    def dominance_violations(self, tol: float = 1e-9) -> List[str]:
        """Keys where F-RAN came out more expensive than C-RAN"""
        bad = []
        for key, by_policy in self.pairs():
            cran, fran = by_policy.get(CRAN), by_policy.get(FRAN)
            if cran and fran and cran.is_optimal and fran.is_optimal and fran.total_w > cran.total_w + tol:
                bad.append(key)
        return bad
