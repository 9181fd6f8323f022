"""MOS/DMOS aggregation, the OVRL~SIG+BAK regression, and run comparisons."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from .screening import SCALES, Vote

log = logging.getLogger(__name__)


@dataclass
class ScaleScore:
    """Aggregate of one rating scale over one condition."""

    mos: float
    n: int
    ci95: Optional[float] = None
    dmos: Optional[float] = None


@dataclass
class ConditionScore:
    condition_id: str
    scales: dict[str, ScaleScore] = field(default_factory=dict)

    def mos(self, scale: str) -> float:
        return self.scales[scale].mos

    def dmos(self, scale: str) -> Optional[float]:
        return self.scales[scale].dmos


@dataclass(frozen=True)
class RegressionFit:
    intercept: float
    coef_sig: float
    coef_bak: float
    adjusted_r2: float
    pearson_rho: float


@dataclass
class ScaleComparison:
    pcc: float
    srcc: float
    rmse: float
    average_ci_a: Optional[float]
    average_ci_b: Optional[float]
    srcc_rank_transformed: Optional[float] = None


@dataclass
class ComparisonReport:
    scales: dict[str, ScaleComparison]


def _ci95(values: np.ndarray) -> Optional[float]:
    n = len(values)
    if n < 2:
        return None
    sd = float(np.std(values, ddof=1))
    return float(sps.t.ppf(0.975, n - 1) * sd / np.sqrt(n))


def aggregate(
    votes: Iterable[Vote],
    clip_conditions: Mapping[str, str],
    baseline_condition: Optional[str] = None,
) -> list[ConditionScore]:
    """Pool reliable votes into per-condition MOS / CI95 / N on each scale.

    The 95% confidence interval half-width uses the Student-t quantile,
    t(0.975, n-1) * sd / sqrt(n). With a baseline condition given, DMOS is
    attached as mos - mos(baseline) per scale. Conditions that collected no
    votes are omitted with a warning; n=1 conditions report MOS but no CI.
    """
    per_condition: dict[str, list[Vote]] = {}
    for vote in votes:
        if vote.clip_id not in clip_conditions:
            raise ValueError(f"vote for clip {vote.clip_id!r} maps to no known condition")
        per_condition.setdefault(clip_conditions[vote.clip_id], []).append(vote)

    for condition in set(clip_conditions.values()) - set(per_condition):
        log.warning("condition %s collected no votes; omitted", condition)

    scores = []
    for condition in sorted(per_condition):
        cond_votes = per_condition[condition]
        scales = {}
        for scale in SCALES:
            values = np.array([v.score(scale) for v in cond_votes], dtype=np.float64)
            scales[scale] = ScaleScore(
                mos=float(values.mean()), n=len(values), ci95=_ci95(values)
            )
        scores.append(ConditionScore(condition_id=condition, scales=scales))

    if baseline_condition is not None:
        attach_dmos(scores, baseline_condition)
    return scores


def attach_dmos(scores: Sequence[ConditionScore], baseline_condition: str) -> list[ConditionScore]:
    """Fill dmos = mos - mos(baseline) per scale, in place."""
    baseline = next((s for s in scores if s.condition_id == baseline_condition), None)
    if baseline is None:
        raise ValueError(f"baseline condition {baseline_condition!r} not in scores")
    base_mos = {scale: baseline.mos(scale) for scale in SCALES}
    for score in scores:
        for scale in SCALES:
            score.scales[scale].dmos = score.mos(scale) - base_mos[scale]
    return list(scores)


def fit_ovrl_regression(scores: Sequence[ConditionScore]) -> RegressionFit:
    """Ordinary least squares of OVRL MOS on SIG and BAK MOS with intercept."""
    if len(scores) < 4:
        raise ValueError(f"need at least 4 conditions to fit, got {len(scores)}")
    sig = np.array([s.mos("sig") for s in scores])
    bak = np.array([s.mos("bak") for s in scores])
    ovrl = np.array([s.mos("ovrl") for s in scores])
    design = np.column_stack([np.ones(len(scores)), sig, bak])
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("SIG and BAK MOS are collinear; regression is singular")
    beta, *_ = np.linalg.lstsq(design, ovrl, rcond=None)
    fitted = design @ beta
    ss_res = float(np.sum((ovrl - fitted) ** 2))
    ss_tot = float(np.sum((ovrl - ovrl.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    n = len(scores)
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / (n - 3)
    return RegressionFit(
        intercept=float(beta[0]),
        coef_sig=float(beta[1]),
        coef_bak=float(beta[2]),
        adjusted_r2=adjusted,
        pearson_rho=pearson(fitted, ovrl),
    )


def predict_ovrl(fit: RegressionFit, sig_mos: float, bak_mos: float) -> float:
    """Evaluate the fitted plane at (sig_mos, bak_mos)."""
    for name, value in (("sig_mos", sig_mos), ("bak_mos", bak_mos)):
        if not 1.0 <= value <= 5.0:
            log.warning("%s=%.3f lies outside the MOS range [1, 5]", name, value)
    return fit.intercept + fit.coef_sig * sig_mos + fit.coef_bak * bak_mos


def pearson(x, y) -> float:
    """Pearson correlation coefficient; nan when either input is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xd = x - x.mean()
    yd = y - y.mean()
    denom = float(np.sqrt(np.sum(xd**2) * np.sum(yd**2)))
    if denom == 0.0:
        return float("nan")
    return float(np.sum(xd * yd) / denom)


def spearman(x, y) -> float:
    """Spearman rank correlation, average ranks for ties."""
    rx = sps.rankdata(x, method="average")
    ry = sps.rankdata(y, method="average")
    return pearson(rx, ry)


def rmse(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.sqrt(np.mean((x - y) ** 2)))


def rank_transform(
    votes: Iterable[Vote], clip_conditions: Mapping[str, str]
) -> dict[str, dict[str, float]]:
    """Per-worker rank transformation of votes, averaged per condition.

    Within each worker's vote set the raw scores are replaced by average
    ranks (per scale); the transformed per-condition means are what feeds
    the rank-transformed Spearman correlation. Workers with fewer than two
    votes carry no ordering information and are dropped with a warning.
    """
    per_worker: dict[str, list[Vote]] = {}
    for vote in votes:
        if vote.clip_id not in clip_conditions:
            raise ValueError(f"vote for clip {vote.clip_id!r} maps to no known condition")
        per_worker.setdefault(vote.worker_id, []).append(vote)

    sums: dict[str, dict[str, float]] = {}
    counts: dict[str, dict[str, int]] = {}
    for worker_id in sorted(per_worker):
        worker_votes = per_worker[worker_id]
        if len(worker_votes) < 2:
            log.warning("worker %s has a single vote; dropped from rank transform", worker_id)
            continue
        for scale in SCALES:
            ranks = sps.rankdata([v.score(scale) for v in worker_votes], method="average")
            for vote, rank in zip(worker_votes, ranks):
                condition = clip_conditions[vote.clip_id]
                sums.setdefault(condition, {}).setdefault(scale, 0.0)
                counts.setdefault(condition, {}).setdefault(scale, 0)
                sums[condition][scale] += float(rank)
                counts[condition][scale] += 1

    return {
        condition: {scale: sums[condition][scale] / counts[condition][scale] for scale in SCALES}
        for condition in sorted(sums)
    }


def compare_runs(
    a: Sequence[ConditionScore],
    b: Sequence[ConditionScore],
    transformed_a: Optional[Mapping[str, Mapping[str, float]]] = None,
    transformed_b: Optional[Mapping[str, Mapping[str, float]]] = None,
) -> ComparisonReport:
    """Validity/reproducibility comparison of two runs over the same conditions.

    Reports PCC, SRCC and RMSE over the per-condition MOS pairs plus each
    run's mean CI95, per scale. The rank-transformed SRCC needs vote-level
    material (see rank_transform) supplied for both runs; otherwise that
    field stays None.
    """
    ids_a = {s.condition_id for s in a}
    ids_b = {s.condition_id for s in b}
    if ids_a != ids_b:
        only_a = sorted(ids_a - ids_b)
        only_b = sorted(ids_b - ids_a)
        raise ValueError(
            f"condition sets differ: only in a={only_a}, only in b={only_b}"
        )
    order = sorted(ids_a)
    by_id_a = {s.condition_id: s for s in a}
    by_id_b = {s.condition_id: s for s in b}

    report = {}
    for scale in SCALES:
        mos_a = np.array([by_id_a[c].mos(scale) for c in order])
        mos_b = np.array([by_id_b[c].mos(scale) for c in order])
        cis_a = [by_id_a[c].scales[scale].ci95 for c in order]
        cis_b = [by_id_b[c].scales[scale].ci95 for c in order]
        srcc_rt = None
        if transformed_a is not None and transformed_b is not None:
            missing = [c for c in order if c not in transformed_a or c not in transformed_b]
            if missing:
                raise ValueError(f"rank-transformed scores missing for {missing}")
            srcc_rt = spearman(
                [transformed_a[c][scale] for c in order],
                [transformed_b[c][scale] for c in order],
            )
        report[scale] = ScaleComparison(
            pcc=pearson(mos_a, mos_b),
            srcc=spearman(mos_a, mos_b),
            rmse=rmse(mos_a, mos_b),
            average_ci_a=_mean_ci(cis_a),
            average_ci_b=_mean_ci(cis_b),
            srcc_rank_transformed=srcc_rt,
        )
    return ComparisonReport(scales=report)


def _mean_ci(cis: Sequence[Optional[float]]) -> Optional[float]:
    known = [c for c in cis if c is not None]
    return float(np.mean(known)) if known else None


# ---------------------------------------------------------------------------
# wire formats

def scores_to_json(scores: Sequence[ConditionScore]) -> list[dict]:
    return [
        {
            "condition_id": s.condition_id,
            "scales": {
                scale: {
                    "mos": sc.mos,
                    "n": sc.n,
                    "ci95": sc.ci95,
                    "dmos": sc.dmos,
                }
                for scale, sc in s.scales.items()
            },
        }
        for s in scores
    ]


def scores_from_json(payload: Sequence[Mapping]) -> list[ConditionScore]:
    scores = []
    for entry in payload:
        scales = {}
        for scale, sc in entry["scales"].items():
            scales[scale] = ScaleScore(
                mos=float(sc["mos"]),
                n=int(sc["n"]),
                ci95=None if sc.get("ci95") is None else float(sc["ci95"]),
                dmos=None if sc.get("dmos") is None else float(sc["dmos"]),
            )
        scores.append(ConditionScore(condition_id=entry["condition_id"], scales=scales))
    return scores


def scores_to_csv_rows(scores: Sequence[ConditionScore]) -> list[list[str]]:
    """Human table mirroring the BAK/SIG/OVRL MOS-then-DMOS column layout, 2 decimals."""
    rows = [
        [
            "condition_id",
            "mos_bak",
            "mos_sig",
            "mos_ovrl",
            "dmos_bak",
            "dmos_sig",
            "dmos_ovrl",
        ]
    ]
    for s in scores:
        row = [s.condition_id]
        for scale in ("bak", "sig", "ovrl"):
            row.append(f"{s.mos(scale):.2f}")
        for scale in ("bak", "sig", "ovrl"):
            dmos = s.dmos(scale)
            row.append("" if dmos is None else f"{dmos:.2f}")
        rows.append(row)
    return rows


def fit_to_json(fit: RegressionFit) -> dict:
    return {
        "intercept": fit.intercept,
        "coef_sig": fit.coef_sig,
        "coef_bak": fit.coef_bak,
        "adjusted_r2": fit.adjusted_r2,
        "pearson_rho": fit.pearson_rho,
    }


def report_to_json(report: ComparisonReport) -> dict:
    return {
        scale: {
            "pcc": sc.pcc,
            "srcc": sc.srcc,
            "srcc_rank_transformed": sc.srcc_rank_transformed,
            "rmse": sc.rmse,
            "average_ci_a": sc.average_ci_a,
            "average_ci_b": sc.average_ci_b,
        }
        for scale, sc in report.scales.items()
    }
