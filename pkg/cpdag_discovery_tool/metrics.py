"""Conservative-discovery metrics for adjacencies and orientations"""
from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np
import pandas as pd

from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.confusion import ConfusionCounts, MetricsReport
from cpdag_discovery_tool.models.pdag import PdagMatrix

RATIOS = ("npv", "precision", "recall", "specificity")

# Headline columns and their printed names
HEADLINE = {
    "adj_f1": "Adj. F1",
    "adj_npv": "Adj. NPV",
    "ori_g1": "Ori. G1",
    "ori_precision": "Ori. precision",
}
STRATA = ("all", "q1", "q2", "q3", "q4")
AGGREGATE_COLUMNS = [*HEADLINE, "mean_est_edges", "mean_true_edges", "count"]


def _check_sizes(est: PdagMatrix, truth: PdagMatrix):
    if est.p != truth.p:
        raise ValidationError(f"estimate has {est.p} nodes, truth has {truth.p}")


def adjacency_confusion(est: PdagMatrix, truth: PdagMatrix) -> ConfusionCounts:
    """Confusion counts over the p(p-1)/2 unordered node pairs"""
    _check_sizes(est, truth)
    upper = np.triu(np.ones((est.p, est.p), dtype=bool), k=1)
    a_est = est.adjacency()[upper]
    a_true = truth.adjacency()[upper]
    return ConfusionCounts(tp=int(np.sum(a_est & a_true)),
                           tn=int(np.sum(~a_est & ~a_true)),
                           fp=int(np.sum(a_est & ~a_true)),
                           fn=int(np.sum(~a_est & a_true)))


def orientation_confusion(est: PdagMatrix, truth: PdagMatrix) -> ConfusionCounts:
    """Arrowhead/tail census at both endpoints of every adjacency shared by est and truth

    An arrowhead sits at x on edge x - y when y -> x; an undirected edge has
    tails at both ends.
    """
    _check_sizes(est, truth)
    shared = est.adjacency() & truth.adjacency()
    # head[x, y]: arrowhead at x on the edge between x and y
    head_est = est.directed().T[shared]
    head_true = truth.directed().T[shared]
    return ConfusionCounts(tp=int(np.sum(head_est & head_true)),
                           tn=int(np.sum(~head_est & ~head_true)),
                           fp=int(np.sum(head_est & ~head_true)),
                           fn=int(np.sum(~head_est & head_true)))


def _ratio_terms(counts: ConfusionCounts, which: str) -> Tuple[int, int]:
    if which == "npv":
        return counts.tn, counts.tn + counts.fn
    if which == "precision":
        return counts.tp, counts.tp + counts.fp
    if which == "recall":
        return counts.tp, counts.tp + counts.fn
    if which == "specificity":
        return counts.tn, counts.tn + counts.fp
    raise ValidationError(f"unknown metric {which!r}, expected one of {RATIOS}")


def metric(counts: ConfusionCounts, which: str) -> float:
    """npv, precision, recall or specificity; 1 when the denominator is 0"""
    numerator, denominator = _ratio_terms(counts, which)
    return numerator / denominator if denominator else 1.0


def is_degenerate(counts: ConfusionCounts, which: Iterable[str] = RATIOS) -> bool:
    """Whether any of the named ratios fell back to the 0/0 convention"""
    return any(_ratio_terms(counts, name)[1] == 0 for name in which)


def _harmonic(a: float, b: float) -> float:
    return 2 * a * b / (a + b) if a + b > 0 else 0.0


def f1(counts: ConfusionCounts) -> float:
    return _harmonic(metric(counts, "precision"), metric(counts, "recall"))


def g1(counts: ConfusionCounts) -> float:
    """Harmonic mean of NPV and specificity"""
    return _harmonic(metric(counts, "npv"), metric(counts, "specificity"))


def edge_count(g: PdagMatrix) -> int:
    """Number of adjacent unordered pairs"""
    return int(np.triu(g.adjacency(), k=1).sum())


def evaluate(est: PdagMatrix, truth: PdagMatrix) -> MetricsReport:
    adjacency = adjacency_confusion(est, truth)
    orientation = orientation_confusion(est, truth)
    return MetricsReport(
        adj_npv=metric(adjacency, "npv"),
        adj_f1=f1(adjacency),
        adj_precision=metric(adjacency, "precision"),
        adj_recall=metric(adjacency, "recall"),
        ori_precision=metric(orientation, "precision"),
        ori_g1=g1(orientation),
        ori_npv=metric(orientation, "npv"),
        ori_specificity=metric(orientation, "specificity"),
        est_edges=edge_count(est),
        true_edges=edge_count(truth),
        degenerate=is_degenerate(adjacency) or is_degenerate(orientation),
    )


def reports_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    """One row per report"""
    return pd.DataFrame([report.to_dict() for report in reports],
                        columns=list(MetricsReport.__dataclass_fields__))


def quartile_strata(true_edges) -> np.ndarray:
    """Stratum 0..3 of each value by the quartiles of the values

    Boundaries belong to the upper stratum, so four distinct values always
    land in four strata.
    """
    true_edges = np.asarray(true_edges, dtype=float)
    if true_edges.size == 0:
        return np.zeros(0, dtype=int)
    bounds = np.quantile(true_edges, [0.25, 0.5, 0.75])
    return np.searchsorted(bounds, true_edges, side="right")


def aggregate(reports: Sequence[MetricsReport], exclude_degenerate: bool = False) -> pd.DataFrame:
    """Mean headline metrics over all reports and per quartile of the true edge count

    Quartile boundaries are computed before any degenerate report is
    excluded, so strata stay comparable across settings.

    Returns:
        pd.DataFrame: Indexed by stratum (`all`, `q1`..`q4`) with the
            columns of `AGGREGATE_COLUMNS`; empty strata hold NaN means
            and count 0
    """
    frame = reports_frame(reports)
    frame["stratum"] = [f"q{k + 1}" for k in quartile_strata(frame["true_edges"])]
    if exclude_degenerate:
        frame = frame[~frame["degenerate"].astype(bool)]

    rows = []
    for stratum in STRATA:
        group = frame if stratum == "all" else frame[frame["stratum"] == stratum]
        row = {name: group[name].mean() if len(group) else np.nan for name in HEADLINE}
        row["mean_est_edges"] = group["est_edges"].mean() if len(group) else np.nan
        row["mean_true_edges"] = group["true_edges"].mean() if len(group) else np.nan
        row["count"] = len(group)
        rows.append(row)
    return pd.DataFrame(rows, index=pd.Index(STRATA, name="stratum"), columns=AGGREGATE_COLUMNS)


def closest_threshold(table: pd.DataFrame, setting: str = "setting"):
    """The setting whose mean estimated edge count is closest to the mean true count

    Ties go to the earliest row.
    """
    if table.empty:
        raise ValidationError("cannot calibrate over an empty table")
    gap = (table["mean_est_edges"] - table["mean_true_edges"]).abs()
    return table[setting].iloc[int(np.argmin(gap.to_numpy()))]


def summary_table(frame: pd.DataFrame) -> str:
    """Plain-text table of the four headline metrics"""
    shown = frame[list(HEADLINE)].rename(columns=HEADLINE)
    return shown.to_string(float_format="{:.3f}".format, na_rep="-")
