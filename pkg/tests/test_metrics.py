import numpy as np
import pandas as pd
import pytest

from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.graph import skeleton
from cpdag_discovery_tool.metrics import (
    adjacency_confusion,
    aggregate,
    closest_threshold,
    edge_count,
    evaluate,
    f1,
    g1,
    is_degenerate,
    metric,
    orientation_confusion,
    quartile_strata,
    summary_table,
)
from cpdag_discovery_tool.models.confusion import ConfusionCounts, MetricsReport
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.postprocess import cutoff


def complete(p):
    return PdagMatrix(1 - np.eye(p, dtype=np.uint8))


def report(value, true_edges, degenerate=False):
    return MetricsReport(adj_npv=value, adj_f1=value, adj_precision=value, adj_recall=value,
                         ori_precision=value, ori_g1=value, ori_npv=value, ori_specificity=value,
                         est_edges=true_edges, true_edges=true_edges, degenerate=degenerate)


def test_adjacency_confusion(m2):
    assert adjacency_confusion(m2, m2) == ConfusionCounts(tp=6, tn=4, fp=0, fn=0)
    assert adjacency_confusion(PdagMatrix.empty(5), m2) == ConfusionCounts(tp=0, tn=4, fp=0, fn=6)
    assert adjacency_confusion(complete(5), m2) == ConfusionCounts(tp=6, tn=0, fp=4, fn=0)


def test_orientation_confusion(m2):
    # the two arrowheads at X2, ten tails elsewhere
    assert orientation_confusion(m2, m2) == ConfusionCounts(tp=2, tn=10, fp=0, fn=0)
    assert orientation_confusion(skeleton(m2), m2) == ConfusionCounts(tp=0, tn=10, fp=0, fn=2)
    disjoint = PdagMatrix.from_edges(5, undirected=[(1, 3), (1, 4)])
    assert orientation_confusion(disjoint, m2) == ConfusionCounts()


def test_confusion_totals(m1, m2, rng):
    for _ in range(20):
        est = cutoff(rng.random((5, 5)), 0.5)
        assert adjacency_confusion(est, m2).total == 10
        shared = int(np.triu(est.adjacency() & m2.adjacency()).sum())
        assert orientation_confusion(est, m2).total == 2 * shared


def test_swapping_estimate_and_truth(m1, m2, rng):
    for _ in range(20):
        est = cutoff(rng.random((5, 5)), 0.4)
        assert adjacency_confusion(m2, est) == adjacency_confusion(est, m2).swapped()
        assert orientation_confusion(m2, est) == orientation_confusion(est, m2).swapped()


def test_confusion_rejects_size_mismatch(m2):
    with pytest.raises(ValidationError):
        adjacency_confusion(PdagMatrix.empty(4), m2)
    with pytest.raises(ValidationError):
        orientation_confusion(PdagMatrix.empty(4), m2)


def test_metric_ratios():
    assert metric(ConfusionCounts(tn=4, fn=6), "npv") == pytest.approx(0.4)
    assert metric(ConfusionCounts(tp=6, fp=4), "precision") == pytest.approx(0.6)
    assert metric(ConfusionCounts(tp=6, fn=2), "recall") == pytest.approx(0.75)
    assert metric(ConfusionCounts(tn=3, fp=1), "specificity") == pytest.approx(0.75)
    with pytest.raises(ValidationError):
        metric(ConfusionCounts(), "accuracy")


def test_degenerate_ratios_are_one(m2):
    # a complete estimate claims no absences, so its NPV is 1 by convention
    counts = adjacency_confusion(complete(5), m2)
    assert metric(counts, "npv") == 1.0
    assert is_degenerate(counts, ["npv"])
    assert not is_degenerate(counts, ["precision", "recall"])


def test_f1():
    assert f1(ConfusionCounts(tp=6, tn=4)) == 1.0
    assert f1(ConfusionCounts(tp=6, fp=4)) == pytest.approx(0.75)
    assert f1(ConfusionCounts(tn=4, fn=6)) == 0.0


def test_g1():
    assert g1(ConfusionCounts(tp=2, tn=10)) == 1.0
    assert g1(ConfusionCounts(tn=10, fn=2)) == pytest.approx(20 / 22, abs=1e-12)
    assert g1(ConfusionCounts()) == 1.0
    assert is_degenerate(ConfusionCounts())


def test_edge_count(m2):
    assert edge_count(m2) == 6
    assert edge_count(PdagMatrix.empty(5)) == 0
    assert edge_count(complete(5)) == 10


def test_evaluate_identical_graphs(m2):
    result = evaluate(m2, m2)
    for name in ("adj_npv", "adj_f1", "adj_precision", "adj_recall",
                 "ori_precision", "ori_g1", "ori_npv", "ori_specificity"):
        assert getattr(result, name) == 1.0
    assert result.est_edges == result.true_edges == 6
    assert not result.degenerate


def test_evaluate_undirected_skeleton(m2):
    result = evaluate(skeleton(m2), m2)
    assert result.adj_f1 == 1.0
    assert result.adj_npv == 1.0
    # no arrowheads claimed, so orientation precision falls back to 1
    assert result.ori_precision == 1.0
    assert result.ori_g1 == pytest.approx(20 / 22, abs=1e-12)
    assert result.degenerate


def test_evaluate_improper_estimate(m2):
    est = PdagMatrix.from_edges(5, directed=[(0, 1), (1, 2), (2, 0)])
    result = evaluate(est, m2)
    assert 0.0 <= result.adj_f1 <= 1.0
    assert result.est_edges == 3


def test_quartile_strata():
    assert quartile_strata([2, 4, 6, 8]).tolist() == [0, 1, 2, 3]
    assert quartile_strata([5, 5, 5]).tolist() == [3, 3, 3]
    assert quartile_strata([]).size == 0


def test_aggregate_means_and_strata():
    table = aggregate([report(0.4, 2), report(0.6, 4), report(0.2, 6), report(1.0, 8)])
    assert list(table.index) == ["all", "q1", "q2", "q3", "q4"]
    assert table.loc["all", "adj_f1"] == pytest.approx(0.55)
    assert table.loc["all", "count"] == 4
    assert table["count"].iloc[1:].tolist() == [1, 1, 1, 1]
    assert table.loc["q2", "ori_g1"] == pytest.approx(0.6)
    assert table.loc["q4", "mean_true_edges"] == 8

    pair = aggregate([report(0.4, 3), report(0.6, 3)])
    assert pair.loc["all", "adj_npv"] == pytest.approx(0.5)


def test_aggregate_can_exclude_degenerate_reports():
    reports = [report(0.4, 2), report(1.0, 4, degenerate=True)]
    assert aggregate(reports).loc["all", "adj_f1"] == pytest.approx(0.7)
    kept = aggregate(reports, exclude_degenerate=True)
    assert kept.loc["all", "adj_f1"] == pytest.approx(0.4)
    assert kept.loc["all", "count"] == 1
    assert np.isnan(kept.loc["q4", "adj_f1"])


def test_closest_threshold():
    table = pd.DataFrame({"setting": [0.1, 0.2, 0.3, 0.4],
                          "mean_est_edges": [9.0, 7.5, 6.5, 5.5],
                          "mean_true_edges": [6.0, 6.0, 6.0, 6.0]})
    # 0.3 and 0.4 tie; the earlier setting wins
    assert closest_threshold(table) == 0.3
    with pytest.raises(ValidationError):
        closest_threshold(table.iloc[:0])


def test_summary_table_headers():
    text = summary_table(aggregate([report(0.5, 3)]))
    for header in ("Adj. F1", "Adj. NPV", "Ori. G1", "Ori. precision"):
        assert header in text
    assert "0.500" in text
