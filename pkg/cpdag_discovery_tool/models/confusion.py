from __future__ import annotations

from dataclasses import asdict, dataclass

from cpdag_discovery_tool.errors import ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValidationError(f"confusion counts must be nonnegative, got {self}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def swapped(self) -> ConfusionCounts:
        """Counts with estimate and truth exchanged"""
        return ConfusionCounts(self.tp, self.tn, self.fn, self.fp)


@dataclass(frozen=True)
class MetricsReport:
    """Every metric of one estimated graph against its truth

    `degenerate` is set when any ratio had a zero denominator and was
    resolved to 1.
    """
    adj_npv: float
    adj_f1: float
    adj_precision: float
    adj_recall: float
    ori_precision: float
    ori_g1: float
    ori_npv: float
    ori_specificity: float
    est_edges: int
    true_edges: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)
