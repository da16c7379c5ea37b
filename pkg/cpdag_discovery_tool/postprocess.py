"""From probability matrices to (pseudo) adjacency matrices"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from cpdag_discovery_tool.config import THRESHOLDS
from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.graph import apply_meek_rules, is_proper_cpdag, strip_to_pattern
from cpdag_discovery_tool.models.pdag import PdagMatrix

logger = logging.getLogger(__name__)

__all__ = ["Threshold", "DEFAULT_THRESHOLDS", "cutoff", "strip_to_pattern", "bpco"]


@dataclass(frozen=True)
class Threshold:
    tau: float

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValidationError(f"threshold must lie in (0, 1), got {self.tau}")

    def __float__(self):
        return float(self.tau)


DEFAULT_THRESHOLDS = tuple(Threshold(tau) for tau in THRESHOLDS)


def _probabilities(o) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise ValidationError(f"probability matrix must be square, got shape {o.shape}")
    return o


def cutoff(o, tau: Union[float, Threshold]) -> PdagMatrix:
    """Mark m[i, j] = 1 exactly where o[i, j] > tau; the diagonal is ignored

    The result need not be a proper CPDAG.
    """
    tau = Threshold(float(tau))
    o = _probabilities(o)
    m = (o > tau.tau).astype(np.uint8)
    np.fill_diagonal(m, 0)
    return PdagMatrix(m)


def bpco(o, tau: Union[float, Threshold]) -> PdagMatrix:
    """Backwards PC-orientation: greedily repair the cutoff graph into a proper CPDAG

    Starting from M = cutoff(o, tau), returned as is when proper, each pass
    runs two steps until a proper CPDAG turns up:

      1. remove: zero the remaining mark of M with the lowest probability
         (ties row-major), return M if proper;
      2. re-orient: keep only M's skeleton and v-structures, close under
         Meek's rules, return the result if proper, otherwise discard it.

    Marks are removed one cell at a time, so one half of an undirected edge
    can go while the other stays. The skeleton only ever shrinks and the
    empty graph is proper, so the loop ends.

    Args:
        o: p x p probability matrix
        tau (Union[float, Threshold]): Threshold in (0, 1)

    Returns:
        PdagMatrix: A proper CPDAG whose skeleton is inside cutoff's
    """
    o = _probabilities(o)
    current = cutoff(o, tau)
    if is_proper_cpdag(current):
        return current

    m = current.m.copy()
    flat = m.reshape(-1)
    # row-major order of the cells, ranked by probability
    ranked = np.argsort(o, axis=None, kind="stable")
    iteration = 0
    while True:
        lowest = next(cell for cell in ranked if flat[cell])
        flat[lowest] = 0
        iteration += 1
        current = PdagMatrix(m)
        if is_proper_cpdag(current):
            logger.debug("bpco: proper after %d removals", iteration)
            return current

        reoriented = apply_meek_rules(strip_to_pattern(current))
        if is_proper_cpdag(reoriented):
            logger.debug("bpco: proper after re-orientation, %d removals", iteration)
            return reoriented
