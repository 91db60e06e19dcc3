"""Reciprocal rank fusion of ranked box lists."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .boxindex import RankedList, box_order_key

__all__ = ["FusionParams", "rrf", "rrf_exact"]


@dataclass(frozen=True)
class FusionParams:
    discount: float = 60

    def __post_init__(self):
        if not self.discount > 0:
            raise ValueError(f"discount must be > 0, got {self.discount}")


def _fused_scores(lists, discount, one):
    scores = {}
    for ranked in lists:
        for position, (box, _score) in enumerate(ranked, start=1):
            scores[box] = scores.get(box, 0 * one) + one / (discount + position)
    return scores


def _ordered(scores) -> list:
    return sorted(scores.items(), key=lambda e: (-e[1], box_order_key(e[0])))


def rrf(lists: Sequence[RankedList], params: FusionParams | None = None) -> RankedList:
    """Fuse ranked lists: each box scores ``sum 1 / (discount + rank)``, rank from 1.

    Empty inputs add nothing, so one non-empty list fused with empties comes
    back in its own order, and all-empty inputs give an empty list. Only the
    input ranks matter; input scores are ignored.
    """
    params = params or FusionParams()
    # Exact sums order the boxes; floats are reported. Avoids ties that differ
    # only by float summation order across input permutations.
    exact = _fused_scores(lists, Fraction(params.discount), Fraction(1))
    return [(box, float(s)) for box, s in _ordered(exact)]


def rrf_exact(lists: Sequence[RankedList], discount: int | Fraction = 60) -> list[tuple[str, Fraction]]:
    """Same as :func:`rrf` but with rational scores."""
    return _ordered(_fused_scores(lists, Fraction(discount), Fraction(1)))
