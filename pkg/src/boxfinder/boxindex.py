"""BM25 inverted index whose retrievable items are boxes.

Each box is represented by one concatenated term sequence. Scoring uses

    sum_t qtf(t) * idf(t) * tf(t,b) * (k1 + 1) / (tf(t,b) + k1 * (1 - b + b * len(b) / avglen))

with the non-negative ``idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))``.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "BM25Params",
    "BoxRepresentation",
    "BoxIndex",
    "RankedList",
    "IndexBuildError",
    "INDEX_FORMAT",
    "INDEX_VERSION",
    "build_index",
    "score",
    "rank",
    "order_ranked",
    "TIE_REL_TOL",
    "explain",
    "box_order_key",
    "save_index",
    "load_index",
]

INDEX_FORMAT = "boxfinder-index"
INDEX_VERSION = 1


class IndexBuildError(ValueError):
    pass


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 >= 0:
            raise ValueError(f"k1 must be >= 0, got {self.k1}")
        if not 0 <= self.b <= 1:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True)
class BoxRepresentation:
    """Terms standing in for a box, plus which (doc_id, pages_used) made them."""

    box_id: str
    terms: tuple[str, ...]
    provenance: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(
            self, "provenance", tuple((str(d), int(p)) for d, p in self.provenance)
        )


def box_order_key(box_id: str):
    """Ascending integer box id; non-numeric ids sort after, by text."""
    try:
        return (0, int(box_id), box_id)
    except ValueError:
        return (1, 0, box_id)


RankedList = list  # list[tuple[str, float]], best first

TIE_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BoxIndex:
    representations: dict[str, BoxRepresentation]
    postings: dict[str, dict[str, int]]
    doc_lengths: dict[str, int]
    avg_length: float
    n_boxes: int
    params: BM25Params
    # term -> {box_id: per-occurrence BM25 weight}, precomputed at build time
    _weights: dict[str, dict[str, float]] = field(repr=False, default_factory=dict)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(1.0 + (self.n_boxes - df + 0.5) / (df + 0.5))

    def term_weight(self, term: str, box_id: str) -> float:
        """Contribution of one query occurrence of ``term`` to ``box_id``'s score."""
        return self._weights.get(term, {}).get(box_id, 0.0)


def build_index(
    reps: Iterable[BoxRepresentation], params: BM25Params | None = None
) -> BoxIndex:
    params = params or BM25Params()
    reps = list(reps)
    by_box: dict[str, BoxRepresentation] = {}
    for r in reps:
        if r.box_id in by_box:
            raise IndexBuildError(f"duplicate box_id {r.box_id!r}")
        by_box[r.box_id] = r
    if not any(r.terms for r in reps):
        raise IndexBuildError("empty index")

    postings: dict[str, dict[str, int]] = {}
    lengths: dict[str, int] = {}
    for r in reps:
        lengths[r.box_id] = len(r.terms)
        for term, tf in Counter(r.terms).items():
            postings.setdefault(term, {})[r.box_id] = tf
    n = len(reps)
    avg = sum(lengths.values()) / n

    k1, b = params.k1, params.b
    norm = {box: k1 * (1.0 - b + b * length / avg) for box, length in lengths.items()}
    weights: dict[str, dict[str, float]] = {}
    for term, plist in postings.items():
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        weights[term] = {
            box: idf * tf * (k1 + 1.0) / (tf + norm[box]) for box, tf in plist.items()
        }
    return BoxIndex(by_box, postings, lengths, avg, n, params, weights)


def score(index: BoxIndex, query: Sequence[str], box_id: str) -> float:
    if box_id not in index.doc_lengths:
        raise KeyError(f"unknown box_id {box_id!r}")
    return math.fsum(
        qtf * index.term_weight(term, box_id) for term, qtf in Counter(query).items()
    )


def rank(index: BoxIndex, query: Sequence[str]) -> RankedList:
    """Boxes sharing at least one term with ``query``, best first.

    Ties go to the lower box number. Boxes with no matching term are left out,
    so an empty or unmatched query yields an empty list.
    """
    parts: dict[str, list[float]] = {}
    for term, qtf in Counter(query).items():
        plist = index._weights.get(term)
        if not plist:
            continue
        for box, w in plist.items():
            parts.setdefault(box, []).append(qtf * w)
    # fsum is exactly rounded, so equal contributions tie regardless of order.
    scores = {box: math.fsum(ws) for box, ws in parts.items()}
    entries = [(box, s) for box, s in scores.items() if s > 0]
    return order_ranked(entries)


def order_ranked(entries, rel_tol: float = TIE_REL_TOL) -> RankedList:
    """Sort by score, best first; scores within ``rel_tol`` count as tied.

    Tied boxes go in ascending box-number order. The tolerance absorbs
    last-bit float differences between mathematically equal scores (e.g. two
    boxes made only of the query term when ``b = 1``).
    """
    ordered = sorted(entries, key=lambda e: (-e[1], box_order_key(e[0])))
    out: list = []
    i = 0
    while i < len(ordered):
        lead = ordered[i][1]
        j = i + 1
        while j < len(ordered) and lead - ordered[j][1] <= rel_tol * abs(lead):
            j += 1
        out.extend(sorted(ordered[i:j], key=lambda e: box_order_key(e[0])))
        i = j
    return out


def explain(index: BoxIndex, query: Sequence[str], box_id: str) -> list[tuple[str, float]]:
    """Per-term score contributions for ``box_id``, largest first."""
    out = []
    for term, qtf in sorted(Counter(query).items()):
        w = index.term_weight(term, box_id)
        if w:
            out.append((term, qtf * w))
    out.sort(key=lambda e: (-e[1], e[0]))
    return out


# --- persistence ---------------------------------------------------------

def index_to_dict(index: BoxIndex) -> dict:
    ordered = sorted(index.representations, key=box_order_key)
    return {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "params": {"k1": index.params.k1, "b": index.params.b},
        "n_boxes": index.n_boxes,
        "avg_length": index.avg_length,
        "boxes": [
            {
                "box_id": box,
                "length": index.doc_lengths[box],
                "provenance": [list(p) for p in index.representations[box].provenance],
                "terms": list(index.representations[box].terms),
            }
            for box in ordered
        ],
        "postings": {t: index.postings[t] for t in sorted(index.postings)},
    }


def index_from_dict(data: dict) -> BoxIndex:
    if data.get("format") != INDEX_FORMAT:
        raise ValueError("not a boxfinder index file")
    if data.get("version") != INDEX_VERSION:
        raise ValueError(f"unsupported index version {data.get('version')!r}")
    params = BM25Params(**data["params"])
    reps = [
        BoxRepresentation(b["box_id"], b["terms"], [tuple(p) for p in b["provenance"]])
        for b in data["boxes"]
    ]
    index = build_index(reps, params)
    if index.postings != data["postings"]:
        raise ValueError("index file postings disagree with stored box terms")
    return index


def save_index(index: BoxIndex, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(index_to_dict(index), fh, ensure_ascii=False)
        fh.write("\n")


def load_index(path: str | os.PathLike) -> BoxIndex:
    with open(path, encoding="utf-8") as fh:
        return index_from_dict(json.load(fh))
