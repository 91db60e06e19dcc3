"""scikit-learn compatible wrappers.

``BoxRanker`` treats box finding as classification: ``fit`` takes document
texts and the box each came from, concatenates the texts per box into one
BM25 item, and ``predict`` returns the top-ranked box for each query text.
``LabelExpander`` and ``TextAnalyzer`` are stateless transformers, so the
pieces drop into a ``Pipeline``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .boxindex import BM25Params, BoxRepresentation, box_order_key, build_index, explain, rank
from .labelterms import ClassificationGuide, LabelExpansionOptions, box_label_text
from .textproc import analyze

__all__ = ["check_texts", "check_box_ids", "TextAnalyzer", "LabelExpander", "BoxRanker"]


def check_texts(X, name: str = "X") -> list:
    """Validate a 1-d collection of texts (str) or pre-analyzed term lists."""
    if isinstance(X, str):
        raise TypeError(f"{name} must be a sequence of texts, not a single string")
    if isinstance(X, np.ndarray):
        if X.ndim != 1:
            raise ValueError(f"{name} must be 1-dimensional, got shape {X.shape}")
        X = X.tolist()
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"{name} must be iterable, got {type(X).__name__}") from None
    for i, item in enumerate(items):
        if isinstance(item, str):
            continue
        if isinstance(item, (list, tuple)) and all(isinstance(t, str) for t in item):
            continue
        raise TypeError(f"{name}[{i}] must be a string or a list of terms")
    return items


def check_box_ids(y, n: int) -> list[str]:
    ids = [str(v) for v in (y.tolist() if isinstance(y, np.ndarray) else y)]
    if len(ids) != n:
        raise ValueError(f"X and y have inconsistent lengths: {n} != {len(ids)}")
    return ids


def _terms(item) -> list[str]:
    return analyze(item) if isinstance(item, str) else list(item)


class TextAnalyzer(BaseEstimator, TransformerMixin):
    """Tokenize + Porter-stem each text into a term list."""

    def fit(self, X, y=None):
        check_texts(X)
        return self

    def transform(self, X):
        return [_terms(x) for x in check_texts(X)]


class LabelExpander(BaseEstimator, TransformerMixin):
    """Map each box's folder labels to expanded guide text.

    Each element of ``X`` is an iterable of raw folder-label strings (one
    box); the output is one text per box.
    """

    def __init__(self, guide: ClassificationGuide | None = None, include_scope_notes=False,
                 suppressed_countries=("BRAZ",)):
        self.guide = guide
        self.include_scope_notes = include_scope_notes
        self.suppressed_countries = suppressed_countries

    def fit(self, X, y=None):
        if self.guide is None:
            raise ValueError("LabelExpander needs a classification guide")
        return self

    def transform(self, X):
        if self.guide is None:
            raise ValueError("LabelExpander needs a classification guide")
        opts = LabelExpansionOptions(self.include_scope_notes, frozenset(self.suppressed_countries))
        out = []
        for labels in X:
            if isinstance(labels, str):
                labels = [labels]
            out.append(box_label_text(labels, self.guide, opts))
        return out


class BoxRanker(BaseEstimator):
    """BM25 ranking of boxes, fitted from (text, box_id) pairs.

    Parameters
    ----------
    k1, b : float
        BM25 term-frequency saturation and length normalization.

    Attributes
    ----------
    classes_ : ndarray of str
        Box ids in ascending numeric order.
    index_ : BoxIndex
    """

    def __init__(self, k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b

    def fit(self, X, y):
        X = check_texts(X)
        y = check_box_ids(y, len(X))
        grouped: dict[str, list[str]] = {}
        for item, box in zip(X, y):
            grouped.setdefault(box, []).extend(_terms(item))
        boxes = sorted(grouped, key=box_order_key)
        reps = [BoxRepresentation(box, grouped[box]) for box in boxes]
        self.index_ = build_index(reps, BM25Params(self.k1, self.b))
        self.classes_ = np.array(boxes, dtype=object)
        return self

    def rank(self, query):
        """Ranked ``(box_id, score)`` list for a single query."""
        check_is_fitted(self, "index_")
        return rank(self.index_, _terms(query))

    def explain(self, query, box_id):
        check_is_fitted(self, "index_")
        return explain(self.index_, _terms(query), str(box_id))

    def decision_function(self, X) -> np.ndarray:
        """BM25 scores, shape (n_queries, n_boxes), columns follow ``classes_``."""
        check_is_fitted(self, "index_")
        X = check_texts(X)
        col = {box: j for j, box in enumerate(self.classes_)}
        out = np.zeros((len(X), len(col)))
        for i, q in enumerate(X):
            for box, s in rank(self.index_, _terms(q)):
                out[i, col[box]] = s
        return out

    def predict(self, X) -> np.ndarray:
        """Top box per query, or None where no query term matched."""
        return np.array([top[0] if top else None for top in self.predict_top_k(X, 1)], dtype=object)

    def predict_top_k(self, X, k: int = 2) -> list[list[str]]:
        check_is_fitted(self, "index_")
        return [[box for box, _ in rank(self.index_, _terms(q))[:k]] for q in check_texts(X)]

    def score(self, X, y) -> float:
        """Top-1 accuracy."""
        X = check_texts(X)
        y = check_box_ids(y, len(X))
        pred = self.predict(X)
        return float(np.mean([p == t for p, t in zip(pred, y)])) if y else 0.0

