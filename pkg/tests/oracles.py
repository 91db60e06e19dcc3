"""Brute-force references, deliberately sharing no code with the package."""

import math


def bm25_bruteforce(boxes, query, k1=1.2, b=0.75):
    """Score every box by walking the query occurrence by occurrence.

    ``boxes`` maps box_id -> list of terms. Returns box_id -> score.
    """
    n = len(boxes)
    avg = sum(len(terms) for terms in boxes.values()) / n
    out = {}
    for box, terms in boxes.items():
        contributions = []
        for q in query:
            tf = terms.count(q)
            if tf == 0:
                continue
            df = sum(1 for other in boxes.values() if q in other)
            idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
            denom = tf + k1 * (1 - b + b * len(terms) / avg)
            contributions.append(idf * (tf * (k1 + 1)) / denom)
        out[box] = math.fsum(contributions)
    return out


def rank_bruteforce(boxes, query, k1=1.2, b=0.75, rel_tol=1e-12):
    """Scores within ``rel_tol`` of each other are ties, broken by box number."""
    from functools import cmp_to_key

    scores = bm25_bruteforce(boxes, query, k1, b)
    hits = [(box, s) for box, s in scores.items() if s > 0]

    def cmp(x, y):
        if math.isclose(x[1], y[1], rel_tol=rel_tol):
            return int(x[0]) - int(y[0])
        return -1 if x[1] > y[1] else 1

    return sorted(hits, key=cmp_to_key(cmp))


def rrf_bruteforce(lists, k=60):
    """Reciprocal rank fusion with fractions, ranks from 1."""
    from fractions import Fraction

    total = {}
    for ranked in lists:
        for i, (box, _) in enumerate(ranked):
            total[box] = total.get(box, Fraction(0)) + Fraction(1, k + i + 1)
    return sorted(total.items(), key=lambda e: (-e[1], int(e[0])))
