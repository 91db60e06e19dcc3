"""Synthetic archival collections with a tunable homophily knob.

Every word of every page and title is drawn from the owning box's topic
distribution with probability ``homophily`` and from a background
distribution shared by all boxes otherwise. ``homophily=0`` makes boxes
indistinguishable; ``homophily=1`` with disjoint topics makes them trivially
separable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .corpus import Collection, DocumentRecord
from .labelterms import ClassificationGuide
from .textproc import porter_stem

__all__ = ["SynthParams", "generate", "make_vocabulary"]

_ONSETS = "bdfgklmnprstvz"
_NUCLEI = "aeiou"


@dataclass(frozen=True)
class SynthParams:
    n_boxes: int = 35
    docs_per_box: int = 50
    pages_per_doc: tuple[int, int] = (1, 3)
    words_per_page: int = 228
    title_terms: tuple[int, int] = (1, 26)
    title_mean: float = 6.0
    vocab_size: int = 5000
    topic_terms_per_box: int = 100
    homophily: float = 0.5
    disjoint_topics: bool = False
    zipf_exponent: float = 1.0
    guide_codes_per_box: int = 3
    first_box: int = 1900
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pages_per_doc", tuple(self.pages_per_doc))
        object.__setattr__(self, "title_terms", tuple(self.title_terms))
        if not 0.0 <= self.homophily <= 1.0:
            raise ValueError("homophily must be in [0, 1]")
        counts = (
            self.n_boxes, self.docs_per_box, self.words_per_page, self.vocab_size,
            self.topic_terms_per_box, self.guide_codes_per_box,
            *self.pages_per_doc, *self.title_terms,
        )
        if min(counts) < 1:
            raise ValueError("all counts must be >= 1")
        if self.pages_per_doc[0] > self.pages_per_doc[1] or self.title_terms[0] > self.title_terms[1]:
            raise ValueError("ranges must be (low, high) with low <= high")
        if self.topic_terms_per_box > self.vocab_size:
            raise ValueError("topic_terms_per_box exceeds vocab_size")
        if self.disjoint_topics and self.topic_terms_per_box * self.n_boxes > self.vocab_size:
            raise ValueError("disjoint topics need vocab_size >= topic_terms_per_box * n_boxes")
        if self.seed < 0 or self.first_box < 0:
            raise ValueError("seed and first_box must be non-negative")


def make_vocabulary(size: int) -> list[str]:
    """``size`` distinct pronounceable pseudo-words that Porter leaves intact."""
    words: list[str] = []
    seen: set[str] = set()
    for n_syll in itertools.count(2):
        for sylls in itertools.product(
            (o + v for o in _ONSETS for v in _NUCLEI), repeat=n_syll
        ):
            for coda in ("k", "t", "m"):
                w = "".join(sylls) + coda
                if porter_stem(w) == w and w not in seen:
                    seen.add(w)
                    words.append(w)
                    if len(words) == size:
                        return words


def _zipf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def generate(params: SynthParams) -> tuple[Collection, ClassificationGuide]:
    rng = np.random.default_rng(params.seed)
    vocab = np.array(make_vocabulary(params.vocab_size))
    rng.shuffle(vocab)

    background_p = _zipf(params.vocab_size, params.zipf_exponent)
    topic_p = _zipf(params.topic_terms_per_box, params.zipf_exponent)
    t = params.topic_terms_per_box
    if params.disjoint_topics:
        order = rng.permutation(params.vocab_size)
        topics = [order[i * t:(i + 1) * t] for i in range(params.n_boxes)]
    else:
        topics = [rng.choice(params.vocab_size, size=t, replace=False) for _ in range(params.n_boxes)]

    def words(topic, n: int) -> list[str]:
        from_topic = rng.random(n) < params.homophily
        t_idx = topic[rng.choice(t, size=n, p=topic_p)]
        b_idx = rng.choice(params.vocab_size, size=n, p=background_p)
        return vocab[np.where(from_topic, t_idx, b_idx)].tolist()

    lo_title, hi_title = params.title_terms
    title_lam = max(params.title_mean - lo_title, 0.0)

    codes: dict[str, str] = {}
    notes: dict[str, str] = {}
    docs: list[DocumentRecord] = []
    for i, topic in enumerate(topics):
        box_id = str(params.first_box + i)
        head = f"SYN {i + 1}"
        codes[head] = " ".join(vocab[topic[:3]]).upper()
        labels = []
        for j in range(params.guide_codes_per_box):
            code = f"SYN {i + 1}-{j + 1}"
            sub = topic[3 + 2 * j: 5 + 2 * j]
            codes[code] = (" ".join(vocab[sub]).capitalize() + ".") if len(sub) else head
            notes[code] = "Includes " + " ".join(vocab[topic[rng.choice(t, size=5)]]) + "."
            labels.append(f"{code} BRAZ 01/01/{1963 + (i + j) % 11}")
        for k in range(params.docs_per_box):
            n_pages = int(rng.integers(params.pages_per_doc[0], params.pages_per_doc[1] + 1))
            pages = [" ".join(words(topic, params.words_per_page)) for _ in range(n_pages)]
            n_title = int(np.clip(lo_title + rng.poisson(title_lam), lo_title, hi_title))
            title = " ".join(w.capitalize() for w in words(topic, n_title))
            label = labels[int(rng.integers(len(labels)))]
            docs.append(DocumentRecord(f"{box_id}-{k:03d}", box_id, label, title, pages))

    guide = ClassificationGuide(codes, notes, {"BRAZ": "Brazil"})
    return Collection(tuple(docs)), guide
