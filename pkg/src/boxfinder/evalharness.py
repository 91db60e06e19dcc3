"""Randomized Top-k evaluation of box ranking.

One trial samples ``samples_per_box`` representation documents per box
(without replacement), builds the box index, then draws ``queries_per_trial``
query boxes with replacement and, for each, one query document that was not
used to represent its box. An experiment repeats the trial ``repetitions``
times and reports the mean and standard deviation of Top-1, Top-2 and
adjacent-box (rank-1 box number within one of the truth) percentages.

Every trial draws from its own random streams derived from
``(master_seed, trial_index)``, so results do not depend on how trials are
scheduled across workers.
"""

from __future__ import annotations

import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .boxindex import (
    BM25Params,
    BoxIndex,
    BoxRepresentation,
    IndexBuildError,
    RankedList,
    build_index,
    rank,
)
from .corpus import Collection, DocumentRecord
from .fusion import FusionParams, rrf
from .labelterms import ClassificationGuide, LabelExpansionOptions, box_label_text
from .textproc import analyze

__all__ = [
    "QUERY_MODES",
    "INDEX_SOURCES",
    "SWEEP_SAMPLES",
    "SWEEP_PAGES",
    "ConfigError",
    "IneligibleDocumentError",
    "ExperimentConfig",
    "QueryRecord",
    "TrialResult",
    "MetricsReport",
    "PreparedCollection",
    "select_representation_docs",
    "sample_representations",
    "make_query",
    "query_hits",
    "trial_streams",
    "run_trial",
    "run_experiment",
    "run_sweep",
    "format_table",
]

QUERY_MODES = ("title", "qbe")
INDEX_SOURCES = ("ocr", "labels", "fusion")
SWEEP_SAMPLES = (1, 2, 3, 4, 6, 8, 10)
SWEEP_PAGES = (1, 2, 3, 4, None)


class ConfigError(ValueError):
    pass


class IneligibleDocumentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    samples_per_box: int = 3
    page_limit: int | None = 1  # None means every page
    query_mode: str = "qbe"
    index_source: str = "ocr"
    include_scope_notes: bool = False
    suppressed_countries: tuple[str, ...] = ("BRAZ",)
    queries_per_trial: int = 100
    repetitions: int = 100
    bm25: BM25Params = field(default_factory=BM25Params)
    fusion: FusionParams = field(default_factory=FusionParams)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "suppressed_countries", tuple(sorted(self.suppressed_countries)))
        if self.samples_per_box < 1:
            raise ConfigError("samples_per_box must be >= 1")
        if self.page_limit is not None and self.page_limit < 1:
            raise ConfigError("page_limit must be >= 1 or None for all pages")
        if self.query_mode not in QUERY_MODES:
            raise ConfigError(f"query_mode must be one of {QUERY_MODES}")
        if self.index_source not in INDEX_SOURCES:
            raise ConfigError(f"index_source must be one of {INDEX_SOURCES}")
        if self.queries_per_trial < 1 or self.repetitions < 1:
            raise ConfigError("queries_per_trial and repetitions must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")

    @property
    def label_options(self) -> LabelExpansionOptions:
        return LabelExpansionOptions(self.include_scope_notes, frozenset(self.suppressed_countries))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["page_limit"] = "all" if self.page_limit is None else self.page_limit
        d["suppressed_countries"] = list(self.suppressed_countries)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "bm25" in d and isinstance(d["bm25"], dict):
            d["bm25"] = BM25Params(**d["bm25"])
        if "fusion" in d and isinstance(d["fusion"], dict):
            d["fusion"] = FusionParams(**d["fusion"])
        if d.get("page_limit") == "all":
            d["page_limit"] = None
        if "suppressed_countries" in d:
            d["suppressed_countries"] = tuple(d["suppressed_countries"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class QueryRecord:
    true_box: str
    doc_id: str
    ranked: RankedList


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    representation: dict[str, tuple[str, ...]]
    queries: tuple[QueryRecord, ...]
    top1: int
    top2: int
    adjacent: int

    @property
    def n_queries(self) -> int:
        return len(self.queries)


@dataclass(frozen=True)
class MetricsReport:
    config: ExperimentConfig
    trial_counts: tuple[tuple[int, int, int, int], ...]  # (top1, top2, adjacent, n)

    def _percentages(self, column: int) -> list[float]:
        return [100.0 * row[column] / row[3] for row in self.trial_counts]

    def _mean(self, column: int) -> float:
        return statistics.fmean(self._percentages(column))

    def _std(self, column: int) -> float:
        vals = self._percentages(column)
        return statistics.stdev(vals) if len(vals) > 1 else 0.0

    top1 = property(lambda self: self._mean(0))
    top2 = property(lambda self: self._mean(1))
    adjacent = property(lambda self: self._mean(2))
    top1_std = property(lambda self: self._std(0))
    top2_std = property(lambda self: self._std(1))
    adjacent_std = property(lambda self: self._std(2))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "mean": {"top1": self.top1, "top2": self.top2, "adjacent": self.adjacent},
            "std": {"top1": self.top1_std, "top2": self.top2_std, "adjacent": self.adjacent_std},
            "trials": [
                {"top1": a, "top2": b, "adjacent": c, "queries": n}
                for a, b, c, n in self.trial_counts
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


# --- building blocks -----------------------------------------------------

def select_representation_docs(
    c: Collection, box_id: str, n: int, rng: np.random.Generator
) -> list[str]:
    """``min(n, box size)`` distinct doc ids, uniformly without replacement."""
    ids = c.boxes[box_id]
    k = min(n, len(ids))
    picks = rng.choice(len(ids), size=k, replace=False)
    return [ids[i] for i in picks]


def query_hits(ranked: RankedList, true_box: str) -> tuple[int, int, int]:
    """(Top-1, Top-2, adjacent) hits for one query; an empty ranking scores nothing.

    Adjacent credits a rank-1 box whose number is within one of the truth.
    """
    top = [b for b, _ in ranked[:2]]
    if not top:
        return 0, 0, 0
    return (
        int(top[0] == true_box),
        int(true_box in top),
        int(abs(int(top[0]) - int(true_box)) <= 1),
    )


def _page_slice(pages: Sequence, page_limit: int | None):
    return pages if page_limit is None else pages[:page_limit]


def make_query(doc: DocumentRecord, mode: str, page_limit: int | None = 1) -> list[str]:
    if mode == "title":
        if not doc.title.strip():
            raise IneligibleDocumentError(f"document {doc.doc_id!r} has no title")
        return analyze(doc.title)
    if mode == "qbe":
        return analyze(" ".join(_page_slice(doc.pages, page_limit)))
    raise ConfigError(f"unknown query mode {mode!r}")


class PreparedCollection:
    """A collection with every page and title analyzed once, plus the label index."""

    def __init__(
        self,
        c: Collection,
        guide: ClassificationGuide | None = None,
        *,
        label_options: LabelExpansionOptions | None = None,
        bm25: BM25Params | None = None,
    ):
        self.collection = c
        self.box_ids = c.box_ids
        self.page_terms = {
            d.doc_id: tuple(tuple(analyze(p)) for p in d.pages) for d in c.documents
        }
        self.title_terms = {d.doc_id: tuple(analyze(d.title)) for d in c.documents}
        self.guide = guide
        self.label_index: BoxIndex | None = None
        if guide is not None:
            reps = [
                BoxRepresentation(b, analyze(box_label_text(c.folders[b], guide, label_options)))
                for b in self.box_ids
            ]
            try:
                self.label_index = build_index(reps, bm25)
            except IndexBuildError as exc:
                raise ConfigError(f"cannot build label index: {exc}") from None

    def terms(self, doc_id: str, page_limit: int | None) -> list[str]:
        out: list[str] = []
        for page in _page_slice(self.page_terms[doc_id], page_limit):
            out.extend(page)
        return out

    def query_terms(self, doc_id: str, mode: str, page_limit: int | None) -> list[str]:
        if mode == "title":
            return list(self.title_terms[doc_id])
        return self.terms(doc_id, page_limit)


def trial_streams(master_seed: int, trial_index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (representation, query) generators for one trial."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    rep_seq, query_seq = seq.spawn(2)
    return np.random.Generator(np.random.PCG64(rep_seq)), np.random.Generator(np.random.PCG64(query_seq))


def sample_representations(
    prep: PreparedCollection,
    samples_per_box: int,
    page_limit: int | None,
    rng: np.random.Generator,
    exclude: frozenset[str] = frozenset(),
) -> list[BoxRepresentation]:
    """One representation per box from sampled documents, boxes in numeric order.

    Documents in ``exclude`` are never sampled (e.g. a held-out example query).
    """
    c = prep.collection
    reps = []
    for box in prep.box_ids:
        if exclude:
            pool = Collection(tuple(d for d in c.documents_in(box) if d.doc_id not in exclude))
            chosen = select_representation_docs(pool, box, samples_per_box, rng) if len(pool) else []
        else:
            chosen = select_representation_docs(c, box, samples_per_box, rng)
        terms: list[str] = []
        provenance = []
        for doc_id in chosen:
            pages = _page_slice(prep.page_terms[doc_id], page_limit)
            for page in pages:
                terms.extend(page)
            provenance.append((doc_id, len(pages)))
        reps.append(BoxRepresentation(box, terms, provenance))
    return reps


def _prepare(c, cfg, guide) -> PreparedCollection:
    if cfg.index_source in ("labels", "fusion") and guide is None:
        raise ConfigError(f"index_source {cfg.index_source!r} needs a classification guide")
    return PreparedCollection(
        c,
        guide if cfg.index_source != "ocr" else None,
        label_options=cfg.label_options,
        bm25=cfg.bm25,
    )


def _run_trial(prep: PreparedCollection, cfg: ExperimentConfig, trial_index: int) -> TrialResult:
    c = prep.collection
    rep_rng, query_rng = trial_streams(cfg.master_seed, trial_index)

    representation: dict[str, tuple[str, ...]] = {}
    ocr_index = None
    if cfg.index_source in ("ocr", "fusion"):
        reps = sample_representations(prep, cfg.samples_per_box, cfg.page_limit, rep_rng)
        representation = {r.box_id: tuple(d for d, _ in r.provenance) for r in reps}
        try:
            ocr_index = build_index(reps, cfg.bm25)
        except IndexBuildError as exc:
            raise ConfigError(f"cannot build OCR index: {exc}") from None

    eligible: dict[str, list[str]] = {}
    for box in prep.box_ids:
        used = set(representation.get(box, ()))
        docs = [
            d for d in c.boxes[box]
            if d not in used and (cfg.query_mode != "title" or c[d].title.strip())
        ]
        if docs:
            eligible[box] = docs
    query_boxes = [b for b in prep.box_ids if b in eligible]
    if not query_boxes:
        raise ConfigError("no box has a document eligible as a query")

    records = []
    top1 = top2 = adjacent = 0
    for _ in range(cfg.queries_per_trial):
        box = query_boxes[int(query_rng.integers(len(query_boxes)))]
        pool = eligible[box]
        doc_id = pool[int(query_rng.integers(len(pool)))]
        query = prep.query_terms(doc_id, cfg.query_mode, cfg.page_limit)
        if cfg.index_source == "ocr":
            ranked = rank(ocr_index, query)
        elif cfg.index_source == "labels":
            ranked = rank(prep.label_index, query)
        else:
            ranked = rrf([rank(ocr_index, query), rank(prep.label_index, query)], cfg.fusion)
        h1, h2, ha = query_hits(ranked, box)
        top1 += h1
        top2 += h2
        adjacent += ha
        records.append(QueryRecord(box, doc_id, ranked))
    return TrialResult(trial_index, representation, tuple(records), top1, top2, adjacent)


def run_trial(
    c: Collection,
    cfg: ExperimentConfig,
    trial_index: int,
    guide: ClassificationGuide | None = None,
    *,
    prepared: PreparedCollection | None = None,
) -> TrialResult:
    """Run one trial; deterministic given ``(cfg.master_seed, trial_index)``."""
    prep = prepared or _prepare(c, cfg, guide)
    return _run_trial(prep, cfg, trial_index)


# Worker-process state, set once per worker by the pool initializer.
_WORKER: dict = {}


def _init_worker(prep, cfg):
    _WORKER["prep"] = prep
    _WORKER["cfg"] = cfg


def _worker_counts(trial_index: int):
    t = _run_trial(_WORKER["prep"], _WORKER["cfg"], trial_index)
    return (t.top1, t.top2, t.adjacent, t.n_queries)


def run_experiment(
    c: Collection,
    cfg: ExperimentConfig,
    guide: ClassificationGuide | None = None,
    *,
    n_jobs: int = 1,
    prepared: PreparedCollection | None = None,
) -> MetricsReport:
    """Repeat the trial ``cfg.repetitions`` times and summarize.

    ``n_jobs > 1`` spreads trials over worker processes; the report is the
    same either way.
    """
    prep = prepared or _prepare(c, cfg, guide)
    trials = range(cfg.repetitions)
    if n_jobs > 1 and cfg.repetitions > 1:
        with ProcessPoolExecutor(
            max_workers=n_jobs, initializer=_init_worker, initargs=(prep, cfg)
        ) as pool:
            counts = list(pool.map(_worker_counts, trials, chunksize=max(1, cfg.repetitions // (4 * n_jobs))))
    else:
        counts = []
        for t in trials:
            r = _run_trial(prep, cfg, t)
            counts.append((r.top1, r.top2, r.adjacent, r.n_queries))
    return MetricsReport(cfg, tuple(counts))


def run_sweep(
    c: Collection,
    cfg: ExperimentConfig,
    guide: ClassificationGuide | None = None,
    *,
    samples: Sequence[int] = SWEEP_SAMPLES,
    pages: Sequence[int | None] = SWEEP_PAGES,
    n_jobs: int = 1,
) -> dict[tuple[int, int | None], MetricsReport]:
    """Run the samples x page-limit grid, sharing one prepared collection."""
    prep = _prepare(c, cfg, guide)
    return {
        (n, p): run_experiment(
            c, replace(cfg, samples_per_box=n, page_limit=p), n_jobs=n_jobs, prepared=prep
        )
        for n in samples
        for p in pages
    }


def _page_heading(p: int | None) -> str:
    if p is None:
        return "All Pages"
    return "First Page" if p == 1 else f"<= {p} Pages"


def format_table(reports: dict[tuple[int, int | None], MetricsReport]) -> str:
    """Grid with one row per sample count and Top-1/Top-2 per page limit."""
    samples = sorted({n for n, _ in reports})
    pages = sorted({p for _, p in reports}, key=lambda p: (p is None, p or 0))
    width = 15
    lines = [
        "        |" + "|".join(f"{_page_heading(p):^{width}}" for p in pages) + "|",
        "Samples |" + "|".join(f"{'Top-1':>7}{'Top-2':>7} " for _ in pages) + "|",
        "-" * (9 + (width + 1) * len(pages)),
    ]
    for n in samples:
        cells = []
        for p in pages:
            r = reports.get((n, p))
            cells.append(f"{r.top1:7.1f}{r.top2:7.1f} " if r else " " * width)
        lines.append(f"{n:>7} |" + "|".join(cells) + "|")
    return "\n".join(lines) + "\n"


