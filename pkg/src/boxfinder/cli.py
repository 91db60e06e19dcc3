"""``boxfinder`` command line.

Subcommands: ingest, build-index, search, expand-label, fuse, evaluate, synth.
Data goes to stdout, diagnostics to stderr. Each run prints its resolved
configuration as a ``# config: {...}`` line before its data.

Exit codes: 0 ok, 1 invalid data, 2 usage error, 3 file not found,
4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, replace

from . import __version__
from .boxindex import BM25Params, BoxRepresentation, build_index, explain, load_index, rank, save_index
from .corpus import CollectionLoadError, load_collection, save_collection, validate_collection
from .evalharness import (
    SWEEP_PAGES,
    SWEEP_SAMPLES,
    ConfigError,
    ExperimentConfig,
    PreparedCollection,
    format_table,
    run_experiment,
    run_sweep,
    sample_representations,
    trial_streams,
)
from .fusion import FusionParams, rrf
from .labelterms import (
    GuideLoadError,
    LabelExpansionOptions,
    LabelParseError,
    box_label_text,
    expand_label,
    load_guide,
    parse_folder_label,
    save_guide,
)
from .synthgen import SynthParams, generate
from .textproc import analyze

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_CONFIG = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _echo_config(config: dict, out=None) -> None:
    print("# config: " + json.dumps(config, sort_keys=True), file=out or sys.stdout)


def _page_limit(value: str) -> int | None:
    if value == "all":
        return None
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("page limit must be a positive integer or 'all'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("page limit must be >= 1")
    return n


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v]


def _page_list(value: str) -> list[int | None]:
    return [_page_limit(v) for v in value.split(",") if v]


def _load_collection(path):
    try:
        return load_collection(path)
    except FileNotFoundError:
        raise CliError(f"collection file not found: {path}", EXIT_NOT_FOUND) from None
    except CollectionLoadError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from None


def _load_guide(path):
    if path is None:
        return None
    try:
        return load_guide(path)
    except FileNotFoundError:
        raise CliError(f"guide file not found: {path}", EXIT_NOT_FOUND) from None
    except GuideLoadError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from None


def _label_options(args) -> LabelExpansionOptions:
    return LabelExpansionOptions(args.scope_notes, frozenset(args.suppress))


# --- ranked list files ---------------------------------------------------

def read_ranked_list(path: str) -> list[tuple[str, float]]:
    """Read a ranked-list file: one ``box_id<TAB>score`` per line, best first.

    Blank lines and ``#`` comments are ignored; an empty file is an empty list.
    """
    out = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise CliError(f"{path}:{lineno}: expected 'box_id score'", EXIT_INVALID)
            box, raw = parts
            try:
                value = float(raw)
            except ValueError:
                raise CliError(f"{path}:{lineno}: bad score {raw!r}", EXIT_INVALID) from None
            if box in seen:
                raise CliError(f"{path}:{lineno}: duplicate box {box!r}", EXIT_INVALID)
            seen.add(box)
            out.append((box, value))
    return out


def format_ranked_list(ranked) -> str:
    return "".join(f"{box}\t{s:.10g}\n" for box, s in ranked)


# --- subcommands ---------------------------------------------------------

def cmd_ingest(args) -> int:
    c = _load_collection(args.collection)
    violations = validate_collection(c)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return EXIT_INVALID
    print(f"OK, {len(c.boxes)} boxes, {len(c)} documents")
    return EXIT_OK


def _index_config(args) -> dict:
    return {
        "source": args.source,
        "samples_per_box": args.samples,
        "page_limit": "all" if args.pages is None else args.pages,
        "seed": args.seed,
        "bm25": {"k1": args.k1, "b": args.b},
        "include_scope_notes": args.scope_notes,
        "suppressed_countries": sorted(args.suppress),
    }


def _build_from_collection(args, c, exclude=frozenset()):
    params = BM25Params(args.k1, args.b)
    if args.source == "labels":
        guide = _load_guide(args.guide)
        if guide is None:
            raise CliError("--source labels needs --guide", EXIT_CONFIG)
        opts = _label_options(args)
        reps = [BoxRepresentation(b, analyze(box_label_text(c.folders[b], guide, opts))) for b in c.box_ids]
        return build_index(reps, params)
    prep = PreparedCollection(c)
    rep_rng, _ = trial_streams(args.seed, 0)
    reps = sample_representations(prep, args.samples, args.pages, rep_rng, frozenset(exclude))
    return build_index(reps, params)


def cmd_build_index(args) -> int:
    c = _load_collection(args.collection)
    _echo_config(_index_config(args))
    index = _build_from_collection(args, c)
    save_index(index, args.output)
    print(f"wrote {args.output}: {index.n_boxes} boxes, {len(index.postings)} terms")
    return EXIT_OK


def cmd_search(args) -> int:
    if (args.query is None) == (args.example_doc is None):
        raise CliError("give exactly one of --query or --example-doc", EXIT_USAGE)
    c = _load_collection(args.collection) if args.collection else None
    if args.example_doc is not None:
        if c is None:
            raise CliError("--example-doc needs --collection", EXIT_USAGE)
        if args.example_doc not in c:
            raise CliError(f"unknown example document {args.example_doc!r}", EXIT_INVALID)
        doc = c[args.example_doc]
        query = analyze(" ".join(doc.pages if args.pages is None else doc.pages[: args.pages]))
    else:
        query = analyze(args.query)

    if args.index:
        try:
            index = load_index(args.index)
        except FileNotFoundError:
            raise CliError(f"index file not found: {args.index}", EXIT_NOT_FOUND) from None
        except (ValueError, KeyError) as exc:
            raise CliError(f"{args.index}: {exc}", EXIT_INVALID) from None
        _echo_config({"index": args.index, "top_k": args.top_k})
    elif c is not None:
        cfg = _index_config(args)
        cfg["top_k"] = args.top_k
        _echo_config(cfg)
        exclude = {args.example_doc} if args.example_doc else set()
        index = _build_from_collection(args, c, exclude)
    else:
        raise CliError("give --index or --collection", EXIT_USAGE)

    ranked = rank(index, query)
    if not ranked:
        print("no term matched")
        if args.output:
            open(args.output, "w").close()
        return EXIT_OK
    for pos, (box, s) in enumerate(ranked[: args.top_k], start=1):
        print(f"{pos}\t{box}\t{s:.6f}")
        if args.explain:
            for term, contrib in explain(index, query, box):
                print(f"\t\t{term}\t{contrib:.6f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(format_ranked_list(ranked))
    return EXIT_OK


def cmd_expand_label(args) -> int:
    guide = _load_guide(args.guide)
    if guide is None:
        raise CliError("expand-label needs --guide", EXIT_CONFIG)
    opts = _label_options(args)
    _echo_config({"guide": args.guide, **{k: sorted(v) if isinstance(v, frozenset) else v
                                          for k, v in asdict(opts).items()}})
    try:
        parsed = parse_folder_label(args.label)
    except LabelParseError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        text = expand_label(parsed, guide, opts)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(text)
    return EXIT_OK


def cmd_fuse(args) -> int:
    lists = []
    for path in args.lists:
        try:
            lists.append(read_ranked_list(path))
        except FileNotFoundError:
            raise CliError(f"ranked list not found: {path}", EXIT_NOT_FOUND) from None
    _echo_config({"discount": args.discount, "lists": args.lists})
    sys.stdout.write(format_ranked_list(rrf(lists, FusionParams(args.discount))))
    return EXIT_OK


_CONFIG_FLAGS = {
    "samples": "samples_per_box",
    "pages": "page_limit",
    "query_mode": "query_mode",
    "source": "index_source",
    "queries": "queries_per_trial",
    "repetitions": "repetitions",
    "seed": "master_seed",
}


def resolve_experiment_config(args) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except FileNotFoundError:
            raise CliError(f"config file not found: {args.config}", EXIT_NOT_FOUND) from None
    cfg = ExperimentConfig.from_dict(base)
    overrides = {}
    for flag, name in _CONFIG_FLAGS.items():
        value = getattr(args, flag)
        if value is not _UNSET:
            overrides[name] = value
    if args.scope_notes:
        overrides["include_scope_notes"] = True
    if args.suppress is not _UNSET:
        overrides["suppressed_countries"] = tuple(args.suppress)
    bm25 = asdict(cfg.bm25)
    if args.k1 is not _UNSET:
        bm25["k1"] = args.k1
    if args.b is not _UNSET:
        bm25["b"] = args.b
    overrides["bm25"] = BM25Params(**bm25)
    if args.discount is not _UNSET:
        overrides["fusion"] = FusionParams(args.discount)
    return replace(cfg, **overrides)


def cmd_evaluate(args) -> int:
    cfg = resolve_experiment_config(args)
    if cfg.index_source in ("labels", "fusion") and args.guide is None:
        raise CliError(f"index source {cfg.index_source!r} needs --guide", EXIT_CONFIG)
    c = _load_collection(args.collection)
    guide = _load_guide(args.guide)
    resolved = cfg.to_dict()
    if args.sweep:
        resolved["sweep"] = {
            "samples": list(args.sweep_samples),
            "pages": ["all" if p is None else p for p in args.sweep_pages],
        }
    _echo_config(resolved)
    if args.sweep:
        reports = run_sweep(c, cfg, guide, samples=args.sweep_samples, pages=args.sweep_pages,
                            n_jobs=args.jobs)
        sys.stdout.write(format_table(reports))
        payload = {
            "config": resolved,
            "cells": [
                {"samples_per_box": n, "page_limit": "all" if p is None else p, **r.to_dict()}
                for (n, p), r in reports.items()
            ],
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        report = run_experiment(c, cfg, guide, n_jobs=args.jobs)
        sys.stdout.write(format_table({(cfg.samples_per_box, cfg.page_limit): report}))
        print(f"adjacent {report.adjacent:.1f}  "
              f"std top1 {report.top1_std:.2f} top2 {report.top2_std:.2f}  seed {cfg.master_seed}")
        text = report.to_json()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    params = SynthParams(
        n_boxes=args.boxes,
        docs_per_box=args.docs_per_box,
        pages_per_doc=(args.min_pages, args.max_pages),
        words_per_page=args.words_per_page,
        vocab_size=args.vocab_size,
        topic_terms_per_box=args.topic_terms,
        homophily=args.homophily,
        disjoint_topics=args.disjoint_topics,
        guide_codes_per_box=args.codes_per_box,
        first_box=args.first_box,
        seed=args.seed,
    )
    _echo_config(asdict(params))
    c, guide = generate(params)
    save_collection(c, args.output)
    if args.guide_output:
        save_guide(guide, args.guide_output)
    print(f"wrote {args.output}: {len(c.boxes)} boxes, {len(c)} documents")
    return EXIT_OK


# --- parser --------------------------------------------------------------

_UNSET = object()


def _add_bm25(p, default=True):
    d = (lambda v: v) if default else (lambda v: _UNSET)
    p.add_argument("--k1", type=float, default=d(1.2), help="BM25 k1 (default 1.2)")
    p.add_argument("--b", type=float, default=d(0.75), help="BM25 b (default 0.75)")


def _add_labels(p, default=True):
    p.add_argument("--guide", help="classification guide JSON file")
    p.add_argument("--scope-notes", action="store_true", help="index leaf-code scope notes")
    p.add_argument("--suppress", nargs="*", default=["BRAZ"] if default else _UNSET,
                   metavar="ABBR", help="country abbreviations left out (default BRAZ)")


def _add_sampling(p):
    p.add_argument("--source", choices=["ocr", "labels"], default="ocr")
    p.add_argument("--samples", type=int, default=3, help="documents sampled per box")
    p.add_argument("--pages", type=_page_limit, default=1, help="page limit per document or 'all'")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxfinder", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a collection file")
    p.add_argument("collection")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-index", help="build and save a box index")
    p.add_argument("collection")
    p.add_argument("-o", "--output", required=True)
    _add_sampling(p)
    _add_bm25(p)
    _add_labels(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("search", help="rank boxes for a query or an example document")
    p.add_argument("--index", help="saved index file")
    p.add_argument("--collection", help="collection file (build index on the fly / example docs)")
    p.add_argument("-q", "--query")
    p.add_argument("--example-doc", help="doc_id whose OCR text is the query")
    p.add_argument("-k", "--top-k", type=int, default=10)
    p.add_argument("--explain", action="store_true", help="show per-term contributions")
    p.add_argument("-o", "--output", help="write the full ranked list here")
    _add_sampling(p)
    _add_bm25(p)
    _add_labels(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("expand-label", help="print the index text for one folder label")
    p.add_argument("label")
    _add_labels(p)
    p.set_defaults(func=cmd_expand_label)

    p = sub.add_parser("fuse", help="reciprocal rank fusion of ranked-list files")
    p.add_argument("lists", nargs="+")
    p.add_argument("--discount", type=float, default=60.0)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="run the randomized Top-k evaluation")
    p.add_argument("collection")
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--samples", type=int, default=_UNSET)
    p.add_argument("--pages", type=_page_limit, default=_UNSET)
    p.add_argument("--query-mode", choices=["title", "qbe"], default=_UNSET)
    p.add_argument("--source", choices=["ocr", "labels", "fusion"], default=_UNSET)
    p.add_argument("--queries", type=int, default=_UNSET, help="queries per trial")
    p.add_argument("--repetitions", type=int, default=_UNSET)
    p.add_argument("--seed", type=int, default=_UNSET)
    p.add_argument("--discount", type=float, default=_UNSET, help="RRF discount")
    _add_bm25(p, default=False)
    _add_labels(p, default=False)
    p.add_argument("--sweep", action="store_true", help="run the samples x pages grid")
    p.add_argument("--sweep-samples", type=_int_list, default=list(SWEEP_SAMPLES))
    p.add_argument("--sweep-pages", type=_page_list, default=list(SWEEP_PAGES))
    p.add_argument("-j", "--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-o", "--output", help="machine-readable JSON report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic collection and guide")
    p.add_argument("-o", "--output", required=True, help="collection file to write")
    p.add_argument("--guide-output", help="guide file to write")
    p.add_argument("--boxes", type=int, default=35)
    p.add_argument("--docs-per-box", type=int, default=50)
    p.add_argument("--min-pages", type=int, default=1)
    p.add_argument("--max-pages", type=int, default=3)
    p.add_argument("--words-per-page", type=int, default=228)
    p.add_argument("--vocab-size", type=int, default=5000)
    p.add_argument("--topic-terms", type=int, default=100)
    p.add_argument("--homophily", type=float, default=0.5)
    p.add_argument("--disjoint-topics", action="store_true")
    p.add_argument("--codes-per-box", type=int, default=3)
    p.add_argument("--first-box", type=int, default=1900)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
