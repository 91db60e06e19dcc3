"""Box-level search over partially digitized archival collections.

Boxes are represented by OCR text from a few sampled documents and/or terms
expanded from their folder labels, ranked with BM25, optionally merged with
reciprocal rank fusion, and evaluated with a randomized Top-k protocol.
"""

from .boxindex import BM25Params, BoxIndex, BoxRepresentation, build_index, rank, score
from .corpus import Collection, DocumentRecord, load_collection, validate_collection
from .estimators import BoxRanker, LabelExpander, TextAnalyzer
from .evalharness import ExperimentConfig, MetricsReport, run_experiment, run_trial
from .fusion import FusionParams, rrf
from .labelterms import (
    ClassificationGuide,
    LabelExpansionOptions,
    box_label_text,
    expand_label,
    load_guide,
    parse_folder_label,
)
from .synthgen import SynthParams, generate
from .textproc import analyze, porter_stem, tokenize

__version__ = "0.1.0"

__all__ = [
    "BM25Params", "BoxIndex", "BoxRepresentation", "build_index", "rank", "score",
    "Collection", "DocumentRecord", "load_collection", "validate_collection",
    "BoxRanker", "LabelExpander", "TextAnalyzer",
    "ExperimentConfig", "MetricsReport", "run_experiment", "run_trial",
    "FusionParams", "rrf",
    "ClassificationGuide", "LabelExpansionOptions", "box_label_text", "expand_label",
    "load_guide", "parse_folder_label",
    "SynthParams", "generate",
    "analyze", "porter_stem", "tokenize",
]
