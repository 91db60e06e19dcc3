"""Archival data model: documents, boxes, folders.

A collection file is UTF-8 JSON Lines, one document per line::

    {"doc_id": "d1", "box_id": "1902", "folder_label": "POL 2-3 BRAZ 01/01/1967",
     "title": "Brazilian Laws", "pages": ["page one text", "page two text"]}

All five fields are required. ``title`` may be the empty string; ``pages``
must hold at least one string.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "FIELDS",
    "CollectionLoadError",
    "DocumentRecord",
    "Collection",
    "Violation",
    "load_collection",
    "save_collection",
    "dump_collection",
    "validate_collection",
]

FIELDS = ("doc_id", "box_id", "folder_label", "title", "pages")


class CollectionLoadError(ValueError):
    """Raised when a collection file cannot be parsed into valid records."""

    def __init__(self, lineno: int, cause: str):
        self.lineno = lineno
        self.cause = cause
        super().__init__(f"line {lineno}: {cause}")


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    box_id: str
    folder_label: str
    title: str
    pages: tuple[str, ...]

    def __post_init__(self):
        # Accept any sequence for pages but store a tuple so records hash.
        object.__setattr__(self, "pages", tuple(self.pages))

    @property
    def box_number(self) -> int:
        return int(self.box_id)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "box_id": self.box_id,
            "folder_label": self.folder_label,
            "title": self.title,
            "pages": list(self.pages),
        }


@dataclass(frozen=True)
class Violation:
    doc_id: str
    rule: str

    def __str__(self) -> str:
        return f"{self.doc_id}: {self.rule}"


def _is_box_number(box_id: str) -> bool:
    return box_id.isascii() and box_id.isdigit()


@dataclass(frozen=True)
class Collection:
    """An ordered, immutable set of documents grouped into boxes.

    ``boxes`` and ``folders`` are derived from ``documents`` on construction.
    """

    documents: tuple[DocumentRecord, ...]
    boxes: dict[str, tuple[str, ...]] = field(init=False, compare=False)
    folders: dict[str, frozenset[str]] = field(init=False, compare=False)
    _by_id: dict[str, DocumentRecord] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        docs = tuple(self.documents)
        object.__setattr__(self, "documents", docs)
        boxes: dict[str, list[str]] = {}
        folders: dict[str, set[str]] = {}
        for d in docs:
            boxes.setdefault(d.box_id, []).append(d.doc_id)
            folders.setdefault(d.box_id, set()).add(d.folder_label)
        object.__setattr__(self, "boxes", {b: tuple(ids) for b, ids in boxes.items()})
        object.__setattr__(self, "folders", {b: frozenset(s) for b, s in folders.items()})
        object.__setattr__(self, "_by_id", {d.doc_id: d for d in docs})

    def __len__(self) -> int:
        return len(self.documents)

    def __getitem__(self, doc_id: str) -> DocumentRecord:
        return self._by_id[doc_id]

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._by_id

    @property
    def box_ids(self) -> list[str]:
        """Box ids in ascending numeric order (text order for non-numeric ids)."""
        return sorted(self.boxes, key=_box_sort_key)

    def documents_in(self, box_id: str) -> list[DocumentRecord]:
        return [self._by_id[i] for i in self.boxes[box_id]]


def _box_sort_key(box_id: str):
    return (0, int(box_id), box_id) if _is_box_number(box_id) else (1, 0, box_id)


def validate_collection(c: Collection) -> list[Violation]:
    """Report every invariant violation, sorted by doc_id then rule name."""
    out: list[Violation] = []
    seen: set[str] = set()
    for d in c.documents:
        if d.doc_id in seen:
            out.append(Violation(d.doc_id, "duplicate doc_id"))
        seen.add(d.doc_id)
        if not d.doc_id:
            out.append(Violation(d.doc_id, "empty doc_id"))
        if not _is_box_number(d.box_id):
            out.append(Violation(d.doc_id, "box_id not numeric"))
        if not d.pages:
            out.append(Violation(d.doc_id, "empty pages"))
        if not all(isinstance(p, str) for p in d.pages):
            out.append(Violation(d.doc_id, "non-string page"))
    out.sort(key=lambda v: (v.doc_id, v.rule))
    return out


def _record_from_obj(obj, lineno: int) -> DocumentRecord:
    if not isinstance(obj, dict):
        raise CollectionLoadError(lineno, "record is not a JSON object")
    missing = [f for f in FIELDS if f not in obj]
    if missing:
        raise CollectionLoadError(lineno, f"missing field {missing[0]!r}")
    for f in ("doc_id", "box_id", "folder_label", "title"):
        if not isinstance(obj[f], str):
            raise CollectionLoadError(lineno, f"field {f!r} must be a string")
    pages = obj["pages"]
    if not isinstance(pages, list) or not all(isinstance(p, str) for p in pages):
        raise CollectionLoadError(lineno, "field 'pages' must be a list of strings")
    if not pages:
        raise CollectionLoadError(lineno, "empty pages list")
    if not _is_box_number(obj["box_id"]):
        raise CollectionLoadError(lineno, f"box_id {obj['box_id']!r} not numeric")
    return DocumentRecord(
        obj["doc_id"], obj["box_id"], obj["folder_label"], obj["title"], pages
    )


def parse_records(lines: Iterable[str]) -> Collection:
    docs: list[DocumentRecord] = []
    first_seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CollectionLoadError(lineno, f"malformed JSON ({exc.msg})") from None
        rec = _record_from_obj(obj, lineno)
        if rec.doc_id in first_seen:
            raise CollectionLoadError(
                lineno,
                f"duplicate doc_id {rec.doc_id!r} (first seen on line {first_seen[rec.doc_id]})",
            )
        first_seen[rec.doc_id] = lineno
        docs.append(rec)
    return Collection(tuple(docs))


def load_collection(path: str | os.PathLike) -> Collection:
    """Load and validate a JSON Lines collection file.

    Raises FileNotFoundError for a missing file and CollectionLoadError,
    naming the offending line, for anything malformed.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh)


def dump_collection(c: Collection) -> str:
    return "".join(
        json.dumps(d.to_dict(), ensure_ascii=False) + "\n" for d in c.documents
    )


def save_collection(c: Collection, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_collection(c))
