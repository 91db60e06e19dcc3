"""Subject-numeric folder labels: parsing and expansion into indexable text.

A folder label such as ``POL 12-6 BRAZ 01/01/1967`` reads left to right as a
primary subject code, an optional hierarchical numeric code, zero or more
country abbreviations and an optional start date. Expansion swaps the codes
for classification-guide headings, countries for their standard names and
the date for its year. The raw code, month and day are never emitted.

Guide files are UTF-8 JSON::

    {
      "codes": {
        "POL 12":   {"label": "POLITICAL PARTIES"},
        "POL 12-6": {"label": "Membership. Leaders.",
                     "scope_note": "Covers internal party votes, ..."}
      },
      "countries": {"PAR": "Paraguay", "US": "United States of America"}
    }
"""

from __future__ import annotations

import json
import os
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

__all__ = [
    "LabelParseError",
    "GuideLoadError",
    "LabelWarning",
    "ParsedLabel",
    "ClassificationGuide",
    "LabelExpansionOptions",
    "parse_folder_label",
    "code_prefixes",
    "expand_label",
    "box_label_text",
    "load_guide",
    "save_guide",
    "guide_from_dict",
]


class LabelParseError(ValueError):
    def __init__(self, label: str, reason: str):
        self.label = label
        super().__init__(f"cannot parse folder label {label!r}: {reason}")


class GuideLoadError(ValueError):
    pass


class LabelWarning(UserWarning):
    pass


_PRIMARY_RE = re.compile(r"[A-Za-z]{2,3}")
_NUMERIC_RE = re.compile(r"\d+(?:-\d+)*")
_COUNTRY_RE = re.compile(r"[A-Z]+")
_DATE_RE = re.compile(r"(\d{1,2})/(\d{1,2})/(\d{4})")


@dataclass(frozen=True)
class ParsedLabel:
    primary_code: str
    numeric_code: str | None = None
    countries: tuple[str, ...] = ()
    year: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "countries", tuple(self.countries))


def parse_folder_label(label: str) -> ParsedLabel:
    tokens = label.split()
    if not tokens or not _PRIMARY_RE.fullmatch(tokens[0]):
        raise LabelParseError(label, "no primary subject code")
    primary = tokens[0].upper()
    i = 1
    numeric = None
    if i < len(tokens) and _NUMERIC_RE.fullmatch(tokens[i]):
        numeric = tokens[i]
        i += 1
    countries = []
    while i < len(tokens) and _COUNTRY_RE.fullmatch(tokens[i]):
        countries.append(tokens[i])
        i += 1
    year = None
    if i < len(tokens):
        tok = tokens[i]
        m = _DATE_RE.fullmatch(tok)
        if not m:
            raise LabelParseError(label, f"unexpected token {tok!r}")
        year = int(m.group(3))
        if not 1900 <= year <= 2100:
            raise LabelParseError(label, f"year {year} out of range")
        i += 1
    if i < len(tokens):
        raise LabelParseError(label, f"trailing tokens after date: {' '.join(tokens[i:])!r}")
    return ParsedLabel(primary, numeric, tuple(countries), year)


def code_prefixes(p: ParsedLabel) -> list[str]:
    """Full codes from the first numeric level down to the leaf.

    ``POL 27-12`` gives ``["POL 27", "POL 27-12"]``; a label without a
    numeric part gives just the primary code.
    """
    if p.numeric_code is None:
        return [p.primary_code]
    parts = p.numeric_code.split("-")
    return [f"{p.primary_code} {'-'.join(parts[:k])}" for k in range(1, len(parts) + 1)]


@dataclass(frozen=True)
class ClassificationGuide:
    code_labels: Mapping[str, str] = field(default_factory=dict)
    scope_notes: Mapping[str, str] = field(default_factory=dict)
    country_names: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        stray = sorted(set(self.scope_notes) - set(self.code_labels))
        if stray:
            raise GuideLoadError(f"scope note for unknown code {stray[0]!r}")
        empty = sorted(k for k, v in self.country_names.items() if not v.strip())
        if empty:
            raise GuideLoadError(f"empty country name for {empty[0]!r}")


@dataclass(frozen=True)
class LabelExpansionOptions:
    include_scope_notes: bool = False
    suppressed_countries: frozenset[str] = frozenset({"BRAZ"})

    def __post_init__(self):
        object.__setattr__(self, "suppressed_countries", frozenset(self.suppressed_countries))


def expand_label(
    p: ParsedLabel,
    guide: ClassificationGuide,
    opts: LabelExpansionOptions | None = None,
) -> str:
    opts = opts or LabelExpansionOptions()
    prefixes = code_prefixes(p)
    parts = [guide.code_labels[c] for c in prefixes if c in guide.code_labels]
    if not parts:
        warnings.warn(
            LabelWarning(f"no guide entry for any prefix of {prefixes[-1]!r}"),
            stacklevel=2,
        )
    leaf = prefixes[-1]
    if opts.include_scope_notes and leaf in guide.scope_notes:
        parts.append(guide.scope_notes[leaf])
    for abbr in p.countries:
        if abbr in opts.suppressed_countries:
            continue
        name = guide.country_names.get(abbr)
        if name is None:
            warnings.warn(LabelWarning(f"unknown country abbreviation {abbr!r}"), stacklevel=2)
            continue
        parts.append(name)
    if p.year is not None:
        parts.append(f"{p.year:04d}")
    return " ".join(parts)


def box_label_text(
    labels: Iterable[str],
    guide: ClassificationGuide,
    opts: LabelExpansionOptions | None = None,
) -> str:
    """Expansion text for a box: one expansion per distinct label, sorted.

    Unparseable labels are skipped with a :class:`LabelWarning`.
    """
    out = []
    for label in sorted(set(labels)):
        try:
            parsed = parse_folder_label(label)
        except LabelParseError as exc:
            warnings.warn(LabelWarning(str(exc)), stacklevel=2)
            continue
        text = expand_label(parsed, guide, opts)
        if text:
            out.append(text)
    return " ".join(out)


# --- guide files ---------------------------------------------------------

def _no_duplicate_keys(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise GuideLoadError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def guide_from_dict(data: Mapping) -> ClassificationGuide:
    codes = data.get("codes", {})
    countries = data.get("countries", {})
    if not isinstance(codes, Mapping) or not isinstance(countries, Mapping):
        raise GuideLoadError("'codes' and 'countries' must be objects")
    labels: dict[str, str] = {}
    notes: dict[str, str] = {}
    for raw_code, entry in codes.items():
        code = " ".join(raw_code.split())
        if code in labels or code in notes:
            raise GuideLoadError(f"duplicate code {code!r}")
        if not isinstance(entry, Mapping):
            raise GuideLoadError(f"entry for {code!r} must be an object")
        if "scope_note" in entry:
            notes[code] = str(entry["scope_note"])
        if "label" not in entry:
            raise GuideLoadError(f"scope note for unknown code {code!r}" if code in notes
                                 else f"code {code!r} has no label")
        labels[code] = str(entry["label"])
    for abbr, name in countries.items():
        if not isinstance(name, str):
            raise GuideLoadError(f"country name for {abbr!r} must be a string")
    return ClassificationGuide(labels, notes, dict(countries))


def guide_to_dict(guide: ClassificationGuide) -> dict:
    codes = {}
    for code in sorted(guide.code_labels):
        entry = {"label": guide.code_labels[code]}
        if code in guide.scope_notes:
            entry["scope_note"] = guide.scope_notes[code]
        codes[code] = entry
    return {"codes": codes, "countries": dict(sorted(guide.country_names.items()))}


def load_guide(path: str | os.PathLike) -> ClassificationGuide:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh, object_pairs_hook=_no_duplicate_keys)
        except json.JSONDecodeError as exc:
            raise GuideLoadError(f"malformed guide file: {exc}") from None
    return guide_from_dict(data)


def save_guide(guide: ClassificationGuide, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(guide_to_dict(guide), fh, ensure_ascii=False, indent=2)
        fh.write("\n")
