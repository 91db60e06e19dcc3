import json
from pathlib import Path

import pytest

from boxfinder.corpus import Collection, DocumentRecord
from boxfinder.labelterms import ClassificationGuide

DATA = Path(__file__).parent / "data"


def doc(doc_id, box_id, label="POL 2-3 BRAZ 01/01/1967", title="", pages=("text",)):
    return DocumentRecord(doc_id, box_id, label, title, pages)


@pytest.fixture
def small_collection():
    return Collection((
        doc("d1", "1902", title="Brazilian Laws", pages=("church newspaper", "page two")),
        doc("d2", "1902", label="POL 5 BRAZ 01/01/1967", pages=("laws of brazil",)),
        doc("d3", "1903", label="POL 12-6 BRAZ 01/01/1967", title="Ester Ferraz",
            pages=("party leaders",)),
    ))


@pytest.fixture
def example_guide():
    """Two-level POL 12 / POL 12-6 guide with a leaf scope note and four countries."""
    return ClassificationGuide(
        code_labels={"POL 12": "POLITICAL PARTIES", "POL 12-6": "Membership. Leaders."},
        scope_notes={
            "POL 12-6": "Covers internal party votes and expulsions. "
                        "Split by leader when a folder grows large."
        },
        country_names={
            "PAR": "Paraguay",
            "US": "United States of America",
            "USSR": "Soviet Union",
            "BRAZ": "Brazil",
        },
    )


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(records, name="coll.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write((r if isinstance(r, str) else json.dumps(r)) + "\n")
        return path
    return _write


# --- acceptance summary --------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``with verdict("3", "detail") as v: ...``; the line reads FAIL if
    the block raises. Lines are echoed live and repeated in the summary.
    """
    from contextlib import contextmanager

    @contextmanager
    def _verdict(number: str, title: str):
        detail = {}
        status = "FAIL"
        try:
            yield detail
            status = "PASS"
        finally:
            extra = "; ".join(f"{k}={v}" for k, v in detail.items())
            line = f"ACCEPTANCE {number} {status}: {title}" + (f" ({extra})" if extra else "")
            ACCEPTANCE_LINES.append(line)
            with capsys.disabled():
                print("\n" + line)

    return _verdict


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
