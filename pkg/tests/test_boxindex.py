import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxfinder.boxindex import (
    BM25Params,
    BoxRepresentation,
    IndexBuildError,
    build_index,
    explain,
    load_index,
    rank,
    save_index,
    score,
)

from oracles import bm25_bruteforce, rank_bruteforce


def index_of(boxes, **params):
    reps = [BoxRepresentation(b, terms) for b, terms in boxes.items()]
    return build_index(reps, BM25Params(**params))


TOY = {"1": ["a", "a", "b"], "2": ["b", "c", "c"]}


def test_postings_and_lengths():
    idx = index_of(TOY)
    assert idx.postings["a"] == {"1": 2}
    assert idx.postings["b"] == {"1": 1, "2": 1}
    assert idx.avg_length == 3
    assert idx.doc_lengths == {"1": 3, "2": 3}
    assert idx.n_boxes == 2


def test_single_box():
    idx = index_of({"7": ["x"]})
    assert idx.n_boxes == 1 and idx.avg_length == 1


def test_build_errors():
    with pytest.raises(IndexBuildError, match="duplicate"):
        build_index([BoxRepresentation("1", ["a"]), BoxRepresentation("1", ["b"])])
    with pytest.raises(IndexBuildError, match="empty index"):
        build_index([BoxRepresentation("1", []), BoxRepresentation("2", [])])


def test_params_validation():
    with pytest.raises(ValueError):
        BM25Params(k1=-1)
    with pytest.raises(ValueError):
        BM25Params(b=1.5)
    assert BM25Params() == BM25Params(1.2, 0.75)


def test_score_examples():
    idx = index_of(TOY)
    assert score(idx, ["c"], "1") == 0
    assert score(idx, ["b"], "1") == score(idx, ["b"], "2") > 0
    with pytest.raises(KeyError):
        score(idx, ["a"], "99")


def test_rank_examples():
    idx = index_of(TOY)
    ranked = rank(idx, ["c"])
    assert [b for b, _ in ranked] == ["2"] and ranked[0][1] > 0
    assert [b for b, _ in rank(idx, ["b"])] == ["1", "2"]
    assert rank(idx, ["z"]) == []
    assert rank(idx, []) == []


def test_tie_break_is_numeric_not_lexical():
    idx = index_of({"10": ["x"], "9": ["x"]})
    assert [b for b, _ in rank(idx, ["x"])] == ["9", "10"]


def test_score_hand_computed():
    # query [c] against box 2: tf=2, df=1, N=2, len=avg=3
    idf = __import__("math").log(1 + (2 - 1 + 0.5) / (1 + 0.5))
    expected = idf * 2 * 2.2 / (2 + 1.2)
    assert score(index_of(TOY), ["c"], "2") == pytest.approx(expected, abs=1e-12)


def random_instance(rng):
    n_boxes = rng.randint(1, 10)
    vocab = [f"t{i}" for i in range(rng.randint(1, 50))]
    boxes = {}
    ids = rng.sample(range(1, 200), n_boxes)
    for box in ids:
        boxes[str(box)] = [rng.choice(vocab) for _ in range(rng.randint(0, 30))]
    if not any(boxes.values()):
        boxes[str(ids[0])] = [vocab[0]]
    query = [rng.choice(vocab + ["unseen"]) for _ in range(rng.randint(0, 20))]
    k1 = rng.choice([1.2, 0.0, 2.0, rng.uniform(0, 3)])
    b = rng.choice([0.75, 0.0, 1.0, rng.uniform(0, 1)])
    return boxes, query, k1, b


@pytest.mark.parametrize("seed", range(10))
def test_oracle_equivalence_fuzz(seed):
    rng = random.Random(seed)
    for _ in range(100):
        boxes, query, k1, b = random_instance(rng)
        idx = index_of(boxes, k1=k1, b=b)
        expected = bm25_bruteforce(boxes, query, k1, b)
        for box, s in expected.items():
            assert score(idx, query, box) == pytest.approx(s, abs=1e-9)
        got = rank(idx, query)
        want = rank_bruteforce(boxes, query, k1, b)
        assert [x for x, _ in got] == [x for x, _ in want]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 49), st.integers(1, 4))
def test_monotone_in_term_frequency_single_term_query(seed, pick, reps):
    # One more occurrence of t also lengthens the box, so only the score of a
    # query made of t alone is guaranteed not to drop when b > 0.
    rng = random.Random(seed)
    boxes, _, k1, b = random_instance(rng)
    box = sorted(boxes)[pick % len(boxes)]
    query = ["t0"] * reps
    before = score(index_of(boxes, k1=k1, b=b), query, box)
    boxes2 = {k: list(v) for k, v in boxes.items()}
    boxes2[box].append("t0")
    after = score(index_of(boxes2, k1=k1, b=b), query, box)
    assert after >= before * (1 - 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 49))
def test_monotone_in_term_frequency_without_length_norm(seed, pick):
    rng = random.Random(seed)
    boxes, query, k1, _ = random_instance(rng)
    query = query + ["t0"]
    box = sorted(boxes)[pick % len(boxes)]
    before = score(index_of(boxes, k1=k1, b=0.0), query, box)
    boxes2 = {k: list(v) for k, v in boxes.items()}
    boxes2[box].append("t0")
    after = score(index_of(boxes2, k1=k1, b=0.0), query, box)
    assert after >= before - 1e-12


def test_extra_occurrence_can_lower_multiterm_score():
    # Why the property above is restricted: t0 is in every box (low idf), so
    # its extra occurrence gains less than length normalization takes from "a".
    boxes = {"1": ["a", "t0"], "2": ["t0"], "3": ["t0", "c"]}
    q = ["a", "t0"]
    before = score(index_of(boxes), q, "1")
    after = score(index_of({**boxes, "1": ["a", "t0", "t0"]}), q, "1")
    assert after < before


def test_exact_math_ties_break_by_box_number():
    # With b = 1 a box made only of the query term scores independent of length.
    boxes = {"160": ["t0"] * 23, "129": ["t0"] * 27, "36": ["t0"] * 5, "7": ["x"]}
    got = rank(index_of(boxes, k1=2.8458248985176846, b=1.0), ["t0"])
    assert [b for b, _ in got] == ["36", "129", "160"]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_score_additive_over_query_concatenation(seed):
    rng = random.Random(seed)
    boxes, q1, _, _ = random_instance(rng)
    q2 = [rng.choice(sorted({t for v in boxes.values() for t in v})) for _ in range(5)]
    idx = index_of(boxes)
    for box in boxes:
        assert score(idx, q1 + q2, box) == pytest.approx(score(idx, q1, box) + score(idx, q2, box), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_omission_rule(seed):
    rng = random.Random(seed)
    boxes, query, k1, b = random_instance(rng)
    if k1 == 0:
        k1 = 1.2  # k1=0 still scores matches; keep the rule check on defaults
    idx = index_of(boxes, k1=k1, b=b)
    ranked = {x for x, _ in rank(idx, query)}
    assert ranked == {box for box, terms in boxes.items() if set(terms) & set(query)}


def test_index_invariants():
    rng = random.Random(3)
    boxes, _, _, _ = random_instance(rng)
    idx = index_of(boxes)
    for box, terms in boxes.items():
        assert idx.doc_lengths[box] == len(terms)
    totals = {}
    for terms in boxes.values():
        for t in terms:
            totals[t] = totals.get(t, 0) + 1
    assert {t: sum(p.values()) for t, p in idx.postings.items()} == totals


def test_explain_sums_to_score():
    idx = index_of(TOY)
    parts = explain(idx, ["a", "b", "b", "z"], "1")
    assert [t for t, _ in parts][0] in {"a", "b"}
    assert sum(c for _, c in parts) == pytest.approx(score(idx, ["a", "b", "b", "z"], "1"))


def test_save_load_round_trip(tmp_path):
    reps = [BoxRepresentation("1902", ["a", "b"], [("d1", 1)]), BoxRepresentation("1903", ["b"], [("d3", 2)])]
    idx = build_index(reps, BM25Params(1.0, 0.5))
    path = tmp_path / "idx.json"
    save_index(idx, path)
    data = json.loads(path.read_text())
    assert data["format"] == "boxfinder-index" and data["version"] == 1
    assert data["postings"]["b"] == {"1902": 1, "1903": 1}
    again = load_index(path)
    assert again.postings == idx.postings
    assert again.params == idx.params
    assert again.representations == idx.representations
    assert rank(again, ["b"]) == rank(idx, ["b"])


def test_load_rejects_tampered(tmp_path):
    idx = build_index([BoxRepresentation("1", ["a"])])
    path = tmp_path / "idx.json"
    save_index(idx, path)
    data = json.loads(path.read_text())
    data["postings"]["a"] = {"1": 5}
    path.write_text(json.dumps(data))
    with pytest.raises(ValueError, match="disagree"):
        load_index(path)
    data["version"] = 99
    path.write_text(json.dumps(data))
    with pytest.raises(ValueError, match="version"):
        load_index(path)
