"""Acceptance suite: every release criterion, one test each, pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS line per
criterion.
"""

import json
import math
import random
import time

import mpmath
import pytest

from conftest import (
    JOHN_QA,
    JOHN_SENTENCE,
    TOY_CORPUS,
    TOY_QA,
    expand_unit,
    make_fixture_matrix,
    random_corpus,
    random_lexicon,
)
from infoqa.bundle import load_bundle, save_bundle
from infoqa.evaluation import (
    f_measure,
    generate_technical_suite,
    render_report,
    run_suite,
    score_answer,
)
from infoqa.matrix import (
    WeightConfig,
    accumulate_counts,
    activate,
    classify,
    compute_weights,
    emergence_coefficient,
)
from infoqa.models import train_from_corpus
from infoqa.synthesis import synthesize
from infoqa.textmodel import END_SENTINEL, START_SENTINEL


def ok(line):
    print("PASS: %s" % line)


def test_weight_oracle_on_random_tables(lexicon):
    started = time.perf_counter()
    rnd = random.Random(20240101)
    config = WeightConfig(emergence_enabled=False, alpha=0.0)
    features = ["f%d" % i for i in range(20)]
    classes = ["c%d" % j for j in range(5)]
    for trial in range(100):
        rows = []
        for _ in range(150):
            label = rnd.choice(classes)
            rows.append((rnd.sample(features, rnd.randint(1, 6)), label))
        table = accumulate_counts(rows)
        matrix = compute_weights(table, config)
        for fid in table.feature_ids:
            for cid, co in table.co_counts[fid].items():
                oracle = math.log2(
                    (co / table.feature_totals[fid])
                    / (table.class_totals[cid] / table.grand_total)
                )
                assert matrix.weight(fid, cid) == pytest.approx(oracle, abs=1e-9)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    ok("weight oracle: 100 random 20x5 tables match brute-force PMI to 1e-9 in %.2fs" % elapsed)


def test_emergence_coefficient_values():
    assert emergence_coefficient(1, 2) == 0.0
    assert emergence_coefficient(2, 4) == pytest.approx(0.79248, abs=1e-5)
    for w in (31, 64, 128):
        exact = float(mpmath.log(mpmath.mpf(2) ** w - 1, 2))
        assert emergence_coefficient(w, 2) == pytest.approx(exact, abs=1e-6)
    ok("emergence coefficient: exact at (1,2), 0.79248 at (2,4), approximation branch to 1e-6")


def test_connection_arithmetic(lexicon, tmp_path):
    published = [
        (12, 133, 1_596),
        (636, 1_577, 1_002_972),
        (1488, 8_031, 11_950_128),
        (1464, 8_069, 11_813_016),
        (2656, 15_118, 40_153_408),
    ]
    for classes, features, connections in published:
        assert classes * features == connections

    bundle, _ = train_from_corpus(TOY_CORPUS, TOY_QA, lexicon)
    save_bundle(bundle, tmp_path / "bundle")
    manifest = json.loads((tmp_path / "bundle" / "manifest.json").read_text())
    assert manifest["models"]
    for stats in manifest["models"]:
        assert stats["connections"] == stats["classes"] * stats["features"]
    ok("connection arithmetic: 5 published triples and every toy manifest entry")


def test_pos_fixture_classification():
    matrix = make_fixture_matrix()
    result = classify(matrix, activate({"which"}, matrix))
    assert result.winner == "Any"
    assert result.score == pytest.approx(0.649, abs=1e-9)
    result = classify(matrix, activate({"whose"}, matrix))
    assert result.winner == "Any"
    assert result.score == pytest.approx(0.894, abs=1e-9)
    ok("printed POS fixture: {which}->Any at 0.649, {whose}->Any at 0.894, exact to 1e-9")


def test_end_to_end_walkthrough(lexicon):
    started = time.perf_counter()
    toy, _ = train_from_corpus(TOY_CORPUS, TOY_QA, lexicon)
    trace = synthesize(toy, "Where do men go?")
    assert not trace.rejected
    assert score_answer(trace.final_answer, "men go to work", lexicon=lexicon) == 1.0

    john, _ = train_from_corpus(JOHN_SENTENCE, JOHN_QA, lexicon)
    trace = synthesize(john, "What do his sisters listen to?")
    moves = [(s.direction, s.token) for s in trace.steps]
    assert moves[0] == ("right", "to")
    assert moves[1] == ("right", "emo")
    assert moves[2] == ("right", END_SENTINEL)
    assert moves[3] == ("left", "sister")
    assert trace.steps[3].surface == "sisters"
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    ok("end-to-end walkthrough: gold answer and exact expansion steps in %.2fs" % elapsed)


def test_f_measure_relation():
    assert f_measure(0.8624, 0.91382) == pytest.approx(0.88736, abs=1e-4)
    assert f_measure(0.8624, 0.91382) == pytest.approx(0.88737, abs=1e-4)
    assert f_measure(0.85206, 0.82208) == pytest.approx(0.83681, abs=1e-4)
    assert f_measure(0.85206, 0.82208) == pytest.approx(0.83680, abs=1e-4)
    ok("harmonic F relation recovers both published precision/recall columns to 1e-4")


def test_type_two_gate(toy_bundle):
    suite = generate_technical_suite(toy_bundle, 300, seed=17)
    assert len(suite.group("meaningless")) == 100
    assert len(suite.group("irrelevant")) == 100
    report = run_suite(toy_bundle, suite)
    by_question = {s.question: s for s in report.items}
    for item in suite.group("meaningless"):
        assert not by_question[item.question].answered
    assert report.type2_rate == 0.0
    ok("type II gate: all 100 meaningless questions rejected, rate 0% on the 300-item suite")


def test_termination_on_randomized_units():
    rnd = random.Random(7)
    lexicon, words = random_lexicon(rnd, n_words=60)
    units_checked = 0
    attempt = 0
    while units_checked < 1000:
        attempt += 1
        corpus = random_corpus(rnd, 400, words)
        bundle, _ = train_from_corpus(corpus, [], lexicon)
        for unit_id, unit in bundle.mlsu_registry.items():
            state = expand_unit(bundle, unit_id)
            bound = len(unit.context_tokens) + 2
            for direction in ("right", "left"):
                steps = [s for s in state.steps if s.direction == direction]
                assert len(steps) <= bound
            emitted = [s.token for s in state.steps if not s.is_sentinel]
            assert len(emitted) == len(set(emitted))
            units_checked += 1
            if units_checked >= 1000:
                break
        assert attempt < 10
    ok("termination: 1000 randomized units halt within |tokens|+2 per direction, no reuse")


def test_persistence_round_trip(toy_bundle, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    save_bundle(toy_bundle, first)
    loaded = load_bundle(first)
    save_bundle(loaded, second)
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()

    question = "Where do men go?"
    before = synthesize(toy_bundle, question).to_json()
    after = synthesize(loaded, question).to_json()
    assert before == after
    ok("persistence: save->load->save byte-identical, trace bytes unchanged after reload")


def test_mode_comparison_degenerate_equality(lexicon):
    parallel, _ = train_from_corpus(TOY_CORPUS, TOY_QA, lexicon, mode="parallel")
    consecutive, _ = train_from_corpus(
        TOY_CORPUS, TOY_QA, lexicon, mode="consecutive"
    )
    for name, matrix in parallel.matrices().items():
        assert matrix.to_text() == consecutive.matrices()[name].to_text()

    suite = generate_technical_suite(parallel, 60, seed=3)
    reports = {
        "parallel": run_suite(parallel, suite),
        "consecutive": run_suite(consecutive, suite),
    }
    text = render_report(reports)
    assert "Parallel" in text and "Consecutive" in text
    for line in text.splitlines()[2:]:
        columns = line[38:].split()
        assert len(columns) == 2
        assert columns[0] == columns[1]
    assert reports["parallel"].to_dict() == reports["consecutive"].to_dict()
    ok("mode comparison: both report columns emitted and identical under zero upstream error")
