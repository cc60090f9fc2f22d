import random

import pytest

from conftest import expand_unit, random_corpus, random_lexicon
from infoqa.models import train_from_corpus
from infoqa.synthesis import RejectConfig, SynthesisState, expand, synthesize
from infoqa.textmodel import END_SENTINEL, START_SENTINEL


class TestSynthesize:
    def test_toy_walkthrough(self, toy_bundle):
        trace = synthesize(toy_bundle, "Where do men go?")
        assert not trace.rejected
        assert trace.final_answer == "Men go to work"
        assert trace.answer_pos == "NOUN"
        assert toy_bundle.mlsu_registry[trace.mlsu_id].verb == "go"

    def test_john_walkthrough_contains_expected_phrase(self, john_bundle):
        trace = synthesize(john_bundle, "What does John listen to every day?")
        assert not trace.rejected
        assert "listens to classical music every day" in trace.final_answer

    def test_john_expansion_steps(self, john_bundle):
        trace = synthesize(john_bundle, "What do his sisters listen to?")
        moves = [(s.direction, s.token) for s in trace.steps]
        assert moves[:3] == [("right", "to"), ("right", "emo"), ("right", END_SENTINEL)]
        assert moves[3] == ("left", "sister")
        assert trace.steps[3].surface == "sisters"
        assert moves[-1] == ("left", START_SENTINEL)

    def test_fully_oov_question_rejected(self, toy_bundle):
        trace = synthesize(toy_bundle, "Is a hexagonal moon tasty?")
        assert trace.rejected
        assert trace.reject_reason == "no_evidence"
        assert trace.steps == []
        assert trace.final_answer == ""
        assert trace.overall_confidence == 0.0

    def test_low_confidence_gate(self, toy_bundle):
        trace = synthesize(
            toy_bundle, "Where do men go?", RejectConfig(mlsu_min=1.01)
        )
        assert trace.rejected
        assert trace.reject_reason == "low_confidence"
        assert trace.steps == []
        assert trace.mlsu_id is not None

    def test_determinism(self, toy_bundle):
        a = synthesize(toy_bundle, "Why it is light at morning?")
        b = synthesize(toy_bundle, "Why it is light at morning?")
        assert a.to_json() == b.to_json()

    def test_answer_join_invariant(self, john_bundle):
        trace = synthesize(john_bundle, "What does John listen to every day?")
        rights = [s.surface for s in trace.steps if s.direction == "right" and s.surface]
        lefts = [s.surface for s in trace.steps if s.direction == "left" and s.surface]
        expected = " ".join(list(reversed(lefts)) + [trace.verb] + rights)
        assert trace.final_answer == expected

    def test_overall_confidence_is_weakest_link(self, toy_bundle):
        trace = synthesize(toy_bundle, "Where do men go?")
        stage_confs = [trace.pos_confidence, trace.mlsu_confidence] + [
            s.confidence for s in trace.steps if not s.is_sentinel
        ]
        assert trace.overall_confidence == min(stage_confs)
        assert all(trace.overall_confidence <= c for c in stage_confs)

    def test_trace_serialization_schema(self, toy_bundle):
        trace = synthesize(toy_bundle, "Where do men go?")
        data = trace.to_dict()
        for key in (
            "question", "interrogative", "informative", "answer_pos", "pos_confidence",
            "mlsu_id", "mlsu_confidence", "mlsu_ranking", "steps", "final_answer",
            "overall_confidence", "rejected",
        ):
            assert key in data
        assert data["steps"][0]["direction"] == "right"


class TestExpand:
    def test_single_step_consumes_token(self, john_bundle):
        unit = john_bundle.mlsu_registry[1]
        verb_lemma, verb_pos = john_bundle.lexicon.lookup(unit.verb)
        state = SynthesisState(
            verb=(verb_lemma, verb_pos, unit.verb),
            remaining=set(unit.context_tokens) - {START_SENTINEL, END_SENTINEL},
            max_steps=50,
        )
        expand(state, john_bundle)
        assert state.steps[0].token == "to"
        assert "to" not in state.remaining
        assert state.direction == "right"

    def test_end_flips_direction_once(self, john_bundle):
        state = expand_unit(john_bundle, 1)
        directions = [s.direction for s in state.steps]
        flip = directions.index("left")
        assert all(d == "right" for d in directions[:flip])
        assert all(d == "left" for d in directions[flip:])
        assert state.steps[flip - 1].token == END_SENTINEL

    def test_step_budget_truncates(self, john_bundle):
        unit = john_bundle.mlsu_registry[0]
        verb_lemma, verb_pos = john_bundle.lexicon.lookup(unit.verb)
        state = SynthesisState(
            verb=(verb_lemma, verb_pos, unit.verb),
            remaining=set(unit.context_tokens) - {START_SENTINEL, END_SENTINEL},
            max_steps=1,
        )
        while not state.done:
            expand(state, john_bundle)
        assert state.truncated
        assert state.step_count == 1

    def test_expand_after_done_is_identity(self, john_bundle):
        state = expand_unit(john_bundle, 0)
        snapshot = list(state.steps)
        expand(state, john_bundle)
        assert state.steps == snapshot


class TestTermination:
    def test_randomized_units_terminate_without_reuse(self):
        rnd = random.Random(42)
        lexicon, words = random_lexicon(rnd)
        corpus = random_corpus(rnd, 40, words)
        bundle, _ = train_from_corpus(corpus, [], lexicon)
        assert len(bundle.mlsu_registry) >= 20
        for unit_id, unit in bundle.mlsu_registry.items():
            state = expand_unit(bundle, unit_id)
            n_tokens = len(unit.context_tokens)
            for direction in ("right", "left"):
                steps = [s for s in state.steps if s.direction == direction]
                assert len(steps) <= n_tokens + 2
            emitted = [s.token for s in state.steps if not s.is_sentinel]
            assert len(emitted) == len(set(emitted))
            assert set(emitted) <= set(unit.context_tokens)
