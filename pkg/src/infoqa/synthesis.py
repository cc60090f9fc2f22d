"""Answer construction: POS decision, unit retrieval, two-directional expansion.

An answer grows outward from the unit's verb: rightward token by token
until END, then leftward until START.  Every chosen token is removed from
the unit's set, so expansion always terminates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import NoEvidence
from .models import (
    ModelBundle,
    _classify_mlsu,
    mlsu_tokens,
    mlsu_verb,
    predict_answer_pos,
    token_step,
    token_to_word,
)
from .textmodel import (
    END_SENTINEL,
    START_SENTINEL,
    PosTag,
    QuestionSplit,
    role_for_pos,
    role_to_pos,
    split_question,
)

REJECT_NO_EVIDENCE = "no_evidence"
REJECT_LOW_CONFIDENCE = "low_confidence"

_RANKING_TOP_K = 5


@dataclass
class RejectConfig:
    """Gates that turn an answer attempt into a rejection."""

    mlsu_min: float = 0.1
    max_steps: int = 32


@dataclass
class SynthesisStep:
    direction: str
    context: list[str]
    token: str
    surface: str
    score: float
    confidence: float
    forced: bool = False

    @property
    def is_sentinel(self) -> bool:
        return self.token in (START_SENTINEL, END_SENTINEL)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "context": list(self.context),
            "token": self.token,
            "surface": self.surface,
            "score": _round9(self.score),
            "confidence": _round9(self.confidence),
            "forced": self.forced,
        }


@dataclass
class SynthesisState:
    """Mutable expansion state; one expand() call advances it one step."""

    verb: tuple[str, PosTag, str]
    remaining: set[str]
    max_steps: int = 32
    right: list[tuple[str, PosTag, str]] = field(default_factory=list)
    left: list[tuple[str, PosTag, str]] = field(default_factory=list)
    direction: str = "right"
    step_count: int = 0
    done: bool = False
    truncated: bool = False
    evidence_exhausted: bool = False
    steps: list[SynthesisStep] = field(default_factory=list)

    @property
    def words_right(self) -> list[str]:
        return [surface for _lemma, _pos, surface in self.right]

    @property
    def words_left(self) -> list[str]:
        return [surface for _lemma, _pos, surface in self.left]

    def answer_words(self) -> list[str]:
        return list(reversed(self.words_left)) + [self.verb[2]] + self.words_right


def expand(state: SynthesisState, bundle: ModelBundle) -> SynthesisState:
    """Advance one step: choose a token, realize its surface, shrink the set.

    Emitting END flips direction to leftward exactly once; emitting START
    finishes.  Hitting the step budget truncates and flags the state.
    """
    if state.done:
        return state
    if state.step_count >= state.max_steps:
        state.truncated = True
        state.done = True
        return state
    state.step_count += 1

    going_right = state.direction == "right"
    if going_right:
        sequence = [state.verb] + state.right
        context = sequence[-3:]
        sentinel = END_SENTINEL
    else:
        sequence = list(reversed(state.left)) + [state.verb] + state.right
        context = sequence[:3]
        sentinel = START_SENTINEL
    context_pairs = [(lemma, pos) for lemma, pos, _surface in context]

    try:
        token, score, conf = token_step(bundle, state.direction, context_pairs, state.remaining)
        forced = False
    except NoEvidence:
        token, score, conf = sentinel, 0.0, 1.0
        forced = True
        state.evidence_exhausted = True

    if token in (START_SENTINEL, END_SENTINEL):
        state.steps.append(
            SynthesisStep(state.direction, [l for l, _p in context_pairs], token, "",
                          score, conf, forced)
        )
        if going_right:
            state.direction = "left"
        else:
            state.done = True
        return state

    if going_right:
        adjacent = state.right[-1][2] if state.right else state.verb[2]
    else:
        adjacent = state.left[-1][2] if state.left else state.verb[2]
    token_pos = bundle.lexicon.tag_lemma(token)
    surface = token_to_word(bundle, adjacent, token, token_pos, state.verb[2], state.direction)
    state.steps.append(
        SynthesisStep(state.direction, [l for l, _p in context_pairs], token, surface,
                      score, conf)
    )
    entry = (token, token_pos, surface)
    if going_right:
        state.right.append(entry)
    else:
        state.left.append(entry)
    state.remaining.discard(token)
    return state


@dataclass
class AnswerTrace:
    """Full record of one question's journey through the pipeline."""

    question: str
    interrogative: str
    informative: list[dict]
    answer_pos: str | None = None
    answer_role: str | None = None
    role_pos: list[str] = field(default_factory=list)
    pos_confidence: float = 0.0
    mlsu_id: int | None = None
    mlsu_confidence: float = 0.0
    mlsu_ranking: list[dict] = field(default_factory=list)
    verb: str | None = None
    steps: list[SynthesisStep] = field(default_factory=list)
    final_answer: str = ""
    overall_confidence: float = 0.0
    rejected: bool = False
    reject_reason: str | None = None
    reject_stage: str | None = None
    truncated: bool = False
    evidence_exhausted: bool = False

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "interrogative": self.interrogative,
            "informative": self.informative,
            "answer_pos": self.answer_pos,
            "answer_role": self.answer_role,
            "role_pos": list(self.role_pos),
            "pos_confidence": _round9(self.pos_confidence),
            "mlsu_id": self.mlsu_id,
            "mlsu_confidence": _round9(self.mlsu_confidence),
            "mlsu_ranking": self.mlsu_ranking,
            "verb": self.verb,
            "steps": [s.to_dict() for s in self.steps],
            "final_answer": self.final_answer,
            "overall_confidence": _round9(self.overall_confidence),
            "rejected": self.rejected,
            "reject_reason": self.reject_reason,
            "reject_stage": self.reject_stage,
            "truncated": self.truncated,
            "evidence_exhausted": self.evidence_exhausted,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=indent)


def _round9(value: float) -> float:
    """Scores serialize at 9 significant decimal digits."""
    return float("%.9g" % value)


def synthesize(
    bundle: ModelBundle,
    question: str,
    thresholds: RejectConfig | None = None,
) -> AnswerTrace:
    """Answer a question against a trained bundle; never raises on input.

    Unanswerable questions come back as rejected traces (reason
    no_evidence); answerable-but-weak retrievals are gated by
    thresholds.mlsu_min (reason low_confidence) before any synthesis runs.
    """
    if thresholds is None:
        thresholds = RejectConfig(
            mlsu_min=bundle.config.mlsu_min_confidence,
            max_steps=bundle.config.max_steps,
        )
    qsplit = split_question(question, bundle.lexicon)
    trace = AnswerTrace(
        question=question,
        interrogative=qsplit.interrogative,
        informative=[
            {"surface": t.surface, "lemma": t.lemma, "pos": t.pos.name}
            for t in qsplit.informative
        ],
    )

    try:
        answer_pos, pos_conf = predict_answer_pos(bundle, qsplit)
    except NoEvidence:
        trace.rejected = True
        trace.reject_reason = REJECT_NO_EVIDENCE
        trace.reject_stage = "question-pos"
        return trace
    trace.answer_pos = answer_pos.name
    trace.answer_role = role_for_pos(answer_pos)
    trace.role_pos = sorted(t.value for t in role_to_pos(trace.answer_role))
    trace.pos_confidence = pos_conf

    try:
        ranking = _classify_mlsu(bundle, qsplit, answer_pos)
    except NoEvidence:
        trace.rejected = True
        trace.reject_reason = REJECT_NO_EVIDENCE
        trace.reject_stage = "mlsu"
        trace.overall_confidence = 0.0
        return trace
    trace.mlsu_id = int(ranking.winner)
    trace.mlsu_confidence = ranking.ranked[0].confidence
    trace.mlsu_ranking = [
        {"mlsu_id": int(r.class_id), "score": _round9(r.score), "confidence": _round9(r.confidence)}
        for r in ranking.ranked[:_RANKING_TOP_K]
    ]

    if trace.mlsu_confidence < thresholds.mlsu_min:
        trace.rejected = True
        trace.reject_reason = REJECT_LOW_CONFIDENCE
        trace.reject_stage = "mlsu"
        trace.overall_confidence = min(trace.pos_confidence, trace.mlsu_confidence)
        return trace

    verb_surface = mlsu_verb(bundle, trace.mlsu_id)
    verb_lemma, verb_pos = bundle.lexicon.lookup(verb_surface)
    tokens = mlsu_tokens(bundle, trace.mlsu_id)
    trace.verb = verb_surface

    state = SynthesisState(
        verb=(verb_lemma, verb_pos, verb_surface),
        remaining=set(tokens) - {START_SENTINEL, END_SENTINEL},
        max_steps=thresholds.max_steps,
    )
    while not state.done:
        expand(state, bundle)

    trace.steps = state.steps
    trace.final_answer = " ".join(state.answer_words())
    trace.truncated = state.truncated
    trace.evidence_exhausted = state.evidence_exhausted

    confidences = [trace.pos_confidence, trace.mlsu_confidence]
    confidences.extend(s.confidence for s in state.steps if not s.is_sentinel)
    trace.overall_confidence = min(confidences)
    return trace
