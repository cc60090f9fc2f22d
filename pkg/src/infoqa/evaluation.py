"""Evaluation harness: three question groups, 1/0.5/0 scoring, error rates.

Content questions are checked against gold answers; irrelevant and
meaningless questions exist to be rejected, and answering one is a type II
error.  The integral error measures weight items by confidence and are a
reconstruction (the report header says so).
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CorpusTooSmall, EmptySuite, LengthMismatch
from .models import ModelBundle
from .synthesis import RejectConfig, synthesize
from .textmodel import END_SENTINEL, START_SENTINEL, Lexicon, PosTag

GROUPS = ("content", "irrelevant", "meaningless")

_WORD_RE = re.compile(r"\w+(?:['’-]\w+)*")
_default_lexicon: Lexicon | None = None

RECONSTRUCTION_NOTE = (
    "# integral error measures are confidence-weighted reconstructions"
)

# Real but off-topic words for the irrelevant group; filtered against the
# corpus vocabulary before use.
OFF_TOPIC_POOL = (
    "piano", "galaxy", "volcano", "umbrella", "bicycle", "ocean", "pharaoh",
    "molecule", "violin", "tundra", "harbor", "pepper", "marble", "lantern",
    "falcon", "meadow", "copper", "jungle", "anchor", "blizzard", "canyon",
    "dolphin", "ember", "fortress", "glacier", "harvest", "island", "jacket",
    "kitten", "legend",
)

_GARBAGE_ALPHABET = "bcdfghjklmnpqrstvwxz"

_CONSTRUCTION_FOR_POS = {
    PosTag.NOUN: "what",
    PosTag.VERB: "what happened",
    PosTag.ADJ: "which",
    PosTag.ADV: "how",
    PosTag.NUM: "how",
    PosTag.PRON: "who",
    PosTag.PREP: "where",
    PosTag.CONJ: "where",
    PosTag.PARTICIPLE: "which",
    PosTag.GERUND: "what",
    PosTag.ANY: "what",
    PosTag.OTHER: "what",
}


@dataclass
class SuiteItem:
    question: str
    gold: str | None
    alternatives: list[str]
    group: str

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError("unknown suite group %r" % self.group)
        if self.group != "content":
            self.gold = None


@dataclass
class EvalSuite:
    items: list[SuiteItem]

    def group(self, name: str) -> list[SuiteItem]:
        return [item for item in self.items if item.group == name]

    def to_text(self) -> str:
        lines = []
        for item in self.items:
            lines.append(
                "%s\t%s\t%s\t%s"
                % (item.group, item.question, item.gold or "", "|".join(item.alternatives))
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EvalSuite":
        items = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise ValueError("suite line %d: expected group<TAB>question" % lineno)
            group, question = parts[0], parts[1]
            gold = parts[2] if len(parts) > 2 and parts[2] else None
            alts = [a for a in parts[3].split("|") if a] if len(parts) > 3 and parts[3] else []
            if group == "content" and not gold:
                raise ValueError("suite line %d: content item needs a gold answer" % lineno)
            items.append(SuiteItem(question=question, gold=gold, alternatives=alts, group=group))
        return cls(items=items)


def _lexicon_or_default(lexicon: Lexicon | None) -> Lexicon:
    global _default_lexicon
    if lexicon is not None:
        return lexicon
    if _default_lexicon is None:
        _default_lexicon = Lexicon.bundled()
    return _default_lexicon


def _normalize(text: str, lexicon: Lexicon) -> list[str]:
    return [lexicon.lookup(word)[0] for word in _WORD_RE.findall(text)]


def _contains(haystack: list[str], needle: list[str]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    return any(
        haystack[i : i + len(needle)] == needle
        for i in range(len(haystack) - len(needle) + 1)
    )


def score_answer(
    predicted: str,
    gold: str,
    alternatives: Iterable[str] = (),
    lexicon: Lexicon | None = None,
) -> float:
    """1 point for a gold match, half for an alternative, 0 otherwise.

    Matching is on normalized tokens (lemmatized, lowercased, punctuation
    stripped); the gold sequence must appear contiguously in the answer.
    """
    lexicon = _lexicon_or_default(lexicon)
    predicted_tokens = _normalize(predicted, lexicon)
    if _contains(predicted_tokens, _normalize(gold, lexicon)):
        return 1.0
    for alt in alternatives:
        if _contains(predicted_tokens, _normalize(alt, lexicon)):
            return 0.5
    return 0.0


def integral_estimate(points: Sequence[float], confidences: Sequence[float]) -> float:
    """Dot product of per-item points and confidences."""
    if len(points) != len(confidences):
        raise LengthMismatch(
            "points and confidences differ in length: %d vs %d"
            % (len(points), len(confidences))
        )
    return sum(p * c for p, c in zip(points, confidences))


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both components are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class ScoredItem:
    group: str
    question: str
    answered: bool
    points: float
    confidence: float
    answer: str = ""
    reject_reason: str | None = None


@dataclass
class SuiteReport:
    items: list[ScoredItem]
    questions_asked: int
    correct_count: int
    integral: float
    type1_rate: float
    type2_rate: float
    type1_integral: float
    type2_integral: float
    precision: float
    recall: float
    f1: float

    def to_dict(self, include_items: bool = True) -> dict:
        data = {
            "questions_asked": self.questions_asked,
            "correct_count": self.correct_count,
            "integral_estimate": self.integral,
            "type1_rate": self.type1_rate,
            "type2_rate": self.type2_rate,
            "type1_integral": self.type1_integral,
            "type2_integral": self.type2_integral,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }
        if include_items:
            data["items"] = [
                {
                    "group": s.group,
                    "question": s.question,
                    "answered": s.answered,
                    "points": s.points,
                    "confidence": s.confidence,
                    "answer": s.answer,
                    "reject_reason": s.reject_reason,
                }
                for s in self.items
            ]
        return data


def suite_metrics(scored: Sequence[ScoredItem]) -> SuiteReport:
    """Fold per-item outcomes into the report's rates and measures."""
    content = [s for s in scored if s.group == "content"]
    nonsense = [s for s in scored if s.group in ("irrelevant", "meaningless")]
    if not content:
        raise EmptySuite("a suite needs at least one content item")

    correct_count = sum(1 for s in content if s.points > 0)
    integral = integral_estimate(
        [s.points for s in content], [s.confidence for s in content]
    )

    type1_errors = [s for s in content if s.points < 1.0]
    type1_rate = len(type1_errors) / len(content)
    content_conf = sum(s.confidence for s in content)
    type1_integral = (
        sum(s.confidence for s in type1_errors) / content_conf if content_conf > 0 else 0.0
    )

    answered_nonsense = [s for s in nonsense if s.answered]
    type2_rate = len(answered_nonsense) / len(nonsense) if nonsense else 0.0
    nonsense_conf = sum(s.confidence for s in nonsense)
    type2_integral = (
        sum(s.confidence for s in answered_nonsense) / nonsense_conf
        if nonsense_conf > 0
        else 0.0
    )

    answered_all = [s for s in scored if s.answered]
    fully_correct = sum(1 for s in content if s.answered and s.points == 1.0)
    precision = fully_correct / len(answered_all) if answered_all else 0.0
    recall = fully_correct / len(content)

    return SuiteReport(
        items=list(scored),
        questions_asked=len(scored),
        correct_count=correct_count,
        integral=integral,
        type1_rate=type1_rate,
        type2_rate=type2_rate,
        type1_integral=type1_integral,
        type2_integral=type2_integral,
        precision=precision,
        recall=recall,
        f1=f_measure(precision, recall),
    )


def run_suite(
    bundle: ModelBundle,
    suite: EvalSuite,
    thresholds: RejectConfig | None = None,
) -> SuiteReport:
    """Ask every suite question and score the outcomes."""
    if not suite.items:
        raise EmptySuite("suite has no items")
    scored = []
    for item in suite.items:
        trace = synthesize(bundle, item.question, thresholds)
        answered = not trace.rejected
        points = 0.0
        if answered and item.group == "content" and item.gold:
            points = score_answer(
                trace.final_answer, item.gold, item.alternatives, bundle.lexicon
            )
        scored.append(
            ScoredItem(
                group=item.group,
                question=item.question,
                answered=answered,
                points=points,
                confidence=trace.overall_confidence,
                answer=trace.final_answer,
                reject_reason=trace.reject_reason,
            )
        )
    return suite_metrics(scored)


# ---------------------------------------------------------------------------
# automatic suite generation


def _corpus_lemmas(bundle: ModelBundle) -> set[str]:
    lemmas = set()
    for unit in bundle.mlsu_registry.values():
        lemmas.update(t for t in unit.context_tokens)
        lemmas.add(bundle.lexicon.lookup(unit.verb)[0])
    return lemmas


def _garbage_word(rnd: random.Random, banned: set[str], lexicon: Lexicon) -> str:
    while True:
        word = "".join(rnd.choice(_GARBAGE_ALPHABET) for _ in range(rnd.randint(5, 8)))
        if word not in banned and word not in lexicon.entries:
            return word


def _content_item(bundle: ModelBundle, unit_ids: list[int], rnd: random.Random) -> SuiteItem:
    unit = bundle.mlsu_registry[rnd.choice(unit_ids)]
    segment = unit.segment_words(bundle.lexicon)
    lemmas_in_segment = [t.lemma for t in segment]
    sentinels = (START_SENTINEL, END_SENTINEL)
    candidates = [
        tok
        for tok in unit.context_tokens
        if tok not in sentinels and tok in lemmas_in_segment
    ]
    if not candidates:
        candidates = [tok for tok in unit.context_tokens if tok not in sentinels]
    elided = rnd.choice(candidates)

    question_tokens = [
        tok for tok in unit.context_tokens if tok not in sentinels and tok != elided
    ]
    construction = _CONSTRUCTION_FOR_POS[bundle.lexicon.tag_lemma(elided)]
    question = "%s %s?" % (construction, " ".join(question_tokens))

    if elided in lemmas_in_segment:
        start = lemmas_in_segment.index(elided)
        gold = " ".join(t.surface for t in segment[start:])
    else:
        gold = elided
    return SuiteItem(question=question, gold=gold, alternatives=[], group="content")


def generate_technical_suite(bundle: ModelBundle, n: int, seed: int = 0) -> EvalSuite:
    """Template n questions from the bundle's own corpus, a third per group.

    content: a unit's tokens with one elided; the elided token's clause tail
    is the gold answer.  irrelevant: real off-topic words.  meaningless:
    out-of-vocabulary garbage.  Deterministic for a fixed seed.
    """
    if len(bundle.mlsu_registry) < 2:
        raise CorpusTooSmall("need at least 2 units to generate a suite")
    if n <= 0:
        raise ValueError("n must be positive")

    rnd = random.Random(seed)
    per_group = n // 3
    counts = {
        "content": n - 2 * per_group,
        "irrelevant": per_group,
        "meaningless": per_group,
    }
    unit_ids = sorted(bundle.mlsu_registry)
    corpus_lemmas = _corpus_lemmas(bundle)
    pool = [w for w in OFF_TOPIC_POOL if w not in corpus_lemmas]

    items: list[SuiteItem] = []
    for _ in range(counts["content"]):
        items.append(_content_item(bundle, unit_ids, rnd))
    constructions = ("what", "where", "when", "why", "who", "which", "how")
    for _ in range(counts["irrelevant"]):
        k = rnd.randint(3, min(5, len(pool)))
        words = rnd.sample(pool, k)
        question = "%s %s?" % (rnd.choice(constructions), " ".join(words))
        items.append(SuiteItem(question=question, gold=None, alternatives=[], group="irrelevant"))
    for _ in range(counts["meaningless"]):
        words = [
            _garbage_word(rnd, corpus_lemmas, bundle.lexicon)
            for _ in range(rnd.randint(2, 4))
        ]
        question = "%s?" % " ".join(words)
        items.append(SuiteItem(question=question, gold=None, alternatives=[], group="meaningless"))
    return EvalSuite(items=items)


# ---------------------------------------------------------------------------
# report rendering


def _pct(value: float) -> str:
    return "%.1f%%" % (100.0 * value)


def render_report(reports: dict[str, SuiteReport | None]) -> str:
    """Two-column comparison table (parallel / consecutive), Table-5 shaped."""

    def col(mode: str, fn) -> str:
        report = reports.get(mode)
        return "-" if report is None else fn(report)

    rows = [
        ("Questions asked", lambda r: "%d" % r.questions_asked),
        ("Correct answers", lambda r: "%d" % r.correct_count),
        ("Correct answers (integral estimate)", lambda r: "%.4g" % r.integral),
        ("Type I Error", lambda r: _pct(r.type1_rate)),
        ("Type II Error", lambda r: _pct(r.type2_rate)),
        ("Type I Error (integral measure)", lambda r: _pct(r.type1_integral)),
        ("Type II Error (integral measure)", lambda r: _pct(r.type2_integral)),
        ("F-measure", lambda r: "%.5f" % r.f1),
        ("Precision", lambda r: "%.5f" % r.precision),
        ("Recall", lambda r: "%.5f" % r.recall),
    ]
    lines = [
        RECONSTRUCTION_NOTE,
        "%-38s %-14s %-14s" % ("Parameter", "Parallel", "Consecutive"),
    ]
    for label, fn in rows:
        lines.append(
            "%-38s %-14s %-14s" % (label, col("parallel", fn), col("consecutive", fn))
        )
    return "\n".join(lines) + "\n"
