"""The pipeline models: training-row construction, training, typed predictors.

Six matrices back the answer pipeline:

  0 question-pos     construction + informative POS  -> POS of the missing word
  1 mlsu             unit's verb + context lemmas    -> unit id
  2 next-token       two preceding lemma_pos features -> following lemma
  3 prev-token       two following lemma_pos features -> preceding lemma
  4 word-form-next   adjacent word, token, POS, verb -> surface going right
  5 word-form-prev   adjacent word, token, POS, verb -> surface going left

The unit's verb and token set are registry lookups, not matrices.
"""

from __future__ import annotations

import hashlib
import logging
import random
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Sequence

from .errors import EmptyModel, EmptyTrainingSet, NoEvidence, UnknownMlsuId
from .matrix import (
    InformationMatrix,
    WeightConfig,
    accumulate_counts,
    activate,
    classify,
    compute_weights,
)
from .textmodel import (
    END_SENTINEL,
    START_SENTINEL,
    Lexicon,
    Mlsu,
    PosTag,
    QuestionSplit,
    Token,
    extract_mlsus,
    segment_clauses,
    split_question,
    split_sentences,
    tokenize_and_tag,
)

log = logging.getLogger(__name__)

POS_MODEL = 0
MLSU_MODEL = 1
NEXT_TOKEN_MODEL = 2
PREV_TOKEN_MODEL = 3
WORD_FORM_NEXT = 4
WORD_FORM_PREV = 5

MODEL_NAMES = {
    POS_MODEL: "question-pos",
    MLSU_MODEL: "mlsu",
    NEXT_TOKEN_MODEL: "next-token",
    PREV_TOKEN_MODEL: "prev-token",
    WORD_FORM_NEXT: "word-form-next",
    WORD_FORM_PREV: "word-form-prev",
}

# When the gold answer brings several words the question lacks, the word
# being asked about is picked by POS preference.
_MISSING_POS_PRIORITY = (
    PosTag.VERB,
    PosTag.NOUN,
    PosTag.PRON,
    PosTag.ADJ,
    PosTag.NUM,
    PosTag.PARTICIPLE,
    PosTag.GERUND,
    PosTag.ADV,
)


@dataclass(frozen=True)
class TrainingRow:
    model_id: int
    features: tuple[str, ...]
    label: str

    def __post_init__(self):
        if not 0 <= self.model_id <= 5:
            raise ValueError("model_id out of range: %r" % self.model_id)
        if not self.features:
            raise ValueError("training row needs at least one feature")


@dataclass
class BundleConfig:
    weights: WeightConfig = field(default_factory=WeightConfig)
    mlsu_min_confidence: float = 0.1
    max_steps: int = 32
    seed: int = 0
    holdout_ratio: float = 0.1

    def to_dict(self) -> dict:
        return {
            "weights": {
                "emergence_enabled": self.weights.emergence_enabled,
                "bias_default": self.weights.bias_default,
                "alpha": self.weights.alpha,
                "activation_epsilon": self.weights.activation_epsilon,
                "log_base": self.weights.log_base,
            },
            "mlsu_min_confidence": self.mlsu_min_confidence,
            "max_steps": self.max_steps,
            "seed": self.seed,
            "holdout_ratio": self.holdout_ratio,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BundleConfig":
        w = data.get("weights", {})
        return cls(
            weights=WeightConfig(
                emergence_enabled=w.get("emergence_enabled", True),
                bias_default=w.get("bias_default", 0.0),
                alpha=w.get("alpha", 0.0),
                activation_epsilon=w.get("activation_epsilon", 0.0),
                log_base=w.get("log_base", 2),
            ),
            mlsu_min_confidence=data.get("mlsu_min_confidence", 0.1),
            max_steps=data.get("max_steps", 32),
            seed=data.get("seed", 0),
            holdout_ratio=data.get("holdout_ratio", 0.1),
        )


@dataclass
class ModelStats:
    model_id: int
    name: str
    classes: int
    features: int
    connections: int
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass
class TrainReport:
    mode: str
    per_model: list[ModelStats]
    wall_time_s: float

    def render(self) -> str:
        header = "%-16s %8s %9s %12s %10s %8s %8s" % (
            "model", "classes", "features", "connections", "precision", "recall", "f1"
        )
        lines = [header, "-" * len(header)]
        for s in self.per_model:
            lines.append(
                "%-16s %8d %9d %12d %10s %8s %8s"
                % (
                    s.name,
                    s.classes,
                    s.features,
                    s.connections,
                    _fmt(s.precision),
                    _fmt(s.recall),
                    _fmt(s.f1),
                )
            )
        lines.append("mode=%s  wall=%.3fs" % (self.mode, self.wall_time_s))
        return "\n".join(lines)


def _fmt(value: float | None) -> str:
    return "-" if value is None else "%.3f" % value


@dataclass
class ModelBundle:
    """Everything a trained pipeline needs; immutable once built."""

    pos_model: InformationMatrix | None
    mlsu_model: InformationMatrix
    next_token_model: InformationMatrix
    prev_token_model: InformationMatrix
    word_form_next: InformationMatrix
    word_form_prev: InformationMatrix
    mlsu_registry: dict[int, Mlsu]
    lexicon: Lexicon
    config: BundleConfig
    training_mode: str
    corpus_hash: str = ""
    created_at: str = ""
    report: TrainReport | None = None

    def matrices(self) -> dict[str, InformationMatrix]:
        named = {
            "pos_model": self.pos_model,
            "mlsu_model": self.mlsu_model,
            "next_token": self.next_token_model,
            "prev_token": self.prev_token_model,
            "word_form_next": self.word_form_next,
            "word_form_prev": self.word_form_prev,
        }
        return {name: m for name, m in named.items() if m is not None}

    def model_stats(self) -> list[dict]:
        stats = []
        by_id = {s.model_id: s for s in (self.report.per_model if self.report else [])}
        order = {
            "pos_model": POS_MODEL,
            "mlsu_model": MLSU_MODEL,
            "next_token": NEXT_TOKEN_MODEL,
            "prev_token": PREV_TOKEN_MODEL,
            "word_form_next": WORD_FORM_NEXT,
            "word_form_prev": WORD_FORM_PREV,
        }
        for name, matrix in self.matrices().items():
            model_id = order[name]
            reported = by_id.get(model_id)
            stats.append(
                {
                    "name": name,
                    "model_id": model_id,
                    "classes": len(matrix.class_ids),
                    "features": len(matrix.feature_ids),
                    "connections": matrix.connection_count,
                    "precision": reported.precision if reported else None,
                    "recall": reported.recall if reported else None,
                    "f1": reported.f1 if reported else None,
                }
            )
        return stats


# ---------------------------------------------------------------------------
# feature encodings


def trigram_feature(lemma: str, lexicon: Lexicon) -> str:
    """Lemma with its canonical POS suffix, e.g. "man_noun"."""
    return "%s_%s" % (lemma, lexicon.tag_lemma(lemma).value)


def word_form_features(
    adjacent_surface: str, token: str, token_pos: PosTag, verb: str
) -> tuple[str, ...]:
    return (
        "adj_%s" % adjacent_surface.lower(),
        "tok_%s" % token,
        "pos_%s" % token_pos.value,
        "verb_%s" % verb.lower(),
    )


# ---------------------------------------------------------------------------
# corpus processing


def build_registry(corpus_text: str, lexicon: Lexicon) -> dict[int, Mlsu]:
    """Extract every sentence's units into an id-keyed registry."""
    registry: dict[int, Mlsu] = {}
    next_id = 0
    for sentence in split_sentences(corpus_text):
        tokens = tokenize_and_tag(sentence, lexicon)
        for unit in extract_mlsus(tokens, next_id, sentence):
            registry[unit.id] = unit
        next_id = len(registry)
    return registry


def parse_qa_pairs(text: str) -> list[tuple[str, str]]:
    """Parse `question<TAB>answer` lines; blank lines and # comments skipped."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError("qa line %d: expected question<TAB>answer" % lineno)
        pairs.append((parts[0], parts[1]))
    return pairs


def _anchored_segments(tokens: list[Token]) -> list[tuple[list[Token], int, int]]:
    """Clause spans that produced a unit: (segment, sentence offset, anchor index)."""
    result = []
    offset = 0
    for segment in segment_clauses(tokens):
        anchor = next((i for i, t in enumerate(segment) if t.pos is PosTag.VERB), None)
        if anchor is None:
            anchor = next((i for i, t in enumerate(segment) if t.pos is PosTag.NOUN), None)
        if anchor is not None:
            result.append((segment, offset, anchor))
        offset += len(segment)
    return result


def _sentence_occurrences(
    registry: dict[int, Mlsu], lexicon: Lexicon
) -> list[tuple[list[Token], list[tuple[Mlsu, list[Token], int, int]]]]:
    """Align registry units back onto their sentences, one entry per occurrence.

    Duplicate sentences in the corpus come back as separate occurrences so
    their counts are not collapsed.
    """
    groups: dict[str, list[Mlsu]] = {}
    for mid in sorted(registry):
        unit = registry[mid]
        groups.setdefault(unit.source_sentence, []).append(unit)

    occurrences = []
    for sentence, units in groups.items():
        tokens = tokenize_and_tag(sentence, lexicon)
        anchored = _anchored_segments(tokens)
        if not anchored:
            continue
        for start in range(0, len(units), len(anchored)):
            chunk = units[start : start + len(anchored)]
            aligned = [
                (unit, seg, offset, anchor)
                for unit, (seg, offset, anchor) in zip(chunk, anchored)
            ]
            occurrences.append((tokens, aligned))
    return occurrences


# ---------------------------------------------------------------------------
# training-row construction


def _missing_answer_pos(question: str, answer: str, lexicon: Lexicon) -> PosTag | None:
    question_lemmas = {t.lemma for t in tokenize_and_tag(question, lexicon)}
    missing = [
        t for t in tokenize_and_tag(answer, lexicon) if t.lemma not in question_lemmas
    ]
    if not missing:
        return None
    for wanted in _MISSING_POS_PRIORITY:
        for tok in missing:
            if tok.pos is wanted:
                return wanted
    return missing[0].pos


def _question_pos_rows(
    qa_pairs: Sequence[tuple[str, str]], lexicon: Lexicon
) -> list[TrainingRow]:
    rows = []
    for question, answer in qa_pairs:
        qsplit = split_question(question, lexicon)
        label_pos = _missing_answer_pos(question, answer, lexicon)
        if label_pos is None:
            log.warning("no new taggable content in answer %r; row skipped", answer)
            continue
        features: dict[str, None] = {}
        if qsplit.interrogative:
            features[qsplit.interrogative] = None
        for tok in qsplit.informative:
            features[tok.pos.value] = None
        if not features:
            continue
        rows.append(TrainingRow(POS_MODEL, tuple(features), label_pos.name))
    return rows


def _mlsu_rows(registry: dict[int, Mlsu], lexicon: Lexicon) -> list[TrainingRow]:
    # Each unit is retrievable by its verb, its content lemmas, and the POS
    # kinds it can supply an answer word for.
    rows = []
    for mid in sorted(registry):
        unit = registry[mid]
        verb_lemma, verb_pos = lexicon.lookup(unit.verb)
        features = dict.fromkeys([verb_lemma])
        pos_features = dict.fromkeys([verb_pos.value])
        for tok in unit.context_tokens:
            if tok not in (START_SENTINEL, END_SENTINEL):
                features[tok] = None
                pos_features[lexicon.tag_lemma(tok).value] = None
        features.update(pos_features)
        rows.append(TrainingRow(MLSU_MODEL, tuple(features), str(mid)))
    return rows


def _trigram_rows(tokens: list[Token], lexicon: Lexicon) -> list[TrainingRow]:
    lemmas = [t.lemma for t in tokens]
    feats = [trigram_feature(lem, lexicon) for lem in lemmas]
    n = len(lemmas)
    rows = []
    for i in range(1, n):
        window = tuple(dict.fromkeys(feats[max(0, i - 2) : i]))
        rows.append(TrainingRow(NEXT_TOKEN_MODEL, window, lemmas[i]))
    if n:
        tail = tuple(dict.fromkeys(feats[max(0, n - 2) : n]))
        rows.append(TrainingRow(NEXT_TOKEN_MODEL, tail, END_SENTINEL))
        head = tuple(dict.fromkeys(feats[0:2]))
        rows.append(TrainingRow(PREV_TOKEN_MODEL, head, START_SENTINEL))
    for i in range(n - 1):
        window = tuple(dict.fromkeys(feats[i + 1 : i + 3]))
        rows.append(TrainingRow(PREV_TOKEN_MODEL, window, lemmas[i]))
    return rows


def _word_form_rows(unit: Mlsu, segment: list[Token]) -> list[TrainingRow]:
    rows = []
    for i in range(len(segment) - 1):
        left, right = segment[i], segment[i + 1]
        rows.append(
            TrainingRow(
                WORD_FORM_NEXT,
                word_form_features(left.surface, right.lemma, right.pos, unit.verb),
                right.surface,
            )
        )
        rows.append(
            TrainingRow(
                WORD_FORM_PREV,
                word_form_features(right.surface, left.lemma, left.pos, unit.verb),
                left.surface,
            )
        )
    return rows


def build_training_rows(
    registry: dict[int, Mlsu],
    qa_pairs: Sequence[tuple[str, str]],
    lexicon: Lexicon,
) -> list[TrainingRow]:
    """Emit the training rows for all six models from a corpus registry plus QA pairs.

    Without QA pairs the question-pos model simply gets no rows and the
    pipeline falls back to an unconstrained POS at answer time.
    """
    if not registry:
        raise EmptyTrainingSet("empty unit registry")
    rows: list[TrainingRow] = []
    rows.extend(_question_pos_rows(qa_pairs, lexicon))
    rows.extend(_mlsu_rows(registry, lexicon))
    for tokens, aligned in _sentence_occurrences(registry, lexicon):
        rows.extend(_trigram_rows(tokens, lexicon))
        for unit, segment, _offset, _anchor in aligned:
            rows.extend(_word_form_rows(unit, segment))
    return rows


# ---------------------------------------------------------------------------
# training


def _train_matrix(rows: Sequence[TrainingRow], config: WeightConfig) -> InformationMatrix:
    counts = accumulate_counts((row.features, row.label) for row in rows)
    if len(counts.class_ids) < 2 and config.emergence_enabled:
        # The emergence coefficient is undefined for one class; a one-class
        # matrix is still usable (constant argmax), so scale by 1 instead.
        log.warning("single-class model; emergence coefficient disabled for it")
        config = replace(config, emergence_enabled=False)
    return compute_weights(counts, config)


def _holdout_metrics(
    rows: Sequence[TrainingRow], config: BundleConfig, salt: int
) -> tuple[float | None, float | None, float | None]:
    """Precision/recall/f1 on a held-out slice; the shipped matrix still
    trains on everything."""
    k = int(len(rows) * config.holdout_ratio)
    if k == 0 or len(rows) - k == 0:
        return None, None, None
    order = list(range(len(rows)))
    random.Random(config.seed * 1000003 + salt).shuffle(order)
    held = [rows[i] for i in order[:k]]
    kept = [rows[i] for i in order[k:]]
    try:
        matrix = _train_matrix(kept, config.weights)
    except Exception:
        return None, None, None
    answered = correct = 0
    for row in held:
        activation = activate(row.features, matrix)
        if not activation.active_features:
            continue
        answered += 1
        if classify(matrix, activation).winner == row.label:
            correct += 1
    precision = correct / answered if answered else None
    recall = correct / len(held)
    if precision is None or precision + recall == 0:
        f1 = None if precision is None else 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def _predict_upstream_lemma(
    model: InformationMatrix,
    context_features: Sequence[str],
    candidates: set[str],
    sentinel: str,
) -> str | None:
    """Masked prediction used for pipeline-aware (consecutive) training."""
    activation = activate(context_features, model)
    if not activation.active_features:
        return None
    mask = candidates | {sentinel}
    if not mask & set(model.class_index):
        return None
    winner = classify(model, activation, mask).winner
    if winner in (START_SENTINEL, END_SENTINEL):
        return None
    return winner


def _consecutive_word_form_rows(
    registry: dict[int, Mlsu],
    lexicon: Lexicon,
    next_model: InformationMatrix,
    prev_model: InformationMatrix,
) -> list[TrainingRow]:
    """Word-form rows whose token features come from the trained trigram models.

    The verb itself is produced by registry lookup in the pipeline, so rows
    whose target is the unit's anchor keep their gold token.
    """
    rows = []
    for tokens, aligned in _sentence_occurrences(registry, lexicon):
        feats = [trigram_feature(t.lemma, lexicon) for t in tokens]
        for unit, segment, offset, anchor in aligned:
            candidates = unit.context_set - {START_SENTINEL, END_SENTINEL}
            for i in range(len(segment) - 1):
                left, right = segment[i], segment[i + 1]
                pos_l, pos_r = offset + i, offset + i + 1

                tok_r, tagpos_r = right.lemma, right.pos
                if i + 1 != anchor:
                    window = tuple(dict.fromkeys(feats[max(0, pos_r - 2) : pos_r]))
                    predicted = _predict_upstream_lemma(
                        next_model, window, candidates, END_SENTINEL
                    )
                    if predicted is not None:
                        tok_r, tagpos_r = predicted, lexicon.tag_lemma(predicted)
                rows.append(
                    TrainingRow(
                        WORD_FORM_NEXT,
                        word_form_features(left.surface, tok_r, tagpos_r, unit.verb),
                        right.surface,
                    )
                )

                tok_l, tagpos_l = left.lemma, left.pos
                if i != anchor:
                    window = tuple(dict.fromkeys(feats[pos_l + 1 : pos_l + 3]))
                    predicted = _predict_upstream_lemma(
                        prev_model, window, candidates, START_SENTINEL
                    )
                    if predicted is not None:
                        tok_l, tagpos_l = predicted, lexicon.tag_lemma(predicted)
                rows.append(
                    TrainingRow(
                        WORD_FORM_PREV,
                        word_form_features(right.surface, tok_l, tagpos_l, unit.verb),
                        left.surface,
                    )
                )
    return rows


def train(
    rows: Sequence[TrainingRow],
    registry: dict[int, Mlsu],
    lexicon: Lexicon,
    mode: str = "parallel",
    config: BundleConfig | None = None,
) -> tuple[ModelBundle, TrainReport]:
    """Train the pipeline matrices from rows.

    parallel trains every matrix from gold rows independently.  consecutive
    trains in pipeline order and rebuilds the word-form models on the
    trigram models' own (masked) predictions; the question-pos and unit
    matrices have no upstream-predicted features, so their training is
    shared between the modes.
    """
    if mode not in ("parallel", "consecutive"):
        raise ValueError("mode must be parallel or consecutive, got %r" % mode)
    config = config or BundleConfig()
    started = time.perf_counter()

    by_model: dict[int, list[TrainingRow]] = {mid: [] for mid in range(6)}
    for row in rows:
        by_model[row.model_id].append(row)
    for mid in range(1, 6):
        if not by_model[mid]:
            raise EmptyModel("model %d (%s) has no training rows" % (mid, MODEL_NAMES[mid]))

    matrices: dict[int, InformationMatrix | None] = {}
    matrices[POS_MODEL] = (
        _train_matrix(by_model[POS_MODEL], config.weights) if by_model[POS_MODEL] else None
    )
    for mid in (MLSU_MODEL, NEXT_TOKEN_MODEL, PREV_TOKEN_MODEL):
        matrices[mid] = _train_matrix(by_model[mid], config.weights)

    if mode == "consecutive":
        replaced = _consecutive_word_form_rows(
            registry, lexicon, matrices[NEXT_TOKEN_MODEL], matrices[PREV_TOKEN_MODEL]
        )
        by_model[WORD_FORM_NEXT] = [r for r in replaced if r.model_id == WORD_FORM_NEXT]
        by_model[WORD_FORM_PREV] = [r for r in replaced if r.model_id == WORD_FORM_PREV]
        for mid in (WORD_FORM_NEXT, WORD_FORM_PREV):
            if not by_model[mid]:
                raise EmptyModel("model %d empty after consecutive rebuild" % mid)
    for mid in (WORD_FORM_NEXT, WORD_FORM_PREV):
        matrices[mid] = _train_matrix(by_model[mid], config.weights)

    stats = []
    for mid in range(6):
        matrix = matrices[mid]
        if matrix is None:
            continue
        precision, recall, f1 = _holdout_metrics(by_model[mid], config, salt=mid)
        stats.append(
            ModelStats(
                model_id=mid,
                name=MODEL_NAMES[mid],
                classes=len(matrix.class_ids),
                features=len(matrix.feature_ids),
                connections=matrix.connection_count,
                precision=precision,
                recall=recall,
                f1=f1,
            )
        )

    report = TrainReport(
        mode=mode, per_model=stats, wall_time_s=time.perf_counter() - started
    )
    bundle = ModelBundle(
        pos_model=matrices[POS_MODEL],
        mlsu_model=matrices[MLSU_MODEL],
        next_token_model=matrices[NEXT_TOKEN_MODEL],
        prev_token_model=matrices[PREV_TOKEN_MODEL],
        word_form_next=matrices[WORD_FORM_NEXT],
        word_form_prev=matrices[WORD_FORM_PREV],
        mlsu_registry=dict(registry),
        lexicon=lexicon,
        config=config,
        training_mode=mode,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        report=report,
    )
    return bundle, report


def train_from_corpus(
    corpus_text: str,
    qa_pairs: Sequence[tuple[str, str]] = (),
    lexicon: Lexicon | None = None,
    mode: str = "parallel",
    config: BundleConfig | None = None,
) -> tuple[ModelBundle, TrainReport]:
    """Convenience wrapper: corpus text in, trained bundle out."""
    lexicon = lexicon or Lexicon.bundled()
    registry = build_registry(corpus_text, lexicon)
    if not registry:
        raise EmptyTrainingSet("corpus produced no units")
    rows = build_training_rows(registry, qa_pairs, lexicon)
    bundle, report = train(rows, registry, lexicon, mode=mode, config=config)
    bundle.corpus_hash = hashlib.sha256(corpus_text.encode("utf-8")).hexdigest()
    return bundle, report


# ---------------------------------------------------------------------------
# predictors


def predict_answer_pos(bundle: ModelBundle, qsplit: QuestionSplit) -> tuple[PosTag, float]:
    """POS the answer must contribute, from the construction + informative POS."""
    if bundle.pos_model is None:
        return PosTag.ANY, 0.0
    features: dict[str, None] = {}
    if qsplit.interrogative:
        features[qsplit.interrogative] = None
    for tok in qsplit.informative:
        features[tok.pos.value] = None
    activation = activate(features, bundle.pos_model)
    if not activation.active_features:
        raise NoEvidence("question-pos features are all out of vocabulary")
    result = classify(bundle.pos_model, activation)
    return PosTag[result.winner], result.ranked[0].confidence


def _classify_mlsu(bundle: ModelBundle, qsplit: QuestionSplit, required_pos: PosTag):
    # The required POS joins the activation and shifts scores, but it is a
    # hint, not evidence: with every content lemma out of vocabulary the
    # question is unanswerable no matter which POS it wants.
    content = [tok.lemma for tok in qsplit.informative]
    activation = activate(content + [required_pos.value], bundle.mlsu_model)
    if not activation.active_features & set(content):
        raise NoEvidence("no question token matches the corpus")
    return classify(bundle.mlsu_model, activation)


def resolve_mlsu(
    bundle: ModelBundle, qsplit: QuestionSplit, required_pos: PosTag
) -> tuple[int, float]:
    """Pick the unit that should answer the question."""
    result = _classify_mlsu(bundle, qsplit, required_pos)
    unit_id = int(result.winner)
    if unit_id not in bundle.mlsu_registry:
        raise UnknownMlsuId("classifier produced unknown unit id %d" % unit_id)
    return unit_id, result.ranked[0].confidence


def mlsu_verb(bundle: ModelBundle, mlsu_id: int) -> str:
    try:
        return bundle.mlsu_registry[mlsu_id].verb
    except KeyError:
        raise UnknownMlsuId("no unit with id %r" % mlsu_id)


def mlsu_tokens(bundle: ModelBundle, mlsu_id: int) -> list[str]:
    try:
        return list(bundle.mlsu_registry[mlsu_id].context_tokens)
    except KeyError:
        raise UnknownMlsuId("no unit with id %r" % mlsu_id)


def token_step(
    bundle: ModelBundle,
    direction: str,
    context: Sequence[tuple[str, PosTag]],
    remaining: Iterable[str],
) -> tuple[str, float, float]:
    """One masked token choice: (token, score, confidence).

    The candidate set is the remaining tokens plus the direction's sentinel;
    the context is the up-to-3 nearest (lemma, POS) pairs.
    """
    if direction == "right":
        model, sentinel = bundle.next_token_model, END_SENTINEL
    else:
        model, sentinel = bundle.prev_token_model, START_SENTINEL
    features = dict.fromkeys(
        "%s_%s" % (lemma, pos.value) for lemma, pos in list(context)[-3:]
    )
    activation = activate(features, model)
    if not activation.active_features:
        raise NoEvidence("token context is out of vocabulary")
    mask = set(remaining) | {sentinel}
    top = classify(model, activation, mask).ranked[0]
    return top.class_id, top.score, top.confidence


def next_token(
    bundle: ModelBundle,
    context: Sequence[tuple[str, PosTag]],
    remaining: Iterable[str],
) -> tuple[str, float]:
    """Choose the following token from the unit's remaining set (or END)."""
    token, _score, conf = token_step(bundle, "right", context, remaining)
    return token, conf


def prev_token(
    bundle: ModelBundle,
    context: Sequence[tuple[str, PosTag]],
    remaining: Iterable[str],
) -> tuple[str, float]:
    """Mirror of next_token for leftward growth (sentinel START)."""
    token, _score, conf = token_step(bundle, "left", context, remaining)
    return token, conf


def token_to_word(
    bundle: ModelBundle,
    adjacent: str,
    token: str,
    token_pos: PosTag,
    verb: str,
    direction: str,
) -> str:
    """Realize a chosen token as a surface form; falls back to the token itself."""
    model = bundle.word_form_next if direction == "right" else bundle.word_form_prev
    features = word_form_features(adjacent, token, token_pos, verb)
    activation = activate(features, model)
    if not activation.active_features:
        return token
    forms = bundle.lexicon.surface_forms(token)
    mask = [c for c in model.class_ids if c.lower() in forms]
    if not mask:
        return token
    return classify(model, activation, mask).winner
