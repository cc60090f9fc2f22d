"""Text handling: tokens, lexicon tagging, clause units, question splitting.

The engine is language-agnostic; everything language-specific lives in the
lexicon file and the clause-boundary word list.  The bundled lexicon is
English.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

START_SENTINEL = "START"
END_SENTINEL = "END"


class PosTag(Enum):
    """Closed 12-tag part-of-speech set.

    Values double as feature spellings ("man" + NOUN -> "man_noun").
    """

    NOUN = "noun"
    VERB = "verb"
    ADJ = "adjective"
    ADV = "adverb"
    NUM = "numerical"
    PRON = "pronoun"
    PARTICIPLE = "participle"
    GERUND = "gerund"
    PREP = "preposition"
    CONJ = "conjunction"
    ANY = "any"
    OTHER = "other"


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: PosTag


_WORD_RE = re.compile(r"\w+(?:['’-]\w+)*")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")

# Question-word constructions, matched longest-first at the word level.
INTERROGATIVE_CONSTRUCTIONS: tuple[str, ...] = (
    "what happened",
    "what is",
    "by whom",
    "to whom",
    "who",
    "what",
    "when",
    "where",
    "why",
    "how",
    "which",
    "whose",
)

# Coordinating conjunctions and subordinators that open a new clause.
CLAUSE_BOUNDARY_LEMMAS = frozenset(
    {
        "and",
        "but",
        "or",
        "nor",
        "so",
        "yet",
        "while",
        "because",
        "although",
        "though",
        "whereas",
        "unless",
        "until",
    }
)


class Lexicon:
    """surface -> (lemma, POS) lookup with light suffix fallback rules.

    File format: UTF-8 TSV, one `surface<TAB>lemma<TAB>POS` entry per line,
    POS from the 12-tag set, `#` comment lines ignored.
    """

    def __init__(self, entries: dict[str, tuple[str, PosTag]]):
        self.entries = entries
        self._forms: dict[str, set[str]] | None = None

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        entries: dict[str, tuple[str, PosTag]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError("lexicon line %d: expected 3 tab fields" % lineno)
            surface, lemma, pos_name = parts
            try:
                pos = PosTag[pos_name]
            except KeyError:
                raise ValueError("lexicon line %d: unknown POS %r" % (lineno, pos_name))
            entries[surface.lower()] = (lemma.lower(), pos)
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def bundled(cls) -> "Lexicon":
        data = resources.files("infoqa.data").joinpath("english_lexicon.tsv")
        return cls.from_text(data.read_text(encoding="utf-8"))

    def to_text(self) -> str:
        lines = [
            "%s\t%s\t%s" % (surface, lemma, pos.name)
            for surface, (lemma, pos) in self.entries.items()
        ]
        return "\n".join(lines) + "\n"

    def lookup(self, word: str) -> tuple[str, PosTag]:
        """Resolve a surface word to (lemma, POS); unknown words stay themselves."""
        key = word.lower()
        hit = self.entries.get(key)
        if hit:
            return hit
        hit = self._suffix_fallback(key)
        if hit:
            return hit
        return key, PosTag.OTHER

    def _suffix_fallback(self, key: str) -> tuple[str, PosTag] | None:
        # Rule-based normalisation kicks in only when the stripped stem is a
        # known entry, so it can never invent lemmas.
        candidates: list[str] = []
        if len(key) > 4 and key.endswith("ies"):
            candidates.append(key[:-3] + "y")
        if len(key) > 4 and key.endswith("es"):
            candidates.append(key[:-2])
        if len(key) > 3 and key.endswith("s"):
            candidates.append(key[:-1])
        if len(key) > 5 and key.endswith("ing"):
            candidates.extend((key[:-3], key[:-3] + "e"))
        if len(key) > 4 and key.endswith("ed"):
            candidates.extend((key[:-2], key[:-2] + "e"))
        for cand in candidates:
            hit = self.entries.get(cand)
            if hit:
                return hit
        return None

    def tag_lemma(self, lemma: str) -> PosTag:
        hit = self.entries.get(lemma.lower())
        return hit[1] if hit else PosTag.OTHER

    def surface_forms(self, lemma: str) -> set[str]:
        """All surfaces the lexicon maps onto this lemma, plus the lemma itself."""
        if self._forms is None:
            forms: dict[str, set[str]] = {}
            for surface, (lem, _pos) in self.entries.items():
                forms.setdefault(lem, set()).add(surface)
            self._forms = forms
        return self._forms.get(lemma.lower(), set()) | {lemma.lower()}


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation followed by whitespace or EOF."""
    stripped = text.strip()
    if not stripped:
        return []
    return [part for part in _SENTENCE_SPLIT.split(stripped) if part]


def tokenize_and_tag(sentence: str, lexicon: Lexicon) -> list[Token]:
    """Word tokenization plus lexicon lookup; punctuation is dropped."""
    tokens = []
    for match in _WORD_RE.finditer(sentence):
        surface = match.group(0)
        lemma, pos = lexicon.lookup(surface)
        tokens.append(Token(surface=surface, lemma=lemma, pos=pos))
    return tokens


def segment_clauses(tokens: list[Token]) -> list[list[Token]]:
    """Split a sentence's tokens at clause-opening conjunctions.

    The conjunction stays with the clause it opens.  A leading conjunction
    never opens an empty first segment.
    """
    segments: list[list[Token]] = []
    current: list[Token] = []
    for tok in tokens:
        boundary = tok.pos is PosTag.CONJ or tok.lemma in CLAUSE_BOUNDARY_LEMMAS
        if boundary and current:
            segments.append(current)
            current = []
        current.append(tok)
    if current:
        segments.append(current)
    return segments


@dataclass
class Mlsu:
    """Minimal retrievable unit: an anchor word plus its clause's token set.

    context_tokens keeps insertion order but membership is the contract;
    START and END sentinels appear exactly once each, the anchor never does.
    """

    id: int
    verb: str
    context_tokens: list[str]
    source_sentence: str

    @property
    def context_set(self) -> set[str]:
        return set(self.context_tokens)

    def segment_words(self, lexicon: Lexicon) -> list[Token]:
        """Re-derive the clause this unit came from, in surface order."""
        tokens = tokenize_and_tag(self.source_sentence, lexicon)
        wanted = self.context_set - {START_SENTINEL, END_SENTINEL}
        for segment in segment_clauses(tokens):
            surfaces = {t.surface for t in segment}
            lemmas = {t.lemma for t in segment}
            if self.verb in surfaces and wanted <= lemmas | {self.verb.lower()}:
                return segment
        return tokens


def extract_mlsus(
    tokens: list[Token], next_id: int, source_sentence: str = ""
) -> list[Mlsu]:
    """One unit per clause: anchored on the first verb, else the first noun.

    Clauses with neither are skipped with a warning.  Context tokens are the
    clause's remaining lemmas bracketed by START/END.
    """
    source = source_sentence or " ".join(t.surface for t in tokens)
    units: list[Mlsu] = []
    for segment in segment_clauses(tokens):
        anchor = next((t for t in segment if t.pos is PosTag.VERB), None)
        if anchor is None:
            anchor = next((t for t in segment if t.pos is PosTag.NOUN), None)
        if anchor is None:
            log.warning("no anchor word in clause %r; skipped",
                        " ".join(t.surface for t in segment))
            continue
        banned = {anchor.lemma, anchor.surface.lower()}
        context = dict.fromkeys(
            t.lemma for t in segment if t is not anchor and t.lemma not in banned
        )
        ordered = list(context) + [START_SENTINEL, END_SENTINEL]
        units.append(
            Mlsu(
                id=next_id + len(units),
                verb=anchor.surface,
                context_tokens=ordered,
                source_sentence=source,
            )
        )
    return units


@dataclass
class QuestionSplit:
    """A question separated into its question-word construction and content."""

    interrogative: str
    informative: list[Token]
    raw: str

    @property
    def has_interrogative(self) -> bool:
        return bool(self.interrogative)


def split_question(question: str, lexicon: Lexicon) -> QuestionSplit:
    """Longest-match a construction anywhere in the question; the rest is content.

    With no construction present the split is still usable: the
    interrogative comes back empty and every word is informative.
    """
    words = _WORD_RE.findall(question)
    lowered = [w.lower() for w in words]
    by_size: dict[int, set[tuple[str, ...]]] = {}
    for cons in INTERROGATIVE_CONSTRUCTIONS:
        parts = tuple(cons.split())
        by_size.setdefault(len(parts), set()).add(parts)

    match_at, match_len = -1, 0
    for size in sorted(by_size, reverse=True):
        wanted = by_size[size]
        for start in range(0, len(lowered) - size + 1):
            if tuple(lowered[start : start + size]) in wanted:
                match_at, match_len = start, size
                break
        if match_len:
            break

    if match_len:
        interrogative = " ".join(lowered[match_at : match_at + match_len])
        remainder = words[:match_at] + words[match_at + match_len :]
    else:
        interrogative = ""
        remainder = words

    informative = [
        Token(surface=w, lemma=lex[0], pos=lex[1])
        for w in remainder
        for lex in (lexicon.lookup(w),)
    ]
    return QuestionSplit(interrogative=interrogative, informative=informative, raw=question)


# Answer roles and the POS each one searches for.
ROLE_POS: dict[str, frozenset[PosTag]] = {
    "O": frozenset({PosTag.NOUN, PosTag.PRON}),
    "OD": frozenset({PosTag.ADJ, PosTag.NUM, PosTag.PARTICIPLE, PosTag.GERUND}),
    "S": frozenset({PosTag.NOUN, PosTag.PRON}),
    "SD": frozenset({PosTag.ADJ, PosTag.NUM, PosTag.PARTICIPLE, PosTag.GERUND}),
    "A": frozenset({PosTag.VERB}),
    "AD": frozenset({PosTag.ADV, PosTag.PRON}),
    "OT": frozenset({PosTag.ANY}),
}


@dataclass(frozen=True)
class AnswerSpec:
    role: str
    required_pos: frozenset[PosTag] = field(default=frozenset())

    def __post_init__(self):
        if self.role not in ROLE_POS:
            raise ValueError("unknown answer role %r" % self.role)
        if not self.required_pos:
            object.__setattr__(self, "required_pos", ROLE_POS[self.role])


def role_to_pos(role: str) -> frozenset[PosTag]:
    """Fixed role -> POS-set mapping for the seven answer roles."""
    try:
        return ROLE_POS[role]
    except KeyError:
        raise ValueError("unknown answer role %r" % role)


def role_for_pos(tag: PosTag) -> str:
    """Canonical role whose POS set contains the tag (first of O..OT order)."""
    for role, tags in ROLE_POS.items():
        if tag in tags:
            return role
    return "OT"
