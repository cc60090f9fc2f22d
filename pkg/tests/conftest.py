import pytest

from infoqa import Lexicon, train_from_corpus
from infoqa.matrix import InformationMatrix
from infoqa.synthesis import SynthesisState, expand
from infoqa.textmodel import END_SENTINEL, START_SENTINEL

TOY_CORPUS = "The sun shines at morning. Men go to work."
TOY_QA = [
    ("Why it is light at morning?", "The sun shines."),
    ("Where do men go?", "Men go to work"),
]

JOHN_SENTENCE = (
    "John listens to classical music every day while his sisters listen to emo."
)
JOHN_QA = [
    ("What does John listen to every day?", "John listens to classical music every day"),
    ("What do his sisters do?", "His sisters listen to emo"),
]

# Printed weight fixture for the question-construction / POS matrix: the
# same eleven features against four classes, zeros kept explicit.
FIXTURE_FEATURES = [
    "which", "by whom", "when", "to whom", "who", "what", "what is", "whose",
    "any", "adverb", "adjective",
]
FIXTURE_CLASSES = ["Adjective", "Noun", "Any", "Adverb"]
FIXTURE_WEIGHTS = {
    "which": (0.534, -0.239, 0.649, 0.113),
    "by whom": (0.040, 0.191, 0.555, 0.0),
    "when": (0.0, 0.092, 0.0, 0.643),
    "to whom": (-0.186, 0.244, 0.0, 0.0),
    "who": (0.0, 0.261, 0.658, 0.0),
    "what": (0.117, 0.164, 0.0, 0.0),
    "what is": (0.274, -0.032, 0.0, -0.061),
    "whose": (0.0, 0.216, 0.894, 0.0),
    "any": (0.064, 0.101, 0.111, -0.361),
    "adverb": (0.025, -0.050, -0.108, -0.052),
    "adjective": (0.084, -0.004, 0.026, -0.144),
}


def make_fixture_matrix() -> InformationMatrix:
    weights = {
        feat: {cls: w for cls, w in zip(FIXTURE_CLASSES, row)}
        for feat, row in FIXTURE_WEIGHTS.items()
    }
    return InformationMatrix(
        feature_ids=list(FIXTURE_FEATURES),
        class_ids=list(FIXTURE_CLASSES),
        weights=weights,
        bias={c: 0.0 for c in FIXTURE_CLASSES},
        class_counts={},
    )


def expand_unit(bundle, unit_id, max_steps=200):
    """Drive the expansion loop for one unit directly, as synthesize does."""
    unit = bundle.mlsu_registry[unit_id]
    verb_lemma, verb_pos = bundle.lexicon.lookup(unit.verb)
    state = SynthesisState(
        verb=(verb_lemma, verb_pos, unit.verb),
        remaining=set(unit.context_tokens) - {START_SENTINEL, END_SENTINEL},
        max_steps=max_steps,
    )
    while not state.done:
        expand(state, bundle)
    return state


def random_lexicon(rnd, n_words=40):
    tags = ["NOUN", "VERB", "ADJ", "ADV", "PREP", "PRON", "OTHER"]
    lines = ["and\tand\tCONJ"]
    words = []
    for i in range(n_words):
        word = "w%d" % i
        words.append(word)
        lines.append("%s\t%s\t%s" % (word, word, rnd.choice(tags)))
    return Lexicon.from_text("\n".join(lines) + "\n"), words


def random_corpus(rnd, n_sentences, lexicon_words):
    sentences = []
    for _ in range(n_sentences):
        length = rnd.randint(3, 20)
        words = [rnd.choice(lexicon_words) for _ in range(length)]
        if length > 6 and rnd.random() < 0.5:
            words[length // 2] = "and"
        sentences.append(" ".join(words) + ".")
    return " ".join(sentences)


@pytest.fixture(scope="session")
def lexicon():
    return Lexicon.bundled()


@pytest.fixture(scope="session")
def toy_bundle(lexicon):
    bundle, _report = train_from_corpus(TOY_CORPUS, TOY_QA, lexicon)
    return bundle


@pytest.fixture(scope="session")
def john_bundle(lexicon):
    bundle, _report = train_from_corpus(JOHN_SENTENCE, JOHN_QA, lexicon)
    return bundle


@pytest.fixture(scope="session")
def fixture_matrix():
    return make_fixture_matrix()
