"""infoqa: information-matrix question answering over a text corpus."""

from .errors import (
    CorpusTooSmall,
    CorruptBundle,
    DegenerateSystem,
    EmptyMask,
    EmptyModel,
    EmptySuite,
    EmptyTrainingSet,
    EngineError,
    IoFailure,
    LengthMismatch,
    NoEvidence,
    UnknownMlsuId,
    VersionMismatch,
)
from .matrix import (
    ActivationVector,
    Classification,
    CountTable,
    InformationMatrix,
    WeightConfig,
    accumulate_counts,
    activate,
    classify,
    compute_weights,
    confidence,
    emergence_coefficient,
)
from .textmodel import (
    END_SENTINEL,
    START_SENTINEL,
    AnswerSpec,
    Lexicon,
    Mlsu,
    PosTag,
    QuestionSplit,
    Token,
    extract_mlsus,
    role_to_pos,
    split_question,
    split_sentences,
    tokenize_and_tag,
)
from .models import (
    BundleConfig,
    ModelBundle,
    TrainingRow,
    TrainReport,
    build_registry,
    build_training_rows,
    mlsu_tokens,
    mlsu_verb,
    next_token,
    parse_qa_pairs,
    predict_answer_pos,
    prev_token,
    resolve_mlsu,
    token_to_word,
    train,
    train_from_corpus,
)
from .synthesis import AnswerTrace, RejectConfig, SynthesisState, expand, synthesize
from .evaluation import (
    EvalSuite,
    SuiteItem,
    SuiteReport,
    f_measure,
    generate_technical_suite,
    integral_estimate,
    render_report,
    run_suite,
    score_answer,
    suite_metrics,
)
from .bundle import BundleManifest, load_bundle, save_bundle

__version__ = "0.1.0"
