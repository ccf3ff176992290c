"""Sequence tagging that holds up when capitalization is missing.

Train-side casing transforms and a character-level truecaser are scored
side by side on cased and lowercased test data."""

from .casing import (
    AugmentationStrategy,
    CasePattern,
    apply_case_pattern,
    augment_corpus,
    extract_case_pattern,
    lowercase_text,
)
from .corpus_io import (
    Corpus,
    FixtureSpec,
    Sentence,
    TagsetKind,
    Token,
    convert_iob1_to_bio2,
    generate_fixture,
    parse_conll,
    parse_plain,
    write_conll,
)
from .evaluation import PRF, mention_detection_prf, span_prf, token_accuracy, word_level_prf
from .experiments import ExperimentReport, Metric, ScenarioId, render_report, run_matrix, run_scenario
from .tagger import TaggerModel, TaggerTrainConfig, train_tagger, viterbi_decode
from .truecaser import TruecaserModel, TruecaserTrainConfig, load_model, save_model, train_truecaser, truecase

__version__ = "0.1.0"
