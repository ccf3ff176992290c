import sys
from dataclasses import replace

import pytest

from caserobust.corpus_io import FixtureSpec, generate_fixture
from caserobust.truecaser import TruecaserTrainConfig, train_truecaser

# Pinned fixtures.  Truecaser learnability: 50-word vocabulary, 2,000
# sentences, every entity capitalized, seed 13.
TRUECASER_SPEC = FixtureSpec(
    vocab_size=50, entity_lexicon_size=15, sentences=2000, cased_entity_rate=1.0, seed=13
)
TRUECASER_CONFIG = TruecaserTrainConfig(embedding_dim=16, hidden_dim=32, epochs=10, seed=13)

# Scenario matrix: a larger lexicon with a Zipfian entity tail and a few
# entity words that also occur as ordinary lowercase words.
NER_SPEC = FixtureSpec(
    vocab_size=400,
    entity_lexicon_size=150,
    sentences=3000,
    cased_entity_rate=1.0,
    seed=13,
    ambiguous_rate=0.005,
)
# Held-out plain text for the scenario truecaser: same lexicon, new sentences.
NER_TRUECASER_SPEC = replace(NER_SPEC, seed=14, lexicon_seed=13, sentences=2000)


@pytest.fixture(scope="session")
def truecaser_fixture():
    return generate_fixture(TRUECASER_SPEC)


@pytest.fixture(scope="session")
def trained_truecaser(truecaser_fixture):
    train, _ = truecaser_fixture
    return train_truecaser(train, TRUECASER_CONFIG)


@pytest.fixture(scope="session")
def ner_fixture():
    return generate_fixture(NER_SPEC)


@pytest.fixture(scope="session")
def ner_truecaser():
    train, _ = generate_fixture(NER_TRUECASER_SPEC)
    model, _ = train_truecaser(train, TruecaserTrainConfig(seed=13))
    return model


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    RESULTS = getattr(module, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (len(k), k)):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
