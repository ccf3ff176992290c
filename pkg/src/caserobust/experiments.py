"""The casing scenario matrix: train-side transform x test condition.

Each scenario retrains the tagger from the same seed on transformed
training data and scores it on a cased and an uncased version of the test
set.  Scores are reported in points (0-100).
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from . import casing
from .corpus_io import Corpus, write_conll
from .errors import ContractViolation
from .evaluation import format_score, mention_detection_prf, scenario_average, span_prf, token_accuracy
from .tagger import TaggerTrainConfig, tag_corpus, train_tagger
from .truecaser import TruecaserModel, model_to_dict, truecase_corpus, truecase_many


class ScenarioId(enum.Enum):
    E1_CASED = "e1"
    E2_UNCASED = "e2"
    E3_C_PLUS_U = "e3"
    E3_5_HALF_MIXED = "e3.5"
    E4_TRUECASE_TEST = "e4"
    E5_TRUECASE_ALL = "e5"

    @property
    def label(self):
        return _LABELS[self]

    @property
    def needs_truecaser(self):
        return self in (ScenarioId.E4_TRUECASE_TEST, ScenarioId.E5_TRUECASE_ALL)

    @classmethod
    def parse(cls, text):
        key = text.strip().lower()
        for sid in cls:
            if key in (sid.value, sid.name.lower()):
                return sid
        raise ContractViolation(f"unknown scenario {text!r}")


_LABELS = {
    ScenarioId.E1_CASED: "1. Cased",
    ScenarioId.E2_UNCASED: "2. Uncased",
    ScenarioId.E3_C_PLUS_U: "3. C+U",
    ScenarioId.E3_5_HALF_MIXED: "3.5. Half Mixed",
    ScenarioId.E4_TRUECASE_TEST: "4. Truecase Test",
    ScenarioId.E5_TRUECASE_ALL: "5. Truecase All",
}

ALL_SCENARIOS = tuple(ScenarioId)


class Metric(enum.Enum):
    SPAN_F1 = "span-f1"
    ACCURACY = "accuracy"
    MENTION_F1 = "mention-f1"


def score(metric: Metric, gold: Corpus, predicted) -> float:
    """Score in points (0-100)."""
    if metric is Metric.SPAN_F1:
        return 100.0 * span_prf(gold, predicted)[0].f1
    if metric is Metric.MENTION_F1:
        return 100.0 * mention_detection_prf(gold, predicted).f1
    if metric is Metric.ACCURACY:
        return 100.0 * token_accuracy(gold, predicted)
    raise ContractViolation(f"unknown metric {metric}")


def _truecase_fn(model):
    return lambda text: truecase_many(model, [text])[0]


def run_scenario(
    train: Corpus,
    test: Corpus,
    scenario: ScenarioId,
    truecaser: Optional[TruecaserModel] = None,
    tagger_config: Optional[TaggerTrainConfig] = None,
    metric: Metric = Metric.SPAN_F1,
) -> Tuple[float, float]:
    """Train and evaluate one scenario; returns ``(cased, uncased)`` scores.

    Test transforms only touch surfaces, so every column is scored against
    the original gold tags.
    """
    config = tagger_config or TaggerTrainConfig()
    if scenario.needs_truecaser and truecaser is None:
        raise ContractViolation(f"scenario {scenario.label} needs a truecaser model")

    if scenario is ScenarioId.E1_CASED or scenario is ScenarioId.E4_TRUECASE_TEST:
        train_data = train
    elif scenario is ScenarioId.E2_UNCASED:
        train_data = casing.augment_corpus(train, casing.UNCASED, config.seed)
    elif scenario is ScenarioId.E3_C_PLUS_U:
        train_data = casing.augment_corpus(train, casing.CASED_PLUS_UNCASED, config.seed)
    elif scenario is ScenarioId.E3_5_HALF_MIXED:
        train_data = casing.augment_corpus(train, casing.half_mixed(0.5), config.seed)
    elif scenario is ScenarioId.E5_TRUECASE_ALL:
        train_data = truecase_corpus(truecaser, casing.lowercase_corpus(train))
    else:
        raise ContractViolation(f"unhandled scenario {scenario}")

    model = train_tagger(train_data, config)
    lowered = casing.lowercase_corpus(test)

    if scenario is ScenarioId.E2_UNCASED:
        both = score(metric, test, tag_corpus(model, lowered))
        return both, both
    if scenario.needs_truecaser:
        restored = truecase_corpus(truecaser, lowered)
        for orig, new in zip(test.sentences, restored.sentences):
            if [t.tag for t in orig.tokens] != [t.tag for t in new.tokens]:
                raise ContractViolation("truecased test corpus is misaligned with gold")
        both = score(metric, test, tag_corpus(model, restored))
        return both, both
    cased = score(metric, test, tag_corpus(model, test))
    uncased = score(metric, test, tag_corpus(model, lowered))
    return cased, uncased


@dataclass(frozen=True)
class ReportRow:
    scenario: ScenarioId
    cased: float
    uncased: float

    @property
    def average(self):
        return scenario_average(self.cased, self.uncased)


@dataclass
class ExperimentReport:
    metric: Metric
    seed: int
    digest: str
    rows: List[ReportRow] = field(default_factory=list)

    def row(self, scenario: ScenarioId) -> ReportRow:
        for r in self.rows:
            if r.scenario is scenario:
                return r
        raise KeyError(scenario)

    def to_dict(self):
        return {
            "metric": self.metric.value,
            "seed": self.seed,
            "digest": self.digest,
            "rows": [
                {
                    "scenario": r.scenario.label,
                    "id": r.scenario.value,
                    "cased": r.cased,
                    "uncased": r.uncased,
                    "avg": r.average,
                }
                for r in self.rows
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        rows = [ReportRow(ScenarioId(r["id"]), r["cased"], r["uncased"]) for r in doc["rows"]]
        return cls(Metric(doc["metric"]), doc["seed"], doc["digest"], rows)


def config_digest(train, test, scenarios, truecaser, tagger_config, metric, seed) -> str:
    h = hashlib.sha256()
    h.update(write_conll(train).encode("utf-8"))
    h.update(b"\0")
    h.update(write_conll(test).encode("utf-8"))
    h.update(b"\0")
    meta = {
        "scenarios": [s.value for s in scenarios],
        "tagger": asdict(tagger_config),
        "metric": metric.value,
        "seed": seed,
    }
    h.update(json.dumps(meta, sort_keys=True).encode("utf-8"))
    if truecaser is not None:
        h.update(json.dumps(model_to_dict(truecaser), sort_keys=True).encode("utf-8"))
    return h.hexdigest()


def run_matrix(
    train: Corpus,
    test: Corpus,
    scenarios: Sequence[ScenarioId] = ALL_SCENARIOS,
    truecaser: Optional[TruecaserModel] = None,
    tagger_config: Optional[TaggerTrainConfig] = None,
    metric: Metric = Metric.SPAN_F1,
    seed: int = 0,
) -> ExperimentReport:
    if not scenarios:
        raise ContractViolation("no scenarios requested")
    config = replace(tagger_config or TaggerTrainConfig(), seed=seed)
    report = ExperimentReport(
        metric, seed, config_digest(train, test, scenarios, truecaser, config, metric, seed)
    )
    for sid in scenarios:
        try:
            cased, uncased = run_scenario(train, test, sid, truecaser, config, metric)
        except ContractViolation as exc:
            raise ContractViolation(f"scenario {sid.label}: {exc}") from exc
        report.rows.append(ReportRow(sid, cased, uncased))
    return report


_HEADER = ("Scenario", "Test (C)", "Test (U)", "Avg")


def render_report(report: ExperimentReport, fmt: str = "text") -> str:
    """``text`` (aligned, 2-decimal half-up), ``tsv`` (same rounding) or
    ``json`` (unrounded)."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    cells = [
        (r.scenario.label, format_score(r.cased), format_score(r.uncased), format_score(r.average))
        for r in report.rows
    ]
    if fmt == "tsv":
        return "".join("\t".join(line) + "\n" for line in [_HEADER, *cells])
    if fmt != "text":
        raise ContractViolation(f"unknown report format {fmt!r}")
    w0 = max(len(c[0]) for c in [_HEADER, *cells])
    widths = [max(len(c[k]) for c in [_HEADER, *cells]) for k in (1, 2, 3)]
    lines = [f"# metric={report.metric.value} seed={report.seed} digest={report.digest[:16]}"]
    for c in [_HEADER, *cells]:
        lines.append(
            c[0].ljust(w0) + "  " + "  ".join(v.rjust(w) for v, w in zip(c[1:], widths))
        )
    return "\n".join(lines) + "\n"
