"""Alignment-based scoring on unsegmented input, plus significance testing.

System words rarely coincide with gold words once segmentation is predicted,
so every metric is an F1 over exact span matches: a system word only counts
for tagging/attachment if its span matches a gold word exactly, and an arc
only counts if the head words match up as well.  Attachment to the artificial
root aligns root-to-root.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
from scipy import stats

from sylparse.corpus import AnnotatedSentence, FormatError
from sylparse.lexicon import initial_tags

logger = logging.getLogger(__name__)

TASKS = ("wseg", "ptag", "uas", "las")


@dataclass
class TaskScore:
    correct: int = 0
    system_total: int = 0
    gold_total: int = 0

    @property
    def precision(self) -> float:
        return self.correct / self.system_total if self.system_total else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.gold_total if self.gold_total else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0


@dataclass
class EvalReport:
    num_sentences: int
    tasks: dict[str, TaskScore | None]
    sentence_f1: dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, task: str) -> TaskScore | None:
        return self.tasks[task]


def align(gold: AnnotatedSentence, system: AnnotatedSentence) -> list[tuple[int, int]]:
    """Pairs (gold word index, system word index) with identical spans."""
    if gold.syllables != system.syllables:
        raise FormatError(
            f"syllable streams differ: {' '.join(gold.syllables)!r} vs {' '.join(system.syllables)!r}"
        )
    if gold.words is None or system.words is None:
        raise FormatError("both sides need a segmentation to align")
    positions = {tuple(span): i for i, span in enumerate(gold.words)}
    out = []
    for j, span in enumerate(system.words):
        i = positions.get(tuple(span))
        if i is not None:
            out.append((i, j))
    return out


def _tasks_available(gold: AnnotatedSentence, system: AnnotatedSentence) -> set[str]:
    available = {"wseg"}
    if gold.pos_tags is not None and system.pos_tags is not None:
        available.add("ptag")
    if gold.heads is not None and system.heads is not None:
        available.add("uas")
        if gold.deprels is not None and system.deprels is not None:
            available.add("las")
    return available


def _sentence_counts(gold, system, tasks) -> dict[str, TaskScore]:
    pairs = align(gold, system)
    pair_set = set(pairs)
    counts = {t: TaskScore(0, len(system.words), len(gold.words)) for t in tasks}
    counts["wseg"].correct = len(pairs)
    for gi, si in pairs:
        if "ptag" in counts and gold.pos_tags[gi] == system.pos_tags[si]:
            counts["ptag"].correct += 1
        if "uas" in counts:
            gh, sh = gold.heads[gi], system.heads[si]
            heads_align = (gh == 0 and sh == 0) or (
                gh > 0 and sh > 0 and (gh - 1, sh - 1) in pair_set
            )
            if heads_align:
                counts["uas"].correct += 1
                if "las" in counts and gold.deprels[gi] == system.deprels[si]:
                    counts["las"].correct += 1
    return counts


def score(gold_sentences, system_sentences) -> EvalReport:
    """Corpus-level report; a task is scored only if every pair carries it."""
    gold_sentences = list(gold_sentences)
    system_sentences = list(system_sentences)
    if len(gold_sentences) != len(system_sentences):
        raise FormatError(
            f"{len(gold_sentences)} gold sentences vs {len(system_sentences)} system sentences"
        )
    if not gold_sentences:
        raise FormatError("nothing to evaluate")

    scored = set.intersection(
        *(_tasks_available(g, s) for g, s in zip(gold_sentences, system_sentences))
    )
    totals = {t: TaskScore() for t in scored}
    vectors: dict[str, list[float]] = {t: [] for t in scored}
    for gold, system in zip(gold_sentences, system_sentences):
        counts = _sentence_counts(gold, system, scored)
        for task, c in counts.items():
            totals[task].correct += c.correct
            totals[task].system_total += c.system_total
            totals[task].gold_total += c.gold_total
            vectors[task].append(c.f1)
    return EvalReport(
        num_sentences=len(gold_sentences),
        tasks={t: totals.get(t) for t in TASKS},
        sentence_f1={t: np.array(v) for t, v in vectors.items()},
    )


def paired_t_test(a, b) -> float:
    """Two-sided paired t-test p-value (n-1 degrees of freedom).

    Identical vectors give p = 1.0; zero-variance nonzero differences are the
    degenerate certain case, p = 0.0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired vectors must match: {a.shape} vs {b.shape}")
    n = a.size
    if n < 2:
        raise ValueError("need at least two paired scores")
    d = a - b
    if not d.any():
        return 1.0
    sd = d.std(ddof=1)
    if sd == 0.0:
        return 0.0
    t = d.mean() / (sd / np.sqrt(n))
    return float(2.0 * stats.t.sf(abs(t), df=n - 1))


def format_percent(fraction: float) -> str:
    """Two decimals, half-up, of fraction*100 (0.5714... -> '57.14')."""
    return str(Decimal(fraction * 100.0).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def format_report(report: EvalReport) -> str:
    names = {"wseg": "WSeg", "ptag": "PTag", "uas": "UAS", "las": "LAS"}
    lines = [f"sentences: {report.num_sentences}", "task  precision  recall  f1"]
    for task in TASKS:
        s = report.tasks[task]
        if s is None:
            continue
        lines.append(
            f"{names[task]:<5} {format_percent(s.precision):>9} {format_percent(s.recall):>7} "
            f"{format_percent(s.f1):>6}"
        )
    return "\n".join(lines)


def report_records(report: EvalReport) -> list[str]:
    """Machine-readable key=value lines, one metric per line."""
    out = [f"sentences={report.num_sentences}"]
    for task in TASKS:
        s = report.tasks[task]
        if s is None:
            continue
        out.append(
            f"task={task} precision={format_percent(s.precision)} "
            f"recall={format_percent(s.recall)} f1={format_percent(s.f1)} "
            f"correct={s.correct} system={s.system_total} gold={s.gold_total}"
        )
    return out


def predict(system, sentences, lexicon, gold_seg: bool = False, upto: str = "dep"):
    """Decode raw (or gold-segmented) sentences; skips empty ones with a warning."""
    out = []
    repairs = 0
    for index, sentence in enumerate(sentences):
        if not sentence.syllables:
            logger.warning("sentence %d is empty, skipped", index + 1)
            continue
        gold_spans = None
        if gold_seg:
            if sentence.words is None:
                raise FormatError(f"sentence {index + 1}: gold segmentation requested but absent")
            gold_spans = sentence.words
        tags = initial_tags(sentence.syllables, lexicon)
        decoded, fixed = system.decode(sentence.syllables, tags, gold_spans=gold_spans, upto=upto)
        repairs += fixed
        out.append(decoded)
    if repairs:
        logger.info("repaired %d boundary tag(s) during decoding", repairs)
    return out
