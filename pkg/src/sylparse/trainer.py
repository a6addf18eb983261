"""Multi-task training loop: schedule, per-sentence Adam, model selection.

One epoch walks every treebank sentence plus an equal number of sentences
sampled from each of the two larger corpora, shuffled together.  Updates are
strictly per-sentence (no batching) and every random draw comes from a
generator keyed by (seed, epoch) or a fixed stream, so a rerun with the same
seed is bit-identical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

import numpy as np

from sylparse.corpus import read_conllu, read_segmented, read_tagged
from sylparse.encoder import Vocabulary, load_pretrained
from sylparse.evaluate import format_percent, predict, score
from sylparse.lexicon import Lexicon, initial_tags
from sylparse.model import ModelConfig, build_system, save_checkpoint
from sylparse.nn import TrainContext

logger = logging.getLogger(__name__)

# dropout draws come from one fixed side stream, independent of the schedule
DROPOUT_STREAM = 104729


class ConfigError(ValueError):
    """Bad key, bad value, or missing requirement in a training config."""


class TrainingDiverged(ArithmeticError):
    def __init__(self, epoch: int, sentence: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}, sentence {sentence}: {detail}")
        self.epoch = epoch
        self.sentence = sentence


@dataclass
class TrainingConfig:
    train_seg: str = ""
    train_pos: str = ""
    train_dep: str = ""
    dev_seg: str = ""
    dev_pos: str = ""
    dev_dep: str = ""
    model: str = ""
    log: str = ""
    pretrained_syllables: str = ""
    pretrained_words: str = ""
    epochs: int = 50
    learning_rate: float = 0.001
    keep_probability: float = 0.67
    word_dropout_alpha: float = 0.25
    seed: int = 0
    pipeline: bool = False
    no_initial_bio: bool = False
    softmax_wseg: bool = False
    softmax_pos: bool = False
    no_pos_embedding: bool = False
    syllable_dim: int = 100
    boundary_dim: int = 25
    word_dim: int = 100
    pos_dim: int = 100
    ffnn_dim: int = 100
    lstm_hidden: int = 128
    lstm_layers: int = 2

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.keep_probability <= 1.0:
            raise ConfigError(f"keep_probability must be in (0, 1], got {self.keep_probability}")
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.word_dropout_alpha < 0.0:
            raise ConfigError(f"word_dropout_alpha must be >= 0, got {self.word_dropout_alpha}")
        required = ("train_seg", "train_pos", "train_dep", "dev_seg", "dev_pos", "dev_dep", "model")
        missing = [name for name in required if not getattr(self, name)]
        if missing:
            raise ConfigError(f"missing required config keys: {', '.join(missing)}")

    @property
    def log_path(self) -> str:
        return self.log or self.model + ".log"

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            syllable_dim=self.syllable_dim,
            boundary_dim=self.boundary_dim,
            word_dim=self.word_dim,
            pos_dim=self.pos_dim,
            ffnn_dim=self.ffnn_dim,
            lstm_hidden=self.lstm_hidden,
            lstm_layers=self.lstm_layers,
            no_initial_bio=self.no_initial_bio,
            softmax_wseg=self.softmax_wseg,
            softmax_pos=self.softmax_pos,
            no_pos_embedding=self.no_pos_embedding,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(TrainingConfig)}
_TRUE, _FALSE = {"true", "yes", "1"}, {"false", "no", "0"}


def _convert(key: str, raw: str, where: str):
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        lowered = raw.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ConfigError(f"{where}: {key} expects true/false, got {raw!r}")
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: {key} expects a {kind}, got {raw!r}") from None
    return raw


def parse_config_text(text: str, where: str = "config") -> dict:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        if not sep:
            raise ConfigError(f"{where}:{lineno}: expected key = value, got {stripped!r}")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{where}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{where}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw.strip(), f"{where}:{lineno}")
    return values


def load_config(path: str, overrides: dict | None = None) -> TrainingConfig:
    with open(path, encoding="utf-8") as handle:
        values = parse_config_text(handle.read(), where=path)
    if overrides:
        values.update(overrides)
    config = TrainingConfig(**values)
    config.validate()
    return config


@dataclass
class FrequencyTable:
    syllables: dict[str, int] = field(default_factory=dict)
    words: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_sentences(cls, sentences) -> "FrequencyTable":
        table = cls()
        for s in sentences:
            for syllable in s.syllables:
                table.syllables[syllable] = table.syllables.get(syllable, 0) + 1
            if s.words is not None:
                for form in s.word_forms():
                    table.words[form] = table.words.get(form, 0) + 1
        return table


def epoch_schedule(wseg_corpus, pos_corpus, dep_corpus, seed: int, epoch: int):
    """Deterministic interleaved (task, sentence) stream for one epoch.

    Every treebank sentence appears once; the segmentation and tagging
    corpora each contribute the same number, sampled without replacement
    (with replacement, and a warning, if a corpus is smaller than that).
    """
    for name, corpus in (("wseg", wseg_corpus), ("pos", pos_corpus), ("dep", dep_corpus)):
        if not corpus:
            raise ValueError(f"{name} corpus is empty")
    rng = np.random.default_rng([seed, epoch])
    k = len(dep_corpus)
    stream = [("dep", s) for s in dep_corpus]
    for task, corpus in (("wseg", wseg_corpus), ("pos", pos_corpus)):
        if len(corpus) < k:
            logger.warning(
                "%s corpus has %d sentences, sampling %d with replacement", task, len(corpus), k
            )
            picked = rng.integers(0, len(corpus), size=k)
        else:
            picked = rng.choice(len(corpus), size=k, replace=False)
        stream.extend((task, corpus[int(i)]) for i in picked)
    order = rng.permutation(len(stream))
    return [stream[int(i)] for i in order]


def sentence_loss(system, task: str, sentence, init_bio, ctx):
    """Route one sentence to its task loss.

    Joint mode: one shared model; treebank sentences also carry the tagging
    loss.  Pipeline mode: each member network sees only its own corpus, and
    the parser member trains on gold POS.
    """
    if not system.pipeline:
        if task == "wseg":
            return system.wseg_loss(sentence, init_bio, ctx), system
        if task == "pos":
            return system.tagging_loss(sentence, init_bio, ctx), system
        if task == "dep":
            return system.parsing_loss(sentence, init_bio, ctx), system
    else:
        members = system.members()
        if task == "wseg":
            return members["wseg"].wseg_loss(sentence, init_bio, ctx), members["wseg"]
        if task == "pos":
            return members["pos"].tagging_loss(sentence, init_bio, ctx), members["pos"]
        if task == "dep":
            model = members["dep"]
            return model.parsing_loss(sentence, init_bio, ctx, pos_from_gold=True), model
    raise ValueError(f"unknown task {task!r}")


@dataclass
class EpochRecord:
    epoch: int
    wseg_f1: float
    ptag_f1: float
    las_f1: float
    average: float
    selected: bool

    def to_line(self) -> str:
        return (
            f"epoch={self.epoch} wseg={format_percent(self.wseg_f1)} "
            f"ptag={format_percent(self.ptag_f1)} las={format_percent(self.las_f1)} "
            f"average={format_percent(self.average)} selected={str(self.selected).lower()}"
        )


@dataclass
class TrainingResult:
    records: list[EpochRecord]
    best_epoch: int
    best_average: float
    model_path: str
    log_path: str


def _dev_f1(system, lexicon, gold, upto: str, task: str) -> float:
    decoded = predict(system, gold, lexicon, upto=upto)
    report = score(gold, decoded)
    got = report[task]
    if got is None:
        raise ValueError(f"dev set lacks the layers needed to score {task}")
    return got.f1


def train(config: TrainingConfig, extra_lexicon: Lexicon | None = None) -> TrainingResult:
    config.validate()
    train_seg = read_segmented(config.train_seg)
    train_pos = read_tagged(config.train_pos)
    train_dep = read_conllu(config.train_dep)
    dev_seg = read_segmented(config.dev_seg)
    dev_pos = read_tagged(config.dev_pos)
    dev_dep = read_conllu(config.dev_dep)
    for name, corpus in (("dep", train_dep), ("dev_dep", dev_dep)):
        bad = [s for s in corpus if s.heads is None]
        if bad:
            raise ConfigError(f"{name} corpus has {len(bad)} sentence(s) without trees")

    everything = train_seg + train_pos + train_dep
    vocab = Vocabulary.build(everything)
    lexicon = Lexicon.from_sentences(everything)
    if extra_lexicon is not None:
        for entry in extra_lexicon.entries():
            lexicon.add(entry)
    freq = FrequencyTable.from_sentences(everything)
    system = build_system(
        config.model_config(),
        vocab,
        config.seed,
        pipeline=config.pipeline,
        pretrained_syllables=(
            load_pretrained(config.pretrained_syllables, config.syllable_dim)
            if config.pretrained_syllables
            else None
        ),
        pretrained_words=(
            load_pretrained(config.pretrained_words, config.word_dim)
            if config.pretrained_words
            else None
        ),
    )
    logger.info(
        "training %s model: %d/%d/%d train sentences, %d syllables, %d words, %d POS, %d labels",
        "pipeline" if config.pipeline else "joint",
        len(train_seg), len(train_pos), len(train_dep),
        len(vocab.syllables), len(vocab.words), len(vocab.pos_tags), len(vocab.deprels),
    )

    dropout_rng = np.random.default_rng([config.seed, DROPOUT_STREAM])
    records: list[EpochRecord] = []
    best_average = -1.0
    best_epoch = 0
    with open(config.log_path, "w", encoding="utf-8") as log:
        for epoch in range(1, config.epochs + 1):
            stream = epoch_schedule(train_seg, train_pos, train_dep, config.seed, epoch)
            for index, (task, sentence) in enumerate(stream, start=1):
                ctx = TrainContext(
                    rng=dropout_rng,
                    keep_prob=config.keep_probability,
                    word_dropout_alpha=config.word_dropout_alpha,
                    syllable_counts=freq.syllables,
                    word_counts=freq.words,
                )
                bio = initial_tags(sentence.syllables, lexicon)
                try:
                    loss, model = sentence_loss(system, task, sentence, bio, ctx)
                    if not np.isfinite(loss.value):
                        raise FloatingPointError(f"loss is {float(loss.value)!r}")
                    loss.backward()
                    model.store.adam_step(config.learning_rate)
                except FloatingPointError as error:
                    raise TrainingDiverged(epoch, index, str(error)) from error

            wseg_f1 = _dev_f1(system, lexicon, dev_seg, "wseg", "wseg")
            ptag_f1 = _dev_f1(system, lexicon, dev_pos, "pos", "ptag")
            las_f1 = _dev_f1(system, lexicon, dev_dep, "dep", "las")
            average = (wseg_f1 + ptag_f1 + las_f1) / 3.0
            selected = average > best_average
            if selected:
                best_average = average
                best_epoch = epoch
                save_checkpoint(config.model, system, lexicon, config.seed)
            record = EpochRecord(epoch, wseg_f1, ptag_f1, las_f1, average, selected)
            records.append(record)
            log.write(record.to_line() + "\n")
            log.flush()
            logger.info("%s", record.to_line())

    return TrainingResult(records, best_epoch, best_average, config.model, config.log_path)
