"""The joint model: losses per task, end-to-end decoding, checkpoints.

One `JointModel` owns an encoder, two sequence labelers (word boundaries
over syllables, POS over words) and the arc-factored parser, all registered
in a single parameter store.  `PipelineSystem` is the non-joint baseline:
three independently trained copies chained at decode time.

Decoding always runs the full predicted pipeline: longest-match tags feed
the boundary tagger, predicted boundaries form the words, predicted POS
feeds the parser.  Training replaces exactly the segmentation with gold
(words must match the treebank's) while POS for the parser stays predicted.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from sylparse.autodiff import Node, ParameterStore
from sylparse.corpus import (
    BOUNDARY_INDEX,
    BOUNDARY_TAGS,
    AnnotatedSentence,
    FormatError,
    spans_from_tags,
    tags_from_spans,
)
from sylparse.crf import LinearChainCrf, argmax_decode, softmax_nll
from sylparse.encoder import Encoder, Vocabulary
from sylparse.nn import TrainContext
from sylparse.parser import DependencyParser


class MissingAnnotation(ValueError):
    """A training sentence lacks the layer its task needs."""


@dataclass(frozen=True)
class ModelConfig:
    syllable_dim: int = 100
    boundary_dim: int = 25
    word_dim: int = 100
    pos_dim: int = 100
    ffnn_dim: int = 100
    lstm_hidden: int = 128
    lstm_layers: int = 2
    no_initial_bio: bool = False
    softmax_wseg: bool = False
    softmax_pos: bool = False
    no_pos_embedding: bool = False

    @property
    def use_initial_tags(self) -> bool:
        return not self.no_initial_bio

    @property
    def use_pos_embedding(self) -> bool:
        return not self.no_pos_embedding

    def to_dict(self) -> dict:
        return {
            "syllable_dim": self.syllable_dim,
            "boundary_dim": self.boundary_dim,
            "word_dim": self.word_dim,
            "pos_dim": self.pos_dim,
            "ffnn_dim": self.ffnn_dim,
            "lstm_hidden": self.lstm_hidden,
            "lstm_layers": self.lstm_layers,
            "no_initial_bio": self.no_initial_bio,
            "softmax_wseg": self.softmax_wseg,
            "softmax_pos": self.softmax_pos,
            "no_pos_embedding": self.no_pos_embedding,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        return cls(**data)


class JointModel:
    def __init__(
        self,
        store: ParameterStore,
        vocab: Vocabulary,
        config: ModelConfig,
        pretrained_syllables: dict | None = None,
        pretrained_words: dict | None = None,
    ):
        self.store = store
        self.vocab = vocab
        self.config = config
        self.encoder = Encoder(
            store,
            vocab,
            config,
            pretrained_syllables=pretrained_syllables,
            pretrained_words=pretrained_words,
        )
        self.crf_ws = None if config.softmax_wseg else LinearChainCrf(store, "crf_ws", len(BOUNDARY_TAGS))
        self.crf_pos = None if config.softmax_pos else LinearChainCrf(store, "crf_pos", len(vocab.pos_tags))
        self.parser = DependencyParser(
            store, "dep", self.encoder.state_dim, config.ffnn_dim, len(vocab.deprels)
        )

    @property
    def pipeline(self) -> bool:
        return False

    # -- training losses ------------------------------------------------------

    def wseg_loss(self, sentence: AnnotatedSentence, init_tags, ctx: TrainContext | None = None) -> Node:
        if sentence.boundary_tags is None:
            raise MissingAnnotation("boundary tags required for the segmentation loss")
        gold = [BOUNDARY_INDEX[t] for t in sentence.boundary_tags]
        vectors = self.encoder.syllable_vectors(sentence.syllables, init_tags, ctx)
        states = self.encoder.wseg_states(vectors, ctx)
        emissions = self.encoder.wseg_emissions(states, ctx)
        if self.crf_ws is None:
            return softmax_nll(emissions, gold)
        return self.crf_ws.nll(emissions, gold)

    def _word_pipeline(self, sentence, init_tags, ctx):
        """Gold-segmentation forward up to POS emissions (training only)."""
        if sentence.words is None:
            raise MissingAnnotation("gold segmentation required")
        vectors = self.encoder.syllable_vectors(sentence.syllables, init_tags, ctx)
        ws_states = self.encoder.wseg_states(vectors, ctx)
        word_vectors = self.encoder.word_vectors(sentence.syllables, sentence.words, ws_states, ctx)
        _, emissions = self.encoder.pos_states(word_vectors, ctx)
        return word_vectors, emissions

    def _pos_nll(self, emissions, gold) -> Node:
        if self.crf_pos is None:
            return softmax_nll(emissions, gold)
        return self.crf_pos.nll(emissions, gold)

    def _pos_decode(self, emission_values: np.ndarray) -> np.ndarray:
        if self.crf_pos is None:
            return argmax_decode(emission_values)
        return self.crf_pos.decode(emission_values)

    def tagging_loss(self, sentence, init_tags, ctx: TrainContext | None = None) -> Node:
        if sentence.pos_tags is None:
            raise MissingAnnotation("POS tags required for the tagging loss")
        _, emissions = self._word_pipeline(sentence, init_tags, ctx)
        gold = [self.vocab.pos_index(t) for t in sentence.pos_tags]
        return self._pos_nll(emissions, gold)

    def parsing_loss(
        self,
        sentence,
        init_tags,
        ctx: TrainContext | None = None,
        pos_from_gold: bool = False,
    ) -> Node:
        """Treebank-sentence loss.

        Joint mode sums the tagging loss with the arc and label losses; the
        parser consumes the tagger's own one-best prediction (a hard choice:
        gradients reach only the chosen POS embedding rows).  With
        `pos_from_gold` (pipeline mode) the tagging term is dropped and gold
        POS is embedded instead.
        """
        if sentence.heads is None or sentence.deprels is None:
            raise MissingAnnotation("heads and labels required for the parsing loss")
        if sentence.pos_tags is None:
            raise MissingAnnotation("POS tags required for the parsing loss")
        word_vectors, emissions = self._word_pipeline(sentence, init_tags, ctx)
        gold_pos = [self.vocab.pos_index(t) for t in sentence.pos_tags]

        total: Node | None = None
        if pos_from_gold:
            pos_for_parser = gold_pos
        else:
            total = self._pos_nll(emissions, gold_pos)
            values = np.stack([e.value for e in emissions])
            pos_for_parser = [int(t) for t in self._pos_decode(values)]

        states = self.encoder.dep_states(word_vectors, pos_for_parser, ctx)
        heads_proj, deps_proj = self.parser.project_arc(states, ctx)
        nodes, values = self.parser.arc_scores(heads_proj, deps_proj, ctx)
        arc = self.parser.hinge_loss(nodes, values, sentence.heads)
        label_h, label_d = self.parser.project_label(states, ctx)
        gold_labels = [self.vocab.deprel_index(r) for r in sentence.deprels]
        labels = self.parser.label_loss(label_h, label_d, sentence.heads, gold_labels, ctx)
        for term in (arc, labels):
            total = term if total is None else total + term
        return total

    # -- decoding ---------------------------------------------------------------

    def decode(
        self,
        syllables,
        init_tags,
        gold_spans=None,
        external_pos=None,
        upto: str = "dep",
    ) -> tuple[AnnotatedSentence, int]:
        """Full predicted pipeline; returns (sentence, boundary repairs).

        `gold_spans` skips boundary decoding (given-segmentation protocol),
        `external_pos` (tag strings) skips POS decoding (pipeline parsing),
        `upto` stops early: "wseg" after segmentation, "pos" after tagging.
        """
        if upto not in ("wseg", "pos", "dep"):
            raise ValueError(f"unknown stage {upto!r}")
        vectors = self.encoder.syllable_vectors(syllables, init_tags)
        ws_states = self.encoder.wseg_states(vectors)

        repairs = 0
        if gold_spans is not None:
            spans = list(gold_spans)
            tags = tags_from_spans(spans, len(syllables))
        else:
            emissions = self.encoder.wseg_emissions(ws_states)
            values = np.stack([e.value for e in emissions])
            if self.crf_ws is None:
                tag_ids = argmax_decode(values)
            else:
                tag_ids = self.crf_ws.decode(values)
            tags = [BOUNDARY_TAGS[int(t)] for t in tag_ids]
            spans, repairs = spans_from_tags(tags)
        out = AnnotatedSentence(syllables=list(syllables), boundary_tags=tags, words=spans)
        if upto == "wseg":
            return out, repairs

        word_vectors = self.encoder.word_vectors(syllables, spans, ws_states)
        if external_pos is not None:
            if len(external_pos) != len(spans):
                raise ValueError(f"{len(external_pos)} POS tags for {len(spans)} words")
            pos_ids = [self.vocab.pos_index(t) for t in external_pos]
        else:
            _, emissions = self.encoder.pos_states(word_vectors)
            values = np.stack([e.value for e in emissions])
            pos_ids = [int(t) for t in self._pos_decode(values)]
        out.pos_tags = [self.vocab.pos_tags[i] for i in pos_ids]
        if upto == "pos":
            return out, repairs

        states = self.encoder.dep_states(word_vectors, pos_ids)
        heads_proj, deps_proj = self.parser.project_arc(states)
        _, arc_values = self.parser.arc_scores(heads_proj, deps_proj)
        heads = self.parser.decode_arcs(arc_values)
        label_h, label_d = self.parser.project_label(states)
        label_ids = self.parser.predict_labels(label_h, label_d, heads)
        out.heads = [int(h) for h in heads]
        out.deprels = [self.vocab.deprels[i] for i in label_ids]
        return out, repairs


class PipelineSystem:
    """Three independently parameterized models chained at decode time.

    The parser member trains on gold POS and parses with the tagger member's
    predictions, mirroring a classic preprocess-then-parse setup.
    """

    def __init__(self, seg_model: JointModel, pos_model: JointModel, dep_model: JointModel):
        self.seg_model = seg_model
        self.pos_model = pos_model
        self.dep_model = dep_model
        self.vocab = dep_model.vocab
        self.config = dep_model.config

    @property
    def pipeline(self) -> bool:
        return True

    def members(self) -> dict[str, JointModel]:
        return {"wseg": self.seg_model, "pos": self.pos_model, "dep": self.dep_model}

    def decode(
        self,
        syllables,
        init_tags,
        gold_spans=None,
        external_pos=None,
        upto: str = "dep",
    ) -> tuple[AnnotatedSentence, int]:
        seg, repairs = self.seg_model.decode(syllables, init_tags, gold_spans=gold_spans, upto="wseg")
        if upto == "wseg":
            return seg, repairs
        pos, _ = self.pos_model.decode(
            syllables, init_tags, gold_spans=seg.words, external_pos=external_pos, upto="pos"
        )
        if upto == "pos":
            return pos, repairs
        full, _ = self.dep_model.decode(
            syllables, init_tags, gold_spans=seg.words, external_pos=pos.pos_tags, upto="dep"
        )
        return full, repairs


def build_system(
    config: ModelConfig,
    vocab: Vocabulary,
    seed: int,
    pipeline: bool = False,
    pretrained_syllables: dict | None = None,
    pretrained_words: dict | None = None,
):
    pretrained = {
        "pretrained_syllables": pretrained_syllables,
        "pretrained_words": pretrained_words,
    }
    if not pipeline:
        return JointModel(ParameterStore(seed), vocab, config, **pretrained)
    members = [
        JointModel(ParameterStore(seed + offset), vocab, config, **pretrained)
        for offset in range(3)
    ]
    return PipelineSystem(*members)


# -- checkpoints -----------------------------------------------------------------

MAGIC = b"SYLPARSE"
FORMAT_VERSION = 1


def _system_members(system) -> dict[str, JointModel]:
    return system.members() if system.pipeline else {"joint": system}


def save_checkpoint(path: str, system, lexicon, seed: int) -> None:
    manifest = []
    chunks = []
    offset = 0
    for member_name, model in _system_members(system).items():
        for name, node in model.store.items():
            data = np.ascontiguousarray(node.value, dtype="<f8").tobytes()
            manifest.append(
                {
                    "name": f"{member_name}/{name}",
                    "shape": list(node.value.shape),
                    "offset": offset,
                }
            )
            chunks.append(data)
            offset += len(data)
    header = {
        "seed": int(seed),
        "pipeline": bool(system.pipeline),
        "config": system.config.to_dict(),
        "vocab": system.vocab.to_dict(),
        "lexicon": ["_".join(entry) for entry in lexicon.entries()],
        "parameters": manifest,
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", FORMAT_VERSION))
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        for chunk in chunks:
            handle.write(chunk)


def load_checkpoint(path: str):
    """Rebuild the trained system; returns (system, lexicon, header seed)."""
    from sylparse.lexicon import Lexicon

    with open(path, "rb") as handle:
        raw = handle.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a model checkpoint")
    pos = len(MAGIC)
    (version,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    (header_len,) = struct.unpack_from("<Q", raw, pos)
    pos += 8
    header = json.loads(raw[pos : pos + header_len].decode("utf-8"))
    payload = raw[pos + header_len :]

    config = ModelConfig.from_dict(header["config"])
    vocab = Vocabulary.from_dict(header["vocab"])
    seed = int(header["seed"])
    system = build_system(config, vocab, seed, pipeline=header["pipeline"])

    grouped: dict[str, dict[str, np.ndarray]] = {}
    for entry in header["parameters"]:
        member, _, name = entry["name"].partition("/")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=start).reshape(shape)
        grouped.setdefault(member, {})[name] = arr.astype(np.float64)
    for member_name, model in _system_members(system).items():
        model.store.load_arrays(grouped.get(member_name, {}))

    lexicon = Lexicon(form.split("_") for form in header["lexicon"])
    return system, lexicon, seed
