"""Shared encoder: syllables in, task-specific BiLSTM states out.

The three tasks stack on one pipeline of representations:

  syllable vector   v_i = syllable embedding (+ embedded longest-match tag)
  boundary states   r^ws = BiLSTM over v             -> B/I/O emissions
  word vector       x_j = word embedding (+) FFNN over the word's first and
                    last boundary states (a subword view of the word)
  tagging states    r^pos = BiLSTM over x            -> POS emissions
  parsing input     z_j = x_j (+) embedded POS tag, a learned root vector
                    prepended, then a third BiLSTM for the parser.

The two ablation switches shrink v (drop the longest-match tag embedding)
and z (drop the POS embedding); all widths here follow the switches.
"""

from __future__ import annotations

import numpy as np

from sylparse import autodiff as ad
from sylparse.autodiff import Node, ParameterStore
from sylparse.corpus import BOUNDARY_INDEX, BOUNDARY_TAGS
from sylparse.nn import BiLstm, Linear, TrainContext

UNKNOWN = "<unk>"


class Vocabulary:
    """Closed token inventories collected from the training corpora.

    Syllables and words reserve index 0 for the unknown token; POS tags and
    dependency labels are closed classes (decoding can only emit seen ones).
    """

    def __init__(self, syllables, words, pos_tags, deprels):
        self.syllables = [UNKNOWN] + [s for s in syllables if s != UNKNOWN]
        self.words = [UNKNOWN] + [w for w in words if w != UNKNOWN]
        self.pos_tags = list(pos_tags)
        self.deprels = list(deprels)
        if not self.pos_tags:
            raise ValueError("empty POS tagset")
        if not self.deprels:
            raise ValueError("empty dependency label set")
        self._syllable_index = {s: i for i, s in enumerate(self.syllables)}
        self._word_index = {w: i for i, w in enumerate(self.words)}
        self._pos_index = {t: i for i, t in enumerate(self.pos_tags)}
        self._deprel_index = {r: i for i, r in enumerate(self.deprels)}

    @classmethod
    def build(cls, sentences) -> "Vocabulary":
        syllables, words, pos, rels = set(), set(), set(), set()
        for s in sentences:
            syllables.update(s.syllables)
            if s.words is not None:
                words.update(s.word_forms())
            if s.pos_tags is not None:
                pos.update(s.pos_tags)
            if s.deprels is not None:
                rels.update(s.deprels)
        return cls(sorted(syllables), sorted(words), sorted(pos), sorted(rels))

    def syllable_index(self, syllable: str) -> int:
        return self._syllable_index.get(syllable, 0)

    def word_index(self, form: str) -> int:
        return self._word_index.get(form, 0)

    def pos_index(self, tag: str) -> int:
        try:
            return self._pos_index[tag]
        except KeyError:
            raise ValueError(f"POS tag {tag!r} not in the training tagset")

    def deprel_index(self, rel: str) -> int:
        try:
            return self._deprel_index[rel]
        except KeyError:
            raise ValueError(f"dependency label {rel!r} not in the training label set")

    def to_dict(self) -> dict:
        return {
            "syllables": self.syllables[1:],
            "words": self.words[1:],
            "pos_tags": self.pos_tags,
            "deprels": self.deprels,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(data["syllables"], data["words"], data["pos_tags"], data["deprels"])


def load_pretrained(path: str, dim: int) -> dict[str, np.ndarray]:
    """Token-per-line vector file: token then `dim` whitespace-separated reals."""
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}")
            table[parts[0]] = np.array([float(x) for x in parts[1:]])
    return table


class Encoder:
    def __init__(
        self,
        store: ParameterStore,
        vocab: Vocabulary,
        cfg,
        prefix: str = "",
        pretrained_syllables: dict | None = None,
        pretrained_words: dict | None = None,
    ):
        self.vocab = vocab
        self.cfg = cfg
        p = prefix

        self.syllable_table = store.parameter(
            f"{p}emb/syllable", (len(vocab.syllables), cfg.syllable_dim)
        )
        if pretrained_syllables:
            self._overwrite_rows(self.syllable_table, vocab.syllables, pretrained_syllables)
        self.boundary_table = None
        if cfg.use_initial_tags:
            self.boundary_table = store.parameter(
                f"{p}emb/boundary", (len(BOUNDARY_TAGS), cfg.boundary_dim)
            )
        self.word_table = store.parameter(f"{p}emb/word", (len(vocab.words), cfg.word_dim))
        if pretrained_words:
            self._overwrite_rows(self.word_table, vocab.words, pretrained_words)
        self.pos_table = None
        if cfg.use_pos_embedding:
            self.pos_table = store.parameter(f"{p}emb/pos", (len(vocab.pos_tags), cfg.pos_dim))

        self.v_dim = cfg.syllable_dim + (cfg.boundary_dim if cfg.use_initial_tags else 0)
        self.bilstm_ws = BiLstm(store, f"{p}bilstm_ws", self.v_dim, cfg.lstm_hidden, cfg.lstm_layers)
        self.state_dim = self.bilstm_ws.output_dim

        self.ffnn_sw = Linear(store, f"{p}ffnn_sw", 2 * self.state_dim, cfg.ffnn_dim, activation="tanh")
        self.ffnn_ws = Linear(store, f"{p}ffnn_ws", self.state_dim, len(BOUNDARY_TAGS))
        self.x_dim = cfg.word_dim + cfg.ffnn_dim
        self.bilstm_pos = BiLstm(store, f"{p}bilstm_pos", self.x_dim, cfg.lstm_hidden, cfg.lstm_layers)
        self.ffnn_pos = Linear(store, f"{p}ffnn_pos", self.state_dim, len(vocab.pos_tags))

        self.z_dim = self.x_dim + (cfg.pos_dim if cfg.use_pos_embedding else 0)
        self.root = store.parameter(f"{p}root", (self.z_dim,))
        self.bilstm_dep = BiLstm(store, f"{p}bilstm_dep", self.z_dim, cfg.lstm_hidden, cfg.lstm_layers)

        # the widths must track the ablation switches
        assert self.bilstm_ws.input_dim == self.v_dim
        assert self.bilstm_pos.input_dim == self.x_dim
        assert self.bilstm_dep.input_dim == self.z_dim == self.root.value.shape[0]
        assert self.state_dim == 2 * cfg.lstm_hidden

    @staticmethod
    def _overwrite_rows(table: Node, tokens, vectors: dict) -> None:
        dim = table.value.shape[1]
        for i, token in enumerate(tokens):
            vec = vectors.get(token)
            if vec is None:
                continue
            if vec.shape != (dim,):
                raise ValueError(f"pretrained vector for {token!r} has size {vec.shape}, need {dim}")
            table.value[i] = vec

    # -- forward pieces -------------------------------------------------------

    def syllable_vectors(self, syllables, initial_tags, ctx: TrainContext | None = None):
        if self.cfg.use_initial_tags and len(initial_tags) != len(syllables):
            raise ValueError(f"{len(initial_tags)} initial tags for {len(syllables)} syllables")
        out = []
        for i, syllable in enumerate(syllables):
            idx = self.vocab.syllable_index(syllable)
            if ctx is not None and ctx.replace_with_unknown(ctx.syllable_counts.get(syllable, 0)):
                idx = 0
            e_s = ad.pick_row(self.syllable_table, idx)
            if self.boundary_table is not None:
                e_b = ad.pick_row(self.boundary_table, BOUNDARY_INDEX[initial_tags[i]])
                out.append(ad.concat([e_s, e_b]))
            else:
                out.append(e_s)
        return out

    def wseg_states(self, vectors, ctx: TrainContext | None = None):
        return self.bilstm_ws(vectors, ctx)

    def wseg_emissions(self, states, ctx: TrainContext | None = None):
        return [self.ffnn_ws(r, ctx) for r in states]

    def word_vectors(self, syllables, spans, ws_states, ctx: TrainContext | None = None):
        out = []
        for a, b in spans:
            form = "_".join(syllables[a:b])
            idx = self.vocab.word_index(form)
            if ctx is not None and ctx.replace_with_unknown(ctx.word_counts.get(form, 0)):
                idx = 0
            e_w = ad.pick_row(self.word_table, idx)
            e_sw = self.ffnn_sw(ad.concat([ws_states[a], ws_states[b - 1]]), ctx)
            out.append(ad.concat([e_w, e_sw]))
        return out

    def pos_states(self, word_vectors, ctx: TrainContext | None = None):
        states = self.bilstm_pos(word_vectors, ctx)
        return states, [self.ffnn_pos(r, ctx) for r in states]

    def dep_states(self, word_vectors, pos_indices, ctx: TrainContext | None = None):
        """BiLSTM states over the root vector plus one z per word."""
        if self.pos_table is not None:
            zs = [
                ad.concat([x, ad.pick_row(self.pos_table, int(t))])
                for x, t in zip(word_vectors, pos_indices)
            ]
        else:
            zs = list(word_vectors)
        return self.bilstm_dep([self.root] + zs, ctx)
