"""Vocabulary and the shared sentence encoder (widths, ablations, dropout)."""

import numpy as np
import pytest

from sylparse.autodiff import ParameterStore
from sylparse.corpus import AnnotatedSentence
from sylparse.encoder import Encoder, Vocabulary, load_pretrained
from sylparse.model import ModelConfig
from sylparse.nn import TrainContext

TINY = ModelConfig(
    syllable_dim=8,
    boundary_dim=4,
    word_dim=8,
    pos_dim=6,
    ffnn_dim=7,
    lstm_hidden=5,
    lstm_layers=1,
)


def tiny_vocab():
    return Vocabulary(
        syllables=["la", "sinh", "toi", "vien"],
        words=["la", "sinh_vien", "toi"],
        pos_tags=["N", "P", "V"],
        deprels=["root", "sub", "vmod"],
    )


class TestVocabulary:
    def test_unknown_token_reserved_at_zero(self):
        vocab = tiny_vocab()
        assert vocab.syllables[0] == "<unk>"
        assert vocab.words[0] == "<unk>"
        assert vocab.syllable_index("zzz") == 0
        assert vocab.word_index("zzz") == 0
        assert vocab.syllable_index("la") == vocab.syllables.index("la")

    def test_closed_classes_reject_unseen(self):
        vocab = tiny_vocab()
        assert vocab.pos_index("N") == 0
        with pytest.raises(ValueError, match="tagset"):
            vocab.pos_index("X")
        with pytest.raises(ValueError, match="label set"):
            vocab.deprel_index("appos")

    def test_build_collects_every_layer(self):
        s = AnnotatedSentence(
            syllables=["toi", "la", "sinh", "vien"],
            words=[(0, 1), (1, 2), (2, 4)],
            pos_tags=["P", "V", "N"],
            heads=[2, 0, 2],
            deprels=["sub", "root", "vmod"],
        )
        vocab = Vocabulary.build([s])
        assert vocab.syllables == ["<unk>", "la", "sinh", "toi", "vien"]
        assert "sinh_vien" in vocab.words
        assert vocab.pos_tags == ["N", "P", "V"]

    def test_dict_round_trip_preserves_indices(self):
        vocab = tiny_vocab()
        back = Vocabulary.from_dict(vocab.to_dict())
        assert back.syllables == vocab.syllables
        assert back.words == vocab.words
        assert back.pos_tags == vocab.pos_tags
        assert back.deprels == vocab.deprels


class TestPretrained:
    def test_load_and_overwrite(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("la 1 2 3 4 5 6 7 8\nnew 8 7 6 5 4 3 2 1\n")
        table = load_pretrained(str(path), 8)
        assert set(table) == {"la", "new"}

        vocab = tiny_vocab()
        store = ParameterStore(seed=0)
        enc = Encoder(store, vocab, TINY, pretrained_syllables=table)
        row = enc.syllable_table.value[vocab.syllable_index("la")]
        assert np.array_equal(row, np.arange(1.0, 9.0))
        # tokens outside the vocabulary are ignored, unseeded rows stay random
        assert not np.array_equal(enc.syllable_table.value[0], np.arange(8.0, 0.0, -1.0))

    def test_wrong_width_rejected(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("la 1 2 3\n")
        with pytest.raises(ValueError, match="expected 8"):
            load_pretrained(str(path), 8)


class TestWidths:
    def test_default_widths(self):
        enc = Encoder(ParameterStore(0), tiny_vocab(), TINY)
        assert enc.v_dim == 8 + 4
        assert enc.state_dim == 10
        assert enc.x_dim == 8 + 7
        assert enc.z_dim == 15 + 6

    def test_no_initial_tags_narrows_input(self):
        cfg = ModelConfig(**{**TINY.to_dict(), "no_initial_bio": True})
        enc = Encoder(ParameterStore(0), tiny_vocab(), cfg)
        assert enc.boundary_table is None
        assert enc.v_dim == 8
        vecs = enc.syllable_vectors(["toi", "la"], ["B", "B"])
        assert vecs[0].value.shape == (8,)

    def test_no_pos_embedding_narrows_parser_input(self):
        cfg = ModelConfig(**{**TINY.to_dict(), "no_pos_embedding": True})
        enc = Encoder(ParameterStore(0), tiny_vocab(), cfg)
        assert enc.pos_table is None
        assert enc.z_dim == enc.x_dim

    def test_initial_tag_count_must_match(self):
        enc = Encoder(ParameterStore(0), tiny_vocab(), TINY)
        with pytest.raises(ValueError, match="initial tags"):
            enc.syllable_vectors(["toi", "la"], ["B"])


class TestForward:
    def test_shapes_through_all_stages(self):
        enc = Encoder(ParameterStore(7), tiny_vocab(), TINY)
        syllables = ["toi", "la", "sinh", "vien"]
        vecs = enc.syllable_vectors(syllables, ["B", "B", "B", "I"])
        assert [v.value.shape for v in vecs] == [(12,)] * 4
        states = enc.wseg_states(vecs)
        assert [s.value.shape for s in states] == [(10,)] * 4
        emis = enc.wseg_emissions(states)
        assert [e.value.shape for e in emis] == [(3,)] * 4

        spans = [(0, 1), (1, 2), (2, 4)]
        words = enc.word_vectors(syllables, spans, states)
        assert [w.value.shape for w in words] == [(15,)] * 3
        pos_states, pos_emis = enc.pos_states(words)
        assert [e.value.shape for e in pos_emis] == [(3,)] * 3
        dep = enc.dep_states(words, [1, 2, 0])
        assert len(dep) == 4  # root + one per word
        assert dep[0].value.shape == (10,)

    def test_unseen_word_uses_unknown_row(self):
        enc = Encoder(ParameterStore(3), tiny_vocab(), TINY)
        states = enc.wseg_states(enc.syllable_vectors(["zzz"], ["B"]))
        (vec,) = enc.word_vectors(["zzz"], [(0, 1)], states)
        assert np.array_equal(vec.value[:8], enc.word_table.value[0])

    def test_word_dropout_replaces_rare_lookups(self):
        enc = Encoder(ParameterStore(3), tiny_vocab(), TINY)
        # alpha so large every seen-once token is replaced almost surely
        ctx = TrainContext(
            rng=np.random.default_rng(0),
            word_dropout_alpha=1e9,
            syllable_counts={"toi": 1},
            word_counts={"toi": 1},
        )
        vecs = enc.syllable_vectors(["toi"], ["B"], ctx)
        assert np.array_equal(vecs[0].value[:8], enc.syllable_table.value[0])
        states = enc.wseg_states(enc.syllable_vectors(["toi"], ["B"]))
        (w,) = enc.word_vectors(["toi"], [(0, 1)], states, ctx)
        assert np.array_equal(w.value[:8], enc.word_table.value[0])
