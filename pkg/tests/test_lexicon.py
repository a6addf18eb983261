"""Longest-match initial tagging."""

import pytest

from sylparse.corpus import parse_segmented_line
from sylparse.lexicon import Lexicon, initial_tags


def lex(*forms):
    return Lexicon(form.split("_") for form in forms)


class TestLexicon:
    def test_single_syllable_entries_dropped(self):
        assert len(lex("a", "b_c")) == 1

    def test_from_sentences_collects_multisyllable_types(self):
        sents = [parse_segmented_line("a_b c"), parse_segmented_line("a_b d_e_f")]
        lexicon = Lexicon.from_sentences(sents)
        assert lexicon.entries() == [("a", "b"), ("d", "e", "f")]
        assert lexicon.max_len == 3

    def test_save_load_round_trip(self, tmp_path):
        lexicon = lex("b_c", "a_b_c")
        path = tmp_path / "words.txt"
        lexicon.save(str(path))
        assert Lexicon.load(str(path)).entries() == lexicon.entries()

    def test_bad_entry_rejected(self):
        with pytest.raises(ValueError):
            Lexicon([("a", "")])


class TestInitialTags:
    def test_longest_match_wins(self):
        # both a_b and a_b_c start at position 0; the longer one is taken
        assert initial_tags(["a", "b", "c"], lex("a_b", "a_b_c", "b_c")) == ["B", "I", "I"]

    def test_greedy_is_not_optimal(self):
        # a_b grabs the first two syllables even though b_c would then fit
        assert initial_tags(["a", "b", "c"], lex("a_b", "b_c")) == ["B", "I", "B"]

    def test_no_match_falls_back_to_b(self):
        assert initial_tags(["x", "y"], lex("a_b")) == ["B", "B"]

    def test_empty_lexicon(self):
        assert initial_tags(["x", "y"], Lexicon()) == ["B", "B"]

    def test_never_emits_outside(self):
        tags = initial_tags(list("abcabc"), lex("a_b_c"))
        assert set(tags) <= {"B", "I"}

    def test_match_must_fit_sentence_end(self):
        assert initial_tags(["a", "b"], lex("a_b_c")) == ["B", "B"]
