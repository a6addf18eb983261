"""Corpus data model and file formats.

A sentence is a list of syllables plus optional annotation layers: boundary
tags (B/I/O over syllables), words (half-open syllable spans), POS tags,
heads (0 = artificial root) and dependency relations.  Multi-syllable words
are written with underscores joining their syllables, so plain whitespace
tokenization recovers words and a second split on "_" recovers syllables.

Formats:
  * segmented text  — one sentence per line, words whitespace-separated
  * tagged text     — like segmented text but every word carries "/TAG"
  * CoNLL-U         — ten tab-separated columns, underscore as filler
  * raw text        — whitespace-separated syllables, no annotation
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

logger = logging.getLogger(__name__)

BOUNDARY_TAGS = ("B", "I", "O")
BOUNDARY_INDEX = {tag: i for i, tag in enumerate(BOUNDARY_TAGS)}


class FormatError(ValueError):
    """Malformed input data; the message carries file and line when known."""


@dataclass
class AnnotatedSentence:
    syllables: list[str]
    boundary_tags: list[str] | None = None
    words: list[tuple[int, int]] | None = None
    pos_tags: list[str] | None = None
    heads: list[int] | None = None
    deprels: list[str] | None = None

    def word_forms(self) -> list[str]:
        if self.words is None:
            raise ValueError("sentence has no segmentation")
        return ["_".join(self.syllables[a:b]) for a, b in self.words]


# --- boundary tags <-> word spans -------------------------------------------


def tags_from_spans(spans, num_syllables: int) -> list[str]:
    tags = [None] * num_syllables
    prev_stop = 0
    for start, stop in spans:
        if start != prev_stop or stop <= start:
            raise ValueError(f"spans do not partition the sentence: {spans}")
        tags[start] = "B"
        for i in range(start + 1, stop):
            tags[i] = "I"
        prev_stop = stop
    if prev_stop != num_syllables:
        raise ValueError(f"spans do not cover all {num_syllables} syllables: {spans}")
    return tags


def spans_from_tags(tags) -> tuple[list[tuple[int, int]], int]:
    """Word spans for a decoded tag sequence, repairing invalid positions.

    An I with no word open (sentence start, or right after an O) cannot
    continue anything and is promoted to B; an O itself stands for a closed
    single-syllable word.  Returns (spans, number of repairs).
    """
    spans: list[list[int]] = []
    repairs = 0
    word_open = False
    for i, tag in enumerate(tags):
        if tag == "B":
            spans.append([i, i + 1])
            word_open = True
        elif tag == "O":
            spans.append([i, i + 1])
            word_open = False
        elif tag == "I":
            if word_open:
                spans[-1][1] = i + 1
            else:
                spans.append([i, i + 1])
                word_open = True
                repairs += 1
        else:
            raise ValueError(f"unknown boundary tag {tag!r}")
    return [tuple(s) for s in spans], repairs


# --- trees -------------------------------------------------------------------


def validate_tree(heads, where: str = "tree") -> None:
    """Heads must stay in range, avoid self-loops and all reach the root."""
    n = len(heads)
    for d, h in enumerate(heads, start=1):
        if not 0 <= h <= n:
            raise FormatError(f"{where}: head {h} of word {d} out of range 0..{n}")
        if h == d:
            raise FormatError(f"{where}: word {d} is its own head")
    for d in range(1, n + 1):
        node, steps = d, 0
        while node != 0:
            node = heads[node - 1]
            steps += 1
            if steps > n:
                raise FormatError(f"{where}: cyclic heads involving word {d}")


def is_projective(heads) -> bool:
    """True when no two arcs (root arcs included) strictly interleave."""
    arcs = [(min(h, d), max(h, d)) for d, h in enumerate(heads, start=1)]
    for (a, b), (c, d) in combinations(arcs, 2):
        if a < c < b < d or c < a < d < b:
            return False
    return True


# --- segmented / tagged text --------------------------------------------------


def split_form(form: str, where: str) -> list[str]:
    syllables = form.split("_")
    if any(not s for s in syllables):
        raise FormatError(f"{where}: malformed token {form!r} (empty syllable)")
    return syllables


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return handle.read().splitlines()


def read_segmented(path: str) -> list[AnnotatedSentence]:
    sentences = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            logger.warning("%s:%d: skipping empty line", path, lineno)
            continue
        sentences.append(parse_segmented_line(line, f"{path}:{lineno}"))
    return sentences


def parse_segmented_line(line: str, where: str = "line") -> AnnotatedSentence:
    syllables: list[str] = []
    spans = []
    for token in line.split():
        parts = split_form(token, where)
        spans.append((len(syllables), len(syllables) + len(parts)))
        syllables.extend(parts)
    tags = tags_from_spans(spans, len(syllables))
    return AnnotatedSentence(syllables=syllables, boundary_tags=tags, words=spans)


def write_segmented(sentences) -> str:
    return "".join(" ".join(s.word_forms()) + "\n" for s in sentences)


def read_tagged(path: str) -> list[AnnotatedSentence]:
    sentences = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            logger.warning("%s:%d: skipping empty line", path, lineno)
            continue
        where = f"{path}:{lineno}"
        syllables: list[str] = []
        spans = []
        pos_tags = []
        for token in line.split():
            form, sep, tag = token.rpartition("/")
            if not sep or not form or not tag:
                raise FormatError(f"{where}: token {token!r} is not form/TAG")
            parts = split_form(form, where)
            spans.append((len(syllables), len(syllables) + len(parts)))
            syllables.extend(parts)
            pos_tags.append(tag)
        tags = tags_from_spans(spans, len(syllables))
        sentences.append(
            AnnotatedSentence(
                syllables=syllables, boundary_tags=tags, words=spans, pos_tags=pos_tags
            )
        )
    return sentences


def write_tagged(sentences) -> str:
    lines = []
    for s in sentences:
        if s.pos_tags is None:
            raise ValueError("sentence has no POS tags")
        lines.append(" ".join(f"{f}/{t}" for f, t in zip(s.word_forms(), s.pos_tags)))
    return "".join(line + "\n" for line in lines)


def read_raw(path: str) -> list[list[str]]:
    sentences = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            logger.warning("%s:%d: skipping empty line", path, lineno)
            continue
        sentences.append(line.split())
    return sentences


# --- CoNLL-U -------------------------------------------------------------------

NUM_COLUMNS = 10
ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(NUM_COLUMNS)


def read_conllu(path: str) -> list[AnnotatedSentence]:
    sentences = []
    block: list[tuple[int, list[str]]] = []
    lines = _read_lines(path)
    for lineno, line in enumerate(lines + [""], start=1):
        if not line.strip():
            if block:
                sentences.append(_parse_conllu_block(block, path))
                block = []
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != NUM_COLUMNS:
            raise FormatError(f"{path}:{lineno}: expected {NUM_COLUMNS} columns, got {len(cols)}")
        block.append((lineno, cols))
    return sentences


def _parse_conllu_block(block, path: str) -> AnnotatedSentence:
    first_line = block[0][0]
    syllables: list[str] = []
    spans = []
    pos_tags = []
    raw_heads = []
    deprels = []
    for expected, (lineno, cols) in enumerate(block, start=1):
        where = f"{path}:{lineno}"
        if "-" in cols[ID] or "." in cols[ID]:
            raise FormatError(f"{where}: token id {cols[ID]!r} not supported")
        try:
            token_id = int(cols[ID])
        except ValueError:
            raise FormatError(f"{where}: bad token id {cols[ID]!r}")
        if token_id != expected:
            raise FormatError(f"{where}: token id {token_id}, expected {expected}")
        parts = split_form(cols[FORM], where)
        spans.append((len(syllables), len(syllables) + len(parts)))
        syllables.extend(parts)
        pos_tags.append(cols[UPOS])
        raw_heads.append((lineno, cols[HEAD]))
        deprels.append(cols[DEPREL])

    heads: list[int] | None
    if all(h == "_" for _, h in raw_heads):
        heads = None
        rels = None
    else:
        heads = []
        for lineno, h in raw_heads:
            try:
                heads.append(int(h))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: bad head {h!r}")
        validate_tree(heads, where=f"{path}:{first_line}")
        rels = deprels

    pos: list[str] | None = None if all(t == "_" for t in pos_tags) else pos_tags
    tags = tags_from_spans(spans, len(syllables))
    return AnnotatedSentence(
        syllables=syllables,
        boundary_tags=tags,
        words=spans,
        pos_tags=pos,
        heads=heads,
        deprels=rels,
    )


def write_conllu(sentences) -> str:
    out = []
    for s in sentences:
        forms = s.word_forms()
        for i, form in enumerate(forms):
            pos = s.pos_tags[i] if s.pos_tags else "_"
            head = str(s.heads[i]) if s.heads is not None else "_"
            rel = s.deprels[i] if s.deprels else "_"
            out.append(f"{i + 1}\t{form}\t_\t{pos}\t_\t_\t{head}\t{rel}\t_\t_")
        out.append("")
    return "".join(line + "\n" for line in out)
