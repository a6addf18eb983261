"""Lexicon of multi-syllable words and greedy longest-match tagging.

The longest-match tags are only a rough initial guess: they become one of
the encoder's input features, never training targets.
"""

from __future__ import annotations

from sylparse.corpus import split_form


class Lexicon:
    """Set of multi-syllable word types, keyed by their syllable tuples.

    Single-syllable entries are dropped on construction: they can never
    change a longest-match decision (the fallback already emits B).
    """

    def __init__(self, entries=()):
        self._entries: set[tuple[str, ...]] = set()
        self.max_len = 1
        for entry in entries:
            self.add(entry)

    def add(self, syllables) -> None:
        entry = tuple(syllables)
        if len(entry) < 2:
            return
        if any(not s or "_" in s for s in entry):
            raise ValueError(f"bad lexicon entry: {entry!r}")
        self._entries.add(entry)
        self.max_len = max(self.max_len, len(entry))

    def __contains__(self, syllables) -> bool:
        return tuple(syllables) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> list[tuple[str, ...]]:
        return sorted(self._entries)

    @classmethod
    def from_sentences(cls, sentences) -> "Lexicon":
        """Collect every multi-syllable word type from segmented sentences."""
        lex = cls()
        for sentence in sentences:
            for a, b in sentence.words or ():
                if b - a >= 2:
                    lex.add(sentence.syllables[a:b])
        return lex

    @classmethod
    def load(cls, path: str) -> "Lexicon":
        """One word per line, syllables joined by underscores."""
        lex = cls()
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                form = line.strip()
                if not form:
                    continue
                lex.add(split_form(form, f"{path}:{lineno}"))
        return lex

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries():
                handle.write("_".join(entry) + "\n")


def initial_tags(syllables, lexicon: Lexicon) -> list[str]:
    """Greedy left-to-right longest-match B/I tagging.

    At each position the longest lexicon entry starting there wins; with no
    match the syllable becomes a single-word B.  Never emits O.
    """
    tags: list[str] = []
    m = len(syllables)
    i = 0
    while i < m:
        matched = 1
        for length in range(min(lexicon.max_len, m - i), 1, -1):
            if tuple(syllables[i : i + length]) in lexicon:
                matched = length
                break
        tags.append("B")
        tags.extend("I" * (matched - 1))
        i += matched
    return tags
