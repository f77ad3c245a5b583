"""Lexicon resources: spam phrases, LIWC-style categories, valence scores, POS tags.

Every lexicon file is plain UTF-8 text, one entry per line, ``word<TAB>value``
where value is a category (LIWC, POS) or a real score (sentiment). Spam phrase
files hold one phrase per line. Blank lines and lines starting with ``#`` are
skipped. In LIWC files a word ending in ``*`` matches any word with that prefix.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .registry import LIWC_SLOTS, POS_TAGS

WORD_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


class LexiconError(ValueError):
    pass


def words(text: str) -> list[str]:
    """Lowercased word tokens; punctuation and whitespace separate tokens."""
    return WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class LexiconResources:
    spam_phrases: tuple[str, ...]
    liwc: Mapping[str, frozenset[str]]
    sentiment: Mapping[str, float]
    pos_lexicon: Mapping[str, str]
    liwc_prefixes: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()
        phrases = {}
        for phrase in self.spam_phrases:
            toks = tuple(words(phrase))
            if toks:
                phrases.setdefault(toks[0], set()).add(toks)
        object.__setattr__(self, "_phrase_index", {k: sorted(v, key=len, reverse=True)
                                                   for k, v in phrases.items()})
        object.__setattr__(self, "_prefix_order",
                           sorted(self.liwc_prefixes, key=len, reverse=True))

    def validate(self) -> None:
        if len(self.categories) != LIWC_SLOTS:
            raise LexiconError(f"invalid lexicon: {len(self.categories)} LIWC categories, "
                               f"expected {LIWC_SLOTS}")
        for word, tag in self.pos_lexicon.items():
            if tag not in POS_TAGS:
                raise LexiconError(f"invalid lexicon: unknown POS tag {tag!r} for {word!r}")
        for word, score in self.sentiment.items():
            if not math.isfinite(score):
                raise LexiconError(f"invalid lexicon: non-finite score for {word!r}")

    @property
    def categories(self) -> tuple[str, ...]:
        """Sorted category ids; position i fills LIWC slot i."""
        cats: set[str] = set()
        for group in (*self.liwc.values(), *self.liwc_prefixes.values()):
            cats.update(group)
        return tuple(sorted(cats))

    def liwc_categories(self, word: str) -> frozenset[str]:
        word = word.lower()
        found = set(self.liwc.get(word, ()))
        for prefix in self._prefix_order:
            if word.startswith(prefix):
                found.update(self.liwc_prefixes[prefix])
        return frozenset(found)

    def valence(self, word: str) -> Optional[float]:
        return self.sentiment.get(word.lower())

    def count_spam_phrases(self, tokens: list[str]) -> int:
        """Greedy left-to-right, longest-first, non-overlapping phrase matches."""
        i, hits = 0, 0
        while i < len(tokens):
            for cand in self._phrase_index.get(tokens[i], ()):
                if tuple(tokens[i:i + len(cand)]) == cand:
                    hits += 1
                    i += len(cand)
                    break
            else:
                i += 1
        return hits


def _entries(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def _pairs(path: Path):
    for lineno, line in _entries(path):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconError(f"invalid lexicon: {path}:{lineno} is not word<TAB>value")
        yield lineno, parts[0].strip().lower(), parts[1].strip()


def load_spam_phrases(path: str | Path) -> tuple[str, ...]:
    out = []
    for _, line in _entries(Path(path)):
        out.append(line.split("\t")[0].strip().lower())
    return tuple(out)


def load_liwc(path: str | Path) -> tuple[dict[str, frozenset[str]], dict[str, frozenset[str]]]:
    exact: dict[str, set[str]] = {}
    prefix: dict[str, set[str]] = {}
    for _, word, cat in _pairs(Path(path)):
        if word.endswith("*"):
            prefix.setdefault(word[:-1], set()).add(cat)
        else:
            exact.setdefault(word, set()).add(cat)
    return ({k: frozenset(v) for k, v in exact.items()},
            {k: frozenset(v) for k, v in prefix.items()})


def load_sentiment(path: str | Path) -> dict[str, float]:
    out = {}
    for lineno, word, value in _pairs(Path(path)):
        try:
            out[word] = float(value)
        except ValueError:
            raise LexiconError(f"invalid lexicon: {path}:{lineno} score {value!r}") from None
    return out


def load_pos(path: str | Path) -> dict[str, str]:
    return {word: tag.upper() for _, word, tag in _pairs(Path(path))}


def load_lexicons(spam_phrases: str | Path, liwc: str | Path, sentiment: str | Path,
                  pos: str | Path) -> LexiconResources:
    exact, prefixes = load_liwc(liwc)
    return LexiconResources(load_spam_phrases(spam_phrases), exact, load_sentiment(sentiment),
                            load_pos(pos), prefixes)


def bundled_lexicons() -> LexiconResources:
    """The small fixture lexicons shipped with the package."""
    data = resources.files("spamstream.features") / "data"
    with resources.as_file(data) as root:
        return load_lexicons(root / "spam_phrases.txt", root / "liwc.tsv",
                             root / "sentiment.tsv", root / "pos.tsv")
