"""Fixed, named feature layout for the four feature sets.

Sets are always laid out in the order UP, UN, UA, UC; a combination keeps
that order and packs the selected sets contiguously from index 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

SET_ORDER = ("UP", "UN", "UA", "UC")

_HDW = ("hour", "day", "week")

POS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PUNCT",
            "SOCIAL", "OTHER")
LIWC_SLOTS = 68
RESERVED_SLOTS = 11

PROFILE_NAMES = (
    "screen_name_length", "has_description", "description_length", "has_url",
    "age_hours", "age_days", "age_weeks",
)

NETWORK_NAMES = (
    "following", "followers", "following_follower_ratio", "reputation",
    *(f"following_per_{u}" for u in _HDW),
    *(f"followers_per_{u}" for u in _HDW),
    "bidirectional", "bidirectional_following_ratio", "bidirectional_follower_ratio",
    "following_stdev", "followers_stdev",
)

ACTIVITY_NAMES = (
    "tweet_count", *(f"tweets_per_{u}" for u in _HDW),
    "content_similarity",
    "mentions_per_tweet", *(f"mentions_per_{u}" for u in _HDW),
    "urls_per_tweet", *(f"urls_per_{u}" for u in _HDW),
    "hashtags_per_tweet", *(f"hashtags_per_{u}" for u in _HDW),
    # retweets per week is omitted: it is retweets per day times 7
    "retweets_per_tweet", "retweets_per_hour", "retweets_per_day",
)

CONTENT_NAMES = (
    *(f"pos_{t.lower()}" for t in POS_TAGS),
    "spam_phrases_per_tweet",
    *(f"liwc_{i:02d}" for i in range(LIWC_SLOTS)),
    "sentiment_mean", "sentiment_stdev", "sentiment_coverage",
    *(f"reserved_{i:02d}" for i in range(RESERVED_SLOTS)),
)

SET_NAMES: dict[str, tuple[str, ...]] = {
    "UP": PROFILE_NAMES, "UN": NETWORK_NAMES, "UA": ACTIVITY_NAMES, "UC": CONTENT_NAMES,
}

# Column headers of the ablation tables, in their published order.
ABLATION_COMBOS: tuple[str, ...] = (
    "UP", "UN", "UA", "UC",
    "UP+UN", "UP+UA", "UP+UC", "UN+UA", "UN+UC", "UA+UC",
    "UP+UN+UA", "UP+UN+UC", "UN+UA+UC",
    "UP+UN+UC+UA",
)


class UnknownCombo(ValueError):
    def __init__(self, token: str) -> None:
        super().__init__(f"unknown feature set combination: {token}")
        self.token = token


def parse_combo(combo: str | Iterable[str]) -> tuple[str, ...]:
    """'UN+UA' or ['UA', 'UN'] -> ('UN', 'UA'), in canonical set order."""
    raw = combo.split("+") if isinstance(combo, str) else list(combo)
    tokens = [t.strip().upper() for t in raw if t.strip()]
    if not tokens:
        raise UnknownCombo(str(combo) if isinstance(combo, str) else "")
    for tok in tokens:
        if tok not in SET_ORDER:
            raise UnknownCombo(tok)
    if len(set(tokens)) != len(tokens):
        raise UnknownCombo(combo if isinstance(combo, str) else "+".join(raw))
    return tuple(s for s in SET_ORDER if s in tokens)


@dataclass(frozen=True)
class FeatureRegistry:
    sets: dict[str, tuple[str, ...]]

    @classmethod
    def default(cls) -> "FeatureRegistry":
        return cls(dict(SET_NAMES))

    def dim(self, set_name: str) -> int:
        return len(self.sets[set_name])

    def layout(self, combo: str | Iterable[str]) -> list[tuple[str, int]]:
        """(qualified name, index) pairs for a combination, indices contiguous from 0."""
        out: list[tuple[str, int]] = []
        for s in parse_combo(combo):
            for name in self.sets[s]:
                out.append((f"{s}.{name}", len(out)))
        return out

    def names(self, combo: str | Iterable[str]) -> tuple[str, ...]:
        return tuple(name for name, _ in self.layout(combo))

    def combo_dim(self, combo: str | Iterable[str]) -> int:
        return sum(self.dim(s) for s in parse_combo(combo))

    def offsets(self, combo: str | Iterable[str]) -> dict[str, int]:
        start, out = 0, {}
        for s in parse_combo(combo):
            out[s] = start
            start += self.dim(s)
        return out
