"""Feature extractors for the profile, network, activity and content sets."""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from typing import Iterable, Optional, Sequence

import numpy as np

from ..rng import SplitMix64
from ..stream import ExampleStream, LabeledExample, OnlineStandardizer
from .lexicon import LexiconResources, bundled_lexicons, words
from .records import Tweet, UserRecord, total
from .registry import (
    ACTIVITY_NAMES,
    CONTENT_NAMES,
    POS_TAGS,
    FeatureRegistry,
    parse_combo,
)

HOURS_PER_DAY = 24.0
HOURS_PER_WEEK = 168.0
MAX_SIMILARITY_PAIRS = 1000
SIMILARITY_SEED = 0


def _div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _rates(count: float, age_hours: float) -> list[float]:
    return [count / age_hours, count * HOURS_PER_DAY / age_hours,
            count * HOURS_PER_WEEK / age_hours]


def _stdev(series: Optional[Sequence[int]]) -> float:
    if series is None or len(series) < 2:
        return 0.0
    return float(statistics.pstdev(series))


def extract_profile(user: UserRecord) -> np.ndarray:
    age = user.account_age_hours
    has_desc = user.description is not None
    out = [
        len(user.screen_name),
        1.0 if has_desc else 0.0,
        len(user.description) if has_desc else 0.0,
        1.0 if user.profile_url else 0.0,
        age, age / HOURS_PER_DAY, age / HOURS_PER_WEEK,
    ]
    return np.array(out, dtype=float)


def extract_network(user: UserRecord) -> np.ndarray:
    fing, fers, bi = user.following_count, user.follower_count, user.bidirectional_count
    age = user.account_age_hours
    out = [
        fing, fers, _div(fing, fers), _div(fers, fing + fers),
        *_rates(fing, age), *_rates(fers, age),
        bi, _div(bi, fing), _div(bi, fers),
        _stdev(user.following_series), _stdev(user.follower_series),
    ]
    return np.array(out, dtype=float)


def _pair_from_rank(rank: int, n: int) -> tuple[int, int]:
    # ranks enumerate (0,1), (0,2), ..., (0,n-1), (1,2), ...
    i = 0
    row = n - 1
    while rank >= row:
        rank -= row
        i += 1
        row -= 1
    return i, i + 1 + rank


def similarity_pairs(n: int, limit: int = MAX_SIMILARITY_PAIRS,
                     seed: int = SIMILARITY_SEED) -> list[tuple[int, int]]:
    """All pairs when C(n,2) <= limit, else ``limit`` distinct pairs drawn by a
    partial Fisher-Yates over pair ranks with a SplitMix64 stream."""
    n_pairs = n * (n - 1) // 2
    if n_pairs <= limit:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng = SplitMix64(seed)
    swapped: dict[int, int] = {}
    chosen = []
    for k in range(limit):
        j = k + rng.bounded(n_pairs - k)
        chosen.append(swapped.get(j, j))
        swapped[j] = swapped.get(k, k)
    return [_pair_from_rank(r, n) for r in chosen]


def _cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    na2 = sum(v * v for v in a.values())
    nb2 = sum(v * v for v in b.values())
    return dot / math.sqrt(na2 * nb2)


def content_similarity(tweets: Sequence[Tweet]) -> float:
    if len(tweets) < 2:
        return 0.0
    bags = [Counter(words(t.text)) for t in tweets]
    pairs = similarity_pairs(len(bags))
    sims = [_cosine(bags[i], bags[j]) for i, j in pairs]
    # clip the rounding excess of identical bags
    return min(1.0, math.fsum(sims) / len(sims))


def extract_activity(user: UserRecord) -> np.ndarray:
    tweets = user.tweets
    n = len(tweets)
    age = user.account_age_hours
    if n == 0:
        return np.zeros(len(ACTIVITY_NAMES))
    mentions = total(tweets, "mentions")
    urls = total(tweets, "urls")
    hashtags = total(tweets, "hashtags")
    retweets = total(tweets, "is_retweet")
    out = [
        n, *_rates(n, age),
        content_similarity(tweets),
        mentions / n, *_rates(mentions, age),
        urls / n, *_rates(urls, age),
        hashtags / n, *_rates(hashtags, age),
        retweets / n, *_rates(retweets, age)[:2],
    ]
    return np.array(out, dtype=float)


# -- content -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?i)(?:https?://|www\.)\S+"  # url
    r"|[@#]\w+"                     # mention / hashtag
    r"|[^\W_]+(?:'[^\W_]+)*"        # word
    r"|[^\w\s]"                     # single punctuation or symbol
)
_SUFFIX_RULES = (
    ("ly", "ADV"),
    ("ing", "VERB"), ("ed", "VERB"), ("ize", "VERB"), ("ise", "VERB"),
    ("ous", "ADJ"), ("ful", "ADJ"), ("ive", "ADJ"), ("able", "ADJ"), ("ible", "ADJ"),
    ("less", "ADJ"), ("ic", "ADJ"), ("al", "ADJ"), ("est", "ADJ"),
    ("tion", "NOUN"), ("sion", "NOUN"), ("ness", "NOUN"), ("ment", "NOUN"), ("ity", "NOUN"),
    ("er", "NOUN"), ("s", "NOUN"),
)


def tag_tokens(text: str, lex: LexiconResources) -> list[tuple[str, str]]:
    """Heuristic coarse tagger: social tokens, punctuation and numbers by form,
    then the lexicon, then suffix rules; other alphabetic words default to NOUN."""
    out = []
    for tok in _TOKEN_RE.findall(text):
        low = tok.lower()
        if low[0] in "@#" and len(low) > 1 or low.startswith(("http://", "https://", "www.")):
            tag = "SOCIAL"
        elif not any(ch.isalnum() for ch in low):
            tag = "PUNCT"
        elif low.replace("'", "").isdigit():
            tag = "NUM"
        elif low in lex.pos_lexicon:
            tag = lex.pos_lexicon[low]
        elif low.isalpha() or "'" in low:
            tag = next((t for suf, t in _SUFFIX_RULES
                        if low.endswith(suf) and len(low) > len(suf) + 2), "NOUN")
        else:
            tag = "OTHER"
        out.append((low, tag))
    return out


def extract_content(user: UserRecord, lex: LexiconResources) -> np.ndarray:
    lex.validate()
    out = np.zeros(len(CONTENT_NAMES))
    tweets = user.tweets
    if not tweets:
        return out
    pos_counts = Counter()
    liwc_counts = Counter()
    valences: list[float] = []
    n_tokens = 0
    spam_hits = 0
    for tweet in tweets:
        tagged = tag_tokens(tweet.text, lex)
        n_tokens += len(tagged)
        pos_counts.update(tag for _, tag in tagged)
        for tok, tag in tagged:
            if tag in ("PUNCT", "SOCIAL"):
                continue
            liwc_counts.update(lex.liwc_categories(tok))
            score = lex.valence(tok)
            if score is not None:
                valences.append(score)
        spam_hits += lex.count_spam_phrases(words(tweet.text))
    k = 0
    for tag in POS_TAGS:
        out[k] = _div(pos_counts[tag], n_tokens)
        k += 1
    out[k] = spam_hits / len(tweets)
    k += 1
    for cat in lex.categories:
        out[k] = _div(liwc_counts[cat], n_tokens)
        k += 1
    if valences:
        out[k] = math.fsum(valences) / len(valences)
        out[k + 1] = statistics.pstdev(valences) if len(valences) > 1 else 0.0
        out[k + 2] = len(valences) / n_tokens
    return out


EXTRACTORS = {
    "UP": lambda user, lex: extract_profile(user),
    "UN": lambda user, lex: extract_network(user),
    "UA": lambda user, lex: extract_activity(user),
    "UC": extract_content,
}


def feature_values(user: UserRecord, combo, lex: Optional[LexiconResources] = None) -> np.ndarray:
    sets = parse_combo(combo)
    if "UC" in sets and lex is None:
        lex = bundled_lexicons()
    return np.concatenate([EXTRACTORS[s](user, lex) for s in sets])


def _example(user: UserRecord, values: np.ndarray, origin: str) -> LabeledExample:
    feats = {i: float(v) for i, v in enumerate(values) if v != 0.0}
    return LabeledExample(user.user_id, feats, 1 if user.label == 1 else -1, origin)


def assemble_vector(user: UserRecord, sets, registry: Optional[FeatureRegistry] = None,
                    lex: Optional[LexiconResources] = None,
                    standardizer: Optional[OnlineStandardizer] = None,
                    origin: str = "records") -> LabeledExample:
    """One labeled example for ``user`` over the selected sets.

    With a ``standardizer`` the vector is scaled by the statistics of the
    previously assembled users, then folded into them.
    """
    registry = registry or FeatureRegistry.default()
    values = feature_values(user, sets, lex)
    if values.shape[0] != registry.combo_dim(sets):
        raise ValueError("feature vector does not match the registry layout")
    if standardizer is not None:
        values = standardizer.step(values)
    return _example(user, values, origin)


def set_blocks(users: Sequence[UserRecord], sets, lex: Optional[LexiconResources] = None
               ) -> dict[str, np.ndarray]:
    """Per-set (n_users, set_dim) value matrices, so combinations can be
    assembled without re-running the extractors."""
    sets = parse_combo(sets)
    if "UC" in sets and lex is None:
        lex = bundled_lexicons()
    registry = FeatureRegistry.default()
    return {s: np.array([EXTRACTORS[s](u, lex) for u in users]).reshape(len(users), registry.dim(s))
            for s in sets}


def stream_from_blocks(users: Sequence[UserRecord], blocks: dict[str, np.ndarray], combo,
                       name: str = "records", standardize: bool = False) -> ExampleStream:
    sets = parse_combo(combo)
    values = np.hstack([blocks[s] for s in sets])
    registry = FeatureRegistry.default()
    scaler = OnlineStandardizer(values.shape[1]) if standardize else None
    examples = []
    for user, row in zip(users, values):
        examples.append(_example(user, scaler.step(row) if scaler else row, name))
    return ExampleStream(examples, name, registry.names(sets))


def extract_stream(users: Iterable[UserRecord], sets, lex: Optional[LexiconResources] = None,
                   standardize: bool = False, name: str = "records") -> ExampleStream:
    """Raw (or, with ``standardize``, prequentially scaled) vectors in input order.

    Experiments that reorder users should scale after reordering instead,
    see ``spamstream.stream.standardize_stream``.
    """
    users = list(users)
    return stream_from_blocks(users, set_blocks(users, sets, lex), sets, name, standardize)
