"""Synthetic account records in the ingestion schema.

Spammers lean towards young accounts that follow many and are followed by
few, post link- and hashtag-heavy, repetitive promotional text. Legitimate
users lean the other way. Every trait is drawn from overlapping ranges, so no
single feature set separates the classes perfectly.
"""

from __future__ import annotations

import math

from ..rng import SplitMix64
from .records import Tweet, UserRecord

_SPAM_LINES = (
    "click here to get free followers", "make money from home today", "limited time offer act now",
    "buy now best price guaranteed", "free gift for the first winner", "earn money fast cash",
    "follow back for free access", "weight loss miracle risk free", "work from home get paid",
    "exclusive deal lowest price order now",
)
_LEGIT_LINES = (
    "had a great day with my family", "i think the game was really good", "coffee with a friend this morning",
    "so tired after work but happy", "love this song so much", "we went to the park today",
    "can't believe how nice the weather is", "reading a good book tonight", "my brother cooked dinner lol",
    "sad that the season is over", "what do you think about the movie", "thanks everyone for the support",
)
_NAMES = "abcdefghijklmnopqrstuvwxyz0123456789_"


def _pick(rng: SplitMix64, items):
    return items[rng.bounded(len(items))]


def _log_uniform(rng: SplitMix64, lo: float, hi: float) -> float:
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def _tweet(rng: SplitMix64, spammy: bool, t0: float) -> Tweet:
    pool = _SPAM_LINES if spammy else _LEGIT_LINES
    # a fifth of tweets borrow from the other class's vocabulary
    if rng.next_float() < 0.2:
        pool = _LEGIT_LINES if spammy else _SPAM_LINES
    parts = [_pick(rng, pool)]
    if rng.next_float() < (0.7 if spammy else 0.2):
        parts.append(f"http://t.co/{rng.bounded(10 ** 6):06d}")
    if rng.next_float() < (0.6 if spammy else 0.25):
        parts.append("#" + _pick(rng, ("win", "free", "deal", "music", "news", "love")))
    if rng.next_float() < (0.5 if spammy else 0.35):
        parts.insert(0, "@" + _pick(rng, ("bob", "amy", "news", "promo", "joe")))
    retweet = rng.next_float() < (0.3 if spammy else 0.15)
    text = ("RT " if retweet else "") + " ".join(parts)
    return Tweet(text, is_retweet=retweet, timestamp=t0 + rng.uniform(0.0, 3600.0))


def _series(rng: SplitMix64, final: int, spread: float) -> tuple[int, ...]:
    return tuple(max(0, int(final * (1.0 - spread * rng.next_float()))) for _ in range(4)) + (final,)


def generate_user(rng: SplitMix64, label: int, user_id: str) -> UserRecord:
    spammy = label == 1
    # one in ten users looks like the other class on the network features
    network_spammy = spammy != (rng.next_float() < 0.1)
    age = _log_uniform(rng, 24.0, 24.0 * 120) if spammy else _log_uniform(rng, 24.0 * 30, 24.0 * 2000)
    if network_spammy:
        following = int(_log_uniform(rng, 200, 3000))
        followers = int(following * rng.uniform(0.02, 0.6))
    else:
        followers = int(_log_uniform(rng, 20, 2000))
        following = int(followers * rng.uniform(0.4, 1.6))
    bidirectional = int(min(following, followers) * rng.uniform(0.0, 0.3 if network_spammy else 0.8))
    n_tweets = rng.bounded(40) + (5 if spammy else 0)
    tweets = tuple(_tweet(rng, spammy, 1.6e9 + 3600.0 * k) for k in range(n_tweets))
    name_len = 6 + rng.bounded(10)
    screen_name = "".join(_pick(rng, _NAMES) for _ in range(name_len))
    has_desc = rng.next_float() < (0.5 if spammy else 0.85)
    description = " ".join(_pick(rng, _SPAM_LINES if spammy else _LEGIT_LINES).split()[:5]) \
        if has_desc else None
    url = f"http://example.org/{screen_name}" if rng.next_float() < (0.8 if spammy else 0.4) else None
    return UserRecord(
        user_id=user_id, screen_name=screen_name, account_age_hours=age,
        following_count=following, follower_count=followers, bidirectional_count=bidirectional,
        label=label, description=description, profile_url=url,
        following_series=_series(rng, following, 0.6 if network_spammy else 0.1),
        follower_series=_series(rng, followers, 0.2),
        tweets=tweets,
    )


def generate_users(n_per_class: int, spam_ratio: float = 0.5, seed: int = 0,
                   name: str = "synthetic-users") -> list[UserRecord]:
    if n_per_class < 1 or not 0.0 < spam_ratio < 1.0:
        raise ValueError("invalid spec")
    total = 2 * n_per_class
    n_spam = math.floor(total * spam_ratio + 0.5)
    rng = SplitMix64(seed)
    labels = [1] * n_spam + [0] * (total - n_spam)
    rng.shuffle(labels)
    return [generate_user(rng, y, f"{name}-{i}") for i, y in enumerate(labels)]
