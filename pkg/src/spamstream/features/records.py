"""Raw account records and their line-oriented JSON ingestion.

A record file holds one JSON object per line::

    {"user_id": "u1", "screen_name": "abc", "description": null,
     "profile_url": null, "account_age_hours": 168.0,
     "following_count": 10, "follower_count": 4, "bidirectional_count": 2,
     "following_series": [8, 10], "follower_series": [3, 4],
     "tweets": [{"text": "hi @bob", "is_retweet": false, "timestamp": null}],
     "label": 1}

Unknown keys are ignored. Tweet counts (mentions, urls, hashtags) are
optional; when present they must agree with a re-parse of the text.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

MENTION_RE = re.compile(r"(?<![\w@])@\w+")
HASHTAG_RE = re.compile(r"(?<![\w#&])#\w+")
URL_RE = re.compile(r"(?i)\b(?:https?://|www\.)\S+")


def count_mentions(text: str) -> int:
    return len(MENTION_RE.findall(URL_RE.sub(" ", text)))


def count_urls(text: str) -> int:
    return len(URL_RE.findall(text))


def count_hashtags(text: str) -> int:
    # fragments inside URLs ("example.com/#top") are not hashtags
    return len(HASHTAG_RE.findall(URL_RE.sub(" ", text)))


class RecordError(ValueError):
    """A user or tweet record violates the ingestion schema."""


@dataclass(frozen=True)
class Tweet:
    text: str
    mentions: Optional[int] = None
    urls: Optional[int] = None
    hashtags: Optional[int] = None
    is_retweet: bool = False
    timestamp: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.text, str):
            raise RecordError("tweet text must be a string")
        parsed = {"mentions": count_mentions(self.text), "urls": count_urls(self.text),
                  "hashtags": count_hashtags(self.text)}
        for key, value in parsed.items():
            given = getattr(self, key)
            if given is None:
                object.__setattr__(self, key, value)
            elif isinstance(given, bool) or not isinstance(given, int) or given < 0:
                raise RecordError(f"tweet {key} must be a non-negative integer")
            elif given != value:
                raise RecordError(f"tweet {key}={given} disagrees with text ({value})")
        object.__setattr__(self, "is_retweet", bool(self.is_retweet))


def _count(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise RecordError(f"{name} must be a non-negative integer")
    return value


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    screen_name: str
    account_age_hours: float
    following_count: int
    follower_count: int
    bidirectional_count: int
    label: int
    description: Optional[str] = None
    profile_url: Optional[str] = None
    following_series: Optional[tuple[int, ...]] = None
    follower_series: Optional[tuple[int, ...]] = None
    tweets: tuple[Tweet, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        age = float(self.account_age_hours)
        if not math.isfinite(age) or age <= 0:
            raise RecordError("account_age_hours must be positive")
        object.__setattr__(self, "account_age_hours", age)
        for name in ("following_count", "follower_count", "bidirectional_count"):
            _count(getattr(self, name), name)
        if self.bidirectional_count > min(self.following_count, self.follower_count):
            raise RecordError("bidirectional_count exceeds following or follower count")
        if self.label not in (0, 1):
            raise RecordError("label must be 0 or 1")
        for name in ("following_series", "follower_series"):
            series = getattr(self, name)
            if series is not None:
                object.__setattr__(self, name, tuple(_count(v, name) for v in series))
        object.__setattr__(self, "tweets", tuple(self.tweets))


def tweet_from_json(obj) -> Tweet:
    if isinstance(obj, str):
        return Tweet(obj)
    if not isinstance(obj, dict) or "text" not in obj:
        raise RecordError("tweet must be a string or an object with 'text'")
    return Tweet(obj["text"], obj.get("mentions"), obj.get("urls"), obj.get("hashtags"),
                 obj.get("is_retweet", False), obj.get("timestamp"))


_REQUIRED = ("user_id", "screen_name", "account_age_hours", "following_count",
             "follower_count", "bidirectional_count", "label")


def user_from_json(obj: dict) -> UserRecord:
    if not isinstance(obj, dict):
        raise RecordError("user record must be a JSON object")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise RecordError(f"user record missing {', '.join(missing)}")
    return UserRecord(
        user_id=str(obj["user_id"]),
        screen_name=str(obj["screen_name"]),
        account_age_hours=obj["account_age_hours"],
        following_count=obj["following_count"],
        follower_count=obj["follower_count"],
        bidirectional_count=obj["bidirectional_count"],
        label=obj["label"],
        description=obj.get("description"),
        profile_url=obj.get("profile_url"),
        following_series=obj.get("following_series"),
        follower_series=obj.get("follower_series"),
        tweets=tuple(tweet_from_json(t) for t in obj.get("tweets") or ()),
    )


def user_to_json(user: UserRecord) -> str:
    obj = {
        "user_id": user.user_id, "screen_name": user.screen_name,
        "description": user.description, "profile_url": user.profile_url,
        "account_age_hours": user.account_age_hours,
        "following_count": user.following_count, "follower_count": user.follower_count,
        "bidirectional_count": user.bidirectional_count,
        "following_series": list(user.following_series) if user.following_series is not None else None,
        "follower_series": list(user.follower_series) if user.follower_series is not None else None,
        "tweets": [{"text": t.text, "is_retweet": t.is_retweet, "timestamp": t.timestamp}
                   for t in user.tweets],
        "label": user.label,
    }
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def iter_users(path: str | Path) -> Iterator[UserRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield user_from_json(json.loads(line))
            except (json.JSONDecodeError, RecordError, TypeError, ValueError) as exc:
                raise RecordError(f"{path}:{lineno}: {exc}") from None


def read_users(path: str | Path) -> list[UserRecord]:
    return list(iter_users(path))


def write_users(users: Iterable[UserRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user in users:
            fh.write(user_to_json(user) + "\n")


def total(tweets: Sequence[Tweet], attr: str) -> int:
    return sum(getattr(t, attr) for t in tweets)
