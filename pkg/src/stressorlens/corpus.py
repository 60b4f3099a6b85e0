"""Corpus ingestion, cleaning, and flair-group categorization.

Ingestion is file-based: one JSON object per line with the Pushshift
submission field names (``id``, ``created_utc``, ``title``, ``selftext``,
``link_flair_text``). Cleaning drops moderator-removed placeholders and
empty posts, stamps each post with its UTC calendar month, and maps the
raw flair string onto one of the coarse flair groups.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

PLACEHOLDER_TEXTS = ("[removed]", "[deleted]")


class FlairGroup(str, Enum):
    MENTAL_HEALTH_SUPPORT = "MentalHealthSupport"
    DISCUSSION_QUESTIONS = "DiscussionQuestions"
    NEWS_RESOURCES = "NewsResources"
    EXPERIENCE = "Experience"
    OTHER = "Other"
    UNLABELLED = "Unlabelled"


class FlairSource(str, Enum):
    LABELLED = "Labelled"
    PREDICTED = "Predicted"
    UNLABELLED = "Unlabelled"


# Raw flair -> coarse group, keyed by casefolded, whitespace-collapsed text.
# Both the hyphenated and spaced spellings of the misinformation flair occur
# in the wild, as does the "Deperate mod" misspelling.
_FLAIR_MAP = {
    "support": FlairGroup.MENTAL_HEALTH_SUPPORT,
    "trigger warning": FlairGroup.MENTAL_HEALTH_SUPPORT,
    "questions": FlairGroup.DISCUSSION_QUESTIONS,
    "discussion": FlairGroup.DISCUSSION_QUESTIONS,
    "vaccines are safe": FlairGroup.DISCUSSION_QUESTIONS,
    "good news": FlairGroup.NEWS_RESOURCES,
    "resources": FlairGroup.NEWS_RESOURCES,
    "news": FlairGroup.NEWS_RESOURCES,
    "firsthand account": FlairGroup.EXPERIENCE,
    "biosafety request": FlairGroup.EXPERIENCE,
    "the answer is no": FlairGroup.OTHER,
    "misinformation-debunked": FlairGroup.OTHER,
    "misinformation debunked": FlairGroup.OTHER,
    "desperate mod": FlairGroup.OTHER,
    "deperate mod": FlairGroup.OTHER,
}


@dataclass(frozen=True)
class RawPost:
    """One submission as ingested, before any cleaning."""

    id: str
    created_utc: int
    title: str
    body: str = ""
    flair: Optional[str] = None
    permalink: Optional[str] = None


@dataclass(frozen=True)
class CleanPost:
    """One analysis-ready post: non-placeholder text plus month metadata."""

    id: str
    timestamp: datetime
    month: str
    text: str
    flair_group: FlairGroup
    flair_source: FlairSource


@dataclass
class LoadReport:
    """Tally of records read and dropped while parsing a corpus file."""

    parsed: int = 0
    malformed: int = 0
    duplicates: int = 0

    @property
    def total(self) -> int:
        return self.parsed + self.malformed + self.duplicates


def map_flair(flair: Optional[str]) -> FlairGroup:
    """Map a raw flair string to its group; unknown or absent -> Unlabelled.

    Matching is case-insensitive with internal whitespace collapsed.
    """
    if flair is None:
        return FlairGroup.UNLABELLED
    key = " ".join(flair.split()).casefold()
    return _FLAIR_MAP.get(key, FlairGroup.UNLABELLED)


def _parse_record(obj: object) -> Optional[RawPost]:
    if not isinstance(obj, dict):
        return None
    post_id = obj.get("id")
    created = obj.get("created_utc")
    title = obj.get("title")
    if not isinstance(post_id, str) or not post_id:
        return None
    if isinstance(created, float) and created.is_integer():
        created = int(created)
    if not isinstance(created, int) or isinstance(created, bool) or created <= 0:
        return None
    if not isinstance(title, str):
        return None
    body = obj.get("selftext")
    flair = obj.get("link_flair_text")
    permalink = obj.get("permalink")
    return RawPost(
        id=post_id,
        created_utc=created,
        title=title,
        body=body if isinstance(body, str) else "",
        flair=flair if isinstance(flair, str) else None,
        permalink=permalink if isinstance(permalink, str) else None,
    )


def load_corpus(path: str | Path) -> tuple[list[RawPost], LoadReport]:
    """Read a JSON-lines corpus export.

    Returns all parseable records in file order together with a tally of
    skipped lines. Duplicate ids keep the first occurrence. An unreadable
    file raises ``OSError``.
    """
    report = LoadReport()
    posts: list[RawPost] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                report.malformed += 1
                continue
            post = _parse_record(obj)
            if post is None:
                report.malformed += 1
                continue
            if post.id in seen:
                report.duplicates += 1
                continue
            seen.add(post.id)
            posts.append(post)
            report.parsed += 1
    return posts, report


def month_key(ts: datetime) -> str:
    """YYYY-MM bucket of a timestamp, in UTC."""
    utc = ts.astimezone(timezone.utc)
    return f"{utc.year:04d}-{utc.month:02d}"


def clean(posts: Iterable[RawPost]) -> list[CleanPost]:
    """Drop placeholder/empty posts and attach month + flair-group metadata.

    A post is dropped when its trimmed title or body equals "[removed]" or
    "[deleted]", or when the concatenated text is empty. Kept posts carry
    ``flair_source=Labelled`` when their flair mapped to a group, else
    ``Unlabelled`` (until imputation).
    """
    out: list[CleanPost] = []
    for post in posts:
        if post.title.strip() in PLACEHOLDER_TEXTS or post.body.strip() in PLACEHOLDER_TEXTS:
            continue
        text = f"{post.title} {post.body}".strip()
        if not text:
            continue
        ts = datetime.fromtimestamp(post.created_utc, tz=timezone.utc)
        group = map_flair(post.flair)
        source = (
            FlairSource.LABELLED
            if post.flair is not None and group is not FlairGroup.UNLABELLED
            else FlairSource.UNLABELLED
        )
        out.append(
            CleanPost(
                id=post.id,
                timestamp=ts,
                month=month_key(ts),
                text=text,
                flair_group=group,
                flair_source=source,
            )
        )
    return out


def exclude_other(posts: Iterable[CleanPost]) -> list[CleanPost]:
    """Remove Other-group posts; they are never modeled."""
    return [p for p in posts if p.flair_group is not FlairGroup.OTHER]


def counts_by_group(posts: Iterable[CleanPost]) -> dict[FlairGroup, int]:
    counts = {g: 0 for g in FlairGroup}
    for p in posts:
        counts[p.flair_group] += 1
    return counts


def relabel(post: CleanPost, group: FlairGroup, source: FlairSource) -> CleanPost:
    return replace(post, flair_group=group, flair_source=source)


def write_clean_jsonl(posts: Iterable[CleanPost], path: str | Path) -> None:
    """Re-emit a cleaned corpus as JSON lines (RFC 3339 timestamps)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(
                json.dumps(
                    {
                        "id": p.id,
                        "timestamp": p.timestamp.astimezone(timezone.utc).strftime(
                            "%Y-%m-%dT%H:%M:%SZ"
                        ),
                        "month": p.month,
                        "text": p.text,
                        "flair_group": p.flair_group.value,
                        "flair_source": p.flair_source.value,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_clean_jsonl(path: str | Path) -> list[CleanPost]:
    posts: list[CleanPost] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            ts = datetime.strptime(obj["timestamp"], "%Y-%m-%dT%H:%M:%SZ").replace(
                tzinfo=timezone.utc
            )
            posts.append(
                CleanPost(
                    id=obj["id"],
                    timestamp=ts,
                    month=obj["month"],
                    text=obj["text"],
                    flair_group=FlairGroup(obj["flair_group"]),
                    flair_source=FlairSource(obj["flair_source"]),
                )
            )
    return posts
