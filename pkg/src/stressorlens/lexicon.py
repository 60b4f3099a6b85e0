"""Keyword-sequence stressor lexicons and the per-post topic annotator.

Matching runs on raw tokens (no stopword filtering) so single-word entries
behave as whole-word matches. Multiword entries tolerate at most one
intervening token between consecutive keywords, because the bundled
entries are stopword-stripped phrases: "back normal" should catch
"back to normal" but a two-token gap stays out of reach.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CleanPost
from .errors import ConfigError
from .textprep import tokenize

Entry = tuple[str, ...]


@dataclass(frozen=True)
class Lexicon:
    """Named, ordered topic -> keyword-sequence entries."""

    name: str
    topics: dict[str, tuple[Entry, ...]]

    def __post_init__(self):
        for label, entries in self.topics.items():
            if len(set(entries)) != len(entries):
                raise ConfigError(f"duplicate entries under topic {label!r}")
            for entry in entries:
                if not entry or any(not tok for tok in entry):
                    raise ConfigError(f"empty entry token under topic {label!r}")
                if len(entry) > 3:
                    raise ConfigError(
                        f"entry {' '.join(entry)!r} under {label!r} exceeds 3 tokens"
                    )

    @property
    def topic_labels(self) -> tuple[str, ...]:
        return tuple(self.topics)


@dataclass(frozen=True)
class LexiconAnnotation:
    post_id: str
    topics: frozenset[str]


def _parse_entries(raw_entries: Iterable[str]) -> tuple[Entry, ...]:
    entries: list[Entry] = []
    seen: set[Entry] = set()
    for raw in raw_entries:
        tokens = tuple(tokenize(raw))
        if not tokens:
            raise ConfigError(f"entry {raw!r} tokenizes to nothing")
        if tokens in seen:
            continue
        seen.add(tokens)
        entries.append(tokens)
    return tuple(entries)


def parse_lexicon(data: dict) -> Lexicon:
    """Build a Lexicon from the JSON shape {name, topics: {label: [strings]}}."""
    if "name" not in data or "topics" not in data:
        raise ConfigError("lexicon JSON needs 'name' and 'topics' keys")
    topics = {
        label: _parse_entries(raw_entries)
        for label, raw_entries in data["topics"].items()
    }
    return Lexicon(name=str(data["name"]), topics=topics)


def load_lexicon(path: str | Path) -> Lexicon:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lexicon(json.load(fh))


def default_lexicon() -> Lexicon:
    """The bundled five-topic COVID-19 stressors lexicon."""
    text = resources.files("stressorlens.data").joinpath(
        "covid_stressors_lexicon.json"
    ).read_text("utf-8")
    return parse_lexicon(json.loads(text))


def _entry_matches(tokens: Sequence[str], entry: Entry) -> bool:
    if len(entry) == 1:
        return entry[0] in tokens
    starts = [i for i, tok in enumerate(tokens) if tok == entry[0]]

    def advance(pos: int, remaining: int) -> bool:
        if remaining == len(entry):
            return True
        target = entry[remaining]
        for step in (1, 2):
            nxt = pos + step
            if nxt < len(tokens) and tokens[nxt] == target and advance(nxt, remaining + 1):
                return True
        return False

    return any(advance(start, 1) for start in starts)


def match_post(text: str, lexicon: Lexicon) -> frozenset[str]:
    """Topic labels whose entries occur in the text.

    Tokenization keeps stopwords so in-order matching with the one-token
    gap allowance sees the same words a reader would.
    """
    tokens = tokenize(text)
    return frozenset(
        label
        for label, entries in lexicon.topics.items()
        if any(_entry_matches(tokens, entry) for entry in entries)
    )


def annotate_corpus(posts: Sequence[CleanPost], lexicon: Lexicon) -> list[LexiconAnnotation]:
    """match_post over every post, order preserved; one annotation per post."""
    return [
        LexiconAnnotation(post_id=p.id, topics=match_post(p.text, lexicon))
        for p in posts
    ]


def write_annotations_csv(
    annotations: Sequence[LexiconAnnotation],
    topic_labels: Sequence[str],
    path: str | Path,
) -> None:
    """Wide 0/1 CSV: one row per post, one column per lexicon topic."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["post_id", *topic_labels])
        for ann in annotations:
            writer.writerow(
                [ann.post_id, *(1 if label in ann.topics else 0 for label in topic_labels)]
            )


def read_annotations_csv(path: str | Path) -> tuple[list[LexiconAnnotation], tuple[str, ...]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        labels = tuple(header[1:])
        annotations = [
            LexiconAnnotation(
                post_id=row[0],
                topics=frozenset(l for l, v in zip(labels, row[1:]) if v == "1"),
            )
            for row in reader
        ]
    return annotations, labels
