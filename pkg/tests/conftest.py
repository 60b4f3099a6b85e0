"""Shared fixtures: synthetic corpora with known structure, tiny post builders."""

import random
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import pytest

from stressorlens.corpus import CleanPost, FlairGroup, FlairSource
from stressorlens.textprep import (
    FeatureConfig,
    Vocabulary,
    build_vocabulary,
    count_matrix,
    smoothed_idf,
)
from stressorlens.topicmodel import LdaModel, top_terms


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("stressorlens") / "data" / "fixture" / name))


@pytest.fixture
def corpus_jsonl() -> Path:
    return fixture_path("corpus.jsonl")


@pytest.fixture
def owid_csv() -> Path:
    return fixture_path("owid.csv")


def make_post(
    post_id: str,
    month: str = "2020-03",
    text: str = "stuck inside again",
    group: FlairGroup = FlairGroup.EXPERIENCE,
    source: FlairSource = FlairSource.LABELLED,
) -> CleanPost:
    year, mon = (int(p) for p in month.split("-"))
    return CleanPost(
        id=post_id,
        timestamp=datetime(year, mon, 15, tzinfo=timezone.utc),
        month=month,
        text=text,
        flair_group=group,
        flair_source=source,
    )


def planted_docs(
    rng: random.Random,
    n_docs: int = 500,
    n_topics: int = 5,
    vocab_size: int = 50,
    doc_len: int = 60,
    leak: float = 0.05,
) -> tuple[list[list[str]], list[int], list[list[str]]]:
    """Documents drawn from near-disjoint topic blocks of the vocabulary.

    Each document belongs to one planted topic and draws tokens from that
    topic's block, except a small leak fraction drawn uniformly.
    """
    terms = [f"w{i:02d}" for i in range(vocab_size)]
    block = vocab_size // n_topics
    blocks = [terms[k * block : (k + 1) * block] for k in range(n_topics)]
    docs, owners = [], []
    for d in range(n_docs):
        k = d % n_topics
        owners.append(k)
        doc = []
        for _ in range(doc_len):
            if rng.random() < leak:
                doc.append(terms[rng.randrange(vocab_size)])
            else:
                doc.append(blocks[k][rng.randrange(block)])
        docs.append(doc)
    return docs, owners, blocks


def counts_from_docs(docs: list[list[str]]):
    cfg = FeatureConfig(max_features=10_000, ngram_range=(1, 1), min_df=1)
    vocab = build_vocabulary(docs, cfg)
    return count_matrix(docs, vocab)


def greedy_topic_match(model: LdaModel, blocks: list[list[str]], n: int = 10) -> dict[int, int]:
    """Map each fitted topic to a distinct planted block by top-term overlap."""
    tops = {k: {t for t, _ in top_terms(model, k, n)} for k in range(model.n_topics)}
    scored = sorted(
        ((len(tops[k] & set(blocks[j])), k, j) for k in tops for j in range(len(blocks))),
        key=lambda item: (-item[0], item[1], item[2]),
    )
    assigned: dict[int, int] = {}
    used: set[int] = set()
    for _, k, j in scored:
        if k not in assigned and j not in used:
            assigned[k] = j
            used.add(j)
    return assigned


def dtm(arr, weighting=None, terms: list[str] | None = None):
    """Wrap a plain array as a DocTermMatrix with a synthetic vocabulary."""
    import numpy as np
    import scipy.sparse as sp

    from stressorlens.textprep import DocTermMatrix, Weighting

    arr = np.asarray(arr, dtype=np.float64)
    n_docs, n_terms = arr.shape
    if terms is None:
        terms = [f"w{i:02d}" for i in range(n_terms)]
    df = [int(c) for c in (arr > 0).sum(axis=0)]
    vocab = make_vocabulary(terms, df, n_docs)
    return DocTermMatrix(
        vocabulary=vocab,
        matrix=sp.csr_matrix(arr),
        weighting=weighting if weighting is not None else Weighting.COUNT,
    )


def make_vocabulary(terms: list[str], df: list[int], n_docs: int) -> Vocabulary:
    by_term = dict(zip(terms, df))
    return Vocabulary(
        terms=tuple(terms),
        index={t: i for i, t in enumerate(terms)},
        df=by_term,
        score={t: by_term[t] * smoothed_idf(by_term[t], n_docs) for t in terms},
        n_docs=n_docs,
    )
