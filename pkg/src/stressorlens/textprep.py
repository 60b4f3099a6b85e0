"""Tokenization, n-gram vocabulary curation, and count/TF-IDF matrices.

The vocabulary builder supports analyst curation: forced ``include_tokens``
occupy the leading columns, ``exclude_tokens`` are banned outright, and the
remaining columns go to the candidates with the highest total TF-IDF mass
in the corpus.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigError, EmptyVocabularyError
from .validation import check_fitted, require

_URL_RE = re.compile(r"(?:https?://|www\.)\S*")
_TOKEN_RE = re.compile(r"[a-z0-9']+")
_HYPERLINK_MARKERS = ("http://", "https://", "www.")


def tokenize(text: str, stopwords: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Lowercase, strip URLs, split on non-[a-z0-9'] runs.

    Tokens shorter than 2 characters and stopword tokens are dropped.
    """
    text = _URL_RE.sub("", text.lower())
    return [t for t in _TOKEN_RE.findall(text) if len(t) >= 2 and t not in stopwords]


def extract_ngrams(tokens: Sequence[str], ngram_range: tuple[int, int] = (1, 2)) -> list[str]:
    """All contiguous n-grams for n in the range, space-joined, in document order."""
    lo, hi = ngram_range
    require(1 <= lo <= hi, f"invalid ngram_range {ngram_range!r}")
    out: list[str] = []
    for n in range(lo, hi + 1):
        out.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return out


def has_hyperlink(text: str) -> bool:
    """True iff the text contains a hyperlink marker (case-insensitive)."""
    lowered = text.lower()
    return any(marker in lowered for marker in _HYPERLINK_MARKERS)


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def default_stopwords() -> frozenset[str]:
    """The bundled English stopword list."""
    text = resources.files("stressorlens.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def smoothed_idf(df: int, n_docs: int) -> float:
    """ln((1 + N) / (1 + df)) + 1; strictly positive for df <= N."""
    return math.log((1.0 + n_docs) / (1.0 + df)) + 1.0


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs for vocabulary construction and featurization."""

    max_features: int = 300
    ngram_range: tuple[int, int] = (1, 2)
    min_df: int = 2
    stopwords: frozenset[str] = field(default_factory=frozenset)
    include_tokens: tuple[str, ...] = ()
    exclude_tokens: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        lo, hi = self.ngram_range
        if not (1 <= lo <= hi):
            raise ConfigError(f"invalid ngram_range {self.ngram_range!r}")
        if self.max_features < 1:
            raise ConfigError("max_features must be >= 1")
        if self.min_df < 1:
            raise ConfigError("min_df must be >= 1")
        include = _dedupe(self.include_tokens)
        overlap = set(include) & set(self.exclude_tokens)
        if overlap:
            raise ConfigError(f"tokens in both include and exclude lists: {sorted(overlap)}")
        if self.max_features < len(include):
            raise ConfigError(
                f"max_features={self.max_features} is smaller than the "
                f"{len(include)} include tokens"
            )


def _dedupe(tokens: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for t in tokens:
        seen.setdefault(t)
    return tuple(seen)


@dataclass(frozen=True)
class Vocabulary:
    """An ordered term list with document frequencies and selection scores.

    ``n_docs`` is the size of the corpus the vocabulary was built on; the
    IDF weights are frozen against it.
    """

    terms: tuple[str, ...]
    index: dict[str, int]
    df: dict[str, int]
    score: dict[str, float]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self, term: str) -> float:
        return smoothed_idf(self.df[term], self.n_docs)

    def idf_vector(self) -> np.ndarray:
        return np.array([self.idf(t) for t in self.terms], dtype=np.float64)

    def sha256(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for t in self.terms:
            h.update(f"{t}\t{self.df[t]}\n".encode("utf-8"))
        h.update(str(self.n_docs).encode())
        return h.hexdigest()

    def to_csv(self, path: str | Path) -> None:
        import csv

        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["term", "index", "df", "score"])
            for i, t in enumerate(self.terms):
                writer.writerow([t, i, self.df[t], repr(self.score[t])])

    @classmethod
    def from_csv(cls, path: str | Path, n_docs: int) -> "Vocabulary":
        import csv

        terms: list[str] = []
        df: dict[str, int] = {}
        score: dict[str, float] = {}
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                terms.append(row["term"])
                df[row["term"]] = int(row["df"])
                score[row["term"]] = float(row["score"])
        return cls(
            terms=tuple(terms),
            index={t: i for i, t in enumerate(terms)},
            df=df,
            score=score,
            n_docs=n_docs,
        )


class Weighting(str, Enum):
    COUNT = "Count"
    TFIDF = "TfIdf"


@dataclass(frozen=True)
class DocTermMatrix:
    """Sparse nonnegative document x term matrix plus its vocabulary."""

    vocabulary: Vocabulary
    matrix: sp.csr_matrix
    weighting: Weighting

    @property
    def n_docs(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def row(self, i: int) -> np.ndarray:
        return np.asarray(self.matrix.getrow(i).todense()).ravel()


def build_vocabulary(docs: Sequence[Sequence[str]], config: FeatureConfig) -> Vocabulary:
    """Select up to ``max_features`` terms from tokenized documents.

    Candidates are the extracted n-grams with document frequency >= min_df,
    minus the exclude list. Each candidate is scored by its total TF-IDF
    mass over the corpus; include tokens found in the corpus take the
    leading columns in their given order, then candidates fill the rest in
    descending score order (ties broken lexicographically).
    """
    n_docs = len(docs)
    require(n_docs > 0 and any(len(d) > 0 for d in docs), "no nonempty documents")
    df: dict[str, int] = {}
    total: dict[str, int] = {}
    for doc in docs:
        grams = extract_ngrams(doc, config.ngram_range)
        for g in grams:
            total[g] = total.get(g, 0) + 1
        for g in set(grams):
            df[g] = df.get(g, 0) + 1

    score = {t: total[t] * smoothed_idf(df[t], n_docs) for t in df}

    include = [t for t in _dedupe(config.include_tokens) if t in df]
    taken = set(include)
    candidates = [
        t
        for t in df
        if df[t] >= config.min_df and t not in config.exclude_tokens and t not in taken
    ]
    candidates.sort(key=lambda t: (-score[t], t))

    selected = include + candidates[: config.max_features - len(include)]
    if not selected:
        raise EmptyVocabularyError(
            "no term survived filtering; relax min_df or trim the exclude list"
        )
    return Vocabulary(
        terms=tuple(selected),
        index={t: i for i, t in enumerate(selected)},
        df={t: df[t] for t in selected},
        score={t: score[t] for t in selected},
        n_docs=n_docs,
    )


def count_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    """Rows of raw occurrence counts of each vocabulary term."""
    require(len(vocab) > 0, "empty vocabulary")
    lo = min(len(t.split()) for t in vocab.terms)
    hi = max(len(t.split()) for t in vocab.terms)
    data: list[int] = []
    indices: list[int] = []
    indptr = [0]
    for doc in docs:
        row: dict[int, int] = {}
        for g in extract_ngrams(doc, (lo, hi)):
            col = vocab.index.get(g)
            if col is not None:
                row[col] = row.get(col, 0) + 1
        for col in sorted(row):
            indices.append(col)
            data.append(row[col])
        indptr.append(len(indices))
    mat = sp.csr_matrix(
        (np.array(data, dtype=np.float64), indices, indptr),
        shape=(len(docs), len(vocab)),
    )
    return DocTermMatrix(vocabulary=vocab, matrix=mat, weighting=Weighting.COUNT)


def tfidf_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    """tf * smoothed idf, with each nonzero row L2-normalized.

    IDF is frozen at vocabulary-build time (df and N from the vocabulary).
    """
    counts = count_matrix(docs, vocab)
    mat = counts.matrix.multiply(vocab.idf_vector()).tocsr()
    norms = sp.linalg.norm(mat, axis=1)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    mat = sp.diags(scale).dot(mat).tocsr()
    return DocTermMatrix(vocabulary=vocab, matrix=mat, weighting=Weighting.TFIDF)


class TfidfFeaturizer(BaseEstimator, TransformerMixin):
    """Curated-vocabulary TF-IDF featurizer over raw post texts.

    Parameters mirror :class:`FeatureConfig`; ``stopwords=None`` selects the
    bundled English list. ``fit`` tokenizes and builds the vocabulary;
    ``transform`` returns a TF-IDF :class:`DocTermMatrix` with IDF frozen at
    fit time.
    """

    def __init__(
        self,
        max_features: int = 300,
        ngram_range: tuple[int, int] = (1, 2),
        min_df: int = 2,
        stopwords: frozenset[str] | None = None,
        include_tokens: tuple[str, ...] = (),
        exclude_tokens: frozenset[str] = frozenset(),
    ):
        self.max_features = max_features
        self.ngram_range = ngram_range
        self.min_df = min_df
        self.stopwords = stopwords
        self.include_tokens = include_tokens
        self.exclude_tokens = exclude_tokens

    def _config(self) -> FeatureConfig:
        stop = self.stopwords if self.stopwords is not None else default_stopwords()
        return FeatureConfig(
            max_features=self.max_features,
            ngram_range=tuple(self.ngram_range),
            min_df=self.min_df,
            stopwords=frozenset(stop),
            include_tokens=tuple(self.include_tokens),
            exclude_tokens=frozenset(self.exclude_tokens),
        )

    def _tokenize_all(self, texts: Iterable[str], stopwords: frozenset[str]) -> list[list[str]]:
        docs = []
        for i, text in enumerate(texts):
            if not isinstance(text, str):
                raise TypeError(f"document {i} is not a string: {type(text).__name__}")
            docs.append(tokenize(text, stopwords))
        return docs

    def fit(self, X: Iterable[str], y=None) -> "TfidfFeaturizer":
        config = self._config()
        docs = self._tokenize_all(X, config.stopwords)
        self.config_ = config
        self.vocabulary_ = build_vocabulary(docs, config)
        return self

    def transform(self, X: Iterable[str]) -> DocTermMatrix:
        check_fitted(self, "vocabulary_")
        docs = self._tokenize_all(X, self.config_.stopwords)
        return tfidf_matrix(docs, self.vocabulary_)

    def count_transform(self, X: Iterable[str]) -> DocTermMatrix:
        check_fitted(self, "vocabulary_")
        docs = self._tokenize_all(X, self.config_.stopwords)
        return count_matrix(docs, self.vocabulary_)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.terms, dtype=object)
