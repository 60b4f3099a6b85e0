"""Latent Dirichlet allocation over curated document-term matrices.

Two inference routes:

* batch mean-field variational Bayes (``fit_vb``), which accepts
  real-valued nonnegative weights such as TF-IDF rows, and
* collapsed Gibbs sampling (``fit_gibbs``) for integer count matrices,
  kept as an independent cross-check of the variational results.

The variational fit warm-starts each document's gamma across outer
iterations and refreshes the responsibilities from the final gamma before
the topic-word update, so every step is exact coordinate ascent on the
evidence lower bound and the recorded trace is nondecreasing.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln, logsumexp, psi
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigError, IntegrityError, NumericalError
from .matrixio import read_matrix, write_matrix
from .textprep import DocTermMatrix, Vocabulary, Weighting
from .validation import check_fitted

logger = logging.getLogger(__name__)

DEFAULT_GROUP_NAMES = (
    "fear of coronavirus",
    "educational and occupational problems",
    "family problems",
    "problems related to social environment",
    "mental health symptoms",
    "uncertainty on development of pandemic",
)

_PHI_EPS = 1e-100


class InferenceMethod(str, Enum):
    VARIATIONAL_BAYES = "VariationalBayes"
    COLLAPSED_GIBBS = "CollapsedGibbs"


@dataclass(frozen=True)
class LdaConfig:
    """Topic count, symmetric Dirichlet priors, and stopping rules."""

    n_topics: int = 10
    alpha: float | None = None
    eta: float | None = None
    max_iters: int = 200
    elbo_rel_tol: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.n_topics < 1:
            raise ConfigError("n_topics must be >= 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.elbo_rel_tol < 0:
            raise ConfigError("elbo_rel_tol must be >= 0")
        if self.alpha is not None and not self.alpha > 0:
            raise ConfigError("alpha must be > 0")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("eta must be > 0")

    @property
    def alpha_value(self) -> float:
        return self.alpha if self.alpha is not None else 1.0 / self.n_topics

    @property
    def eta_value(self) -> float:
        return self.eta if self.eta is not None else 1.0 / self.n_topics

    def to_dict(self) -> dict:
        return {
            "n_topics": self.n_topics,
            "alpha": self.alpha_value,
            "eta": self.eta_value,
            "max_iters": self.max_iters,
            "elbo_rel_tol": self.elbo_rel_tol,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LdaConfig":
        return cls(
            n_topics=int(d["n_topics"]),
            alpha=float(d["alpha"]),
            eta=float(d["eta"]),
            max_iters=int(d["max_iters"]),
            elbo_rel_tol=float(d["elbo_rel_tol"]),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class TopicGroupMap:
    """Total assignment of topic indices to named analyst groups."""

    groups: tuple[str, ...]
    assignment: dict[int, int]

    def __post_init__(self):
        for topic, g in self.assignment.items():
            if not 0 <= g < len(self.groups):
                raise ConfigError(f"topic {topic} assigned to unknown group index {g}")

    @classmethod
    def default(cls, n_topics: int) -> "TopicGroupMap":
        return cls(
            groups=DEFAULT_GROUP_NAMES,
            assignment={k: k % len(DEFAULT_GROUP_NAMES) for k in range(n_topics)},
        )

    def validate_total(self, n_topics: int) -> None:
        missing = [k for k in range(n_topics) if k not in self.assignment]
        if missing:
            raise ConfigError(f"topics without a group: {missing}")

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "assignment": {str(k): g for k, g in self.assignment.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TopicGroupMap":
        return cls(
            groups=tuple(d["groups"]),
            assignment={int(k): int(g) for k, g in d["assignment"].items()},
        )


class SelectionKind(str, Enum):
    TOP_RANKED = "TopRanked"
    RANDOM = "Random"


@dataclass(frozen=True)
class ReviewSample:
    topic: int
    post_id: str
    theta_value: float
    selection: SelectionKind


@dataclass(frozen=True)
class LdaModel:
    """A fitted topic model: distributions, trace, and analyst annotations.

    ``topic_word_concentration`` keeps the unnormalized topic-word
    variational parameters so later single-document inference solves the
    same fixed-point equations the fit did.
    """

    config: LdaConfig
    vocabulary: Vocabulary
    topic_word: np.ndarray
    doc_topic: np.ndarray
    topic_word_concentration: np.ndarray
    elbo_trace: tuple[float, ...]
    method: InferenceMethod
    topic_names: dict[int, str] = field(default_factory=dict)
    group_map: TopicGroupMap | None = None

    @property
    def n_topics(self) -> int:
        return self.config.n_topics

    def effective_group_map(self) -> TopicGroupMap:
        return self.group_map or TopicGroupMap.default(self.n_topics)

    def with_annotations(
        self,
        topic_names: dict[int, str] | None = None,
        group_map: TopicGroupMap | None = None,
    ) -> "LdaModel":
        return replace(
            self,
            topic_names=dict(topic_names) if topic_names is not None else self.topic_names,
            group_map=group_map if group_map is not None else self.group_map,
        )


def _dirichlet_expectation(param: np.ndarray) -> np.ndarray:
    """E[log x] rows for Dirichlet rows: psi(param) - psi(row sum)."""
    if param.ndim == 1:
        return psi(param) - psi(param.sum())
    return psi(param) - psi(param.sum(axis=1))[:, None]


def _densify(X) -> np.ndarray:
    if sp.issparse(X):
        X = X.toarray()
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def _batch_e_step(
    X: np.ndarray,
    gamma: np.ndarray,
    exp_elog_beta: np.ndarray,
    alpha: float,
    tol: float,
    max_inner: int,
) -> np.ndarray:
    """Iterate the fused responsibility/gamma update until gamma settles."""
    for _ in range(max_inner):
        exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
        phinorm = exp_elog_theta @ exp_elog_beta + _PHI_EPS
        gamma_new = alpha + exp_elog_theta * ((X / phinorm) @ exp_elog_beta.T)
        delta = np.abs(gamma_new - gamma).mean()
        gamma = gamma_new
        if delta < tol:
            break
    return gamma


def _sufficient_stats(
    X: np.ndarray, gamma: np.ndarray, exp_elog_beta: np.ndarray
) -> np.ndarray:
    """Weighted responsibilities per (topic, term), consistent with gamma."""
    exp_elog_theta = np.exp(_dirichlet_expectation(gamma))
    phinorm = exp_elog_theta @ exp_elog_beta + _PHI_EPS
    return (exp_elog_theta.T @ (X / phinorm)) * exp_elog_beta


def _elbo(
    X: np.ndarray,
    gamma: np.ndarray,
    lam: np.ndarray,
    alpha: float,
    eta: float,
) -> float:
    """Evidence lower bound with responsibilities at their optimum.

    The likelihood term collapses to sum_dw X_dw * logsumexp_k(Elogtheta_dk
    + Elogbeta_kw) when the responsibilities are exactly the normalized
    exponentiated expectations.
    """
    n_docs, n_topics = gamma.shape
    n_terms = lam.shape[1]
    elog_theta = _dirichlet_expectation(gamma)
    elog_beta = _dirichlet_expectation(lam)

    # (N, V) log-normalizers over topics; X zeros contribute nothing.
    log_phinorm = logsumexp(
        elog_theta[:, None, :] + elog_beta.T[None, :, :], axis=2
    )
    score = float((X * log_phinorm).sum())

    score += float(((alpha - gamma) * elog_theta).sum())
    score += float((gammaln(gamma) - gammaln(alpha)).sum())
    score += float((gammaln(alpha * n_topics) - gammaln(gamma.sum(axis=1))).sum())

    score += float(((eta - lam) * elog_beta).sum())
    score += float((gammaln(lam) - gammaln(eta)).sum())
    score += float((gammaln(eta * n_terms) - gammaln(lam.sum(axis=1))).sum())
    return score


def _normalize_rows(mat: np.ndarray) -> np.ndarray:
    return mat / mat.sum(axis=1)[:, None]


def fit_vb(X: DocTermMatrix, config: LdaConfig) -> LdaModel:
    """Batch mean-field variational Bayes on nonnegative real weights."""
    dense = _densify(X.matrix)
    if dense.size == 0 or dense.sum() <= 0:
        raise ValueError("document-term matrix has no mass; nothing to fit")
    if np.any(dense < 0):
        raise ValueError("document-term matrix entries must be nonnegative")

    n_docs, n_terms = dense.shape
    n_topics = config.n_topics
    alpha, eta = config.alpha_value, config.eta_value

    # Seeded, data-driven start: each document spreads its mass over topics
    # by normalized Gamma draws, so the init is equivariant under vocabulary
    # column permutations and identical documents share deterministic gamma.
    rng = np.random.default_rng(config.seed)
    doc_mix = rng.gamma(100.0, 1.0 / 100.0, size=(n_docs, n_topics))
    doc_mix /= doc_mix.sum(axis=1)[:, None]
    lam = eta + doc_mix.T @ dense
    gamma = alpha + np.tile(dense.sum(axis=1)[:, None] / n_topics, (1, n_topics))

    elbo_trace: list[float] = []
    previous = None
    for _ in range(config.max_iters):
        exp_elog_beta = np.exp(_dirichlet_expectation(lam))
        gamma = _batch_e_step(dense, gamma, exp_elog_beta, alpha, tol=1e-6, max_inner=100)
        lam = eta + _sufficient_stats(dense, gamma, exp_elog_beta)
        bound = _elbo(dense, gamma, lam, alpha, eta)
        if not np.isfinite(bound):
            raise NumericalError(f"evidence lower bound is {bound}")
        elbo_trace.append(bound)
        if previous is not None:
            denom = max(abs(previous), 1e-12)
            if abs(bound - previous) / denom < config.elbo_rel_tol:
                break
        previous = bound

    # Fresh cold-started document pass against the final topic-word state.
    # Warm-started rows can sit in a different per-document basin than a
    # cold solve; starting from the same init infer_theta uses makes the
    # stored rows reproducible from the persisted model alone.
    exp_elog_beta = np.exp(_dirichlet_expectation(lam))
    gamma = alpha + np.tile(dense.sum(axis=1)[:, None] / n_topics, (1, n_topics))
    gamma = _batch_e_step(dense, gamma, exp_elog_beta, alpha, tol=1e-8, max_inner=1000)

    return LdaModel(
        config=config,
        vocabulary=X.vocabulary,
        topic_word=_normalize_rows(lam),
        doc_topic=_normalize_rows(gamma),
        topic_word_concentration=lam,
        elbo_trace=tuple(elbo_trace),
        method=InferenceMethod.VARIATIONAL_BAYES,
        group_map=TopicGroupMap.default(n_topics),
    )


def fit_gibbs(X: DocTermMatrix, config: LdaConfig) -> LdaModel:
    """Collapsed Gibbs sampling over token-level topic assignments."""
    if X.weighting is not Weighting.COUNT:
        raise ValueError(
            f"collapsed Gibbs needs an integer count matrix, got {X.weighting.value}; "
            "use fit_vb for real-valued weights"
        )
    dense = _densify(X.matrix)
    if dense.size == 0 or dense.sum() <= 0:
        raise ValueError("document-term matrix has no mass; nothing to fit")
    rounded = np.rint(dense)
    if np.max(np.abs(dense - rounded)) > 1e-9:
        raise ValueError("count matrix has non-integer entries; use fit_vb")

    n_docs, n_terms = dense.shape
    n_topics = config.n_topics
    alpha, eta = config.alpha_value, config.eta_value

    # Token stream in (document, sorted term index) order; plain Python
    # counters keep the inner loop allocation-free.
    doc_of: list[int] = []
    word_of: list[int] = []
    for d in range(n_docs):
        for w in range(n_terms):
            c = int(rounded[d, w])
            doc_of.extend([d] * c)
            word_of.extend([w] * c)

    rng = random.Random(config.seed)
    n_dk = [[0] * n_topics for _ in range(n_docs)]
    n_kw = [[0] * n_terms for _ in range(n_topics)]
    n_k = [0] * n_topics
    z = [0] * len(doc_of)
    for i, (d, w) in enumerate(zip(doc_of, word_of)):
        k = rng.randrange(n_topics)
        z[i] = k
        n_dk[d][k] += 1
        n_kw[k][w] += 1
        n_k[k] += 1

    v_eta = n_terms * eta
    weights = [0.0] * n_topics
    for _ in range(config.max_iters):
        for i, (d, w) in enumerate(zip(doc_of, word_of)):
            k = z[i]
            n_dk[d][k] -= 1
            n_kw[k][w] -= 1
            n_k[k] -= 1
            total = 0.0
            row = n_dk[d]
            for t in range(n_topics):
                total += (row[t] + alpha) * (n_kw[t][w] + eta) / (n_k[t] + v_eta)
                weights[t] = total
            u = rng.random() * total
            k = 0
            while weights[k] < u:
                k += 1
            z[i] = k
            n_dk[d][k] += 1
            n_kw[k][w] += 1
            n_k[k] += 1

    counts_dk = np.array(n_dk, dtype=np.float64)
    counts_kw = np.array(n_kw, dtype=np.float64)
    theta = (counts_dk + alpha) / (counts_dk.sum(axis=1)[:, None] + n_topics * alpha)
    lam = counts_kw + eta
    phi = lam / (counts_kw.sum(axis=1)[:, None] + n_terms * eta)

    return LdaModel(
        config=config,
        vocabulary=X.vocabulary,
        topic_word=phi,
        doc_topic=theta,
        topic_word_concentration=lam,
        elbo_trace=(),
        method=InferenceMethod.COLLAPSED_GIBBS,
        group_map=TopicGroupMap.default(n_topics),
    )


def infer_theta(model: LdaModel, row) -> np.ndarray:
    """Topic proportions for one document with topic-word state held fixed."""
    dense = _densify(row)
    if dense.shape != (1, len(model.vocabulary)):
        raise ValueError(
            f"expected a single row over {len(model.vocabulary)} terms, "
            f"got shape {dense.shape}"
        )
    n_topics = model.n_topics
    if dense.sum() <= 0:
        logger.warning("all-zero document row; returning the uniform distribution")
        return np.full(n_topics, 1.0 / n_topics)
    alpha = model.config.alpha_value
    exp_elog_beta = np.exp(_dirichlet_expectation(model.topic_word_concentration))
    gamma = alpha + np.full((1, n_topics), dense.sum() / n_topics)
    gamma = _batch_e_step(dense, gamma, exp_elog_beta, alpha, tol=1e-8, max_inner=1000)
    return (gamma / gamma.sum()).ravel()


def dominant_topic(theta_row: np.ndarray) -> int:
    """Index of the largest entry; ties go to the lowest index."""
    return int(np.argmax(theta_row))


def top_terms(model: LdaModel, topic: int, n: int) -> list[tuple[str, float]]:
    """The n most probable terms of a topic, descending, ties lexicographic."""
    if not 0 <= topic < model.n_topics:
        raise ValueError(f"topic {topic} out of range for K={model.n_topics}")
    row = model.topic_word[topic]
    order = sorted(range(len(row)), key=lambda w: (-row[w], model.vocabulary.terms[w]))
    return [(model.vocabulary.terms[w], float(row[w])) for w in order[: max(n, 0)]]


def select_review_samples(
    model: LdaModel,
    topic: int,
    rng_seed: int,
    doc_ids: Sequence[str] | None = None,
) -> list[ReviewSample]:
    """3 highest-proportion posts plus 3 seeded random others for a topic.

    Only documents whose dominant topic is `topic` are eligible. When fewer
    than six exist, returns what there is and logs the shortfall.
    """
    if doc_ids is not None and len(doc_ids) != model.doc_topic.shape[0]:
        raise ValueError("doc_ids length does not match the fitted document count")
    eligible = [
        d for d in range(model.doc_topic.shape[0])
        if dominant_topic(model.doc_topic[d]) == topic
    ]
    if not eligible:
        logger.warning("no documents have dominant topic %d", topic)
        return []

    def ident(d: int) -> str:
        return doc_ids[d] if doc_ids is not None else str(d)

    eligible.sort(key=lambda d: (-model.doc_topic[d, topic], d))
    top = eligible[:3]
    rest = eligible[3:]
    picks = random.Random(rng_seed).sample(rest, min(3, len(rest)))
    if len(top) + len(picks) < 6:
        logger.warning(
            "topic %d has only %d eligible documents; returning %d samples",
            topic, len(eligible), len(top) + len(picks),
        )
    samples = [
        ReviewSample(topic, ident(d), float(model.doc_topic[d, topic]), SelectionKind.TOP_RANKED)
        for d in top
    ]
    samples += [
        ReviewSample(topic, ident(d), float(model.doc_topic[d, topic]), SelectionKind.RANDOM)
        for d in picks
    ]
    return samples


def group_mass(theta_row: np.ndarray, group_map: TopicGroupMap) -> np.ndarray:
    """Sum topic proportions into group proportions; conserves total mass."""
    theta = np.asarray(theta_row, dtype=np.float64)
    group_map.validate_total(theta.shape[-1])
    out = np.zeros(len(group_map.groups))
    assign = np.array([group_map.assignment[k] for k in range(theta.shape[-1])])
    np.add.at(out, assign, theta)
    return out


def save_model(model: LdaModel, directory: str | Path) -> None:
    """Persist a model as binary matrices plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "topic_word.slmx", model.topic_word)
    write_matrix(directory / "doc_topic.slmx", model.doc_topic)
    write_matrix(directory / "topic_word_concentration.slmx", model.topic_word_concentration)
    model.vocabulary.to_csv(directory / "vocabulary.csv")
    manifest = {
        "config": model.config.to_dict(),
        "method": model.method.value,
        "elbo_trace": list(model.elbo_trace),
        "topic_names": {str(k): v for k, v in model.topic_names.items()},
        "group_map": model.effective_group_map().to_dict(),
        "vocabulary_sha256": model.vocabulary.sha256(),
        "vocabulary_n_docs": model.vocabulary.n_docs,
    }
    with open(directory / "model.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(directory: str | Path) -> LdaModel:
    directory = Path(directory)
    with open(directory / "model.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    vocab = Vocabulary.from_csv(
        directory / "vocabulary.csv", n_docs=int(manifest["vocabulary_n_docs"])
    )
    if vocab.sha256() != manifest["vocabulary_sha256"]:
        raise IntegrityError(f"{directory}: vocabulary hash mismatch")
    return LdaModel(
        config=LdaConfig.from_dict(manifest["config"]),
        vocabulary=vocab,
        topic_word=read_matrix(directory / "topic_word.slmx"),
        doc_topic=read_matrix(directory / "doc_topic.slmx"),
        topic_word_concentration=read_matrix(directory / "topic_word_concentration.slmx"),
        elbo_trace=tuple(manifest["elbo_trace"]),
        method=InferenceMethod(manifest["method"]),
        topic_names={int(k): v for k, v in manifest["topic_names"].items()},
        group_map=TopicGroupMap.from_dict(manifest["group_map"]),
    )


class TopicModel(BaseEstimator, TransformerMixin):
    """Estimator facade over the LDA fits.

    ``fit`` takes a DocTermMatrix; ``transform`` infers topic proportions
    per row against the fitted topic-word state.
    """

    def __init__(
        self,
        n_topics: int = 10,
        alpha: float | None = None,
        eta: float | None = None,
        max_iters: int = 200,
        elbo_rel_tol: float = 1e-5,
        seed: int = 0,
        method: str = "VariationalBayes",
    ):
        self.n_topics = n_topics
        self.alpha = alpha
        self.eta = eta
        self.max_iters = max_iters
        self.elbo_rel_tol = elbo_rel_tol
        self.seed = seed
        self.method = method

    def _make_config(self) -> LdaConfig:
        return LdaConfig(
            n_topics=self.n_topics,
            alpha=self.alpha,
            eta=self.eta,
            max_iters=self.max_iters,
            elbo_rel_tol=self.elbo_rel_tol,
            seed=self.seed,
        )

    def fit(self, X: DocTermMatrix, y=None) -> "TopicModel":
        method = InferenceMethod(self.method)
        config = self._make_config()
        if method is InferenceMethod.VARIATIONAL_BAYES:
            self.model_ = fit_vb(X, config)
        else:
            self.model_ = fit_gibbs(X, config)
        return self

    def transform(self, X: DocTermMatrix) -> np.ndarray:
        check_fitted(self, "model_")
        dense = _densify(X.matrix if isinstance(X, DocTermMatrix) else X)
        return np.vstack([infer_theta(self.model_, dense[i]) for i in range(dense.shape[0])])

    @property
    def components_(self) -> np.ndarray:
        check_fitted(self, "model_")
        return self.model_.topic_word
