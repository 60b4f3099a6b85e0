"""Stage orchestration: each CLI command body lives here as a function.

Every mutating stage publishes a new snapshot that carries forward the
parent artifacts still valid after the stage, so the latest snapshot is
always the complete current state of the run.

Artifact names inside a snapshot:

    config.json                 effective configuration of the stage
    corpus/clean.jsonl          cleaned posts (all groups)
    corpus/ingest_report.json   ingest drop tallies
    corpus/imputed.jsonl        posts after flair imputation
    corpus/subset.jsonl         mental-health-support analysis subset
    features/vocabulary.csv     curated vocabulary (+ meta.json for idf N)
    features/doc_ids.json       post ids aligned with matrix rows
    features/tfidf.slmx         TF-IDF matrix over the analysis posts
    lda/…                       topic model directory
    classifier/…                flair classifier directory
    annotations/lexicon.csv     wide 0/1 lexicon annotations
    trends/…                    trend series, external join, correlations
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus as corpusmod
from . import flairclf, lexicon as lexiconmod, trends as trendsmod
from .config import PipelineConfig, dump_effective_config
from .corpus import CleanPost, FlairGroup, FlairSource
from .errors import MissingArtifactError
from .snapshots import Snapshot, SnapshotStore
from .textprep import TfidfFeaturizer
from .topicmodel import (
    InferenceMethod,
    LdaModel,
    TopicGroupMap,
    fit_gibbs,
    fit_vb,
    load_model,
    save_model,
    select_review_samples,
    top_terms,
)
from .trends import ExternalSeries, TrendSeries, TrendSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageResult:
    summary: dict
    snapshot_id: int | None = None


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_config(stage_dir: Path, cfg: PipelineConfig) -> None:
    (stage_dir / "config.json").write_text(dump_effective_config(cfg), encoding="utf-8")


# ---------------------------------------------------------------- loading

def load_posts(snap: Snapshot, name: str, hint: str) -> list[CleanPost]:
    return corpusmod.read_clean_jsonl(snap.file_path(name, hint))


def active_corpus(snap: Snapshot) -> list[CleanPost]:
    """The full cleaned corpus, with imputed labels when available."""
    if snap.has("corpus/imputed.jsonl"):
        return load_posts(snap, "corpus/imputed.jsonl", "")
    return load_posts(snap, "corpus/clean.jsonl", "run 'ingest' first")


def analysis_posts(snap: Snapshot) -> tuple[list[CleanPost], str]:
    """Posts the topic analysis runs on, and which artifact supplied them.

    The support subset wins once it exists; before that, everything
    cleaned except Other-group posts.
    """
    if snap.has("corpus/subset.jsonl"):
        return load_posts(snap, "corpus/subset.jsonl", ""), "corpus/subset.jsonl"
    posts = corpusmod.exclude_other(active_corpus(snap))
    source = "corpus/imputed.jsonl" if snap.has("corpus/imputed.jsonl") else "corpus/clean.jsonl"
    return posts, source


def load_lda(snap: Snapshot) -> LdaModel:
    return load_model(snap.dir_path("lda", "run 'train' first"))


def load_doc_ids(snap: Snapshot) -> list[str]:
    return json.loads(snap.read_bytes("features/doc_ids.json", "run 'train' first"))


def load_trend_series(snap: Snapshot, name: str, hint: str) -> TrendSeries:
    data = json.loads(snap.read_bytes(name, hint))
    return TrendSeries(
        source=TrendSource(data["source"]),
        months=tuple(data["months"]),
        labels=tuple(data["labels"]),
        values=np.array(data["values"], dtype=np.float64).reshape(
            len(data["months"]), len(data["labels"])
        ),
    )


def load_external(snap: Snapshot) -> ExternalSeries | None:
    if not snap.has("trends/external.json"):
        return None
    data = json.loads(snap.read_bytes("trends/external.json"))
    return ExternalSeries(
        months=tuple(data["months"]),
        total_cases=tuple(data["total_cases"]),
        new_cases=tuple(data["new_cases"]),
        people_vaccinated=tuple(data["people_vaccinated"]),
        carried_forward_months=tuple(data["carried_forward_months"]),
    )


def _series_payload(series: TrendSeries) -> dict:
    return {
        "source": series.source.value,
        "months": list(series.months),
        "labels": list(series.labels),
        "values": [[float(v) for v in row] for row in series.values],
    }


# ---------------------------------------------------------------- stages

def run_ingest(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    if not cfg.corpus_path:
        raise MissingArtifactError("corpus_path", "set [corpus] corpus_path")
    if not Path(cfg.corpus_path).exists():
        raise MissingArtifactError(cfg.corpus_path, "corpus file not found")
    raw, report = corpusmod.load_corpus(cfg.corpus_path)
    cleaned = corpusmod.clean(raw)
    counts = corpusmod.counts_by_group(cleaned)

    def populate(stage_dir: Path) -> None:
        _write_config(stage_dir, cfg)
        (stage_dir / "corpus").mkdir()
        corpusmod.write_clean_jsonl(cleaned, stage_dir / "corpus/clean.jsonl")
        _write_json(stage_dir / "corpus/ingest_report.json", {
            "total_records": report.total,
            "malformed": report.malformed,
            "duplicates": report.duplicates,
            "cleaned": len(cleaned),
            "placeholder_or_empty": report.parsed - len(cleaned),
            "by_group": {g.value: n for g, n in counts.items()},
        })

    latest = store.latest_id()
    parent = store.open(latest) if latest is not None else None
    snap = store.write(populate, cfg.config_hash(), parent=parent)
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "ingest",
            "snapshot": snap.snapshot_id,
            "records": report.total,
            "malformed": report.malformed,
            "duplicates": report.duplicates,
            "cleaned": len(cleaned),
            "unlabelled": counts[FlairGroup.UNLABELLED],
            "other": counts[FlairGroup.OTHER],
        },
    )


def _fit_analysis_model(
    posts: list[CleanPost],
    cfg: PipelineConfig,
    include_tokens: tuple[str, ...] | None = None,
    exclude_tokens: tuple[str, ...] | None = None,
    topic_names: dict[int, str] | None = None,
    group_map: TopicGroupMap | None = None,
) -> tuple[TfidfFeaturizer, "np.ndarray", LdaModel]:
    feature_config = cfg.feature_config(include_tokens, exclude_tokens)
    featurizer = TfidfFeaturizer(
        max_features=feature_config.max_features,
        ngram_range=feature_config.ngram_range,
        min_df=feature_config.min_df,
        stopwords=feature_config.stopwords,
        include_tokens=feature_config.include_tokens,
        exclude_tokens=feature_config.exclude_tokens,
    )
    texts = [p.text for p in posts]
    featurizer.fit(texts)
    method = InferenceMethod(cfg.lda_method)
    if method is InferenceMethod.VARIATIONAL_BAYES:
        matrix = featurizer.transform(texts)
        model = fit_vb(matrix, cfg.lda_config())
    else:
        matrix = featurizer.count_transform(texts)
        model = fit_gibbs(matrix, cfg.lda_config())
    if topic_names or group_map:
        model = model.with_annotations(topic_names=topic_names, group_map=group_map)
    return featurizer, matrix, model


def _write_train_artifacts(
    stage_dir: Path,
    cfg: PipelineConfig,
    posts: list[CleanPost],
    featurizer: TfidfFeaturizer,
    matrix,
    model: LdaModel,
) -> None:
    from .matrixio import write_matrix

    _write_config(stage_dir, cfg)
    (stage_dir / "features").mkdir(parents=True, exist_ok=True)
    featurizer.vocabulary_.to_csv(stage_dir / "features/vocabulary.csv")
    _write_json(stage_dir / "features/meta.json", {
        "n_docs": featurizer.vocabulary_.n_docs,
        "weighting": matrix.weighting.value,
        "include_tokens": list(featurizer.config_.include_tokens),
        "exclude_tokens": sorted(featurizer.config_.exclude_tokens),
    })
    _write_json(stage_dir / "features/doc_ids.json", [p.id for p in posts])
    write_matrix(stage_dir / "features/tfidf.slmx", matrix.toarray())
    save_model(model, stage_dir / "lda")


def run_train(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    parent = store.open()
    posts, source = analysis_posts(parent)
    if not posts:
        raise MissingArtifactError("corpus/clean.jsonl", "no analysis posts left")
    featurizer, matrix, model = _fit_analysis_model(posts, cfg)

    def populate(stage_dir: Path) -> None:
        _write_train_artifacts(stage_dir, cfg, posts, featurizer, matrix, model)

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "classifier/"),
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "train",
            "snapshot": snap.snapshot_id,
            "posts": len(posts),
            "corpus_source": source,
            "vocabulary": len(featurizer.vocabulary_),
            "topics": model.n_topics,
            "method": model.method.value,
            "iterations": len(model.elbo_trace),
            "elbo": repr(model.elbo_trace[-1]) if model.elbo_trace else "",
        },
    )


def run_impute(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    parent = store.open()
    cleaned = load_posts(parent, "corpus/clean.jsonl", "run 'ingest' first")
    modeled = corpusmod.exclude_other(cleaned)
    if not modeled:
        raise MissingArtifactError("corpus/clean.jsonl", "no posts to featurize")

    # The classifier gets its own fixed-width featurization over the full
    # modeled corpus, independent of the curated analysis features.
    clf_cfg = PipelineConfig({
        **cfg.raw_items(),
        ("features", "max_features"): str(cfg.classifier_tfidf_features),
        ("features", "include_tokens"): "",
        ("features", "exclude_tokens"): "",
        ("lda", "n_topics"): str(cfg.classifier_lda_topics),
        ("lda", "method"): InferenceMethod.VARIATIONAL_BAYES.value,
    })
    _, matrix, feat_model = _fit_analysis_model(modeled, clf_cfg)
    features = flairclf.assemble_features(
        modeled, feat_model, matrix,
        lda_width=cfg.classifier_lda_topics,
        tfidf_width=cfg.classifier_tfidf_features,
    )

    labelled_idx = [i for i, p in enumerate(modeled) if p.flair_source is FlairSource.LABELLED]
    unlabelled_idx = [i for i, p in enumerate(modeled) if p.flair_source is FlairSource.UNLABELLED]
    if not labelled_idx:
        raise MissingArtifactError("corpus/clean.jsonl", "no labelled posts to train on")
    clf = flairclf.train(
        features[labelled_idx],
        [modeled[i].flair_group for i in labelled_idx],
        cfg.train_config(),
    )
    before = corpusmod.counts_by_group(modeled)
    imputed_modeled = flairclf.impute_flairs(modeled, clf, features)
    by_id = {p.id: p for p in imputed_modeled}
    imputed = [by_id.get(p.id, p) for p in cleaned]
    after = corpusmod.counts_by_group(corpusmod.exclude_other(imputed))

    def populate(stage_dir: Path) -> None:
        _write_config(stage_dir, cfg)
        (stage_dir / "corpus").mkdir(parents=True, exist_ok=True)
        corpusmod.write_clean_jsonl(imputed, stage_dir / "corpus/imputed.jsonl")
        flairclf.save_logreg(clf, stage_dir / "classifier")
        with open(stage_dir / "classifier/class_counts.csv", "w", encoding="utf-8") as fh:
            fh.write("group,before,after\n")
            for g in flairclf.CLASS_ORDER + (FlairGroup.UNLABELLED,):
                fh.write(f"{g.value},{before[g]},{after[g]}\n")

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "features/", "lda/", "annotations/", "trends/"),
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "impute-flairs",
            "snapshot": snap.snapshot_id,
            "labelled": len(labelled_idx),
            "imputed": len(unlabelled_idx),
            "epochs": len(clf.loss_trace),
            "final_loss": repr(clf.loss_trace[-1]) if clf.loss_trace else "",
        },
    )


def run_subset(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    parent = store.open()
    posts = corpusmod.exclude_other(active_corpus(parent))
    if any(p.flair_source is FlairSource.UNLABELLED for p in posts):
        raise MissingArtifactError("corpus/imputed.jsonl", "run 'impute-flairs' first")
    subset = flairclf.select_support_subset(posts)

    def populate(stage_dir: Path) -> None:
        _write_config(stage_dir, cfg)
        (stage_dir / "corpus").mkdir(parents=True, exist_ok=True)
        corpusmod.write_clean_jsonl(subset, stage_dir / "corpus/subset.jsonl")

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "features/", "lda/", "classifier/", "annotations/", "trends/"),
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "subset",
            "snapshot": snap.snapshot_id,
            "candidates": len(posts),
            "subset": len(subset),
        },
    )


def run_lexicon_label(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    parent = store.open()
    posts, source = analysis_posts(parent)
    lex = cfg.lexicon()
    annotations = lexiconmod.annotate_corpus(posts, lex)
    matched = sum(1 for a in annotations if a.topics)

    def populate(stage_dir: Path) -> None:
        _write_config(stage_dir, cfg)
        (stage_dir / "annotations").mkdir(parents=True, exist_ok=True)
        lexiconmod.write_annotations_csv(
            annotations, lex.topic_labels, stage_dir / "annotations/lexicon.csv"
        )

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "features/", "lda/", "classifier/", "trends/"),
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "lexicon-label",
            "snapshot": snap.snapshot_id,
            "posts": len(posts),
            "corpus_source": source,
            "lexicon": lex.name,
            "matched_posts": matched,
        },
    )


def _bundle_from_parts(
    cfg: PipelineConfig,
    posts: list[CleanPost],
    theta: np.ndarray,
    effective_map: TopicGroupMap,
    annotations: list[lexiconmod.LexiconAnnotation],
    labels: tuple[str, ...],
) -> tuple[TrendSeries, TrendSeries, ExternalSeries | None, list[dict]]:
    lda_series = trendsmod.lda_monthly_sum(posts, theta, effective_map)
    lexicon_series = trendsmod.lexicon_monthly_count(posts, annotations, labels)

    external = None
    if cfg.external_csv_path:
        if not Path(cfg.external_csv_path).exists():
            raise MissingArtifactError(cfg.external_csv_path, "external CSV not found")
        external = trendsmod.load_external_csv(cfg.external_csv_path, cfg.locations)

    if cfg.correlate_on_proportions:
        corr_lda = trendsmod.monthly_proportions(lda_series)
        corr_lex = trendsmod.monthly_proportions(lexicon_series)
    else:
        corr_lda, corr_lex = lda_series, lexicon_series
    correlations = trendsmod.compare_methods(corr_lda, corr_lex)
    return lda_series, lexicon_series, external, correlations


def compute_trend_bundle(
    cfg: PipelineConfig,
    snap: Snapshot,
    group_map: TopicGroupMap | None = None,
) -> tuple[TrendSeries, TrendSeries, ExternalSeries | None, list[dict]]:
    """Recompute the monthly series for a snapshot's analysis posts.

    `group_map` overrides the model's stored mapping (used by the service
    to preview curation edits without retraining).
    """
    posts, _ = analysis_posts(snap)
    model = load_lda(snap)
    doc_ids = load_doc_ids(snap)
    id_row = {pid: i for i, pid in enumerate(doc_ids)}
    missing = [p.id for p in posts if p.id not in id_row]
    if missing:
        raise MissingArtifactError(
            "lda/doc_topic.slmx",
            f"{len(missing)} analysis posts missing from the fit; run 'train' again",
        )
    theta = np.vstack([model.doc_topic[id_row[p.id]] for p in posts])
    effective_map = group_map or model.effective_group_map()
    effective_map.validate_total(model.n_topics)

    ann_path = snap.file_path("annotations/lexicon.csv", "run 'lexicon-label' first")
    annotations, labels = lexiconmod.read_annotations_csv(ann_path)
    ann_by_id = {a.post_id: a for a in annotations}
    try:
        aligned = [ann_by_id[p.id] for p in posts]
    except KeyError as exc:
        raise MissingArtifactError(
            "annotations/lexicon.csv",
            f"post {exc.args[0]} not annotated; run 'lexicon-label' again",
        ) from None
    return _bundle_from_parts(cfg, posts, theta, effective_map, aligned, labels)


def run_trends(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    parent = store.open()
    lda_series, lexicon_series, external, correlations = compute_trend_bundle(cfg, parent)

    def populate(stage_dir: Path) -> None:
        _write_config(stage_dir, cfg)
        _write_json(stage_dir / "trends/lda.json", _series_payload(lda_series))
        _write_json(stage_dir / "trends/lexicon.json", _series_payload(lexicon_series))
        if external is not None:
            _write_json(stage_dir / "trends/external.json", {
                "months": list(external.months),
                "total_cases": list(external.total_cases),
                "new_cases": list(external.new_cases),
                "people_vaccinated": list(external.people_vaccinated),
                "carried_forward_months": list(external.carried_forward_months),
            })
        _write_json(stage_dir / "trends/correlations.json", correlations)

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "features/", "lda/", "classifier/", "annotations/"),
    )
    summary = {
        "stage": "trends",
        "snapshot": snap.snapshot_id,
        "months": len(lda_series.months),
        "first_month": lda_series.months[0],
        "last_month": lda_series.months[-1],
        "external": "yes" if external is not None else "no",
    }
    return StageResult(snapshot_id=snap.snapshot_id, summary=summary)


def run_correlate(cfg: PipelineConfig, store: SnapshotStore) -> StageResult:
    snap = store.open()
    correlations = json.loads(
        snap.read_bytes("trends/correlations.json", "run 'trends' first")
    )
    summary: dict = {"stage": "correlate", "snapshot": snap.snapshot_id,
                     "pairs": len(correlations)}
    for i, entry in enumerate(correlations):
        summary[f"pair{i}"] = f"{entry['lda_group']}|{entry['lexicon_topic']}"
        summary[f"r{i}"] = repr(entry["r"]) if "r" in entry else f"error:{entry['error']}"
    return StageResult(snapshot_id=snap.snapshot_id, summary=summary)


def run_samples(cfg: PipelineConfig, store: SnapshotStore, topic: int, seed: int) -> StageResult:
    snap = store.open()
    model = load_lda(snap)
    doc_ids = load_doc_ids(snap)
    samples = select_review_samples(model, topic, seed, doc_ids=doc_ids)
    summary: dict = {
        "stage": "samples",
        "snapshot": snap.snapshot_id,
        "topic": topic,
        "seed": seed,
        "count": len(samples),
    }
    for i, s in enumerate(samples):
        summary[f"sample{i}"] = f"{s.post_id}:{s.selection.value}:{s.theta_value:.6f}"
    return StageResult(snapshot_id=snap.snapshot_id, summary=summary)


def run_export_dashboard(
    cfg: PipelineConfig,
    store: SnapshotStore,
    out_dir: str | Path | None = None,
) -> StageResult:
    snap = store.open()
    lda_series = load_trend_series(snap, "trends/lda.json", "run 'trends' first")
    lexicon_series = load_trend_series(snap, "trends/lexicon.json", "run 'trends' first")
    external = load_external(snap)
    correlations = json.loads(
        snap.read_bytes("trends/correlations.json", "run 'trends' first")
    )
    directory = Path(out_dir) if out_dir else store.run_dir / "exports"
    out = trendsmod.export_dashboard(
        lda_series, lexicon_series, external, correlations, directory
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "export-dashboard",
            "snapshot": snap.snapshot_id,
            "dashboard": str(out),
            "months": len(lda_series.months),
        },
    )


def run_retrain(
    cfg: PipelineConfig,
    store: SnapshotStore,
    include_tokens: tuple[str, ...] | None = None,
    exclude_tokens: tuple[str, ...] | None = None,
    topic_names: dict[int, str] | None = None,
    group_map: TopicGroupMap | None = None,
) -> StageResult:
    """Refit features + topic model and refresh annotations and trends.

    One new snapshot holds the whole result, so service readers move
    between complete states. Curated token lists and analyst annotations
    are baked into the new model.
    """
    parent = store.open()
    posts, source = analysis_posts(parent)
    if group_map is not None:
        group_map.validate_total(cfg.lda_config().n_topics)
    names = {
        k: v for k, v in (topic_names or {}).items() if k < cfg.lda_config().n_topics
    }
    featurizer, matrix, model = _fit_analysis_model(
        posts, cfg,
        include_tokens=include_tokens,
        exclude_tokens=exclude_tokens,
        topic_names=names,
        group_map=group_map,
    )
    lex = cfg.lexicon()
    annotations = lexiconmod.annotate_corpus(posts, lex)
    lda_series, lexicon_series, external, correlations = _bundle_from_parts(
        cfg, posts, model.doc_topic, model.effective_group_map(),
        annotations, lex.topic_labels,
    )

    def populate(stage_dir: Path) -> None:
        _write_train_artifacts(stage_dir, cfg, posts, featurizer, matrix, model)
        (stage_dir / "annotations").mkdir(parents=True, exist_ok=True)
        lexiconmod.write_annotations_csv(
            annotations, lex.topic_labels, stage_dir / "annotations/lexicon.csv"
        )
        _write_json(stage_dir / "trends/lda.json", _series_payload(lda_series))
        _write_json(stage_dir / "trends/lexicon.json", _series_payload(lexicon_series))
        if external is not None:
            _write_json(stage_dir / "trends/external.json", {
                "months": list(external.months),
                "total_cases": list(external.total_cases),
                "new_cases": list(external.new_cases),
                "people_vaccinated": list(external.people_vaccinated),
                "carried_forward_months": list(external.carried_forward_months),
            })
        _write_json(stage_dir / "trends/correlations.json", correlations)

    snap = store.write(
        populate, cfg.config_hash(), parent=parent,
        carry=("corpus/", "classifier/"),
    )
    return StageResult(
        snapshot_id=snap.snapshot_id,
        summary={
            "stage": "retrain",
            "snapshot": snap.snapshot_id,
            "posts": len(posts),
            "corpus_source": source,
            "vocabulary": len(featurizer.vocabulary_),
            "topics": model.n_topics,
        },
    )


def topic_overview(snap: Snapshot, n_terms: int = 10) -> dict:
    """Topics with names, groups, and top terms, as the API reports them."""
    model = load_lda(snap)
    gmap = model.effective_group_map()
    topics = []
    for k in range(model.n_topics):
        g = gmap.assignment[k]
        topics.append({
            "topic": k,
            "name": model.topic_names.get(k),
            "group_index": g,
            "group": gmap.groups[g],
            "top_terms": [
                {"term": t, "probability": p} for t, p in top_terms(model, k, n_terms)
            ],
        })
    return {
        "snapshot_id": snap.snapshot_id,
        "groups": list(gmap.groups),
        "topics": topics,
    }
