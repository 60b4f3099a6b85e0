"""Topic-trend analysis of support-forum posts.

Pipeline: ingest a JSONL corpus, impute missing flairs with a multinomial
classifier, subset the support posts, fit LDA over curated TF-IDF
features, annotate with keyword lexicons, and compare the two routes as
monthly trends against external case counts.
"""

from .corpus import (
    CleanPost,
    FlairGroup,
    FlairSource,
    LoadReport,
    RawPost,
    clean,
    exclude_other,
    load_corpus,
    map_flair,
)
from .errors import (
    ConfigError,
    EmptyVocabularyError,
    IntegrityError,
    MissingArtifactError,
    NumericalError,
    StressorlensError,
)
from .flairclf import (
    CLASS_ORDER,
    FlairClassifier,
    LogRegModel,
    TrainConfig,
    assemble_features,
    impute_flairs,
    predict_proba,
    select_support_subset,
    train,
)
from .lexicon import (
    Lexicon,
    LexiconAnnotation,
    annotate_corpus,
    default_lexicon,
    load_lexicon,
    match_post,
)
from .textprep import (
    DocTermMatrix,
    FeatureConfig,
    TfidfFeaturizer,
    Vocabulary,
    Weighting,
    build_vocabulary,
    count_matrix,
    default_stopwords,
    extract_ngrams,
    has_hyperlink,
    tfidf_matrix,
    tokenize,
)
from .topicmodel import (
    InferenceMethod,
    LdaConfig,
    LdaModel,
    ReviewSample,
    SelectionKind,
    TopicGroupMap,
    TopicModel,
    dominant_topic,
    fit_gibbs,
    fit_vb,
    group_mass,
    infer_theta,
    load_model,
    save_model,
    select_review_samples,
    top_terms,
)
from .trends import (
    ExternalSeries,
    TrendSeries,
    TrendSource,
    compare_methods,
    export_dashboard,
    lda_monthly_sum,
    lexicon_monthly_count,
    load_external_csv,
    monthly_proportions,
    pearson,
)

__version__ = "0.1.0"

__all__ = [
    "CleanPost", "FlairGroup", "FlairSource", "LoadReport", "RawPost",
    "clean", "exclude_other", "load_corpus", "map_flair",
    "ConfigError", "EmptyVocabularyError", "IntegrityError",
    "MissingArtifactError", "NumericalError", "StressorlensError",
    "CLASS_ORDER", "FlairClassifier", "LogRegModel", "TrainConfig",
    "assemble_features", "impute_flairs", "predict_proba",
    "select_support_subset", "train",
    "Lexicon", "LexiconAnnotation", "annotate_corpus", "default_lexicon",
    "load_lexicon", "match_post",
    "DocTermMatrix", "FeatureConfig", "TfidfFeaturizer", "Vocabulary",
    "Weighting", "build_vocabulary", "count_matrix", "default_stopwords",
    "extract_ngrams", "has_hyperlink", "tfidf_matrix", "tokenize",
    "InferenceMethod", "LdaConfig", "LdaModel", "ReviewSample",
    "SelectionKind", "TopicGroupMap", "TopicModel", "dominant_topic",
    "fit_gibbs", "fit_vb", "group_mass", "infer_theta", "load_model",
    "save_model", "select_review_samples", "top_terms",
    "ExternalSeries", "TrendSeries", "TrendSource", "compare_methods",
    "export_dashboard", "lda_monthly_sum", "lexicon_monthly_count",
    "load_external_csv", "monthly_proportions", "pearson",
    "__version__",
]
