"""Layered pipeline configuration: defaults < INI file < env < CLI flags.

Every key lives in a fixed section and is addressable three ways: in the
INI file, as STRESSORLENS_<SECTION>_<KEY> in the environment, and as a CLI
flag. The flag name is the key (dashes for underscores), prefixed with its
section only when two sections share the key name (both [lda] and
[classifier] have a seed).
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .lexicon import Lexicon, default_lexicon, load_lexicon
from .textprep import FeatureConfig, default_stopwords, load_stopwords
from .topicmodel import LdaConfig
from .flairclf import TrainConfig


@dataclass(frozen=True)
class OptionSpec:
    section: str
    key: str
    default: str
    kind: str  # int | float | str | bool | tokens | optional_float
    help: str

    @property
    def flag(self) -> str:
        name = self.key if _KEY_COUNTS[self.key] == 1 else f"{self.section}_{self.key}"
        return "--" + name.replace("_", "-")

    @property
    def env_var(self) -> str:
        return f"STRESSORLENS_{self.section.upper()}_{self.key.upper()}"


_SPECS = [
    OptionSpec("corpus", "corpus_path", "", "str", "raw JSONL corpus to ingest"),
    OptionSpec("corpus", "stopwords_path", "", "str", "stopword list; empty = bundled"),
    OptionSpec("features", "max_features", "300", "int", "vocabulary size cap"),
    OptionSpec("features", "ngram_min", "1", "int", "shortest n-gram"),
    OptionSpec("features", "ngram_max", "2", "int", "longest n-gram"),
    OptionSpec("features", "min_df", "2", "int", "minimum document frequency"),
    OptionSpec("features", "include_tokens", "", "tokens", "comma-separated forced tokens"),
    OptionSpec("features", "exclude_tokens", "", "tokens", "comma-separated banned tokens"),
    OptionSpec("lda", "n_topics", "10", "int", "number of topics"),
    OptionSpec("lda", "alpha", "", "optional_float", "doc-topic prior; empty = 1/K"),
    OptionSpec("lda", "eta", "", "optional_float", "topic-word prior; empty = 1/K"),
    OptionSpec("lda", "max_iters", "200", "int", "outer iteration cap"),
    OptionSpec("lda", "elbo_rel_tol", "1e-5", "float", "relative bound change to stop"),
    OptionSpec("lda", "seed", "0", "int", "topic model seed"),
    OptionSpec("lda", "method", "VariationalBayes", "str",
               "VariationalBayes or CollapsedGibbs"),
    OptionSpec("classifier", "learning_rate", "0.1", "float", "gradient step size"),
    OptionSpec("classifier", "l2_lambda", "1.0", "float", "L2 strength"),
    OptionSpec("classifier", "max_epochs", "500", "int", "epoch cap"),
    OptionSpec("classifier", "tol", "1e-6", "float", "gradient max-norm stop"),
    OptionSpec("classifier", "seed", "0", "int", "classifier seed"),
    OptionSpec("classifier", "lda_topics", "10", "int", "topic-feature width"),
    OptionSpec("classifier", "tfidf_features", "200", "int", "TF-IDF feature width"),
    OptionSpec("lexicon", "lexicon_path", "", "str", "lexicon JSON; empty = bundled"),
    OptionSpec("trends", "external_csv_path", "", "str", "case/vaccination CSV"),
    OptionSpec("trends", "locations", "United States,United Kingdom,Canada", "tokens",
               "locations summed in the external series"),
    OptionSpec("trends", "correlate_on_proportions", "false", "bool",
               "correlate monthly proportions instead of raw sums"),
    OptionSpec("service", "run_dir", "run", "str", "artifact directory"),
    OptionSpec("service", "host", "127.0.0.1", "str", "bind address"),
    OptionSpec("service", "port", "8000", "int", "bind port"),
]
_KEY_COUNTS = Counter(spec.key for spec in _SPECS)
OPTION_SPECS: tuple[OptionSpec, ...] = tuple(_SPECS)
_BY_ADDRESS = {(s.section, s.key): s for s in _SPECS}

SECTIONS = ("corpus", "features", "lda", "classifier", "lexicon", "trends", "service")


def _parse_value(spec: OptionSpec, raw: str):
    raw = raw.strip()
    try:
        if spec.kind == "int":
            return int(raw)
        if spec.kind == "float":
            return float(raw)
        if spec.kind == "optional_float":
            return float(raw) if raw else None
        if spec.kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if spec.kind == "tokens":
            return tuple(t.strip() for t in raw.split(",") if t.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"[{spec.section}] {spec.key}: {exc}") from exc


class PipelineConfig:
    """Effective configuration with typed accessors for each module."""

    def __init__(self, raw: Mapping[tuple[str, str], str]):
        self._raw = dict(raw)
        self._values = {
            (s.section, s.key): _parse_value(s, self._raw[(s.section, s.key)])
            for s in OPTION_SPECS
        }

    def get(self, section: str, key: str):
        try:
            return self._values[(section, key)]
        except KeyError:
            raise ConfigError(f"unknown config key [{section}] {key}") from None

    def raw_items(self) -> dict[tuple[str, str], str]:
        return dict(self._raw)

    def config_hash(self) -> str:
        h = hashlib.sha256()
        for (section, key), value in sorted(self._raw.items()):
            h.update(f"{section}.{key}={value}\n".encode("utf-8"))
        return h.hexdigest()

    def to_json_dict(self) -> dict:
        return {
            section: {
                s.key: self._raw[(s.section, s.key)]
                for s in OPTION_SPECS
                if s.section == section
            }
            for section in SECTIONS
        }

    # typed views

    @property
    def corpus_path(self) -> str:
        return self.get("corpus", "corpus_path")

    @property
    def run_dir(self) -> Path:
        return Path(self.get("service", "run_dir"))

    @property
    def host(self) -> str:
        return self.get("service", "host")

    @property
    def port(self) -> int:
        return self.get("service", "port")

    @property
    def external_csv_path(self) -> str:
        return self.get("trends", "external_csv_path")

    @property
    def locations(self) -> tuple[str, ...]:
        return self.get("trends", "locations")

    @property
    def correlate_on_proportions(self) -> bool:
        return self.get("trends", "correlate_on_proportions")

    def stopwords(self) -> frozenset[str]:
        path = self.get("corpus", "stopwords_path")
        return load_stopwords(path) if path else default_stopwords()

    def lexicon(self) -> Lexicon:
        path = self.get("lexicon", "lexicon_path")
        return load_lexicon(path) if path else default_lexicon()

    def feature_config(
        self,
        include_tokens: tuple[str, ...] | None = None,
        exclude_tokens: tuple[str, ...] | None = None,
    ) -> FeatureConfig:
        """Feature knobs, optionally with curated token lists swapped in."""
        include = include_tokens if include_tokens is not None \
            else self.get("features", "include_tokens")
        exclude = exclude_tokens if exclude_tokens is not None \
            else self.get("features", "exclude_tokens")
        return FeatureConfig(
            max_features=self.get("features", "max_features"),
            ngram_range=(self.get("features", "ngram_min"), self.get("features", "ngram_max")),
            min_df=self.get("features", "min_df"),
            stopwords=self.stopwords(),
            include_tokens=tuple(include),
            exclude_tokens=frozenset(exclude),
        )

    def lda_config(self) -> LdaConfig:
        return LdaConfig(
            n_topics=self.get("lda", "n_topics"),
            alpha=self.get("lda", "alpha"),
            eta=self.get("lda", "eta"),
            max_iters=self.get("lda", "max_iters"),
            elbo_rel_tol=self.get("lda", "elbo_rel_tol"),
            seed=self.get("lda", "seed"),
        )

    @property
    def lda_method(self) -> str:
        return self.get("lda", "method")

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.get("classifier", "learning_rate"),
            l2_lambda=self.get("classifier", "l2_lambda"),
            max_epochs=self.get("classifier", "max_epochs"),
            tol=self.get("classifier", "tol"),
            seed=self.get("classifier", "seed"),
        )

    @property
    def classifier_lda_topics(self) -> int:
        return self.get("classifier", "lda_topics")

    @property
    def classifier_tfidf_features(self) -> int:
        return self.get("classifier", "tfidf_features")


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[tuple[str, str], str] | None = None,
) -> PipelineConfig:
    """Merge the four layers into one effective configuration.

    Unknown sections or keys in the INI file are errors, not typos to
    silently ignore.
    """
    raw = {(s.section, s.key): s.default for s in OPTION_SPECS}

    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        read = parser.read(path, encoding="utf-8")
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if (section, key) not in _BY_ADDRESS:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                raw[(section, key)] = value

    env = os.environ if env is None else env
    for spec in OPTION_SPECS:
        if spec.env_var in env:
            raw[(spec.section, spec.key)] = env[spec.env_var]

    for address, value in (overrides or {}).items():
        if address not in _BY_ADDRESS:
            raise ConfigError(f"unknown config key [{address[0]}] {address[1]}")
        raw[address] = value

    cfg = PipelineConfig(raw)
    cfg.feature_config()  # surface invariant violations eagerly
    cfg.lda_config()
    cfg.train_config()
    return cfg


def write_example_config(path: str | Path) -> None:
    lines = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for spec in OPTION_SPECS:
            if spec.section == section:
                lines.append(f"; {spec.help}")
                lines.append(f"{spec.key} = {spec.default}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def dump_effective_config(cfg: PipelineConfig) -> str:
    return json.dumps(cfg.to_json_dict(), indent=2, sort_keys=True) + "\n"
