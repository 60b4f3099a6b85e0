"""Layered configuration: defaults, INI file, environment, explicit overrides."""

import pytest

from stressorlens.config import (
    OPTION_SPECS,
    PipelineConfig,
    dump_effective_config,
    load_config,
    write_example_config,
)
from stressorlens.errors import ConfigError


class TestDefaults:
    def test_loads_with_no_sources(self):
        cfg = load_config(env={})
        assert cfg.get("lda", "n_topics") == 10
        assert cfg.get("features", "min_df") == 2
        assert cfg.get("lda", "alpha") is None
        assert cfg.locations == ("United States", "United Kingdom", "Canada")
        assert cfg.correlate_on_proportions is False

    def test_typed_views_match_raw_values(self):
        cfg = load_config(env={})
        assert cfg.lda_config().n_topics == 10
        assert cfg.train_config().max_epochs == 500
        fc = cfg.feature_config()
        assert fc.max_features == 300
        assert fc.ngram_range == (1, 2)
        assert cfg.port == 8000


class TestPrecedence:
    def test_ini_beats_default(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[lda]\nn_topics = 7\n")
        cfg = load_config(ini, env={})
        assert cfg.get("lda", "n_topics") == 7

    def test_env_beats_ini(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[lda]\nn_topics = 7\n")
        cfg = load_config(ini, env={"STRESSORLENS_LDA_N_TOPICS": "9"})
        assert cfg.get("lda", "n_topics") == 9

    def test_override_beats_env(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[lda]\nn_topics = 7\n")
        cfg = load_config(
            ini,
            env={"STRESSORLENS_LDA_N_TOPICS": "9"},
            overrides={("lda", "n_topics"): "11"},
        )
        assert cfg.get("lda", "n_topics") == 11

    def test_layers_merge_per_key(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[features]\nmin_df = 3\nmax_features = 150\n")
        cfg = load_config(
            ini,
            env={"STRESSORLENS_FEATURES_MAX_FEATURES": "99"},
            overrides={("lda", "seed"): "42"},
        )
        assert cfg.get("features", "min_df") == 3  # from file
        assert cfg.get("features", "max_features") == 99  # env wins
        assert cfg.get("lda", "seed") == 42  # override
        assert cfg.get("classifier", "seed") == 0  # untouched default


class TestSeedFlagsStayDistinct:
    """Both [lda] and [classifier] define a seed, so flags carry a prefix."""

    def test_shared_key_names_get_section_prefixes(self):
        flags = {s.flag for s in OPTION_SPECS if s.key == "seed"}
        assert flags == {"--lda-seed", "--classifier-seed"}

    def test_unique_keys_stay_bare(self):
        by_key = {s.key: s.flag for s in OPTION_SPECS}
        assert by_key["n_topics"] == "--n-topics"
        assert by_key["learning_rate"] == "--learning-rate"

    def test_env_vars_are_always_fully_qualified(self):
        envs = {s.env_var for s in OPTION_SPECS if s.key == "seed"}
        assert envs == {"STRESSORLENS_LDA_SEED", "STRESSORLENS_CLASSIFIER_SEED"}

    def test_seeds_configure_independently(self):
        cfg = load_config(
            env={
                "STRESSORLENS_LDA_SEED": "5",
                "STRESSORLENS_CLASSIFIER_SEED": "6",
            }
        )
        assert cfg.lda_config().seed == 5
        assert cfg.train_config().seed == 6


class TestRejection:
    def test_unknown_section(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[volcano]\nheight = 3\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            load_config(ini, env={})

    def test_unknown_key(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text("[lda]\nn_topic = 3\n")
        with pytest.raises(ConfigError, match="unknown config key"):
            load_config(ini, env={})

    def test_unknown_override_address(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            load_config(env={}, overrides={("lda", "bogus"): "1"})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.ini", env={})

    def test_unparseable_int_names_the_key(self):
        with pytest.raises(ConfigError, match=r"\[lda\] n_topics"):
            load_config(env={"STRESSORLENS_LDA_N_TOPICS": "many"})

    def test_unparseable_bool(self):
        with pytest.raises(ConfigError, match="boolean"):
            load_config(env={"STRESSORLENS_TRENDS_CORRELATE_ON_PROPORTIONS": "maybe"})

    def test_invariant_violations_surface_at_load_time(self):
        # ngram_min > ngram_max is invalid in FeatureConfig; load_config
        # builds the typed views eagerly so this fails here, not later
        with pytest.raises(Exception):
            load_config(
                env={
                    "STRESSORLENS_FEATURES_NGRAM_MIN": "3",
                    "STRESSORLENS_FEATURES_NGRAM_MAX": "1",
                }
            )

    def test_get_unknown_address(self):
        cfg = load_config(env={})
        with pytest.raises(ConfigError):
            cfg.get("lda", "bogus")


class TestParsing:
    def test_token_lists_strip_and_drop_empties(self):
        cfg = load_config(
            env={"STRESSORLENS_FEATURES_INCLUDE_TOKENS": " alpha , ,beta,"}
        )
        assert cfg.get("features", "include_tokens") == ("alpha", "beta")

    def test_optional_float_empty_means_none(self):
        cfg = load_config(env={"STRESSORLENS_LDA_ALPHA": ""})
        assert cfg.get("lda", "alpha") is None

    def test_optional_float_value(self):
        cfg = load_config(env={"STRESSORLENS_LDA_ALPHA": "0.25"})
        assert cfg.get("lda", "alpha") == 0.25

    @pytest.mark.parametrize("raw,expected", [
        ("true", True), ("1", True), ("YES", True), ("on", True),
        ("false", False), ("0", False), ("No", False), ("off", False),
    ])
    def test_bool_spellings(self, raw, expected):
        cfg = load_config(
            env={"STRESSORLENS_TRENDS_CORRELATE_ON_PROPORTIONS": raw}
        )
        assert cfg.correlate_on_proportions is expected


class TestHashAndDump:
    def test_hash_is_stable_and_value_sensitive(self):
        a = load_config(env={})
        b = load_config(env={})
        c = load_config(env={"STRESSORLENS_LDA_SEED": "1"})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()

    def test_dump_covers_every_section(self):
        text = dump_effective_config(load_config(env={}))
        for section in ("corpus", "features", "lda", "classifier",
                        "lexicon", "trends", "service"):
            assert f'"{section}"' in text

    def test_roundtrip_through_raw_items(self):
        cfg = load_config(env={"STRESSORLENS_LDA_SEED": "17"})
        again = PipelineConfig(cfg.raw_items())
        assert again.config_hash() == cfg.config_hash()
        assert again.lda_config().seed == 17


class TestExampleConfig:
    def test_written_file_loads_back_to_defaults(self, tmp_path):
        path = tmp_path / "example.ini"
        write_example_config(path)
        cfg = load_config(path, env={})
        assert cfg.config_hash() == load_config(env={}).config_hash()

    def test_every_option_appears_with_help_text(self, tmp_path):
        path = tmp_path / "example.ini"
        write_example_config(path)
        text = path.read_text()
        for spec in OPTION_SPECS:
            assert f"{spec.key} = " in text
            assert spec.help in text
