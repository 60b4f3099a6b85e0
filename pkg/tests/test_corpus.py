"""Corpus parsing, cleaning, and round-trip behavior."""

import json
import os
import tempfile
from datetime import datetime, timezone

from hypothesis import given, strategies as st

from stressorlens.corpus import (
    CleanPost,
    FlairGroup,
    FlairSource,
    RawPost,
    clean,
    counts_by_group,
    exclude_other,
    load_corpus,
    map_flair,
    month_key,
    read_clean_jsonl,
    relabel,
    write_clean_jsonl,
)

from conftest import make_post


def record(post_id: str, **overrides) -> dict:
    base = {
        "id": post_id,
        "created_utc": 1585699200,  # 2020-04-01 UTC
        "title": "stuck at home",
        "selftext": "classes moved online and I cannot focus",
        "link_flair_text": "Support",
    }
    base.update(overrides)
    return base


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


class TestMapFlair:
    def test_known_raw_flairs_map_to_groups(self):
        assert map_flair("Support") is FlairGroup.MENTAL_HEALTH_SUPPORT
        assert map_flair("Trigger Warning") is FlairGroup.MENTAL_HEALTH_SUPPORT
        assert map_flair("Discussion") is FlairGroup.DISCUSSION_QUESTIONS
        assert map_flair("Questions") is FlairGroup.DISCUSSION_QUESTIONS
        assert map_flair("News") is FlairGroup.NEWS_RESOURCES
        assert map_flair("Good News") is FlairGroup.NEWS_RESOURCES
        assert map_flair("Resources") is FlairGroup.NEWS_RESOURCES
        assert map_flair("Firsthand Account") is FlairGroup.EXPERIENCE
        assert map_flair("Biosafety Request") is FlairGroup.EXPERIENCE

    def test_moderation_flairs_map_to_other(self):
        assert map_flair("The answer is NO") is FlairGroup.OTHER
        assert map_flair("Misinformation-Debunked") is FlairGroup.OTHER
        assert map_flair("Misinformation Debunked") is FlairGroup.OTHER

    def test_missing_or_unknown_flair_is_unlabelled(self):
        assert map_flair(None) is FlairGroup.UNLABELLED
        assert map_flair("") is FlairGroup.UNLABELLED
        assert map_flair("Daily Megathread") is FlairGroup.UNLABELLED

    def test_mapping_ignores_case_and_padding(self):
        assert map_flair("  support ") is FlairGroup.MENTAL_HEALTH_SUPPORT
        assert map_flair("NEWS") is FlairGroup.NEWS_RESOURCES
        assert map_flair("good   news") is FlairGroup.NEWS_RESOURCES


class TestLoadCorpus:
    def test_parses_well_formed_records(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record("t3_a"), record("t3_b")])
        posts, report = load_corpus(path)
        assert [p.id for p in posts] == ["t3_a", "t3_b"]
        assert report.parsed == 2
        assert report.malformed == 0
        assert report.total == 2

    def test_drops_malformed_lines_and_counts_them(self, tmp_path):
        path = tmp_path / "c.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record("t3_a")) + "\n")
            fh.write("{not json\n")
            fh.write(json.dumps({"id": "t3_b"}) + "\n")  # missing created_utc
            fh.write(json.dumps(record("t3_c")) + "\n")
        posts, report = load_corpus(path)
        assert [p.id for p in posts] == ["t3_a", "t3_c"]
        assert report.malformed == 2
        assert report.total == 4

    def test_first_record_wins_on_duplicate_id(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(
            path,
            [record("t3_a", title="first"), record("t3_a", title="second")],
        )
        posts, report = load_corpus(path)
        assert len(posts) == 1
        assert posts[0].title == "first"
        assert report.duplicates == 1

    def test_blank_lines_are_skipped_silently(self, tmp_path):
        path = tmp_path / "c.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record("t3_a")) + "\n\n\n")
        posts, report = load_corpus(path)
        assert len(posts) == 1
        assert report.malformed == 0

    def test_fractional_timestamps_are_accepted_when_integral(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record("t3_a", created_utc=1585699200.0)])
        posts, _ = load_corpus(path)
        assert posts[0].created_utc == 1585699200

    def test_bundled_fixture_loads(self, corpus_jsonl):
        posts, report = load_corpus(corpus_jsonl)
        assert report.malformed == 2
        assert report.duplicates == 1
        assert len(posts) == report.parsed


class TestClean:
    def raw(self, post_id="t3_x", title="ok title", body="some body", flair="Support"):
        return RawPost(
            id=post_id,
            created_utc=1585699200,
            title=title,
            body=body,
            flair=flair,
        )

    def test_joins_title_and_body(self):
        out = clean([self.raw(title="hello", body="world")])
        assert out[0].text == "hello world"

    def test_empty_body_leaves_no_trailing_space(self):
        out = clean([self.raw(title="hello", body="")])
        assert out[0].text == "hello"

    def test_placeholder_title_or_body_drops_the_post(self):
        assert clean([self.raw(title="[deleted]")]) == []
        assert clean([self.raw(body="[removed]")]) == []
        assert clean([self.raw(body=" [deleted] ")]) == []

    def test_empty_text_posts_are_dropped(self):
        assert clean([self.raw(title="   ", body="")]) == []

    def test_month_and_flair_metadata(self):
        post = clean([self.raw()])[0]
        assert post.month == "2020-04"
        assert post.timestamp == datetime(2020, 4, 1, tzinfo=timezone.utc)
        assert post.flair_group is FlairGroup.MENTAL_HEALTH_SUPPORT
        assert post.flair_source is FlairSource.LABELLED

    def test_missing_flair_is_unlabelled_source(self):
        post = clean([self.raw(flair=None)])[0]
        assert post.flair_group is FlairGroup.UNLABELLED
        assert post.flair_source is FlairSource.UNLABELLED

    def test_unknown_flair_is_unlabelled_source(self):
        post = clean([self.raw(flair="Daily Chat")])[0]
        assert post.flair_group is FlairGroup.UNLABELLED
        assert post.flair_source is FlairSource.UNLABELLED


class TestHelpers:
    def test_month_key_uses_utc(self):
        ts = datetime(2020, 12, 31, 23, 30, tzinfo=timezone.utc)
        assert month_key(ts) == "2020-12"

    def test_exclude_other_keeps_everything_else(self):
        posts = [
            make_post("a", group=FlairGroup.OTHER),
            make_post("b", group=FlairGroup.UNLABELLED),
            make_post("c", group=FlairGroup.NEWS_RESOURCES),
        ]
        kept = exclude_other(posts)
        assert [p.id for p in kept] == ["b", "c"]

    def test_counts_by_group_covers_all_groups(self):
        posts = [
            make_post("a", group=FlairGroup.EXPERIENCE),
            make_post("b", group=FlairGroup.EXPERIENCE),
            make_post("c", group=FlairGroup.OTHER),
        ]
        counts = counts_by_group(posts)
        assert counts[FlairGroup.EXPERIENCE] == 2
        assert counts[FlairGroup.OTHER] == 1
        assert counts[FlairGroup.NEWS_RESOURCES] == 0

    def test_relabel_changes_only_flair_fields(self):
        post = make_post("a", group=FlairGroup.UNLABELLED, source=FlairSource.UNLABELLED)
        out = relabel(post, FlairGroup.EXPERIENCE, FlairSource.PREDICTED)
        assert out.flair_group is FlairGroup.EXPERIENCE
        assert out.flair_source is FlairSource.PREDICTED
        assert out.id == post.id and out.text == post.text
        assert post.flair_group is FlairGroup.UNLABELLED


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=2019, max_value=2022),
            st.integers(min_value=1, max_value=12),
            st.text(max_size=40),
            st.sampled_from(list(FlairGroup)),
            st.sampled_from(list(FlairSource)),
        ),
        max_size=8,
    )
)
def test_clean_jsonl_round_trip(entries):
    posts = []
    for i, (year, month, text, group, source) in enumerate(entries):
        stamp = datetime(year, month, 3, 12, tzinfo=timezone.utc)
        posts.append(
            CleanPost(
                id=f"t3_{i}",
                timestamp=stamp,
                month=month_key(stamp),
                text=text,
                flair_group=group,
                flair_source=source,
            )
        )
    fd, path = tempfile.mkstemp(suffix=".jsonl")
    os.close(fd)
    try:
        write_clean_jsonl(posts, path)
        back = read_clean_jsonl(path)
    finally:
        os.unlink(path)
    assert back == posts
