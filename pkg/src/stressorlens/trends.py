"""Monthly topic trends, external epidemic series, and cross-method checks.

Aggregates posts into contiguous calendar-month buckets (UTC), joins them
against country-level case/vaccination counts, and correlates the model
route with the lexicon route over matching months.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import CleanPost
from .lexicon import LexiconAnnotation
from .topicmodel import TopicGroupMap, group_mass

logger = logging.getLogger(__name__)

DEFAULT_LOCATIONS = ("United States", "United Kingdom", "Canada")

# (model topic-group label, lexicon topic label) pairs checked by default
DEFAULT_COMPARISON_PAIRS = (
    ("fear of coronavirus", "Fear of coronavirus"),
    ("uncertainty on development of pandemic", "Pandemic Development"),
)

DASHBOARD_SCHEMA_VERSION = 1


class TrendSource(str, Enum):
    LDA_MASS = "LdaMass"
    LEXICON_COUNT = "LexiconCount"


@dataclass(frozen=True)
class TrendSeries:
    """Month x label matrix of nonnegative values for one aggregation route."""

    source: TrendSource
    months: tuple[str, ...]
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.months), len(self.labels)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.months)} months x {len(self.labels)} labels"
            )

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def restrict(self, months: Sequence[str]) -> "TrendSeries":
        idx = [self.months.index(m) for m in months]
        return TrendSeries(
            source=self.source,
            months=tuple(months),
            labels=self.labels,
            values=self.values[idx],
        )


@dataclass(frozen=True)
class ExternalSeries:
    """Cases and vaccinations summed over the tracked locations, by month."""

    months: tuple[str, ...]
    total_cases: tuple[float, ...]
    new_cases: tuple[float, ...]
    people_vaccinated: tuple[float, ...]
    carried_forward_months: tuple[str, ...] = ()


def month_sequence(first: str, last: str) -> tuple[str, ...]:
    """Contiguous YYYY-MM keys from first to last, inclusive."""
    fy, fm = (int(p) for p in first.split("-"))
    ly, lm = (int(p) for p in last.split("-"))
    if (fy, fm) > (ly, lm):
        raise ValueError(f"month range runs backwards: {first} > {last}")
    out = []
    y, m = fy, fm
    while (y, m) <= (ly, lm):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return tuple(out)


def _post_month_range(posts: Sequence[CleanPost]) -> tuple[str, ...]:
    if not posts:
        raise ValueError("no posts to aggregate")
    months = [p.month for p in posts]
    return month_sequence(min(months), max(months))


def lda_monthly_sum(
    posts: Sequence[CleanPost],
    theta: np.ndarray,
    group_map: TopicGroupMap,
) -> TrendSeries:
    """Sum each post's topic-group mass into its calendar month."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[0] != len(posts):
        raise ValueError(f"{theta.shape[0]} theta rows for {len(posts)} posts")
    months = _post_month_range(posts)
    month_index = {m: i for i, m in enumerate(months)}
    values = np.zeros((len(months), len(group_map.groups)))
    for post, row in zip(posts, theta):
        values[month_index[post.month]] += group_mass(row, group_map)
    return TrendSeries(
        source=TrendSource.LDA_MASS,
        months=months,
        labels=group_map.groups,
        values=values,
    )


def lexicon_monthly_count(
    posts: Sequence[CleanPost],
    annotations: Sequence[LexiconAnnotation],
    topic_labels: Sequence[str] | None = None,
) -> TrendSeries:
    """Count posts per month mentioning each lexicon topic.

    A post matching several topics contributes one to each of them.
    Column order follows topic_labels when given, else the sorted union
    of labels seen in the annotations.
    """
    if len(annotations) != len(posts):
        raise ValueError(f"{len(annotations)} annotations for {len(posts)} posts")
    if topic_labels is None:
        topic_labels = sorted(set().union(*(a.topics for a in annotations)) or set())
    labels = tuple(topic_labels)
    months = _post_month_range(posts)
    month_index = {m: i for i, m in enumerate(months)}
    label_index = {t: j for j, t in enumerate(labels)}
    values = np.zeros((len(months), len(labels)))
    for post, ann in zip(posts, annotations):
        for topic in ann.topics:
            if topic in label_index:
                values[month_index[post.month], label_index[topic]] += 1.0
    return TrendSeries(
        source=TrendSource.LEXICON_COUNT,
        months=months,
        labels=labels,
        values=values,
    )


def monthly_proportions(series: TrendSeries) -> TrendSeries:
    """Row-normalize each month; all-zero months stay zero and are logged."""
    sums = series.values.sum(axis=1)
    zero = sums <= 0
    if zero.any():
        logger.warning(
            "months with no activity stay all-zero: %s",
            ", ".join(m for m, z in zip(series.months, zero) if z),
        )
    safe = np.where(zero, 1.0, sums)
    return TrendSeries(
        source=series.source,
        months=series.months,
        labels=series.labels,
        values=series.values / safe[:, None],
    )


def _parse_float(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    return float(cell)


def load_external_csv(
    path: str | Path,
    locations: Sequence[str] = DEFAULT_LOCATIONS,
) -> ExternalSeries:
    """Read an OWID-style daily CSV down to a monthly multi-country series.

    Cumulative columns (total_cases, people_vaccinated) take each
    location's last dated in-month observation; new_cases sums over the
    month. Locations are then summed. Months a location never reports
    inside the span are carried forward and flagged.
    """
    required = ["date", "location", "total_cases", "new_cases", "people_vaccinated"]
    wanted = set(locations)
    # last_obs[col][(loc, month)] = (date, value); new_sum[(loc, month)] = total
    last_obs: dict[str, dict[tuple[str, str], tuple[date, float]]] = {
        "total_cases": {},
        "people_vaccinated": {},
    }
    new_sum: dict[tuple[str, str], float] = {}
    seen_months: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")
        for row in reader:
            loc = row["location"]
            if loc not in wanted:
                continue
            try:
                day = date.fromisoformat(row["date"].strip())
            except ValueError:
                logger.warning("%s: skipping row with unparseable date %r", path, row["date"])
                continue
            month = f"{day.year:04d}-{day.month:02d}"
            seen_months.add(month)
            for col in ("total_cases", "people_vaccinated"):
                value = _parse_float(row[col])
                if value is None:
                    continue
                key = (loc, month)
                prev = last_obs[col].get(key)
                if prev is None or day >= prev[0]:
                    last_obs[col][key] = (day, value)
            new_value = _parse_float(row["new_cases"])
            if new_value is not None:
                new_sum[(loc, month)] = new_sum.get((loc, month), 0.0) + new_value

    if not seen_months:
        raise ValueError(f"{path}: no rows for locations {list(locations)}")

    months = month_sequence(min(seen_months), max(seen_months))
    carried: set[str] = set()
    totals, news, vaccinated = [], [], []
    running: dict[str, dict[str, float]] = {
        "total_cases": {loc: 0.0 for loc in locations},
        "people_vaccinated": {loc: 0.0 for loc in locations},
    }
    started: dict[str, set[str]] = {"total_cases": set(), "people_vaccinated": set()}
    for month in months:
        for col in ("total_cases", "people_vaccinated"):
            for loc in locations:
                obs = last_obs[col].get((loc, month))
                if obs is not None:
                    running[col][loc] = obs[1]
                    started[col].add(loc)
                elif loc in started[col]:
                    carried.add(month)
        totals.append(sum(running["total_cases"].values()))
        vaccinated.append(sum(running["people_vaccinated"].values()))
        news.append(sum(new_sum.get((loc, month), 0.0) for loc in locations))

    for i in range(1, len(totals)):
        if totals[i] < totals[i - 1]:
            logger.warning(
                "%s: total_cases decreases from %s to %s; input looks malformed",
                path, months[i - 1], months[i],
            )
    return ExternalSeries(
        months=months,
        total_cases=tuple(totals),
        new_cases=tuple(news),
        people_vaccinated=tuple(vaccinated),
        carried_forward_months=tuple(sorted(carried)),
    )


def align_external(external: ExternalSeries, months: Sequence[str]) -> ExternalSeries:
    """Project the external series onto the post month range.

    Months before the first observation report 0; months after the last
    carry the cumulative values forward. Carried months are flagged.
    """
    index = {m: i for i, m in enumerate(external.months)}
    carried = set(external.carried_forward_months) & set(months)
    totals, news, vaccinated = [], [], []
    for month in months:
        i = index.get(month)
        if i is not None:
            totals.append(external.total_cases[i])
            news.append(external.new_cases[i])
            vaccinated.append(external.people_vaccinated[i])
        else:
            prior = [j for m, j in index.items() if m < month]
            if prior:
                j = max(prior)
                totals.append(external.total_cases[j])
                vaccinated.append(external.people_vaccinated[j])
            else:
                totals.append(0.0)
                vaccinated.append(0.0)
            news.append(0.0)
            carried.add(month)
    return ExternalSeries(
        months=tuple(months),
        total_cases=tuple(totals),
        new_cases=tuple(news),
        people_vaccinated=tuple(vaccinated),
        carried_forward_months=tuple(sorted(carried)),
    )


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Product-moment correlation by the direct formula."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"series shapes differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx <= 0 or syy <= 0:
        raise ValueError("zero variance; correlation undefined")
    return float((dx @ dy) / np.sqrt(sxx * syy))


def compare_methods(
    lda_series: TrendSeries,
    lexicon_series: TrendSeries,
    topic_pairs: Sequence[tuple[str, str]] = DEFAULT_COMPARISON_PAIRS,
) -> list[dict]:
    """Pearson r for each (model group, lexicon topic) pair on shared months.

    A failing pair reports its error without blocking the others.
    """
    shared = [m for m in lda_series.months if m in set(lexicon_series.months)]
    results = []
    for group_label, topic_label in topic_pairs:
        entry: dict = {"lda_group": group_label, "lexicon_topic": topic_label}
        try:
            if group_label not in lda_series.labels:
                raise ValueError(f"unknown model group {group_label!r}")
            if topic_label not in lexicon_series.labels:
                raise ValueError(f"unknown lexicon topic {topic_label!r}")
            if len(shared) < 2:
                raise ValueError("fewer than two shared months")
            a = lda_series.restrict(shared).column(group_label)
            b = lexicon_series.restrict(shared).column(topic_label)
            entry["r"] = pearson(a, b)
        except ValueError as exc:
            entry["error"] = str(exc)
        results.append(entry)
    return results


def _write_series_csv(path: Path, series: TrendSeries) -> None:
    as_int = series.source is TrendSource.LEXICON_COUNT
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", *series.labels])
        for i, month in enumerate(series.months):
            row = series.values[i]
            writer.writerow(
                [month, *((int(v) for v in row) if as_int else (repr(float(v)) for v in row))]
            )


def export_dashboard(
    lda_series: TrendSeries,
    lexicon_series: TrendSeries,
    external: ExternalSeries | None,
    correlations: Sequence[Mapping],
    directory: str | Path,
) -> Path:
    """Write the CSV bundle plus dashboard.json; fully determined by inputs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if lda_series.months != lexicon_series.months:
        raise ValueError("model and lexicon series cover different month ranges")
    months = lda_series.months
    aligned = align_external(external, months) if external is not None else None

    lda_props = monthly_proportions(lda_series)
    lex_props = monthly_proportions(lexicon_series)

    _write_series_csv(directory / "trends_lda.csv", lda_series)
    _write_series_csv(directory / "trends_lexicon.csv", lexicon_series)
    with open(directory / "proportions.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["month"]
            + [f"lda:{g}" for g in lda_series.labels]
            + [f"lexicon:{t}" for t in lexicon_series.labels]
        )
        for i, month in enumerate(months):
            writer.writerow(
                [month]
                + [repr(float(v)) for v in lda_props.values[i]]
                + [repr(float(v)) for v in lex_props.values[i]]
            )
    with open(directory / "external.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["month", "total_cases", "new_cases", "people_vaccinated", "carried_forward"]
        )
        if aligned is not None:
            carried = set(aligned.carried_forward_months)
            for i, month in enumerate(months):
                writer.writerow([
                    month,
                    repr(float(aligned.total_cases[i])),
                    repr(float(aligned.new_cases[i])),
                    repr(float(aligned.people_vaccinated[i])),
                    1 if month in carried else 0,
                ])

    payload = {
        "schema_version": DASHBOARD_SCHEMA_VERSION,
        "months": list(months),
        "lda": {
            "groups": list(lda_series.labels),
            "values": [[float(v) for v in row] for row in lda_series.values],
            "proportions": [[float(v) for v in row] for row in lda_props.values],
        },
        "lexicon": {
            "topics": list(lexicon_series.labels),
            "values": [[int(v) for v in row] for row in lexicon_series.values],
            "proportions": [[float(v) for v in row] for row in lex_props.values],
        },
        "external": None if aligned is None else {
            "total_cases": [float(v) for v in aligned.total_cases],
            "new_cases": [float(v) for v in aligned.new_cases],
            "people_vaccinated": [float(v) for v in aligned.people_vaccinated],
            "carried_forward_months": list(aligned.carried_forward_months),
        },
        "correlations": [dict(c) for c in correlations],
    }
    out = directory / "dashboard.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out
