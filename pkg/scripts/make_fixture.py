"""Regenerate the bundled fixture corpus and external CSV.

Run from the repo root:

    python scripts/make_fixture.py

Output is deterministic; tests freeze expectations against it precisely,
so regenerate only when the fixture design itself changes.
"""

from __future__ import annotations

import json
import random
from datetime import datetime, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src/stressorlens/data/fixture"

MONTHS = ["2020-03", "2020-04", "2020-05", "2020-06", "2020-07", "2020-08"]

THEMES = {
    "fear": {
        "titles": [
            "saw people maskless at the grocery store again",
            "panic about my coworker coughing near me",
            "scared after being exposed without mask",
        ],
        "words": (
            "maskless grocery store panic cough coworker exposed wash hands "
            "temperature precautions unmasked worried infection surfaces sanitize"
        ).split(),
        "flairs": ["Support", "Trigger Warning", "Support"],
    },
    "education": {
        "titles": [
            "college online learning is crushing me this semester",
            "freshman year ruined by online learning",
            "failing my class since the semester moved online",
        ],
        "words": (
            "college online learning class semester freshman lectures exams "
            "homework professor campus graduation studying grades"
        ).split(),
        "flairs": ["Support", "Support", "Discussion"],
    },
    "occupation": {
        "titles": [
            "lost job last week and the income stress is unbearable",
            "unemployed and laid off with no money left",
            "should i quit job worries about my career",
        ],
        "words": (
            "lost job unemployed laid off income money quit career savings "
            "rent bills interview resume furlough paycheck"
        ).split(),
        "flairs": ["Support", "Support", "Questions"],
    },
    "lonely": {
        "titles": [
            "no social interaction since march and i feel alone",
            "loneliness is getting worse every week",
            "how do you socialize and make friends now",
        ],
        "words": (
            "lonely loneliness social interaction friendship socialize "
            "disconnected isolated roommates calls friends connection"
        ).split(),
        "flairs": ["Support", "Support", "Discussion"],
    },
    "pandemic": {
        "titles": [
            "will things ever get back to normal",
            "feels like this never ending situation lasts forever",
            "losing hope that the new normal is permanent",
        ],
        "words": (
            "forever permanent normal endless hope waves restrictions "
            "lockdown vaccine timeline future months years ending"
        ).split(),
        "flairs": ["Support", "Discussion", "Questions"],
    },
    "family": {
        "titles": [
            "stuck at home arguing with my parents every day",
            "family tension in a crowded household",
            "my siblings and parents fight constantly in lockdown",
        ],
        "words": (
            "family parents siblings household arguing tension chores "
            "space privacy yelling dinner rules curfew"
        ).split(),
        "flairs": ["Support", "Support", "Trigger Warning"],
    },
    "mental": {
        "titles": [
            "anxious and depressed and so tired all the time",
            "panic attacks are back and sleep is gone",
            "therapy waitlists while my anxiety spirals",
        ],
        "words": (
            "anxious depressed tired sleep insomnia therapy anxiety "
            "spiraling overwhelmed crying numb appointment meds"
        ).split(),
        "flairs": ["Support", "Trigger Warning", "Support"],
    },
    "news": {
        "titles": [
            "helpful resources thread for coping this month",
            "good news roundup on treatment research",
            "firsthand account of recovery and what helped",
        ],
        "words": (
            "resources links thread update research treatment recovery "
            "article guide summary hotline"
        ).split(),
        "flairs": ["Resources", "Good News", "Firsthand Account"],
    },
}

# posts per theme per month; fear falls, pandemic rises then dips,
# education dips over summer
PLAN = {
    "fear":       [6, 4, 3, 2, 2, 2],
    "education":  [4, 3, 2, 1, 2, 3],
    "occupation": [3, 3, 3, 2, 2, 2],
    "lonely":     [2, 2, 3, 3, 3, 2],
    "pandemic":   [1, 2, 3, 4, 4, 3],
    "family":     [2, 2, 2, 2, 1, 1],
    "mental":     [2, 2, 2, 2, 2, 2],
    "news":       [1, 1, 1, 1, 1, 1],
}


def main() -> None:
    rng = random.Random(20200301)
    OUT.mkdir(parents=True, exist_ok=True)
    lines: list[str] = []
    counter = 0

    def ts(month: str, day: int) -> int:
        y, m = (int(x) for x in month.split("-"))
        return int(datetime(y, m, day, 12, 0, tzinfo=timezone.utc).timestamp())

    for mi, month in enumerate(MONTHS):
        for theme, counts in PLAN.items():
            spec = THEMES[theme]
            for j in range(counts[mi]):
                counter += 1
                pid = f"t3_{counter:04d}"
                title = spec["titles"][(mi + j) % len(spec["titles"])]
                words = spec["words"]
                body_words = [words[rng.randrange(len(words))] for _ in range(28)]
                # anchor the theme: always repeat its lead tokens
                body = " ".join(words[:6] + body_words)
                flair = spec["flairs"][(mi + j) % len(spec["flairs"])]
                record = {
                    "id": pid,
                    "created_utc": ts(month, 2 + (j * 3) % 26),
                    "title": title,
                    "selftext": body,
                    "link_flair_text": flair,
                    "permalink": f"/r/fixture/{pid}",
                }
                # a slice of posts arrives unlabelled for the classifier
                if counter % 7 == 0:
                    del record["link_flair_text"]
                # one post per month carries a hyperlink
                if j == 0:
                    record["selftext"] += " context here https://example.org/info"
                lines.append(json.dumps(record, sort_keys=True))

    # posts excluded from modeling entirely
    lines.append(json.dumps({
        "id": "t3_other1", "created_utc": ts("2020-04", 10),
        "title": "is it safe to reuse masks", "selftext": "asking because unsure",
        "link_flair_text": "The answer is NO",
    }, sort_keys=True))
    lines.append(json.dumps({
        "id": "t3_other2", "created_utc": ts("2020-06", 11),
        "title": "that viral claim is false", "selftext": "sharing the debunk",
        "link_flair_text": "Misinformation-Debunked",
    }, sort_keys=True))
    # placeholder-deleted posts
    lines.append(json.dumps({
        "id": "t3_gone1", "created_utc": ts("2020-05", 5),
        "title": "need advice", "selftext": "[removed]",
        "link_flair_text": "Support",
    }, sort_keys=True))
    lines.append(json.dumps({
        "id": "t3_gone2", "created_utc": ts("2020-07", 6),
        "title": "[deleted]", "selftext": "text that no longer matters",
        "link_flair_text": "Support",
    }, sort_keys=True))
    # duplicate id: the second copy is dropped on load
    lines.append(json.dumps({
        "id": "t3_0001", "created_utc": ts("2020-08", 20),
        "title": "duplicate submission", "selftext": "should never appear",
        "link_flair_text": "Support",
    }, sort_keys=True))
    # malformed lines: broken JSON and a record missing created_utc
    lines.append('{"id": "t3_broken", "created_utc": ')
    lines.append(json.dumps({"id": "t3_incomplete", "title": "no timestamp"},
                            sort_keys=True))

    (OUT / "corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rows = ["date,location,continent,total_cases,new_cases,people_vaccinated"]
    cumulative = {"United States": 0, "United Kingdom": 0, "Canada": 0, "France": 0}
    daily = {
        "United States": [5000, 9000, 7000, 6000, 8000, 9500],
        "United Kingdom": [2000, 4000, 2500, 1500, 1200, 1500],
        "Canada": [800, 1500, 1000, 600, 500, 700],
        "France": [3000, 3500, 1500, 900, 1000, 2000],
    }
    for mi, month in enumerate(MONTHS):
        for loc, series in daily.items():
            # Canada reports nothing in 2020-06: exercises carry-forward
            if loc == "Canada" and month == "2020-06":
                continue
            continent = "Europe" if loc in ("United Kingdom", "France") else "North America"
            mid, end = series[mi] // 2, series[mi]
            cumulative[loc] += mid
            vac = "" if month < "2020-07" else str(120000 + mi * 5000)
            rows.append(f"{month}-10,{loc},{continent},{cumulative[loc]},{mid},")
            cumulative[loc] += end - mid
            rows.append(f"{month}-28,{loc},{continent},{cumulative[loc]},{end - mid},{vac}")
    rows.append("not-a-date,United States,North America,1,1,")
    (OUT / "owid.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    print(f"wrote {OUT / 'corpus.jsonl'} ({counter} themed posts + extras)")
    print(f"wrote {OUT / 'owid.csv'}")


if __name__ == "__main__":
    main()
