"""HTTP API for the curation loop and the trend dashboard.

Reads always resolve the current snapshot pointer once per request and
serve everything from that one immutable snapshot. Retraining runs in a
single background thread; publishing the result is a pointer swap, so
readers never see a half-written state.

Analyst edits live in two small overlay files under <run_dir>/curation:

    features.json      current include/exclude token lists (applied at the
                       next retrain, never retroactively)
    annotations.json   per-snapshot topic names and group assignments
                       (applied immediately to reads; baked into the model
                       at the next retrain)
"""

from __future__ import annotations

import json
import threading
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import pipeline
from .config import PipelineConfig
from .errors import MissingArtifactError, StressorlensError
from .lexicon import match_post
from .snapshots import Snapshot, SnapshotStore
from .topicmodel import TopicGroupMap, select_review_samples
from .trends import align_external, monthly_proportions

JOB_QUEUED = "Queued"
JOB_RUNNING = "Running"
JOB_DONE = "Done"
JOB_FAILED = "Failed"


def _utcnow() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class CurationState:
    """Overlay persistence; guarded by a lock, hot-reloaded per request."""

    def __init__(self, cfg: PipelineConfig, run_dir: Path):
        self.cfg = cfg
        self.dir = run_dir / "curation"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.Lock()

    def _read(self, name: str, default):
        path = self.dir / name
        if not path.exists():
            return default
        return json.loads(path.read_text("utf-8"))

    def _write(self, name: str, payload) -> None:
        path = self.dir / name
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
        tmp.replace(path)

    def feature_lists(self) -> tuple[list[str], list[str]]:
        data = self._read("features.json", None)
        if data is None:
            fc = self.cfg.feature_config()
            return list(fc.include_tokens), sorted(fc.exclude_tokens)
        return list(data["include_tokens"]), list(data["exclude_tokens"])

    def update_features(self, add_include, add_exclude, remove) -> tuple[list[str], list[str]]:
        with self.lock:
            include, exclude = self.feature_lists()
            inc = [t for t in include if t not in remove]
            exc = [t for t in exclude if t not in remove]
            for t in add_include:
                if t not in inc:
                    inc.append(t)
            for t in add_exclude:
                if t not in exc:
                    exc.append(t)
            overlap = sorted(set(inc) & set(exc))
            if overlap:
                raise ApiError(400, f"tokens in both include and exclude lists: {overlap}")
            self._write("features.json", {"include_tokens": inc, "exclude_tokens": exc})
            return inc, exc

    def annotations_for(self, snapshot_id: int) -> dict:
        data = self._read("annotations.json", {})
        return data.get(str(snapshot_id), {})

    def set_topic_name(self, snapshot_id: int, topic: int, name: str) -> None:
        with self.lock:
            data = self._read("annotations.json", {})
            entry = data.setdefault(str(snapshot_id), {})
            entry.setdefault("topic_names", {})[str(topic)] = name
            self._write("annotations.json", data)

    def set_group_map(self, snapshot_id: int, gmap: TopicGroupMap) -> None:
        with self.lock:
            data = self._read("annotations.json", {})
            entry = data.setdefault(str(snapshot_id), {})
            entry["group_map"] = gmap.to_dict()
            self._write("annotations.json", data)


class SnapshotView:
    """All reads for one request, resolved against one snapshot."""

    def __init__(self, snap: Snapshot, curation: CurationState, cfg: PipelineConfig):
        self.snap = snap
        self.curation = curation
        self.cfg = cfg

    @property
    def overlay(self) -> dict:
        return self.curation.annotations_for(self.snap.snapshot_id)

    def topic_names(self) -> dict[int, str]:
        model = pipeline.load_lda(self.snap)
        names = dict(model.topic_names)
        for k, v in self.overlay.get("topic_names", {}).items():
            names[int(k)] = v
        return names

    def group_map(self) -> TopicGroupMap:
        raw = self.overlay.get("group_map")
        if raw is not None:
            return TopicGroupMap.from_dict(raw)
        return pipeline.load_lda(self.snap).effective_group_map()


def create_app(
    cfg: PipelineConfig,
    store: SnapshotStore,
    retrain_fn=None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service; `retrain_fn(cfg, store, **curation)` is injectable."""
    if retrain_fn is None:
        retrain_fn = _default_retrain
    app = FastAPI(title="stressorlens", docs_url=None, redoc_url=None)
    state = app.state
    state.cfg = cfg
    state.store = store
    state.curation = CurationState(cfg, store.run_dir)
    state.current_snapshot_id = store.latest_id()
    state.jobs = {}
    state.job_lock = threading.Lock()
    if state.current_snapshot_id is None:
        raise MissingArtifactError("snapshot", "run the pipeline before serving")

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"] if p != "body")
        return JSONResponse(
            status_code=400, content={"error": f"{loc or 'body'}: {first['msg']}"}
        )

    @app.exception_handler(MissingArtifactError)
    async def _missing(request: Request, exc: MissingArtifactError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(StressorlensError)
    async def _domain_error(request: Request, exc: StressorlensError):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    def view() -> SnapshotView:
        snap = store.open(state.current_snapshot_id)
        return SnapshotView(snap, state.curation, cfg)

    # ------------------------------------------------------------- reads

    @app.get("/api/snapshot")
    def get_snapshot():
        v = view()
        info = v.snap.info
        return {
            "snapshot_id": info.snapshot_id,
            "parent_snapshot_id": info.parent_snapshot_id,
            "created_utc": info.created_utc,
            "config_hash": info.config_hash,
            "files": sorted(info.files),
        }

    @app.get("/api/topics")
    def get_topics():
        v = view()
        overview = pipeline.topic_overview(v.snap)
        names = v.topic_names()
        gmap = v.group_map()
        for entry in overview["topics"]:
            k = entry["topic"]
            entry["name"] = names.get(k)
            g = gmap.assignment.get(k)
            if g is None:
                raise ApiError(500, f"topic {k} missing from group assignment")
            entry["group_index"] = g
            entry["group"] = gmap.groups[g]
        overview["groups"] = list(gmap.groups)
        return overview

    @app.get("/api/topics/{topic}/samples")
    def get_samples(topic: int, seed: int = 0):
        v = view()
        model = pipeline.load_lda(v.snap)
        if not 0 <= topic < model.n_topics:
            raise ApiError(404, f"unknown topic {topic}")
        doc_ids = pipeline.load_doc_ids(v.snap)
        # the model may predate the support subset, so resolve sample
        # text against the full corpus rather than the analysis posts
        by_id = {p.id: p for p in pipeline.active_corpus(v.snap)}
        samples = select_review_samples(model, topic, seed, doc_ids=doc_ids)
        return {
            "snapshot_id": v.snap.snapshot_id,
            "topic": topic,
            "seed": seed,
            "flagged": len(samples) < 6,
            "samples": [
                {
                    "post_id": s.post_id,
                    "theta_value": s.theta_value,
                    "selection": s.selection.value,
                    "text": by_id[s.post_id].text if s.post_id in by_id else None,
                    "month": by_id[s.post_id].month if s.post_id in by_id else None,
                }
                for s in samples
            ],
        }

    @app.get("/api/features")
    def get_features():
        include, exclude = state.curation.feature_lists()
        return {"include_tokens": include, "exclude_tokens": exclude}

    @app.get("/api/trends")
    def get_trends(source: str = "lda", normalize: bool = False):
        if source not in ("lda", "lexicon"):
            raise ApiError(400, f"source must be 'lda' or 'lexicon', got {source!r}")
        v = view()
        lda_series, lexicon_series, _, _ = pipeline.compute_trend_bundle(
            v.cfg, v.snap, group_map=v.group_map()
        )
        series = lda_series if source == "lda" else lexicon_series
        if normalize:
            series = monthly_proportions(series)
        return {
            "snapshot_id": v.snap.snapshot_id,
            "source": source,
            "normalize": normalize,
            "months": list(series.months),
            "labels": list(series.labels),
            "values": [[float(x) for x in row] for row in series.values],
        }

    @app.get("/api/external")
    def get_external():
        v = view()
        external = pipeline.load_external(v.snap)
        if external is None:
            raise ApiError(404, "no external series in this snapshot")
        posts, _ = pipeline.analysis_posts(v.snap)
        months = sorted({p.month for p in posts})
        from .trends import month_sequence
        aligned = align_external(external, month_sequence(months[0], months[-1]))
        return {
            "snapshot_id": v.snap.snapshot_id,
            "months": list(aligned.months),
            "total_cases": list(aligned.total_cases),
            "new_cases": list(aligned.new_cases),
            "people_vaccinated": list(aligned.people_vaccinated),
            "carried_forward_months": list(aligned.carried_forward_months),
        }

    @app.get("/api/correlations")
    def get_correlations():
        v = view()
        _, _, _, correlations = pipeline.compute_trend_bundle(
            v.cfg, v.snap, group_map=v.group_map()
        )
        return {"snapshot_id": v.snap.snapshot_id, "correlations": correlations}

    @app.get("/api/posts/{post_id}")
    def get_post(post_id: str):
        v = view()
        posts = pipeline.active_corpus(v.snap)
        found = next((p for p in posts if p.id == post_id), None)
        if found is None:
            raise ApiError(404, f"unknown post {post_id!r}")
        return {
            "post_id": found.id,
            "month": found.month,
            "text": found.text,
            "flair_group": found.flair_group.value,
            "flair_source": found.flair_source.value,
            "lexicon_topics": sorted(match_post(found.text, v.cfg.lexicon())),
        }

    # ------------------------------------------------------------ writes

    @app.post("/api/topics/{topic}/name")
    def post_topic_name(topic: int, body: dict):
        v = view()
        model = pipeline.load_lda(v.snap)
        if not 0 <= topic < model.n_topics:
            raise ApiError(404, f"unknown topic {topic}")
        name = body.get("name")
        if not isinstance(name, str) or not name.strip():
            raise ApiError(400, "name: must be a nonempty string")
        state.curation.set_topic_name(v.snap.snapshot_id, topic, name.strip())
        return {"snapshot_id": v.snap.snapshot_id, "topic": topic, "name": name.strip()}

    @app.post("/api/groups")
    def post_groups(body: dict):
        v = view()
        model = pipeline.load_lda(v.snap)
        groups = body.get("groups")
        assignment = body.get("assignment")
        if not isinstance(groups, list) or not all(isinstance(g, str) and g for g in groups):
            raise ApiError(400, "groups: must be a list of nonempty strings")
        if not isinstance(assignment, dict):
            raise ApiError(400, "assignment: must be an object mapping topic to group index")
        try:
            gmap = TopicGroupMap(
                groups=tuple(groups),
                assignment={int(k): int(g) for k, g in assignment.items()},
            )
            gmap.validate_total(model.n_topics)
        except (ValueError, StressorlensError) as exc:
            raise ApiError(400, f"assignment: {exc}")
        state.curation.set_group_map(v.snap.snapshot_id, gmap)
        return {"snapshot_id": v.snap.snapshot_id, "group_map": gmap.to_dict()}

    @app.post("/api/features")
    def post_features(body: dict):
        lists = {}
        for key in ("add_include", "add_exclude", "remove"):
            raw = body.get(key, [])
            if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
                raise ApiError(400, f"{key}: must be a list of strings")
            lists[key] = [t.strip().lower() for t in raw if t.strip()]
        include, exclude = state.curation.update_features(
            lists["add_include"], lists["add_exclude"], lists["remove"]
        )
        return {"include_tokens": include, "exclude_tokens": exclude}

    @app.post("/api/retrain", status_code=202)
    def post_retrain():
        with state.job_lock:
            active = [
                j for j in state.jobs.values() if j["state"] in (JOB_QUEUED, JOB_RUNNING)
            ]
            if active:
                raise ApiError(409, f"retrain job {active[0]['job_id']} already in progress")
            job_id = uuid.uuid4().hex[:12]
            job = {
                "job_id": job_id,
                "state": JOB_QUEUED,
                "started_utc": None,
                "finished_utc": None,
                "snapshot_id": None,
                "error": None,
            }
            state.jobs[job_id] = job

        include, exclude = state.curation.feature_lists()
        snapshot_id = state.current_snapshot_id
        overlay = state.curation.annotations_for(snapshot_id)
        topic_names = {int(k): v for k, v in overlay.get("topic_names", {}).items()}
        raw_map = overlay.get("group_map")
        group_map = TopicGroupMap.from_dict(raw_map) if raw_map else None

        def worker():
            job["state"] = JOB_RUNNING
            job["started_utc"] = _utcnow()
            try:
                result = retrain_fn(
                    cfg, store,
                    include_tokens=tuple(include),
                    exclude_tokens=tuple(exclude),
                    topic_names=topic_names,
                    group_map=group_map,
                )
                job["snapshot_id"] = result
                state.current_snapshot_id = result
                job["state"] = JOB_DONE
            except Exception as exc:  # failure leaves the pointer untouched
                job["error"] = str(exc)
                job["state"] = JOB_FAILED
            finally:
                job["finished_utc"] = _utcnow()

        threading.Thread(target=worker, name=f"retrain-{job_id}", daemon=True).start()
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise ApiError(404, f"unknown job {job_id!r}")
        return dict(job)

    static = Path(static_dir) if static_dir else None
    if static and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app


def _default_retrain(cfg, store, **curation) -> int:
    result = pipeline.run_retrain(cfg, store, **curation)
    return result.snapshot_id
