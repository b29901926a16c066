"""Read-only HTTP API over the store: trends, topics, graph, fact-check.

All parameters are validated by hand so bad input yields the documented
error body instead of a framework-shaped 422. Handlers never write to the
store; the only mutable state is a bounded per-process cache for graph
views, which is safe under concurrent readers.
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from datetime import date, timedelta, timezone

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import ApiConfig
from .graph import NODE_KINDS, DiscourseGraph, eigenvector_centrality, filter_view
from .ingest import parse_instant
from .store import NotFoundError, Store, DayPartitionKey, SCHEMA_VERSION
from .factcheck import VERDICT_CATEGORIES

logger = logging.getLogger(__name__)

TREND_LABELS = {
    "sentiment": ("negative", "neutral", "positive"),
    "hate": ("hate", "normal"),
}

DEFAULT_PAGE_LIMIT = 100


class Problem(Exception):
    """Carries an ApiError payload to the exception handler."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message

    def response(self) -> JSONResponse:
        return JSONResponse(status_code=self.status, content={
            "error": {"status": self.status, "code": self.code, "message": self.message}})


def _parse_day(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise Problem(400, "bad_date", f"{name}: not a valid YYYY-MM-DD date: {value!r}")


def _parse_int(value: str, name: str, minimum: int) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise Problem(400, "bad_int", f"{name}: not an integer: {value!r}")
    if parsed < minimum:
        raise Problem(400, "bad_int", f"{name} must be >= {minimum}, got {parsed}")
    return parsed


def _record_day(record: dict) -> date:
    instant = parse_instant(record["post"]["published_at"])
    return instant.astimezone(timezone.utc).date()


def _safe_range(store: Store, dataset: str, from_day: date, to_day: date):
    """query_range that treats a missing manifest as an empty store."""
    try:
        yield from store.query_range(dataset, from_day, to_day)
    except NotFoundError:
        return


class GraphViewCache:
    """Bounded FIFO cache; keys include store digests so stale entries
    cannot outlive a rewrite of the underlying day files."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: OrderedDict[tuple, dict] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: tuple) -> dict | None:
        with self._lock:
            return self._entries.get(key)

    def put(self, key: tuple, value: dict) -> None:
        if self.capacity == 0:
            return
        with self._lock:
            self._entries[key] = value
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)


def create_app(store: Store, api_config: ApiConfig | None = None) -> FastAPI:
    config = api_config or ApiConfig()
    app = FastAPI(title="discourse-monitor", docs_url=None, redoc_url=None)
    cache = GraphViewCache(config.cache_size)

    if config.cors_origins:
        app.add_middleware(CORSMiddleware, allow_origins=list(config.cors_origins),
                           allow_methods=["GET"], allow_headers=["Authorization"])

    @app.exception_handler(Problem)
    async def _problem_handler(request: Request, exc: Problem) -> JSONResponse:
        return exc.response()

    @app.exception_handler(Exception)
    async def _crash_handler(request: Request, exc: Exception) -> JSONResponse:
        logger.exception("unhandled error on %s", request.url.path)
        return Problem(500, "internal", "internal server error").response()

    if config.bearer_token is not None:
        # Liveness checks stay open; everything else needs the token.
        @app.middleware("http")
        async def _auth(request: Request, call_next):
            path = request.url.path
            # OPTIONS passes through so CORS preflight still works.
            if (request.method != "OPTIONS" and path.startswith("/api/")
                    and path != "/api/v1/health"):
                header = request.headers.get("authorization", "")
                if header != f"Bearer {config.bearer_token}":
                    return Problem(401, "unauthorized", "missing or bad bearer token").response()
            return await call_next(request)

    def _window(from_raw: str | None, to_raw: str | None,
                dataset: str) -> tuple[date, date] | None:
        """Resolve the requested window; None when the store has no data
        and no explicit bounds were given."""
        from_day = _parse_day(from_raw, "from") if from_raw is not None else None
        to_day = _parse_day(to_raw, "to") if to_raw is not None else None
        if from_day is None or to_day is None:
            try:
                days = store.days(dataset)
            except NotFoundError:
                days = []
            if not days and (from_day is None or to_day is None):
                return None
            if from_day is None:
                from_day = days[0]
            if to_day is None:
                to_day = days[-1]
        if from_day > to_day:
            raise Problem(400, "bad_window", "from must be <= to")
        return from_day, to_day

    def _page(raw_limit: str | None, raw_offset: str | None) -> tuple[int, int]:
        limit = _parse_int(raw_limit, "limit", 0) if raw_limit is not None else DEFAULT_PAGE_LIMIT
        offset = _parse_int(raw_offset, "offset", 0) if raw_offset is not None else 0
        return limit, offset

    @app.get("/api/v1/health")
    def health() -> dict:
        try:
            version = store.schema_version()
        except (NotFoundError, OSError, ValueError):
            version = SCHEMA_VERSION
        return {"status": "ok", "schema_version": version}

    @app.get("/api/v1/trends/{metric}")
    def trends(metric: str, request: Request) -> dict:
        if metric not in TREND_LABELS:
            raise Problem(404, "unknown_metric", f"unknown metric: {metric!r}")
        params = request.query_params
        granularity = params.get("granularity", "day")
        if granularity not in ("day", "week"):
            raise Problem(400, "bad_granularity",
                          f"granularity must be day or week, got {granularity!r}")
        platform = params.get("platform")
        labels = TREND_LABELS[metric]
        window = _window(params.get("from"), params.get("to"), "classified")
        buckets: dict[date, dict[str, int]] = {}
        if window is not None:
            for record in _safe_range(store, "classified", *window):
                if platform is not None and record["post"]["platform"] != platform:
                    continue
                day = _record_day(record)
                if granularity == "week":
                    day = day - timedelta(days=day.weekday())
                label = record[metric]["label"]
                bucket = buckets.setdefault(day, {name: 0 for name in labels})
                bucket[label] = bucket.get(label, 0) + 1
        points = [{"period_start": day.isoformat(),
                   "counts": buckets[day],
                   "total": sum(buckets[day].values())}
                  for day in sorted(buckets)]
        return {"metric": metric, "granularity": granularity, "points": points}

    @app.get("/api/v1/topics")
    def topics(request: Request) -> JSONResponse:
        params = request.query_params
        day_raw = params.get("day")
        if day_raw is None:
            raise Problem(400, "missing_param", "day parameter is required")
        day = _parse_day(day_raw, "day")
        limit, offset = _page(params.get("limit"), params.get("offset"))
        try:
            records = store.get(DayPartitionKey("topics", day))
        except NotFoundError:
            records = []
        records.sort(key=lambda r: (-r["size"], r["topic_id"]))
        return JSONResponse(content=records[offset:offset + limit])

    @app.get("/api/v1/topics/evolution")
    def topics_evolution(request: Request) -> JSONResponse:
        params = request.query_params
        requested: list[int] | None = None
        if params.get("topic_ids") is not None:
            requested = [_parse_int(part.strip(), "topic_ids", 0)
                         for part in params["topic_ids"].split(",") if part.strip()]
        limit, offset = _page(params.get("limit"), params.get("offset"))
        window = _window(params.get("from"), params.get("to"), "topics")
        series: dict[int, list[dict]] = {}
        if requested is not None:
            series = {topic_id: [] for topic_id in requested}
        if window is not None:
            for record in _safe_range(store, "topics", *window):
                topic_id = record["topic_id"]
                if requested is not None and topic_id not in series:
                    continue
                series.setdefault(topic_id, []).append(
                    {"day": record["day"], "size": record["size"]})
        body = [{"topic_id": topic_id,
                 "points": sorted(series[topic_id], key=lambda p: p["day"])}
                for topic_id in sorted(series)]
        return JSONResponse(content=body[offset:offset + limit])

    @app.get("/api/v1/graph")
    def graph_view(request: Request) -> dict:
        params = request.query_params
        min_occurrence = (_parse_int(params["min_occurrence"], "min_occurrence", 0)
                          if params.get("min_occurrence") is not None else 0)
        top_k = (_parse_int(params["top_k"], "top_k", 0)
                 if params.get("top_k") is not None else None)
        kinds: tuple[str, ...] | None = None
        if params.get("kinds") is not None:
            kinds = tuple(part.strip() for part in params["kinds"].split(",") if part.strip())
            bad = [k for k in kinds if k not in NODE_KINDS]
            if bad:
                raise Problem(400, "bad_kind", f"unknown node kinds: {bad}")
        window = _window(params.get("from"), params.get("to"), "graph")
        if window is None:
            return {"nodes": [], "edges": []}

        try:
            manifest = store.read_manifest()
        except NotFoundError:
            return {"nodes": [], "edges": []}
        day_entries = manifest["datasets"].get("graph", {})
        window_days = []
        day = window[0]
        while day <= window[1]:
            iso = day.isoformat()
            if iso in day_entries:
                window_days.append((iso, day_entries[iso]["digest"]))
            day += timedelta(days=1)
        cache_key = (min_occurrence, top_k, kinds, tuple(window_days))
        cached = cache.get(cache_key)
        if cached is not None:
            return cached

        merged = DiscourseGraph()
        for iso, _digest in window_days:
            for record in store.get(DayPartitionKey("graph", date.fromisoformat(iso))):
                merged.merge(DiscourseGraph.from_node_link(record))
        view = filter_view(merged, min_occurrence=min_occurrence, top_k=top_k, kinds=kinds)
        centrality = eigenvector_centrality(view).scores
        body = view.to_node_link(centrality=centrality)
        cache.put(cache_key, body)
        return body

    @app.get("/api/v1/factcheck/verdicts")
    def verdicts(request: Request) -> dict:
        channel = request.query_params.get("channel")
        counts = {category: 0 for category in VERDICT_CATEGORIES}
        try:
            days = store.days("factcheck")
        except NotFoundError:
            days = []
        for day in days:
            for record in store.get(DayPartitionKey("factcheck", day)):
                if channel is not None and record["channel"] != channel:
                    continue
                counts[record["verdict"]["category"]] += 1
        return {"channel": channel, "counts": counts, "total": sum(counts.values())}

    return app
