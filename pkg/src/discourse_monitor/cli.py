"""Operator command line: pipeline stages plus the API server.

Stage granularity mirrors the module boundaries (ingest, classify, topics,
graph, factcheck, eval, serve) so partial reruns stay cheap; ``run-all``
chains the store-writing stages in pipeline order. Exit codes: 0 success,
1 stage error, 2 configuration error.
"""

from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import click

from .api import create_app
from .classify import (
    ClassifiedPost,
    RemoteClassifierBackend,
    classify_posts,
    stub_hate_backend,
    stub_sentiment_backend,
)
from .config import ConfigError, RunConfig, load_config
from .evaluation import (
    TASK_LABELS,
    gold_from_annotations,
    kappa_by_task,
    load_annotations,
    load_predictions,
    precision_recall_f1,
)
from .factcheck import (
    HttpLlmClient,
    HttpSearchClient,
    StubLlmClient,
    StubSearchClient,
    run_pipeline,
)
from .graph import DefaultProfileResolver, GazetteerRecognizer, build_graph
from .ingest import (
    KeywordSet,
    Post,
    dedup,
    filter_by_keywords,
    load_posts,
    partition_by_day,
    write_rejects_report,
)
from .store import DayPartitionKey, NotFoundError, Store
from .topics import (
    HashedEmbeddingProvider,
    RemoteEmbeddingProvider,
    daily_snapshots,
    model_window,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_CONFIG = 2


@dataclass
class AppState:
    config: RunConfig
    dry_run: bool


def _fail(ctx: click.Context, message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    ctx.exit(code)


def _stage(ctx: click.Context, fn) -> None:
    """Run one stage body, mapping exceptions onto the exit-code contract."""
    try:
        fn()
    except ConfigError as exc:
        _fail(ctx, str(exc), EXIT_CONFIG)
    except click.exceptions.Exit:
        raise
    except Exception as exc:
        logger.debug("stage failure", exc_info=True)
        _fail(ctx, str(exc), EXIT_STAGE)


@click.group()
@click.option("--config", "config_path", type=click.Path(path_type=Path),
              default=None, help="YAML run configuration.")
@click.option("--store", "store_override", type=click.Path(path_type=Path),
              default=None, help="Store directory (overrides config).")
@click.option("--seed", type=int, default=None,
              help="Seed for every randomized step (overrides config).")
@click.option("--dry-run", is_flag=True, help="Validate inputs, write nothing.")
@click.option("--backends", "backends_override",
              type=click.Choice(["stub", "remote"]), default=None,
              help="Force built-in stub backends or configured remote endpoints.")
@click.pass_context
def main(ctx: click.Context, config_path: Path | None, store_override: Path | None,
         seed: int | None, dry_run: bool, backends_override: str | None) -> None:
    """Discourse monitoring pipeline and API server."""
    logging.basicConfig(stream=sys.stderr,
                        format="%(levelname)s %(name)s %(message)s",
                        level=logging.INFO)
    try:
        cfg = load_config(config_path)
        if store_override is not None:
            cfg = replace(cfg, store_path=store_override)
        if seed is not None:
            cfg = replace(cfg, topics=replace(cfg.topics, seed=seed))
        if backends_override == "stub":
            cfg = replace(cfg, backends=replace(
                cfg.backends, sentiment="stub", hate="stub", embedding="stub",
                llm="stub", search="stub"))
        elif backends_override == "remote":
            missing = [role for role in
                       ("sentiment", "hate", "embedding", "llm", "search")
                       if getattr(cfg.backends, role) == "stub"]
            if missing:
                raise ConfigError(
                    f"--backends remote needs endpoint URLs for: {', '.join(missing)}")
    except ConfigError as exc:
        _fail(ctx, str(exc), EXIT_CONFIG)
        return
    ctx.obj = AppState(config=cfg, dry_run=dry_run)


def _store(state: AppState) -> Store:
    return Store(state.config.store_path)


def _window_days(store: Store, cfg: RunConfig, dataset: str) -> list[date]:
    """Days of the dataset inside the configured window (whole range when
    no window is set)."""
    try:
        days = store.days(dataset)
    except NotFoundError:
        return []
    if cfg.window_from is not None:
        days = [d for d in days if d >= cfg.window_from]
    if cfg.window_to is not None:
        days = [d for d in days if d <= cfg.window_to]
    return days


def _load_stored_posts(store: Store, cfg: RunConfig) -> list[Post]:
    posts: list[Post] = []
    for day in _window_days(store, cfg, "posts"):
        posts.extend(Post.from_dict(r) for r in store.get(DayPartitionKey("posts", day)))
    return posts


def _load_stored_classified(store: Store, cfg: RunConfig) -> list[ClassifiedPost]:
    out: list[ClassifiedPost] = []
    for day in _window_days(store, cfg, "classified"):
        out.extend(ClassifiedPost.from_dict(r)
                   for r in store.get(DayPartitionKey("classified", day)))
    return out


def _load_assignments(store: Store, cfg: RunConfig) -> dict[str, int]:
    """Post -> topic map recovered from stored snapshots (doc_ids)."""
    assignments: dict[str, int] = {}
    for day in _window_days(store, cfg, "topics"):
        for record in store.get(DayPartitionKey("topics", day)):
            for post_id in record.get("doc_ids", []):
                assignments[post_id] = record["topic_id"]
    return assignments


def _recognizer(gazetteer: Path | None) -> GazetteerRecognizer:
    if gazetteer is None:
        return GazetteerRecognizer([])
    return GazetteerRecognizer(json.loads(gazetteer.read_text("utf-8")))


# -- stage bodies (shared by the per-stage commands and run-all) ---------

def _do_ingest(state: AppState, input_path: Path, input_format: str) -> None:
    cfg = state.config
    result = load_posts(input_path, format=input_format)
    posts = dedup(result.posts)
    if cfg.keyword_file is not None:
        posts = filter_by_keywords(posts, KeywordSet.from_file(cfg.keyword_file))
    by_day = partition_by_day(posts)
    click.echo(f"ingest: {len(posts)} posts across {len(by_day)} days, "
               f"{len(result.rejects)} rejected lines")
    if state.dry_run:
        return
    store = _store(state)
    store.initialize()
    if result.rejects:
        report = store.root / "rejects" / f"{input_path.stem}.jsonl"
        write_rejects_report(result.rejects, report)
        click.echo(f"ingest: rejects report at {report}", err=True)
    for day in sorted(by_day):
        store.put(DayPartitionKey("posts", day), [p.to_dict() for p in by_day[day]])


def _do_classify(state: AppState) -> None:
    cfg = state.config
    store = _store(state)
    posts = _load_stored_posts(store, cfg)
    if not posts:
        click.echo("classify: no posts in window")
        return
    if cfg.backends.sentiment == "stub":
        sentiment = stub_sentiment_backend()
    else:
        sentiment = RemoteClassifierBackend("sentiment", cfg.backends.sentiment,
                                            auth_token=cfg.backends.token)
    if cfg.backends.hate == "stub":
        hate = stub_hate_backend()
    else:
        hate = RemoteClassifierBackend("hate", cfg.backends.hate,
                                       auth_token=cfg.backends.token)
    result = classify_posts(posts, sentiment, hate)
    click.echo(f"classify: {len(result.classified)} posts classified, "
               f"{len(result.errors)} errors")
    for err in result.errors:
        click.echo(f"classify: {err.post_id} failed at {err.stage}: {err.reason}",
                   err=True)
    if state.dry_run:
        return
    by_day: dict[date, list[ClassifiedPost]] = {}
    for cp in result.classified:
        by_day.setdefault(cp.post.day, []).append(cp)
    for day in sorted(by_day):
        store.put(DayPartitionKey("classified", day),
                  [cp.to_dict() for cp in by_day[day]])


def _do_topics(state: AppState) -> None:
    cfg = state.config
    store = _store(state)
    classified = _load_stored_classified(store, cfg)
    if not classified:
        click.echo("topics: no classified posts in window")
        return
    if cfg.backends.embedding == "stub":
        provider = HashedEmbeddingProvider(seed=cfg.topics.seed)
    else:
        provider = RemoteEmbeddingProvider(cfg.backends.embedding)
    model = model_window(classified, provider, cfg.topics)
    snapshots = daily_snapshots(model.assignments, classified, cfg.topics)
    n_topics = len({s.topic_id for s in snapshots})
    noise = sum(1 for t in model.assignments.values() if t == -1)
    click.echo(f"topics: {n_topics} topics over {len(classified)} posts "
               f"({noise} noise)")
    if state.dry_run:
        return
    by_day: dict[date, list[dict]] = {}
    for snap in snapshots:
        by_day.setdefault(snap.day, []).append(snap.to_dict())
    for day in sorted(by_day):
        store.put(DayPartitionKey("topics", day), by_day[day])


def _do_graph(state: AppState, gazetteer: Path | None) -> None:
    cfg = state.config
    store = _store(state)
    classified = _load_stored_classified(store, cfg)
    if not classified:
        click.echo("graph: no classified posts in window")
        return
    assignments = _load_assignments(store, cfg)
    recognizer = _recognizer(gazetteer)
    resolver = DefaultProfileResolver()
    by_day: dict[date, list[ClassifiedPost]] = {}
    for cp in classified:
        by_day.setdefault(cp.post.day, []).append(cp)
    total_nodes = total_edges = 0
    outputs: dict[date, dict] = {}
    for day in sorted(by_day):
        report = build_graph(by_day[day], assignments, recognizer, resolver)
        for post_id, reason in report.skipped:
            click.echo(f"graph: skipped post {post_id}: {reason}", err=True)
        link = report.graph.to_node_link()
        total_nodes += len(link["nodes"])
        total_edges += len(link["edges"])
        outputs[day] = link
    click.echo(f"graph: {total_nodes} nodes, {total_edges} edges "
               f"across {len(outputs)} days")
    if state.dry_run:
        return
    for day, link in outputs.items():
        store.put(DayPartitionKey("graph", day), [link])


def _do_factcheck(state: AppState) -> None:
    cfg = state.config
    store = _store(state)
    posts = _load_stored_posts(store, cfg)
    if not posts:
        click.echo("factcheck: no posts in window")
        return
    if cfg.backends.llm == "stub":
        llm = StubLlmClient()
    else:
        llm = HttpLlmClient(cfg.backends.llm, auth_token=cfg.backends.token)
    if cfg.backends.search == "stub":
        search = StubSearchClient()
    else:
        search = HttpSearchClient(cfg.backends.search)
    result = run_pipeline(posts, llm, search, max_in_flight=cfg.concurrency)
    click.echo(f"factcheck: {len(result.records)} records, "
               f"{len(result.errors)} errors")
    for err in result.errors:
        click.echo(f"factcheck: {err.post_id} failed at {err.stage}: {err.reason}",
                   err=True)
    if state.dry_run:
        return
    day_of = {p.id: p.day for p in posts}
    by_day: dict[date, list[dict]] = {}
    for record in result.records:
        by_day.setdefault(day_of[record.claim.post_id], []).append(record.to_dict())
    for day in sorted(by_day):
        store.put(DayPartitionKey("factcheck", day), by_day[day])


# -- commands -------------------------------------------------------------

@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "input_format", type=click.Choice(["jsonl", "csv"]),
              default="jsonl", show_default=True)
@click.pass_context
def ingest(ctx: click.Context, input_path: Path, input_format: str) -> None:
    """Load, validate, filter, and store raw posts."""
    state: AppState = ctx.obj
    _stage(ctx, lambda: _do_ingest(state, input_path, input_format))


@main.command()
@click.pass_context
def classify(ctx: click.Context) -> None:
    """Sentiment and hate-speech classification over stored posts."""
    state: AppState = ctx.obj
    _stage(ctx, lambda: _do_classify(state))


@main.command()
@click.pass_context
def topics(ctx: click.Context) -> None:
    """Topic modeling over stored classified posts."""
    state: AppState = ctx.obj
    _stage(ctx, lambda: _do_topics(state))


@main.command()
@click.option("--gazetteer", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="Entity gazetteer JSON.")
@click.pass_context
def graph(ctx: click.Context, gazetteer: Path | None) -> None:
    """Interaction graph per day from stored classified posts."""
    state: AppState = ctx.obj
    _stage(ctx, lambda: _do_graph(state, gazetteer))


@main.command()
@click.pass_context
def factcheck(ctx: click.Context) -> None:
    """Claim extraction, retrieval, and verdicts over stored posts."""
    state: AppState = ctx.obj
    _stage(ctx, lambda: _do_factcheck(state))


@main.command("eval")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--predictions", "predictions_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
def eval_cmd(ctx: click.Context, annotations_path: Path, predictions_path: Path) -> None:
    """Agreement and accuracy metrics against an annotation export."""
    state: AppState = ctx.obj

    def body() -> None:
        annotations = load_annotations(annotations_path)
        predictions = load_predictions(predictions_path)
        for task, kappa in sorted(kappa_by_task(annotations).items()):
            click.echo(f"kappa[{task}] = {kappa:.4f}")
        gold = gold_from_annotations(annotations)
        for task in sorted(predictions):
            if task not in TASK_LABELS:
                raise ValueError(f"unknown task in predictions: {task!r}")
            report = precision_recall_f1(predictions[task], gold.get(task, {}),
                                         mode="macro")
            click.echo(f"task {task}:")
            click.echo(report.to_table())

    if state.dry_run:
        click.echo("eval: dry run, inputs exist")
        return
    _stage(ctx, body)


@main.command()
@click.pass_context
def serve(ctx: click.Context) -> None:
    """Serve the read-only HTTP API over the store."""
    state: AppState = ctx.obj
    store = _store(state)
    if not store.exists():
        _fail(ctx, f"store not found at {state.config.store_path}", EXIT_CONFIG)
    if state.dry_run:
        click.echo("serve: dry run, store and config are valid")
        return

    def body() -> None:
        import uvicorn

        app = create_app(store, state.config.api)
        uvicorn.run(app, host=state.config.api.host, port=state.config.api.port,
                    log_config=None)

    _stage(ctx, body)


@main.command("run-all")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "input_format", type=click.Choice(["jsonl", "csv"]),
              default="jsonl", show_default=True)
@click.option("--gazetteer", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="Entity gazetteer JSON.")
@click.pass_context
def run_all(ctx: click.Context, input_path: Path, input_format: str,
            gazetteer: Path | None) -> None:
    """All store-writing stages in pipeline order."""
    state: AppState = ctx.obj

    def body() -> None:
        _do_ingest(state, input_path, input_format)
        _do_classify(state)
        _do_topics(state)
        _do_graph(state, gazetteer)
        _do_factcheck(state)

    _stage(ctx, body)


if __name__ == "__main__":
    main()
