"""Shared fixtures plus the acceptance summary: every test in
test_acceptance.py reports one PASS/FAIL line at the end of the run."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from discourse_monitor.classify import ClassifiedPost, HateResult, SentimentResult
from discourse_monitor.ingest import Post

REPO_ROOT = Path(__file__).resolve().parent.parent

_acceptance_outcomes: dict[str, str] = {}
_acceptance_labels: dict[str, str] = {}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def test_fixtures_dir() -> Path:
    return Path(__file__).resolve().parent / "fixtures"


def make_post(post_id: str, text: str, *, author: str = "alice",
              platform: str = "telegram", url: str | None = None,
              day: str = "2025-03-03", hour: int = 9,
              author_party: str | None = None) -> Post:
    return Post(
        id=post_id,
        platform=platform,
        author=author,
        author_party=author_party,
        url=url or f"https://t.me/{author}/1",
        published_at=datetime(*[int(x) for x in day.split("-")], hour,
                              tzinfo=timezone.utc),
        text=text,
    )


def make_classified(post: Post, compound: float = 0.0,
                    hate_score: float = 0.0) -> ClassifiedPost:
    sentiment_label = ("positive" if compound >= 0.05
                       else "negative" if compound <= -0.05 else "neutral")
    return ClassifiedPost(
        post=post,
        sentiment=SentimentResult(label=sentiment_label, compound=compound),
        hate=HateResult(label="hate" if hate_score > 0.5 else "normal",
                        hate_score=hate_score),
    )


@pytest.fixture
def post_factory():
    return make_post


@pytest.fixture
def classified_factory():
    return make_classified


def pytest_collection_modifyitems(config, items):
    for item in items:
        if item.module.__name__ == "test_acceptance":
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _acceptance_labels[item.nodeid] = doc


def pytest_runtest_logreport(report):
    if report.nodeid not in _acceptance_labels:
        return
    if report.when == "call":
        _acceptance_outcomes[report.nodeid] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_labels:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid, label in _acceptance_labels.items():
        outcome = _acceptance_outcomes.get(nodeid, "not run")
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
            outcome, outcome.upper())
        terminalreporter.write_line(f"[{status}] {label}")
