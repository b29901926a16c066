"""Corpus ingestion: load post files, filter by an expert keyword set,
deduplicate, and partition into calendar-day batches.

Malformed records never abort a daily batch; they are quarantined into a
rejects report of ``{line_number, reason}`` entries.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

from .textproc import casefold_tokens

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["id", "platform", "author", "author_party", "url", "published_at", "text", "language"]


class PostValidationError(ValueError):
    """A record violates the Post invariants."""


@dataclass(frozen=True)
class Post:
    """One ingested social-media or news item."""

    id: str
    platform: str
    author: str
    url: str
    published_at: datetime
    text: str
    author_party: str | None = None
    language: str = "de"

    def __post_init__(self) -> None:
        if not self.id:
            raise PostValidationError("id must be non-empty")
        if not isinstance(self.published_at, datetime) or self.published_at.tzinfo is None:
            raise PostValidationError("published_at must be a timezone-aware datetime")
        if not self.text.strip():
            raise PostValidationError("text must be non-empty after whitespace trim")

    @property
    def day(self) -> date:
        """UTC calendar date of publication."""
        return self.published_at.astimezone(timezone.utc).date()

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "platform": self.platform,
            "author": self.author,
            "author_party": self.author_party,
            "url": self.url,
            "published_at": self.published_at.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "text": self.text,
            "language": self.language,
        }
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "Post":
        missing = [k for k in ("id", "platform", "author", "url", "published_at", "text") if k not in raw]
        if missing:
            raise PostValidationError(f"missing fields: {', '.join(missing)}")
        return cls(
            id=str(raw["id"]),
            platform=str(raw["platform"]),
            author=str(raw["author"]),
            author_party=raw.get("author_party") or None,
            url=str(raw["url"]),
            published_at=parse_instant(str(raw["published_at"])),
            text=str(raw["text"]),
            language=str(raw.get("language") or "de"),
        )


def parse_instant(value: str) -> datetime:
    """Parse an ISO-8601 instant and normalize it to UTC second precision."""
    try:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise PostValidationError(f"published_at does not parse: {value!r}") from exc
    if dt.tzinfo is None:
        raise PostValidationError(f"published_at lacks a UTC offset: {value!r}")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True)
class KeywordSet:
    """Case-folded expert keywords; matching is whole-token."""

    keywords: frozenset[str]

    def __post_init__(self) -> None:
        if any(not k for k in self.keywords):
            raise ValueError("keywords must be non-empty strings")
        folded = frozenset(k.casefold() for k in self.keywords)
        object.__setattr__(self, "keywords", folded)

    @classmethod
    def from_file(cls, path: str | Path) -> "KeywordSet":
        """One keyword per line, UTF-8, `#` comments and blank lines ignored."""
        words = set()
        for line in Path(path).read_text("utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.casefold())
        return cls(frozenset(words))

    def matches(self, text: str) -> bool:
        if not self.keywords:
            return False
        return not self.keywords.isdisjoint(casefold_tokens(text))


@dataclass
class Reject:
    """One quarantined record of a load run."""

    line_number: int
    reason: str

    def to_dict(self) -> dict:
        return {"line_number": self.line_number, "reason": self.reason}


@dataclass
class LoadResult:
    posts: list[Post] = field(default_factory=list)
    rejects: list[Reject] = field(default_factory=list)


def load_posts(path: str | Path, format: str = "jsonl") -> LoadResult:
    """Load all parseable posts from a JSONL or CSV file, in file order.

    Records violating the Post invariants are collected as rejects rather
    than raised; an unreadable file raises OSError.
    """
    path = Path(path)
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise ValueError(f"unknown format: {format!r}")


def _load_jsonl(path: Path) -> LoadResult:
    result = LoadResult()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise PostValidationError("line is not a JSON object")
                result.posts.append(Post.from_dict(raw))
            except (json.JSONDecodeError, PostValidationError) as exc:
                result.rejects.append(Reject(lineno, str(exc)))
    return result


def _load_csv(path: Path) -> LoadResult:
    result = LoadResult()
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return result
        if header != CSV_COLUMNS:
            raise OSError(f"CSV header must be {','.join(CSV_COLUMNS)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) != len(CSV_COLUMNS):
                    raise PostValidationError(f"expected {len(CSV_COLUMNS)} columns, got {len(row)}")
                result.posts.append(Post.from_dict(dict(zip(CSV_COLUMNS, row))))
            except PostValidationError as exc:
                result.rejects.append(Reject(lineno, str(exc)))
    return result


def write_rejects_report(rejects: list[Reject], path: str | Path) -> None:
    """Persist the rejects report as JSONL of {line_number, reason}."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for r in rejects:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def filter_by_keywords(posts: list[Post], kw: KeywordSet) -> list[Post]:
    """Keep posts whose case-folded word tokens contain a keyword.

    Whole-token matching, so "Grenzenlos" never matches keyword "grenze".
    Order preserved; idempotent.
    """
    return [p for p in posts if kw.matches(p.text)]


def dedup(posts: list[Post]) -> list[Post]:
    """Keep the first occurrence per post id, preserving order."""
    seen: set[str] = set()
    out = []
    for p in posts:
        if p.id not in seen:
            seen.add(p.id)
            out.append(p)
    return out


def partition_by_day(posts: list[Post]) -> dict[date, list[Post]]:
    """Bucket posts by the UTC date of published_at."""
    buckets: dict[date, list[Post]] = {}
    for p in posts:
        buckets.setdefault(p.day, []).append(p)
    return buckets
