"""Three-stage fact checking: claim extraction, evidence retrieval via news
search, verdict prediction. Prompt texts live as versioned template files
with ``{placeholder}`` syntax so operators can localize without rebuilds;
LLM and search access go through provider-agnostic clients with
deterministic mocks for tests and stub runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from .ingest import Post

logger = logging.getLogger(__name__)

VERDICT_CATEGORIES = ("False", "Mostly false", "Half true", "Mostly true", "True")

EVIDENCE_LIMIT = 3

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")
_SENTENCE_RE = re.compile(r".*?[.!?](?=\s|$)", re.S)


class StageFailure(RuntimeError):
    """A pipeline stage could not produce its output for one claim/post."""


def render_template(template: str, **fields: str) -> str:
    """Fill ``{name}`` placeholders; unknown or leftover placeholders raise."""

    def sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in fields:
            raise KeyError(f"template references unknown placeholder {{{name}}}")
        return fields[name]

    rendered = _PLACEHOLDER_RE.sub(sub, template)
    if "{" in rendered:
        raise ValueError("rendered prompt still contains '{'")
    return rendered


@lru_cache(maxsize=1)
def default_templates() -> dict[str, str]:
    """Load the shipped prompt templates, keyed by stage.role."""
    out = {}
    base = resources.files("discourse_monitor").joinpath("prompts")
    for name in ("claim_extraction", "query_generation", "evidence_summary", "verdict"):
        for role in ("system", "user"):
            out[f"{name}.{role}"] = base.joinpath(f"{name}.{role}.txt").read_text("utf-8").rstrip("\n")
    return out


def load_templates(directory: str | Path | None = None) -> dict[str, str]:
    """Templates from a directory of ``<stage>.<role>.txt`` files, or the
    shipped defaults."""
    if directory is None:
        return dict(default_templates())
    out = {}
    for path in sorted(Path(directory).glob("*.txt")):
        out[path.name[: -len(".txt")]] = path.read_text("utf-8").rstrip("\n")
    return out


class LlmClient(Protocol):
    model: str

    def complete(self, system_prompt: str, user_prompt: str) -> str: ...


class SearchClient(Protocol):
    def search(self, query: str) -> list[dict]: ...


class HttpLlmClient:
    """POST {"system": ..., "user": ...} -> {"text": ...}."""

    def __init__(self, endpoint: str, model: str = "remote", timeout: float = 60.0,
                 auth_token: str | None = None, session: requests.Session | None = None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.auth_token = auth_token
        self._session = session or requests.Session()

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        headers = {}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        resp = self._session.post(self.endpoint,
                                  json={"system": system_prompt, "user": user_prompt},
                                  headers=headers, timeout=self.timeout)
        resp.raise_for_status()
        return str(resp.json()["text"])


class HttpSearchClient:
    """GET endpoint?q=<query> -> JSON array of {title, url, snippet}."""

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 session: requests.Session | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self._session = session or requests.Session()

    def search(self, query: str) -> list[dict]:
        resp = self._session.get(self.endpoint, params={"q": query}, timeout=self.timeout)
        resp.raise_for_status()
        return list(resp.json())


def _digest(system_prompt: str, user_prompt: str) -> str:
    h = hashlib.sha256()
    h.update(system_prompt.encode("utf-8"))
    h.update(b"\x1f")
    h.update(user_prompt.encode("utf-8"))
    return h.hexdigest()


class MockLlmClient:
    """Deterministic map from (system, user) prompt digests to canned replies.

    Unknown prompts raise KeyError so tests notice unexpected calls. Every
    call is recorded on .calls.
    """

    model = "mock"

    def __init__(self, replies: dict[str, str] | None = None):
        self._replies = dict(replies or {})
        self.calls: list[tuple[str, str]] = []

    def add_reply(self, system_prompt: str, user_prompt: str, reply: str) -> None:
        self._replies[_digest(system_prompt, user_prompt)] = reply

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        self.calls.append((system_prompt, user_prompt))
        key = _digest(system_prompt, user_prompt)
        if key not in self._replies:
            raise KeyError(f"no canned reply for prompt digest {key[:12]}")
        return self._replies[key]


class MockSearchClient:
    """Fixture lookup: query -> canned result list (missing query -> [])."""

    def __init__(self, results_by_query: dict[str, list[dict]] | None = None):
        self._results = dict(results_by_query or {})
        self.calls: list[str] = []

    def search(self, query: str) -> list[dict]:
        self.calls.append(query)
        return list(self._results.get(query, []))


class StubLlmClient:
    """Deterministic offline stand-in that routes on the shipped system
    prompts and synthesizes replies from the user prompt content. Backs
    ``--backends stub`` pipeline runs; no network, no state."""

    model = "stub"

    def __init__(self, templates: dict[str, str] | None = None):
        self._templates = templates or default_templates()

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        t = self._templates
        if system_prompt == t["claim_extraction.system"]:
            return json.dumps({"statements": [_payload_of(user_prompt)]}, ensure_ascii=False)
        if system_prompt == t["query_generation.system"]:
            tokens = _payload_of(user_prompt).split()
            return " ".join(tokens[:8])
        if system_prompt == t["evidence_summary.system"]:
            return user_prompt.splitlines()[-1] if user_prompt.splitlines() else ""
        if system_prompt == t["verdict.system"]:
            h = int.from_bytes(hashlib.blake2b(user_prompt.encode("utf-8"),
                                               digest_size=4).digest(), "big")
            category = VERDICT_CATEGORIES[h % len(VERDICT_CATEGORIES)]
            return json.dumps({"Truthfulness": category,
                               "Reason": "Einschätzung anhand des bereitgestellten Kontexts."},
                              ensure_ascii=False)
        raise StageFailure("stub llm received an unknown system prompt")


def _payload_of(user_prompt: str) -> str:
    """The text the user templates append after their first ': '."""
    _, sep, payload = user_prompt.partition(": ")
    payload = payload if sep else user_prompt
    return payload.rstrip().rstrip(".")


class StubSearchClient:
    """Synthesizes a fixed number of deterministic results per query."""

    def __init__(self, n_results: int = 3):
        self.n_results = n_results

    def search(self, query: str) -> list[dict]:
        h = hashlib.blake2b(query.encode("utf-8"), digest_size=6).hexdigest()
        return [
            {
                "title": f"Bericht {i + 1}: {query}",
                "url": f"https://news.example/{h}/{i + 1}",
                "snippet": f"Zusammenfassung {i + 1} der Suche nach '{query}'.",
            }
            for i in range(self.n_results)
        ]


@dataclass(frozen=True)
class Claim:
    post_id: str
    statement: str
    author: str
    author_party: str
    date: str

    def __post_init__(self) -> None:
        if not self.statement:
            raise ValueError("statement must be non-empty")

    def to_dict(self) -> dict:
        return {"post_id": self.post_id, "statement": self.statement,
                "author": self.author, "author_party": self.author_party,
                "date": self.date}


@dataclass(frozen=True)
class Verdict:
    category: str
    reason: str

    def __post_init__(self) -> None:
        if self.category not in VERDICT_CATEGORIES:
            raise ValueError(f"unknown verdict category: {self.category!r}")

    def to_dict(self) -> dict:
        return {"category": self.category, "reason": self.reason}


@dataclass(frozen=True)
class FactCheckRecord:
    claim: Claim
    query: str
    evidence_summaries: tuple[str, ...]
    grounding_context: str
    verdict: Verdict
    channel: str
    no_evidence: bool = False

    def __post_init__(self) -> None:
        if len(self.evidence_summaries) > EVIDENCE_LIMIT:
            raise ValueError(f"at most {EVIDENCE_LIMIT} evidence summaries allowed")

    def to_dict(self) -> dict:
        return {
            "claim": self.claim.to_dict(),
            "query": self.query,
            "evidence_summaries": list(self.evidence_summaries),
            "grounding_context": self.grounding_context,
            "verdict": self.verdict.to_dict(),
            "channel": self.channel,
            "no_evidence": self.no_evidence,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "FactCheckRecord":
        return cls(
            claim=Claim(**raw["claim"]),
            query=raw["query"],
            evidence_summaries=tuple(raw["evidence_summaries"]),
            grounding_context=raw["grounding_context"],
            verdict=Verdict(**raw["verdict"]),
            channel=raw["channel"],
            no_evidence=bool(raw.get("no_evidence", False)),
        )


def sentences(text: str) -> list[str]:
    """Sentences are maximal runs ending in . ! or ? followed by space or
    end; a trailing unterminated fragment counts as one more sentence."""
    out = [m.group(0).strip() for m in _SENTENCE_RE.finditer(text)]
    consumed = sum(len(m.group(0)) for m in _SENTENCE_RE.finditer(text))
    rest = text[consumed:].strip()
    if rest:
        out.append(rest)
    return out


def _claim_context(post: Post) -> dict[str, str]:
    return {
        "author": post.author,
        "author_party": post.author_party or "unknown",
        "date": post.day.isoformat(),
    }


def extract_claims(post: Post, llm: LlmClient,
                   templates: dict[str, str] | None = None) -> list[Claim]:
    """Stage one: pull verifiable direct statements out of a post.

    The reply must be a JSON object with a "statements" string array; one
    retry with identical prompts, then StageFailure.
    """
    templates = templates or default_templates()
    ctx = _claim_context(post)
    system = templates["claim_extraction.system"]
    user = render_template(templates["claim_extraction.user"], query=post.text, **ctx)

    last_error = None
    for _ in range(2):
        reply = llm.complete(system, user)
        try:
            statements = _parse_statements(reply)
        except ValueError as exc:
            last_error = exc
            continue
        return [Claim(post_id=post.id, statement=s, **ctx) for s in statements]
    raise StageFailure(f"claim extraction reply unparseable after retry: {last_error}")


def _parse_statements(reply: str) -> list[str]:
    try:
        obj = json.loads(reply)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("statements"), list):
        raise ValueError('expected an object with a "statements" array')
    statements = obj["statements"]
    if not all(isinstance(s, str) for s in statements):
        raise ValueError("statements must all be strings")
    return [s for s in statements if s.strip()]


def generate_query(claim: Claim, llm: LlmClient,
                   templates: dict[str, str] | None = None) -> str:
    """Stage two, part one: turn the claim into an optimized search query."""
    templates = templates or default_templates()
    system = templates["query_generation.system"]
    user = render_template(templates["query_generation.user"],
                           author=claim.author, date=claim.date, query=claim.statement)
    reply = llm.complete(system, user).strip().strip('"').strip("'").strip()
    if not reply:
        raise StageFailure("query generation returned an empty reply")
    return reply


@dataclass
class EvidenceBundle:
    summaries: list[str] = field(default_factory=list)
    grounding_context: str = ""
    no_evidence: bool = False


def retrieve_evidence(query: str, search: SearchClient, llm: LlmClient,
                      templates: dict[str, str] | None = None) -> EvidenceBundle:
    """Stage two, part two: summarize the first 3 search results.

    Zero results yield an empty context flagged no_evidence; the verdict
    stage still runs on it.
    """
    if not query:
        raise ValueError("query must be non-empty")
    templates = templates or default_templates()
    results = search.search(query)[:EVIDENCE_LIMIT]
    if not results:
        return EvidenceBundle(no_evidence=True)
    system = templates["evidence_summary.system"]
    summaries = []
    for result in results:
        user = render_template(templates["evidence_summary.user"],
                               title=str(result.get("title", "")),
                               snippet=str(result.get("snippet", "")))
        summaries.append(llm.complete(system, user).strip())
    return EvidenceBundle(summaries=summaries, grounding_context="\n\n".join(summaries))


def predict_verdict(claim: Claim, grounding_context: str, llm: LlmClient,
                    templates: dict[str, str] | None = None) -> Verdict:
    """Stage three: five-category truthfulness verdict with a short reason.

    The category must match one of the five printed strings exactly
    (case-sensitive); reasons beyond two sentences are truncated with a
    warning. Unparseable JSON gets one retry.
    """
    templates = templates or default_templates()
    system = templates["verdict.system"]
    user = render_template(templates["verdict.user"], claim=claim.statement,
                           grounding_context=grounding_context,
                           author=claim.author, author_party=claim.author_party,
                           date=claim.date)
    last_error = None
    obj = None
    for _ in range(2):
        reply = llm.complete(system, user)
        try:
            obj = json.loads(reply)
            break
        except json.JSONDecodeError as exc:
            last_error = exc
    if obj is None:
        raise StageFailure(f"verdict reply unparseable after retry: {last_error}")
    if not isinstance(obj, dict) or "Truthfulness" not in obj or "Reason" not in obj:
        raise StageFailure('verdict reply must carry "Truthfulness" and "Reason"')
    category = obj["Truthfulness"]
    if category not in VERDICT_CATEGORIES:
        raise StageFailure(f"unknown verdict category: {category!r}")
    reason = str(obj["Reason"])
    parts = sentences(reason)
    if len(parts) > 2:
        logger.warning("verdict reason exceeded two sentences; truncating")
        reason = " ".join(parts[:2])
    return Verdict(category=category, reason=reason)


@dataclass
class StageError:
    post_id: str
    stage: str
    reason: str

    def to_dict(self) -> dict:
        return {"post_id": self.post_id, "stage": self.stage, "reason": self.reason}


@dataclass
class PipelineResult:
    records: list[FactCheckRecord] = field(default_factory=list)
    errors: list[StageError] = field(default_factory=list)


def check_post(post: Post, llm: LlmClient, search: SearchClient,
               templates: dict[str, str] | None = None) -> PipelineResult:
    """Run all three stages for one post; claims fan out sequentially."""
    result = PipelineResult()
    try:
        claims = extract_claims(post, llm, templates)
    except StageFailure as exc:
        result.errors.append(StageError(post.id, "claim_extraction", str(exc)))
        return result
    channel = post.author or post.platform
    for claim in claims:
        try:
            query = generate_query(claim, llm, templates)
            evidence = retrieve_evidence(query, search, llm, templates)
            verdict = predict_verdict(claim, evidence.grounding_context, llm, templates)
        except StageFailure as exc:
            result.errors.append(StageError(post.id, "claim_pipeline", str(exc)))
            continue
        result.records.append(FactCheckRecord(
            claim=claim,
            query=query,
            evidence_summaries=tuple(evidence.summaries),
            grounding_context=evidence.grounding_context,
            verdict=verdict,
            channel=channel,
            no_evidence=evidence.no_evidence,
        ))
    return result


def run_pipeline(posts: list[Post], llm: LlmClient, search: SearchClient,
                 templates: dict[str, str] | None = None,
                 max_in_flight: int = 1) -> PipelineResult:
    """Fact-check a batch of posts, reassembling results in input order.

    Posts may be processed concurrently up to max_in_flight; the stages
    within one post stay sequential. With mock clients the whole run is
    deterministic.
    """
    result = PipelineResult()
    if not posts:
        return result
    if max_in_flight <= 1:
        partials = [check_post(p, llm, search, templates) for p in posts]
    else:
        with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
            partials = list(pool.map(lambda p: check_post(p, llm, search, templates), posts))
    for partial in partials:
        result.records.extend(partial.records)
        result.errors.extend(partial.errors)
    return result


def verdict_histogram(records: list[FactCheckRecord]) -> dict[str, dict[str, int]]:
    """Per-channel claim counts over the five categories, zero-filled."""
    out: dict[str, dict[str, int]] = {}
    for record in records:
        counts = out.setdefault(record.channel, {c: 0 for c in VERDICT_CATEGORIES})
        counts[record.verdict.category] += 1
    return out
