"""Sentiment and hate classification over pluggable backends.

A backend scores a batch of texts into raw score vectors; this module owns
the label derivation rules (compound thresholds, argmax with tie-break) and
the batch orchestration with an optional translation stage. Deterministic
lexicon stubs stand in for remote models in tests and stub pipeline runs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from .ingest import Post
from .textproc import casefold_tokens

logger = logging.getLogger(__name__)

SENTIMENT_LABELS = ("positive", "negative", "neutral")
HATE_LABELS = ("hate", "normal")

POSITIVE_THRESHOLD = 0.05
NEGATIVE_THRESHOLD = -0.05


class BackendError(RuntimeError):
    """A backend could not score a batch; retrying may help."""


class CapabilityMismatch(ValueError):
    """Backend capability tag does not match its role."""


def label_from_compound(compound: float) -> str:
    """Three-way sentiment label from a compound score in [-1, 1].

    Inclusive thresholds: >= +0.05 positive, <= -0.05 negative, else neutral.
    """
    if not (-1.0 <= compound <= 1.0):
        raise ValueError(f"compound score out of range [-1, 1]: {compound}")
    if compound >= POSITIVE_THRESHOLD:
        return "positive"
    if compound <= NEGATIVE_THRESHOLD:
        return "negative"
    return "neutral"


@dataclass(frozen=True)
class SentimentResult:
    label: str
    compound: float

    def __post_init__(self) -> None:
        if self.label != label_from_compound(self.compound):
            raise ValueError(f"label {self.label!r} inconsistent with compound {self.compound}")

    def to_dict(self) -> dict:
        return {"label": self.label, "compound": self.compound}


@dataclass(frozen=True)
class HateResult:
    label: str
    hate_score: float

    def __post_init__(self) -> None:
        if self.label not in HATE_LABELS:
            raise ValueError(f"unknown hate label: {self.label!r}")
        if not (0.0 <= self.hate_score <= 1.0):
            raise ValueError(f"hate_score out of range [0, 1]: {self.hate_score}")

    def to_dict(self) -> dict:
        return {"label": self.label, "hate_score": self.hate_score}


def hate_from_scores(scores: tuple[float, float]) -> HateResult:
    """Binary hate/normal decision by argmax over a (normal, hate) pair.

    Ties break to normal. The hate_score is the hate component of the
    softmax when the pair looks like logits, or the raw hate component when
    the pair is already a probability distribution.
    """
    normal, hate = scores
    if not (math.isfinite(normal) and math.isfinite(hate)):
        raise ValueError(f"scores must be finite, got {scores}")
    label = "hate" if hate > normal else "normal"
    if normal >= 0.0 and hate >= 0.0 and abs((normal + hate) - 1.0) < 1e-9:
        hate_score = hate
    else:
        m = max(normal, hate)
        en, eh = math.exp(normal - m), math.exp(hate - m)
        hate_score = eh / (en + eh)
    return HateResult(label=label, hate_score=hate_score)


class ClassifierBackend(Protocol):
    """Batch scorer: one raw score vector per input text."""

    capability: str
    backend_id: str

    def score_batch(self, texts: list[str]) -> list[list[float]]: ...


class TranslationProvider(Protocol):
    backend_id: str

    def translate(self, text: str, source_language: str) -> str: ...


class IdentityTranslator:
    """No-op translation provider; returns the input unchanged."""

    backend_id = "translator:identity"

    def translate(self, text: str, source_language: str) -> str:
        return text


class LexiconSentimentBackend:
    """Deterministic sentiment stub: compound = clamp(sum of per-token
    lexicon contributions, -1, 1). Unknown tokens contribute 0."""

    capability = "sentiment"

    def __init__(self, lexicon: dict[str, float], backend_id: str = "sentiment:lexicon-stub"):
        self.lexicon = {k.casefold(): float(v) for k, v in lexicon.items()}
        self.backend_id = backend_id

    @classmethod
    def from_file(cls, path: str | Path) -> "LexiconSentimentBackend":
        return cls(json.loads(Path(path).read_text("utf-8")))

    def score_batch(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            total = sum(self.lexicon.get(tok, 0.0) for tok in casefold_tokens(text))
            out.append([max(-1.0, min(1.0, total))])
        return out


class LexiconHateBackend:
    """Deterministic hate stub: hate mass = clamp(sum of matched cue
    weights, 0, 1); emits the probability pair (1 - mass, mass)."""

    capability = "hate"

    def __init__(self, lexicon: dict[str, float], backend_id: str = "hate:lexicon-stub"):
        self.lexicon = {k.casefold(): float(v) for k, v in lexicon.items()}
        self.backend_id = backend_id

    @classmethod
    def from_file(cls, path: str | Path) -> "LexiconHateBackend":
        return cls(json.loads(Path(path).read_text("utf-8")))

    def score_batch(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            mass = sum(self.lexicon.get(tok, 0.0) for tok in casefold_tokens(text))
            mass = max(0.0, min(1.0, mass))
            out.append([1.0 - mass, mass])
        return out


# Built-in cue lists backing --backends stub runs. Small on purpose: they
# only need to move fixture texts off the neutral point deterministically.
STUB_SENTIMENT_LEXICON = {
    "gut": 0.4, "super": 0.6, "toll": 0.5, "freude": 0.4, "dank": 0.3,
    "erfolg": 0.4, "stark": 0.2, "hoffnung": 0.3, "gewinnt": 0.3,
    "schlecht": -0.4, "schlimm": -0.5, "krise": -0.3, "angst": -0.4,
    "wut": -0.4, "verlust": -0.3, "skandal": -0.5, "versagen": -0.5,
    "luege": -0.4, "lüge": -0.4, "katastrophe": -0.6,
}

STUB_HATE_LEXICON = {
    "hass": 0.6, "hasse": 0.6, "vernichten": 0.5, "abschaum": 0.8,
    "dreckspack": 0.8, "volksverräter": 0.8, "volksverraeter": 0.8,
    "ungeziefer": 0.8, "entsorgen": 0.5, "raus": 0.3,
}


def stub_sentiment_backend() -> "LexiconSentimentBackend":
    return LexiconSentimentBackend(STUB_SENTIMENT_LEXICON)


def stub_hate_backend() -> "LexiconHateBackend":
    return LexiconHateBackend(STUB_HATE_LEXICON)


class RemoteClassifierBackend:
    """HTTP inference client: POST {"texts": [...]} -> {"scores": [[...], ...]}."""

    def __init__(self, capability: str, endpoint: str, timeout: float = 30.0,
                 auth_token: str | None = None, session: requests.Session | None = None):
        self.capability = capability
        self.endpoint = endpoint
        self.timeout = timeout
        self.auth_token = auth_token
        self.backend_id = f"{capability}:{endpoint}"
        self._session = session or requests.Session()

    def score_batch(self, texts: list[str]) -> list[list[float]]:
        headers = {}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        try:
            resp = self._session.post(self.endpoint, json={"texts": texts},
                                      headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            scores = resp.json()["scores"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise BackendError(f"backend {self.backend_id} failed: {exc}") from exc
        if len(scores) != len(texts):
            raise BackendError(
                f"backend {self.backend_id} returned {len(scores)} vectors for {len(texts)} texts")
        return [[float(x) for x in vec] for vec in scores]


@dataclass(frozen=True)
class ClassifiedPost:
    post: Post
    sentiment: SentimentResult
    hate: HateResult
    backend_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "post": self.post.to_dict(),
            "sentiment": self.sentiment.to_dict(),
            "hate": self.hate.to_dict(),
            "backend_ids": list(self.backend_ids),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ClassifiedPost":
        return cls(
            post=Post.from_dict(raw["post"]),
            sentiment=SentimentResult(**raw["sentiment"]),
            hate=HateResult(**raw["hate"]),
            backend_ids=tuple(raw.get("backend_ids", ())),
        )


@dataclass
class ClassifyError:
    post_id: str
    stage: str
    reason: str


@dataclass
class ClassifyResult:
    classified: list[ClassifiedPost] = field(default_factory=list)
    errors: list[ClassifyError] = field(default_factory=list)


def classify_posts(posts: list[Post], sentiment_backend: ClassifierBackend,
                   hate_backend: ClassifierBackend,
                   translator: TranslationProvider | None = None) -> ClassifyResult:
    """Classify a batch of posts, preserving input order.

    Texts pass through the translator before scoring. Per-post derivation
    failures are recorded and the batch continues; a whole-batch transport
    failure surfaces as BackendError (retryable).
    """
    if sentiment_backend.capability != "sentiment":
        raise CapabilityMismatch(f"sentiment backend has capability {sentiment_backend.capability!r}")
    if hate_backend.capability != "hate":
        raise CapabilityMismatch(f"hate backend has capability {hate_backend.capability!r}")
    translator = translator or IdentityTranslator()

    result = ClassifyResult()
    if not posts:
        return result

    texts: list[str | None] = []
    for p in posts:
        try:
            texts.append(translator.translate(p.text, p.language))
        except Exception as exc:
            result.errors.append(ClassifyError(p.id, "translate", str(exc)))
            texts.append(None)

    translated = [t for t in texts if t is not None]
    sent_scores = iter(sentiment_backend.score_batch(translated))
    hate_scores = iter(hate_backend.score_batch(translated))
    backend_ids = (sentiment_backend.backend_id, hate_backend.backend_id, translator.backend_id)

    for post, text in zip(posts, texts):
        if text is None:
            continue
        s_vec, h_vec = next(sent_scores), next(hate_scores)
        try:
            if len(s_vec) != 1:
                raise ValueError(f"sentiment backend must return one score, got {len(s_vec)}")
            if len(h_vec) != 2:
                raise ValueError(f"hate backend must return a (normal, hate) pair, got {len(h_vec)}")
            compound = s_vec[0]
            sentiment = SentimentResult(label=label_from_compound(compound), compound=compound)
            hate = hate_from_scores((h_vec[0], h_vec[1]))
        except ValueError as exc:
            result.errors.append(ClassifyError(post.id, "derive", str(exc)))
            continue
        result.classified.append(ClassifiedPost(post=post, sentiment=sentiment,
                                                hate=hate, backend_ids=backend_ids))
    return result
