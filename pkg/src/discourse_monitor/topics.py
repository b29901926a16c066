"""Topic dynamics: embed posts over an analysis window, reduce and cluster
once globally, represent clusters with class-based TF-IDF, and emit per-day
topic snapshots (frequency + per-day term representation).

The default reducer is an exact principal-component projection and the
default clusterer a documented density rule; both are pluggable behind the
same contracts so heavier methods can be dropped in. Determinism under a
fixed seed is a hard requirement for every default.
"""

from __future__ import annotations

import hashlib
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Hashable, Protocol, Sequence

import numpy as np
import requests

from .classify import ClassifiedPost
from .textproc import modeling_tokens

logger = logging.getLogger(__name__)


class EmbeddingProvider(Protocol):
    """Maps a batch of texts to fixed-dimension real vectors."""

    provider_id: str

    def embed_batch(self, texts: list[str]) -> list[list[float]]: ...


class HashedEmbeddingProvider:
    """Deterministic test stub: hashed bag-of-words projection.

    Each modeling token hashes (keyed blake2b, so stable across runs and
    platforms) to one coordinate and a sign; the token vectors sum and the
    result is L2-normalized. Same seed, same text -> bit-identical vector.
    """

    def __init__(self, dim: int = 32, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)
        self.provider_id = f"embedding:hashed-bow-{dim}-seed{seed}"

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim)
            for tok in modeling_tokens(text):
                h = int.from_bytes(
                    hashlib.blake2b(tok.encode("utf-8"), digest_size=8, key=self._key).digest(),
                    "big")
                sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
                vec[h % self.dim] += sign
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec /= norm
            out.append(vec.tolist())
        return out


class RemoteEmbeddingProvider:
    """HTTP embedding client: POST {"texts": [...]} -> {"vectors": [[...], ...]}."""

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 session: requests.Session | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.provider_id = f"embedding:{endpoint}"
        self._session = session or requests.Session()

    def embed_batch(self, texts: list[str]) -> list[list[float]]:
        try:
            resp = self._session.post(self.endpoint, json={"texts": texts}, timeout=self.timeout)
            resp.raise_for_status()
            vectors = resp.json()["vectors"]
        except (requests.RequestException, KeyError, ValueError) as exc:
            raise EmbeddingError(f"embedding provider failed: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbeddingError(f"provider returned {len(vectors)} vectors for {len(texts)} texts")
        return [[float(x) for x in v] for v in vectors]


class EmbeddingError(RuntimeError):
    """Embedding provider failure; retryable."""


@dataclass(frozen=True)
class TopicConfig:
    target_dim: int = 5
    min_cluster_size: int = 10
    top_n_terms: int = 10
    seed: int = 0
    window_days: int = 14

    def __post_init__(self) -> None:
        if self.target_dim < 1:
            raise ValueError("target_dim must be positive")
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.top_n_terms < 1:
            raise ValueError("top_n_terms must be positive")
        if self.window_days < 1:
            raise ValueError("window_days must be positive")


def reduce_dimensions(vectors: Sequence[Sequence[float]], target_dim: int, seed: int = 0) -> np.ndarray:
    """Project vectors onto their top principal components.

    Exact centered-SVD projection with a deterministic sign convention
    (largest-magnitude loading positive). Fewer than 2 vectors pass through
    unchanged with a warning; target_dim >= input dimension is an identity.
    The seed is part of the reducer contract for stochastic replacements;
    the exact projection ignores it.
    """
    if target_dim < 1:
        raise ValueError("target_dim must be positive")
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    n, d = X.shape
    if n < 2:
        logger.warning("reduce_dimensions: %d vector(s), passing through unchanged", n)
        return X.copy()
    if target_dim > d:
        raise ValueError(f"target_dim {target_dim} exceeds input dimension {d}")
    if target_dim == d:
        return X.copy()
    centered = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:target_dim]
    for i in range(components.shape[0]):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    return centered @ components.T


def cluster(vectors: Sequence[Sequence[float]], min_cluster_size: int,
            radius_percentile: float = 10.0) -> list[int]:
    """Density clustering with a documented, fully deterministic rule.

    Radius r is the given percentile of all pairwise Euclidean distances.
    A point is a core when at least min_cluster_size points (itself
    included) lie within r. Cores within r of each other form clusters;
    a non-core point joins the cluster of its nearest core within r
    (ties to the lowest point index) and is noise (-1) otherwise. Clusters
    that end up smaller than min_cluster_size dissolve into noise, so every
    returned cluster has >= min_cluster_size members.
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    X = np.asarray(vectors, dtype=np.float64)
    n = len(X)
    if n == 0:
        return []
    if n == 1:
        return [-1]
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    condensed = dist[np.triu_indices(n, k=1)]
    r = float(np.percentile(condensed, radius_percentile))

    within = dist <= r
    neighbor_counts = within.sum(axis=1)  # includes self (distance 0)
    core = neighbor_counts >= min_cluster_size

    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    core_idx = np.flatnonzero(core)
    for ii, i in enumerate(core_idx):
        for j in core_idx[ii + 1:]:
            if within[i, j]:
                ri, rj = find(int(i)), find(int(j))
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    labels = [-1] * n
    root_to_label: dict[int, int] = {}
    for i in range(n):
        if core[i]:
            root = find(i)
            if root not in root_to_label:
                root_to_label[root] = len(root_to_label)
            labels[i] = root_to_label[root]
    for i in range(n):
        if core[i]:
            continue
        best = None
        for j in core_idx:
            if within[i, j]:
                d_ij = dist[i, j]
                if best is None or d_ij < best[0]:
                    best = (d_ij, int(j))
        if best is not None:
            labels[i] = labels[best[1]]

    sizes = Counter(l for l in labels if l != -1)
    small = {l for l, c in sizes.items() if c < min_cluster_size}
    labels = [-1 if l in small else l for l in labels]

    remap: dict[int, int] = {}
    out = []
    for l in labels:
        if l == -1:
            out.append(-1)
        else:
            if l not in remap:
                remap[l] = len(remap)
            out.append(remap[l])
    return out


def ctfidf(tokens_by_class: dict[Hashable, Sequence[str] | Counter]) -> dict[Hashable, list[tuple[str, float]]]:
    """Class-based TF-IDF over per-class concatenated token multisets.

    weight(t, c) = tf(t, c) * ln(1 + A / f(t)) with A the average token
    count per class and f(t) the total count of t across classes. Per class,
    terms sort by weight descending, ties lexicographically. An empty class
    yields an empty list.
    """
    if not tokens_by_class:
        raise ValueError("at least one class is required")
    counts = {c: (toks if isinstance(toks, Counter) else Counter(toks))
              for c, toks in tokens_by_class.items()}
    total_tokens = sum(sum(cnt.values()) for cnt in counts.values())
    avg_per_class = total_tokens / len(counts)
    freq: Counter = Counter()
    for cnt in counts.values():
        freq.update(cnt)

    out: dict[Hashable, list[tuple[str, float]]] = {}
    for c, cnt in counts.items():
        weighted = [(term, tf * math.log(1.0 + avg_per_class / freq[term]))
                    for term, tf in cnt.items()]
        weighted.sort(key=lambda tw: (-tw[1], tw[0]))
        out[c] = weighted
    return out


@dataclass(frozen=True)
class TopicSnapshot:
    """One topic on one day: document count plus per-day term weights."""

    day: date
    topic_id: int
    terms: tuple[tuple[str, float], ...]
    size: int
    doc_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.topic_id < -1:
            raise ValueError("topic_id must be >= -1")
        if self.size < 0:
            raise ValueError("size must be >= 0")
        weights = [w for _, w in self.terms]
        if any(weights[i] < weights[i + 1] for i in range(len(weights) - 1)):
            raise ValueError("term weights must be non-increasing")

    def to_dict(self) -> dict:
        return {
            "day": self.day.isoformat(),
            "topic_id": self.topic_id,
            "size": self.size,
            "terms": [[t, w] for t, w in self.terms],
            "doc_ids": list(self.doc_ids),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TopicSnapshot":
        return cls(
            day=date.fromisoformat(raw["day"]),
            topic_id=int(raw["topic_id"]),
            terms=tuple((t, float(w)) for t, w in raw["terms"]),
            size=int(raw["size"]),
            doc_ids=tuple(raw.get("doc_ids", ())),
        )


@dataclass
class WindowModel:
    """Result of one global window fit: hard assignments plus global terms."""

    assignments: dict[str, int] = field(default_factory=dict)
    topics: dict[int, list[tuple[str, float]]] = field(default_factory=dict)


def model_window(posts: list[ClassifiedPost], provider: EmbeddingProvider,
                 config: TopicConfig) -> WindowModel:
    """Fit one topic model over the window: embed, reduce, cluster, c-TF-IDF.

    Returns the per-post hard topic assignment (-1 noise) and the global
    top-n term list per topic. Deterministic under a fixed seed, provider
    stub, and input order.
    """
    if not posts:
        raise ValueError("model_window requires a nonempty post list")
    texts = [cp.post.text for cp in posts]
    vectors = provider.embed_batch(texts)
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise EmbeddingError(f"provider returned mixed dimensions: {sorted(dims)}")
    reduced = reduce_dimensions(vectors, min(config.target_dim, dims.pop()), config.seed)
    labels = cluster(reduced, config.min_cluster_size)

    assignments = {cp.post.id: label for cp, label in zip(posts, labels)}
    tokens_by_class: dict[int, list[str]] = {}
    for cp, label in zip(posts, labels):
        if label == -1:
            continue
        tokens_by_class.setdefault(label, []).extend(modeling_tokens(cp.post.text))
    topics: dict[int, list[tuple[str, float]]] = {}
    if tokens_by_class:
        for topic_id, weighted in ctfidf(tokens_by_class).items():
            topics[topic_id] = weighted[:config.top_n_terms]
    return WindowModel(assignments=assignments, topics=topics)


def daily_snapshots(assignments: dict[str, int], posts: list[ClassifiedPost],
                    config: TopicConfig) -> list[TopicSnapshot]:
    """Per-day topic frequencies and per-day c-TF-IDF representations.

    Every (day present in posts) x (non-noise topic) pair yields a snapshot;
    days where a topic has no documents yield size 0 and empty terms. Noise
    (-1) is never snapshotted.
    """
    missing = [cp.post.id for cp in posts if cp.post.id not in assignments]
    if missing:
        raise ValueError(f"assignments missing for posts: {missing[:5]}")

    topic_ids = sorted({t for t in assignments.values() if t != -1})
    by_day: dict[date, list[ClassifiedPost]] = {}
    for cp in posts:
        by_day.setdefault(cp.post.day, []).append(cp)

    snapshots: list[TopicSnapshot] = []
    for day in sorted(by_day):
        day_posts = by_day[day]
        docs_by_topic: dict[int, list[ClassifiedPost]] = {}
        tokens_by_topic: dict[int, list[str]] = {}
        for cp in day_posts:
            t = assignments[cp.post.id]
            if t == -1:
                continue
            docs_by_topic.setdefault(t, []).append(cp)
            tokens_by_topic.setdefault(t, []).extend(modeling_tokens(cp.post.text))
        day_terms = ctfidf(tokens_by_topic) if tokens_by_topic else {}
        for topic_id in topic_ids:
            members = docs_by_topic.get(topic_id, [])
            terms = tuple(day_terms.get(topic_id, [])[:config.top_n_terms])
            snapshots.append(TopicSnapshot(
                day=day,
                topic_id=topic_id,
                terms=terms,
                size=len(members),
                doc_ids=tuple(sorted(cp.post.id for cp in members)),
            ))
    return snapshots
