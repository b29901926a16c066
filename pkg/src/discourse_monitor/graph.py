"""Typed interaction graph over actors, organizations, hashtags, and topics.

Each post emits edges from its source nodes (author, URL profile):
intentional edges to @-mentions and hashtags, inferred edges to recognized
entities and the post's topic, and undirected passive-mutual edges between
every pair of entities co-mentioned in the same content. Edge weights
accumulate by frequency; eigenvector centrality and occurrence filtering
provide the influence views.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol
from urllib.parse import urlparse

import numpy as np

from .classify import ClassifiedPost
from .textproc import casefold_tokens

logger = logging.getLogger(__name__)

NODE_KINDS = ("actor", "organization", "hashtag", "topic")
EDGE_KINDS = ("intentional", "inferred", "passive_mutual")

MENTION_RE = re.compile(r"(?<!\w)@(\w{1,30})", re.UNICODE)
HASHTAG_RE = re.compile(r"#(\w{1,100})", re.UNICODE)


def extract_mentions(text: str) -> list[str]:
    """@-handles in text order, duplicates preserved, `@` stripped.

    A handle is 1-30 word characters; the `@` must not be preceded by a
    word character, so e-mail addresses do not match.
    """
    return MENTION_RE.findall(text)


def extract_hashtags(text: str) -> list[str]:
    """Hashtags in text order, case-folded, `#` stripped (1-100 word chars)."""
    return [t.casefold() for t in HASHTAG_RE.findall(text)]


@dataclass
class Node:
    id: str
    kind: str
    display_name: str
    occurrence_count: int = 0

    def __post_init__(self) -> None:
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind: {self.kind!r}")
        if self.occurrence_count < 0:
            raise ValueError("occurrence_count must be >= 0")


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    kind: str
    weight: int
    directed: bool

    def __post_init__(self) -> None:
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"unknown edge kind: {self.kind!r}")
        if self.weight < 1:
            raise ValueError("weight must be >= 1")
        if self.directed == (self.kind == "passive_mutual"):
            raise ValueError("passive_mutual edges are undirected, all others directed")
        if self.source == self.target:
            raise ValueError("self-loops are not allowed")


class EntityRecognizer(Protocol):
    """Extracts (surface form, canonical entity key, kind) from text."""

    def recognize(self, text: str) -> list[tuple[str, str, str]]: ...


class ProfileResolver(Protocol):
    """Total mapping from a URL to (node id, kind in {actor, organization})."""

    def resolve(self, url: str) -> tuple[str, str]: ...


class GazetteerRecognizer:
    """Deterministic entity recognizer: exact whole-token alias matching.

    Aliases are case-folded token sequences; every occurrence at every text
    position is emitted, ordered by (position, canonical key).
    """

    def __init__(self, entries: Iterable[dict]):
        self._aliases: list[tuple[tuple[str, ...], str, str, str]] = []
        for entry in entries:
            kind = entry["kind"]
            if kind not in ("actor", "organization"):
                raise ValueError(f"gazetteer kind must be actor or organization, got {kind!r}")
            for alias in entry["aliases"]:
                toks = tuple(casefold_tokens(alias))
                if toks:
                    self._aliases.append((toks, alias, entry["canonical_id"], kind))

    @classmethod
    def from_file(cls, path: str | Path) -> "GazetteerRecognizer":
        return cls(json.loads(Path(path).read_text("utf-8")))

    def recognize(self, text: str) -> list[tuple[str, str, str]]:
        tokens = casefold_tokens(text)
        hits: list[tuple[int, str, str, str]] = []
        for toks, surface, canonical_id, kind in self._aliases:
            span = len(toks)
            for i in range(len(tokens) - span + 1):
                if tuple(tokens[i:i + span]) == toks:
                    hits.append((i, surface, canonical_id, kind))
        hits.sort(key=lambda h: (h[0], h[2]))
        return [(surface, canonical_id, kind) for _, surface, canonical_id, kind in hits]


class DefaultProfileResolver:
    """Maps profile URLs of known hosts to actor nodes; everything else to
    an organization node for the host (leading www. stripped). Total: even
    unparseable URLs resolve, to organization:unknown."""

    DEFAULT_PROFILE_HOSTS = ("t.me", "twitter.com", "x.com")

    def __init__(self, profile_hosts: Iterable[str] | None = None):
        self.profile_hosts = frozenset(profile_hosts if profile_hosts is not None
                                       else self.DEFAULT_PROFILE_HOSTS)

    def resolve(self, url: str) -> tuple[str, str]:
        try:
            parsed = urlparse(url)
            host = (parsed.hostname or "").casefold()
        except ValueError:
            return "organization:unknown", "organization"
        if host.startswith("www."):
            host = host[4:]
        if not host:
            return "organization:unknown", "organization"
        if host in self.profile_hosts:
            segments = [s for s in parsed.path.split("/") if s]
            if segments:
                return f"actor:{segments[0].casefold()}", "actor"
        return f"organization:{host}", "organization"


class DiscourseGraph:
    """Accumulating typed multigraph, one edge per (source, target, kind)."""

    def __init__(self) -> None:
        self.nodes: dict[str, Node] = {}
        self._edges: dict[tuple[str, str, str], int] = {}

    @property
    def edges(self) -> list[Edge]:
        out = []
        for (source, target, kind), weight in sorted(self._edges.items()):
            out.append(Edge(source=source, target=target, kind=kind, weight=weight,
                            directed=kind != "passive_mutual"))
        return out

    def ensure_node(self, node_id: str, kind: str, display_name: str) -> Node:
        node = self.nodes.get(node_id)
        if node is None:
            node = Node(id=node_id, kind=kind, display_name=display_name)
            self.nodes[node_id] = node
        return node

    def add_edge(self, source: str, target: str, kind: str, weight: int = 1) -> bool:
        """Accumulate weight on (source, target, kind); passive_mutual pairs
        are canonicalized to source < target. Self-loops are dropped."""
        if source == target:
            return False
        if kind == "passive_mutual" and source > target:
            source, target = target, source
        if source not in self.nodes or target not in self.nodes:
            raise KeyError("both endpoints must exist before adding an edge")
        key = (source, target, kind)
        self._edges[key] = self._edges.get(key, 0) + weight
        return True

    def total_weight(self, kind: str | None = None) -> int:
        return sum(w for (_, _, k), w in self._edges.items() if kind is None or k == kind)

    def merge(self, other: "DiscourseGraph") -> None:
        """Accumulate another graph: occurrence counts and weights add."""
        for node in other.nodes.values():
            mine = self.nodes.get(node.id)
            if mine is None:
                self.nodes[node.id] = Node(node.id, node.kind, node.display_name,
                                           node.occurrence_count)
            else:
                mine.occurrence_count += node.occurrence_count
        for (source, target, kind), weight in other._edges.items():
            key = (source, target, kind)
            self._edges[key] = self._edges.get(key, 0) + weight

    def to_node_link(self, centrality: dict[str, float] | None = None) -> dict:
        nodes = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            item = {
                "id": node.id,
                "kind": node.kind,
                "display_name": node.display_name,
                "occurrence_count": node.occurrence_count,
            }
            if centrality is not None:
                item["centrality"] = centrality.get(node.id, 0.0)
            nodes.append(item)
        edges = [{"source": e.source, "target": e.target, "kind": e.kind,
                  "weight": e.weight, "directed": e.directed} for e in self.edges]
        return {"nodes": nodes, "edges": edges}

    @classmethod
    def from_node_link(cls, raw: dict) -> "DiscourseGraph":
        g = cls()
        for n in raw.get("nodes", []):
            g.nodes[n["id"]] = Node(id=n["id"], kind=n["kind"],
                                    display_name=n["display_name"],
                                    occurrence_count=int(n["occurrence_count"]))
        for e in raw.get("edges", []):
            g.add_edge(e["source"], e["target"], e["kind"], int(e["weight"]))
        return g


@dataclass
class BuildReport:
    graph: DiscourseGraph
    skipped: list[tuple[str, str]] = field(default_factory=list)


def build_graph(posts: list[ClassifiedPost], topic_assignments: dict[str, int],
                recognizer: EntityRecognizer, resolver: ProfileResolver) -> BuildReport:
    """Accumulate the interaction graph over a batch of classified posts.

    Per post: the author node and the URL-resolved node are the sources;
    each source gets intentional edges to every mention and hashtag
    occurrence and inferred edges to every recognized entity occurrence and
    the post topic (noise excluded). Distinct co-mentioned entities
    (mentions plus recognized entities) pairwise gain one undirected
    passive-mutual edge. A node's occurrence count rises once per post in
    which it appears as an edge endpoint. Recognizer or resolver failures
    skip the post with a logged diagnostic.
    """
    g = DiscourseGraph()
    report = BuildReport(graph=g)
    for cp in posts:
        post = cp.post
        try:
            url_node_id, url_kind = resolver.resolve(post.url)
            entities = recognizer.recognize(post.text)
        except Exception as exc:
            logger.warning("skipping post %s: %s", post.id, exc)
            report.skipped.append((post.id, str(exc)))
            continue

        author_id = f"actor:{post.author.casefold()}"
        g.ensure_node(author_id, "actor", post.author)
        g.ensure_node(url_node_id, url_kind, url_node_id.split(":", 1)[1])
        sources = [author_id] if url_node_id == author_id else [author_id, url_node_id]

        mentions = extract_mentions(post.text)
        hashtags = extract_hashtags(post.text)

        mention_ids = []
        for handle in mentions:
            node_id = f"actor:{handle.casefold()}"
            g.ensure_node(node_id, "actor", handle)
            mention_ids.append(node_id)
        hashtag_ids = []
        for tag in hashtags:
            node_id = f"hashtag:{tag}"
            g.ensure_node(node_id, "hashtag", f"#{tag}")
            hashtag_ids.append(node_id)
        entity_ids = []
        for surface, canonical_id, kind in entities:
            node_id = f"{kind}:{canonical_id}"
            g.ensure_node(node_id, kind, surface)
            entity_ids.append(node_id)

        topic_id = topic_assignments.get(post.id, -1)
        topic_node_id = None
        if topic_id != -1:
            topic_node_id = f"topic:{topic_id}"
            g.ensure_node(topic_node_id, "topic", f"Topic {topic_id}")

        touched: set[str] = set()

        def emit(source: str, target: str, kind: str) -> None:
            if g.add_edge(source, target, kind):
                touched.add(source)
                touched.add(target)

        for src in sources:
            for target in mention_ids + hashtag_ids:
                emit(src, target, "intentional")
            for target in entity_ids:
                emit(src, target, "inferred")
            if topic_node_id is not None:
                emit(src, topic_node_id, "inferred")

        co_mentioned = sorted(set(mention_ids) | set(entity_ids))
        for i in range(len(co_mentioned)):
            for j in range(i + 1, len(co_mentioned)):
                emit(co_mentioned[i], co_mentioned[j], "passive_mutual")

        for node_id in touched:
            g.nodes[node_id].occurrence_count += 1
    return report


@dataclass
class CentralityResult:
    scores: dict[str, float]
    converged: bool


def eigenvector_centrality(graph: DiscourseGraph, tol: float = 1e-10,
                           max_iter: int = 1000) -> CentralityResult:
    """Eigenvector centrality on the symmetrized weighted adjacency matrix.

    Every edge contributes its weight in both directions. Per connected
    component, power iteration runs on the component matrix plus the unit
    diagonal (identical eigenvectors; the shift prevents the period-2
    oscillation plain iteration exhibits on bipartite components), starting
    from the uniform vector, normalizing by the Euclidean norm each step,
    and stopping once successive iterates differ by less than tol in the
    max norm. Component vectors are scaled by the component's total edge
    weight before merging so isolated subgraphs do not share equal
    prominence; the merged vector is normalized to unit Euclidean norm.

    Nonempty scores are all >= 0; an empty graph yields an empty map. If
    any component hits max_iter the result carries converged=False.
    """
    node_ids = sorted(graph.nodes)
    if not node_ids:
        return CentralityResult(scores={}, converged=True)
    index = {nid: i for i, nid in enumerate(node_ids)}
    n = len(node_ids)

    adj = np.zeros((n, n))
    for edge in graph.edges:
        s, t = index[edge.source], index[edge.target]
        adj[s, t] += edge.weight
        adj[t, s] += edge.weight

    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for edge in graph.edges:
        ra, rb = find(index[edge.source]), find(index[edge.target])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(i)

    comp_weight: dict[int, float] = {root: 0.0 for root in components}
    for edge in graph.edges:
        comp_weight[find(index[edge.source])] += edge.weight

    scores = np.zeros(n)
    converged = True
    for root, members in components.items():
        weight = comp_weight[root]
        if weight == 0.0:
            continue
        sub = adj[np.ix_(members, members)] + np.eye(len(members))
        x = np.full(len(members), 1.0 / np.sqrt(len(members)))
        ok = False
        for _ in range(max_iter):
            y = sub @ x
            y /= np.linalg.norm(y)
            if np.max(np.abs(y - x)) < tol:
                x = y
                ok = True
                break
            x = y
        if not ok:
            converged = False
            logger.warning("centrality did not converge within %d iterations "
                           "for a component of %d nodes", max_iter, len(members))
        scores[members] = np.abs(x) * weight

    norm = np.linalg.norm(scores)
    if norm > 0:
        scores /= norm
    return CentralityResult(scores={nid: float(scores[index[nid]]) for nid in node_ids},
                            converged=converged)


def filter_view(graph: DiscourseGraph, min_occurrence: int = 0,
                top_k: int | None = None,
                kinds: Iterable[str] | None = None) -> DiscourseGraph:
    """Frequency-filtered subgraph view.

    Keeps nodes with occurrence_count >= min_occurrence and kind in kinds;
    with top_k set, the top_k by occurrence count (ties by id ascending)
    survive. Dangling edges drop; surviving edges keep their weights.
    """
    if min_occurrence < 0:
        raise ValueError("min_occurrence must be >= 0")
    kind_set = set(NODE_KINDS) if kinds is None else set(kinds)
    unknown = kind_set - set(NODE_KINDS)
    if unknown:
        raise ValueError(f"unknown node kinds: {sorted(unknown)}")

    survivors = [node for node in graph.nodes.values()
                 if node.occurrence_count >= min_occurrence and node.kind in kind_set]
    survivors.sort(key=lambda nd: (-nd.occurrence_count, nd.id))
    if top_k is not None:
        survivors = survivors[:top_k]
    keep = {node.id for node in survivors}

    out = DiscourseGraph()
    for node in graph.nodes.values():
        if node.id in keep:
            out.nodes[node.id] = Node(node.id, node.kind, node.display_name,
                                      node.occurrence_count)
    for (source, target, kind), weight in graph._edges.items():
        if source in keep and target in keep:
            out._edges[(source, target, kind)] = weight
    return out
