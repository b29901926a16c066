"""Shared text normalization: Unicode word tokenization, case folding,
and the stopword handling used by keyword filtering and topic modeling."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def word_tokens(text: str) -> list[str]:
    """Split text into Unicode word tokens (letters, digits, underscore)."""
    return _WORD_RE.findall(text)


def casefold_tokens(text: str) -> list[str]:
    """Tokenize and case-fold (full Unicode folding, so ß -> ss)."""
    return [t.casefold() for t in _WORD_RE.findall(text)]


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """Small German stopword list shipped with the package."""
    text = resources.files("discourse_monitor").joinpath("data/stopwords_de.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


def modeling_tokens(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Tokens used for topic representation: case-folded, length >= 2,
    stopwords removed."""
    stop = default_stopwords() if stopwords is None else stopwords
    return [t for t in casefold_tokens(text) if len(t) >= 2 and t not in stop]
