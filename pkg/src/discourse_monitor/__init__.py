"""Discourse monitoring toolkit: daily post ingestion, sentiment/hate
classification, topic dynamics, typed interaction graphs, fact checking,
and a read-only aggregation API."""

__version__ = "0.1.0"
