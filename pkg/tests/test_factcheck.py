from __future__ import annotations

import json

import pytest

from discourse_monitor.factcheck import (
    EVIDENCE_LIMIT,
    VERDICT_CATEGORIES,
    Claim,
    FactCheckRecord,
    MockLlmClient,
    MockSearchClient,
    StageFailure,
    StubLlmClient,
    StubSearchClient,
    Verdict,
    check_post,
    default_templates,
    extract_claims,
    generate_query,
    load_templates,
    predict_verdict,
    render_template,
    retrieve_evidence,
    run_pipeline,
    sentences,
    verdict_histogram,
)

from conftest import make_post

CLAIM = Claim(post_id="p1", statement="Die Zahl stieg 2024 um 10 Prozent",
              author="alice", author_party="Partei X", date="2025-03-03")


class TestTemplates:
    def test_all_eight_shipped(self):
        templates = default_templates()
        stages = ("claim_extraction", "query_generation", "evidence_summary", "verdict")
        assert sorted(templates) == sorted(f"{s}.{role}" for s in stages
                                           for role in ("system", "user"))
        assert all(t.strip() for t in templates.values())

    def test_load_templates_matches_default(self):
        assert load_templates() == default_templates()

    def test_render_fills_all_placeholders(self):
        out = render_template("A {x} and {y}.", x="1", y="2")
        assert out == "A 1 and 2."

    def test_render_missing_field(self):
        with pytest.raises(KeyError):
            render_template("needs {thing}")

    def test_user_templates_have_expected_fields(self):
        templates = default_templates()
        assert "{query}" in templates["claim_extraction.user"]
        assert "{author}" in templates["claim_extraction.user"]
        assert "{claim}" in templates["verdict.user"]
        assert "{grounding_context}" in templates["verdict.user"]
        assert "{title}" in templates["evidence_summary.user"]
        assert "{snippet}" in templates["evidence_summary.user"]


class TestSentences:
    def test_counts_terminated(self):
        assert sentences("Eins. Zwei! Drei?") == ["Eins.", "Zwei!", "Drei?"]

    def test_trailing_fragment(self):
        assert sentences("Eins. und noch was") == ["Eins.", "und noch was"]

    def test_empty(self):
        assert sentences("") == []
        assert sentences("   ") == []


class TestVerdictType:
    def test_category_closed_set(self):
        with pytest.raises(ValueError):
            Verdict(category="Probably", reason="x")
        assert Verdict(category="Half true", reason="x").category == "Half true"

    def test_case_sensitive(self):
        with pytest.raises(ValueError):
            Verdict(category="half true", reason="x")


class TestMockClients:
    def test_mock_llm_routes_by_prompt_pair(self):
        mock = MockLlmClient()
        mock.add_reply("sys", "user", "reply-1")
        assert mock.complete("sys", "user") == "reply-1"
        assert mock.calls == [("sys", "user")]
        with pytest.raises(KeyError):
            mock.complete("sys", "other")

    def test_mock_search_routes_by_query(self):
        mock = MockSearchClient({"q1": [{"title": "T", "url": "u", "snippet": "s"}]})
        assert mock.search("q1")[0]["title"] == "T"
        assert mock.search("unknown") == []
        assert mock.calls == ["q1", "unknown"]


class _SequencedLlm:
    """Replies from a queue keyed by system prompt; reuses the last entry."""

    def __init__(self, queues: dict[str, list[str]]):
        self.queues = {k: list(v) for k, v in queues.items()}
        self.calls: list[tuple[str, str]] = []

    def complete(self, system_prompt: str, user_prompt: str) -> str:
        self.calls.append((system_prompt, user_prompt))
        queue = self.queues[system_prompt]
        return queue.pop(0) if len(queue) > 1 else queue[0]


class TestExtractClaims:
    POST = make_post("p1", "Die Zahl stieg 2024 um 10 Prozent.", author="alice",
                     author_party="Partei X")

    def test_happy_path(self):
        system = default_templates()["claim_extraction.system"]
        llm = _SequencedLlm({system: [json.dumps(
            {"statements": ["Die Zahl stieg 2024 um 10 Prozent"]})]})
        [claim] = extract_claims(self.POST, llm)
        assert claim.post_id == "p1"
        assert claim.author == "alice"
        assert claim.author_party == "Partei X"
        assert claim.date == "2025-03-03"

    def test_retry_once_then_succeed(self):
        system = default_templates()["claim_extraction.system"]
        llm = _SequencedLlm({system: ["{broken", json.dumps({"statements": ["S"]})]})
        [claim] = extract_claims(self.POST, llm)
        assert claim.statement == "S"
        assert len(llm.calls) == 2
        # both attempts used identical prompts
        assert llm.calls[0] == llm.calls[1]

    def test_retry_exhausted(self):
        system = default_templates()["claim_extraction.system"]
        llm = _SequencedLlm({system: ["{broken"]})
        with pytest.raises(StageFailure):
            extract_claims(self.POST, llm)
        assert len(llm.calls) == 2

    def test_blank_statements_dropped(self):
        system = default_templates()["claim_extraction.system"]
        llm = _SequencedLlm({system: [json.dumps({"statements": ["  ", "Echt"]})]})
        claims = extract_claims(self.POST, llm)
        assert [c.statement for c in claims] == ["Echt"]

    def test_missing_party_renders_unknown(self):
        post = make_post("p2", "Text ohne Partei.", author="bob")
        calls = []

        class Capture:
            def complete(self, system, user):
                calls.append(user)
                return json.dumps({"statements": []})

        extract_claims(post, Capture())
        assert "the party unknown" in calls[0]


class TestGenerateQuery:
    def test_strips_quotes_and_whitespace(self):
        system = default_templates()["query_generation.system"]
        llm = _SequencedLlm({system: ['  "zahl 2024 anstieg"  ']})
        assert generate_query(CLAIM, llm) == "zahl 2024 anstieg"

    def test_empty_reply_fails(self):
        system = default_templates()["query_generation.system"]
        llm = _SequencedLlm({system: ['""']})
        with pytest.raises(StageFailure):
            generate_query(CLAIM, llm)


class TestRetrieveEvidence:
    def test_caps_at_three_results(self):
        search = StubSearchClient(n_results=5)
        bundle = retrieve_evidence("query", search, StubLlmClient())
        assert len(bundle.summaries) == EVIDENCE_LIMIT
        assert bundle.grounding_context == "\n\n".join(bundle.summaries)
        assert not bundle.no_evidence

    def test_zero_results_flagged(self):
        bundle = retrieve_evidence("query", MockSearchClient({}), StubLlmClient())
        assert bundle.no_evidence
        assert bundle.summaries == []
        assert bundle.grounding_context == ""

    def test_empty_query_rejected(self):
        with pytest.raises(ValueError):
            retrieve_evidence("", StubSearchClient(), StubLlmClient())


class TestPredictVerdict:
    SYSTEM = default_templates()["verdict.system"]

    def test_valid_reply(self):
        llm = _SequencedLlm({self.SYSTEM: [json.dumps(
            {"Truthfulness": "Mostly true", "Reason": "Die Quellen stützen es."})]})
        verdict = predict_verdict(CLAIM, "ctx", llm)
        assert verdict.category == "Mostly true"

    def test_retry_then_success(self):
        llm = _SequencedLlm({self.SYSTEM: [
            "not json at all",
            json.dumps({"Truthfulness": "False", "Reason": "Nein."})]})
        assert predict_verdict(CLAIM, "ctx", llm).category == "False"
        assert len(llm.calls) == 2

    def test_unknown_category_fails_without_retry_burn(self):
        llm = _SequencedLlm({self.SYSTEM: [json.dumps(
            {"Truthfulness": "Kinda", "Reason": "x"})]})
        with pytest.raises(StageFailure):
            predict_verdict(CLAIM, "ctx", llm)

    def test_long_reason_truncated_to_two_sentences(self, caplog):
        llm = _SequencedLlm({self.SYSTEM: [json.dumps(
            {"Truthfulness": "True", "Reason": "Eins. Zwei. Drei. Vier."})]})
        import logging

        with caplog.at_level(logging.WARNING):
            verdict = predict_verdict(CLAIM, "ctx", llm)
        assert verdict.reason == "Eins. Zwei."
        assert any("truncating" in r.message for r in caplog.records)

    def test_missing_keys_fail(self):
        llm = _SequencedLlm({self.SYSTEM: [json.dumps({"Truthfulness": "True"})]})
        with pytest.raises(StageFailure):
            predict_verdict(CLAIM, "ctx", llm)


class TestPipeline:
    def _posts(self, n=4):
        return [make_post(f"p{i}", f"Aussage Nummer {i} über Zahlen.",
                          author=f"author{i % 2}") for i in range(n)]

    def test_stub_pipeline_end_to_end(self):
        result = run_pipeline(self._posts(), StubLlmClient(), StubSearchClient())
        assert len(result.records) == 4
        assert result.errors == []
        assert [r.claim.post_id for r in result.records] == ["p0", "p1", "p2", "p3"]
        for record in result.records:
            assert record.verdict.category in VERDICT_CATEGORIES
            assert len(record.evidence_summaries) <= EVIDENCE_LIMIT

    def test_channel_is_author_with_platform_fallback(self):
        post = make_post("p1", "Die Aussage.", author="alice")
        [record] = check_post(post, StubLlmClient(), StubSearchClient()).records
        assert record.channel == "alice"

    def test_concurrent_matches_sequential(self):
        posts = self._posts(6)
        seq = run_pipeline(posts, StubLlmClient(), StubSearchClient(), max_in_flight=1)
        par = run_pipeline(posts, StubLlmClient(), StubSearchClient(), max_in_flight=4)
        as_dicts = lambda result: [r.to_dict() for r in result.records]
        assert as_dicts(seq) == as_dicts(par)

    def test_failed_post_recorded_others_continue(self):
        templates = default_templates()

        class FailsOnP1(StubLlmClient):
            def complete(self, system_prompt, user_prompt):
                if system_prompt == templates["claim_extraction.system"] and "p1-marker" in user_prompt:
                    return "{never json"
                return super().complete(system_prompt, user_prompt)

        posts = [make_post("p0", "Gute Aussage."),
                 make_post("p1", "p1-marker Aussage."),
                 make_post("p2", "Noch eine Aussage.")]
        result = run_pipeline(posts, FailsOnP1(), StubSearchClient())
        assert [r.claim.post_id for r in result.records] == ["p0", "p2"]
        assert len(result.errors) == 1
        assert result.errors[0].post_id == "p1"
        assert result.errors[0].stage == "claim_extraction"

    def test_byte_reproducible(self):
        posts = self._posts(10)
        runs = []
        for _ in range(2):
            result = run_pipeline(posts, StubLlmClient(), StubSearchClient())
            runs.append(json.dumps([r.to_dict() for r in result.records],
                                   sort_keys=True))
        assert runs[0] == runs[1]

    def test_record_round_trip(self):
        [record] = check_post(make_post("p1", "Die Aussage."), StubLlmClient(),
                              StubSearchClient()).records
        assert FactCheckRecord.from_dict(record.to_dict()) == record


class TestHistogram:
    def _record(self, channel, category):
        return FactCheckRecord(
            claim=CLAIM, query="q", evidence_summaries=("s",),
            grounding_context="s",
            verdict=Verdict(category=category, reason="r"), channel=channel)

    def test_zero_filled_and_counted(self):
        records = [self._record("a", "True"), self._record("a", "True"),
                   self._record("a", "False"), self._record("b", "Half true")]
        hist = verdict_histogram(records)
        assert hist["a"] == {"False": 1, "Mostly false": 0, "Half true": 0,
                             "Mostly true": 0, "True": 2}
        assert sum(hist["b"].values()) == 1

    def test_empty(self):
        assert verdict_histogram([]) == {}

    def test_evidence_cap_enforced_on_record(self):
        with pytest.raises(ValueError):
            FactCheckRecord(claim=CLAIM, query="q",
                            evidence_summaries=("a", "b", "c", "d"),
                            grounding_context="", channel="c",
                            verdict=Verdict(category="True", reason="r"))
