import httpx
import pytest

from memorypod.errors import BackendError
from memorypod.geometry import Vec3, Zone
from memorypod.narrative import (
    PROMPT_INSTRUCTIONS,
    RemoteBackend,
    RemoteModel,
    Summary,
    Template,
    TemplateBackend,
    build_digest,
    format_mmss,
    summarize,
    summary_from_obj,
    summary_to_obj,
    template_summary,
)
from memorypod.pod import Annotation, AnnotationKind
from memorypod.recorder import record_events
from memorypod.scenario import simulate_scenario

from .util import demo_scenario, make_minimal_pod


@pytest.fixture(scope="module")
def demo_pod():
    cfg = demo_scenario()
    return record_events(simulate_scenario(cfg), title=cfg.title, zones=cfg.zones)


class StubBackend:
    model = "stub-model"

    def __init__(self, reply=None, error=None):
        self.reply = reply
        self.error = error
        self.prompts = []

    def complete(self, prompt, max_tokens=1024):
        self.prompts.append(prompt)
        if self.error is not None:
            raise self.error
        return self.reply


class TestFormatMmss:
    def test_basic(self):
        assert format_mmss(0) == "00:00"
        assert format_mmss(62_000_000) == "01:02"
        assert format_mmss(59_999_999) == "00:59"

    def test_minutes_grow_past_99(self):
        assert format_mmss(7200_000_000) == "120:00"


class TestDigest:
    def test_event_lines_only_without_transcript(self):
        digest = build_digest(make_minimal_pod())
        assert len(digest.lines) == 2
        assert all("EVENT" in line for line in digest.lines)

    def test_demo_pod_interleaves_time_ordered(self, demo_pod):
        digest = build_digest(demo_pod)
        assert len(digest.lines) == 10  # 5 events + 5 transcript segments
        assert sum(1 for line in digest.lines if " EVENT " in line) == 5
        times = [line[1:6] for line in digest.lines]
        assert times == sorted(times)
        # annotation sorts before transcript at the same timestamp
        first_start = next(i for i, line in enumerate(digest.lines) if " EVENT Start " in line)
        assert "OPERATOR:" in digest.lines[first_start + 1]

    def test_zone_named_or_unzoned(self, demo_pod):
        digest = build_digest(demo_pod)
        assert any("@ staging" in line for line in digest.lines)
        bare = make_minimal_pod()  # no zones
        assert all(line.endswith("@ unzoned") for line in build_digest(bare).lines)

    def test_deterministic(self, demo_pod):
        assert build_digest(demo_pod) == build_digest(demo_pod)

    def test_line_count_is_annotations_plus_segments(self, demo_pod):
        digest = build_digest(demo_pod)
        assert len(digest.lines) == len(demo_pod.annotations) + len(demo_pod.transcript)


class TestTemplateSummary:
    def test_start_end_only(self):
        pod = make_minimal_pod()
        s = template_summary(pod)
        assert s.duration_s == 2.0
        assert len(s.key_events) == 2
        assert s.tools == []
        assert s.generator == Template()
        assert "minimal" in s.overview and "2 annotated actions" in s.overview

    def test_acquire_order_and_dedup(self):
        pod = make_minimal_pod()
        extra = [
            Annotation(3, AnnotationKind.ACQUIRE, "hard drive", 500_000, Vec3(0, 0, 0)),
            Annotation(4, AnnotationKind.ACQUIRE, "screwdriver", 800_000, Vec3(0, 0, 0)),
            Annotation(5, AnnotationKind.ACQUIRE, "hard drive", 1_200_000, Vec3(0, 0, 0)),
        ]
        pod = make_minimal_pod(annotations=pod.annotations + extra)
        s = template_summary(pod)
        assert s.tools == ["hard drive", "screwdriver"]

    def test_key_event_count_equals_annotations(self, demo_pod):
        s = template_summary(demo_pod)
        assert len(s.key_events) == len(demo_pod.annotations)
        start = next(a for a in demo_pod.annotations if a.kind is AnnotationKind.START)
        end = next(a for a in demo_pod.annotations if a.kind is AnnotationKind.END)
        assert s.duration_s == (end.at - start.at) / 1e6

    def test_deterministic(self, demo_pod):
        assert template_summary(demo_pod) == template_summary(demo_pod)


GOOD_REPLY = """\
OVERVIEW: A technician swapped the faulty drive at the rack.
DURATION_S: 58
EVENT: 00:02 | Start | begin procedure
EVENT: 00:10 | Acquire | acquire replacement drive
EVENT: 00:30 | Use | install replacement drive
EVENT: 00:45 | Deposit | stow old drive
EVENT: 01:00 | End | finish procedure
TOOLS: replacement drive
"""


class TestSummarize:
    def test_template_backend_equals_template_summary(self, demo_pod):
        assert summarize(demo_pod, TemplateBackend()) == template_summary(demo_pod)

    def test_prompt_carries_digest_and_instructions(self, demo_pod):
        stub = StubBackend(reply=GOOD_REPLY)
        summarize(demo_pod, stub)
        assert stub.prompts[0].startswith(PROMPT_INSTRUCTIONS)
        assert build_digest(demo_pod).text in stub.prompts[0]

    def test_wellformed_reply_parsed(self, demo_pod):
        s = summarize(demo_pod, StubBackend(reply=GOOD_REPLY))
        assert s.generator == RemoteModel("stub-model")
        assert s.overview == "A technician swapped the faulty drive at the rack."
        assert s.duration_s == 58.0
        assert [e.label for e in s.key_events] == [
            "begin procedure",
            "acquire replacement drive",
            "install replacement drive",
            "stow old drive",
            "finish procedure",
        ]
        assert s.tools == ["replacement drive"]
        assert s.warnings == []

    def test_tools_derived_from_acquire_when_line_absent(self, demo_pod):
        reply = "\n".join(line for line in GOOD_REPLY.splitlines() if not line.startswith("TOOLS"))
        s = summarize(demo_pod, StubBackend(reply=reply))
        assert s.tools == ["acquire replacement drive"]

    def test_backend_error_falls_back_with_warning(self, demo_pod):
        s = summarize(demo_pod, StubBackend(error=BackendError("timed out")))
        assert s.generator == Template()
        assert s.key_events == template_summary(demo_pod).key_events
        assert any("timed out" in w for w in s.warnings)

    def test_unparseable_reply_falls_back(self, demo_pod):
        for bad in (
            "here is a friendly prose summary",
            "OVERVIEW: ok\nDURATION_S: abc\nEVENT: 00:01 | Start | x",
            "OVERVIEW: ok\nDURATION_S: 3\nEVENT: 00:01 | Launch | x",
            "OVERVIEW: ok\nDURATION_S: 3",  # no events
        ):
            s = summarize(demo_pod, StubBackend(reply=bad))
            assert s.generator == Template()
            assert s.warnings and "did not parse" in s.warnings[0]

    def test_never_raises_and_invariants_hold(self, demo_pod):
        s = summarize(demo_pod, StubBackend(error=BackendError("boom")))
        assert isinstance(s, Summary)
        assert s.duration_s >= 0
        times = [e.time for e in s.key_events]
        assert times == sorted(times)


class TestRemoteBackend:
    def make_backend(self, handler, retries=0):
        return RemoteBackend(
            "http://llm.test/v1/chat/completions",
            "summarizer-1",
            timeout_s=2.0,
            retries=retries,
            transport=httpx.MockTransport(handler),
        )

    def test_posts_expected_body_and_extracts_content(self, monkeypatch):
        monkeypatch.setenv("MEMORYPOD_LLM_TOKEN", "sekret")
        seen = {}

        def handler(request):
            import json

            seen["body"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "OVERVIEW: hi"}}]}
            )

        backend = self.make_backend(handler)
        assert backend.complete("prompt text") == "OVERVIEW: hi"
        assert seen["body"]["model"] == "summarizer-1"
        assert seen["body"]["messages"] == [{"role": "user", "content": "prompt text"}]
        assert "max_tokens" in seen["body"]
        assert seen["auth"] == "Bearer sekret"

    def test_http_error_raises_backend_error(self):
        def handler(request):
            return httpx.Response(500, text="boom")

        with pytest.raises(BackendError):
            self.make_backend(handler).complete("x")

    def test_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(502, text="bad gateway")
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        assert self.make_backend(handler, retries=1).complete("x") == "ok"
        assert calls["n"] == 2

    def test_timeout_summarize_falls_back(self, demo_pod):
        def handler(request):
            raise httpx.ConnectTimeout("too slow")

        backend = self.make_backend(handler)
        s = summarize(demo_pod, backend)
        assert s.generator == Template()
        assert any("failed" in w for w in s.warnings)


class TestSummaryJson:
    def test_round_trip(self, demo_pod):
        for s in (template_summary(demo_pod), summarize(demo_pod, StubBackend(reply=GOOD_REPLY))):
            assert summary_from_obj(summary_to_obj(s)) == s
