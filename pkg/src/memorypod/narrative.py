"""Narrative abstraction: digest building and pod summarisation.

A summary is structured data (overview prose, key events, tools), produced
either by a deterministic template or by a remote chat-completion model.
The remote path never raises: any backend failure or unparseable reply
falls back to the template summary with the reason attached as a warning.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace

import httpx

from .errors import BackendError, InvalidPod
from .pod import AnnotationKind, MemoryPod, Timestamp, validate
from .geometry import zone_of

DEFAULT_TIMEOUT_S = 30.0
DEFAULT_MAX_TOKENS = 1024
TOKEN_ENV_VAR = "MEMORYPOD_LLM_TOKEN"

# The reply grammar is pinned so parsing stays tractable; anything that
# strays from it triggers template fallback rather than a partial parse.
PROMPT_INSTRUCTIONS = """\
You are summarising a recorded maintenance session from its event digest.
Reply with exactly these line-prefixed fields and nothing else:
OVERVIEW: <one or two sentences describing the whole process>
DURATION_S: <total duration in seconds, a plain number>
EVENT: <mm:ss> | <Start|End|Acquire|Use|Deposit> | <label>
TOOLS: <comma-separated tool labels; omit this line if none>
Repeat the EVENT line once per key event, in time order.

Event digest follows:
"""

_EVENT_TIME_RE = re.compile(r"^\d{2,}:\d{2}$")


def format_mmss(t_us: Timestamp) -> str:
    minutes = t_us // 60_000_000
    seconds = (t_us % 60_000_000) // 1_000_000
    return f"{minutes:02d}:{seconds:02d}"


@dataclass(frozen=True)
class Digest:
    """Time-ordered plain-text rendering of annotations and transcript."""

    lines: list[str]

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class Template:
    """Generator marker: deterministic template engine."""


@dataclass(frozen=True)
class RemoteModel:
    """Generator marker: remote language model by name."""

    name: str


SummaryGenerator = RemoteModel | Template


@dataclass(frozen=True)
class KeyEvent:
    time: str  # mm:ss
    kind: AnnotationKind
    label: str


@dataclass(frozen=True)
class Summary:
    overview: str
    duration_s: float
    key_events: list[KeyEvent]
    tools: list[str]
    generator: SummaryGenerator
    warnings: list[str] = field(default_factory=list)


def _require_valid(pod: MemoryPod) -> None:
    report = validate(pod)
    if not report.ok:
        raise InvalidPod(report)


def build_digest(pod: MemoryPod) -> Digest:
    """Merge annotations and transcript into ordered digest lines.

    Annotation lines name the zone containing the event (or "unzoned");
    at equal times annotations sort before transcript segments.
    """
    _require_valid(pod)
    entries: list[tuple[int, int, int, str]] = []
    for a in sorted(pod.annotations, key=lambda a: (a.at, a.id)):
        zone = zone_of(pod.zones, a.position)
        zone_id = zone.id if zone is not None else "unzoned"
        line = f"[{format_mmss(a.at)}] EVENT {a.kind.value} {a.label} @ {zone_id}"
        entries.append((a.at, 0, a.id, line))
    for i, seg in enumerate(pod.transcript):
        line = f"[{format_mmss(seg.start)}] {seg.speaker.upper()}: {seg.text}"
        entries.append((seg.start, 1, i, line))
    entries.sort(key=lambda e: (e[0], e[1], e[2]))
    return Digest([line for _, _, _, line in entries])


def template_summary(pod: MemoryPod) -> Summary:
    """Deterministic summary derived purely from the pod's annotations."""
    _require_valid(pod)
    ordered = sorted(pod.annotations, key=lambda a: (a.at, a.id))
    start = next(a for a in ordered if a.kind is AnnotationKind.START)
    end = next(a for a in ordered if a.kind is AnnotationKind.END)
    duration_s = (end.at - start.at) / 1e6
    tools: list[str] = []
    for a in ordered:
        if a.kind is AnnotationKind.ACQUIRE and a.label not in tools:
            tools.append(a.label)
    overview = (
        f"Process '{pod.title}' ran {format_mmss(end.at - start.at)} "
        f"from {format_mmss(start.at)} to {format_mmss(end.at)}, "
        f"involving {len(ordered)} annotated actions."
    )
    key_events = [KeyEvent(format_mmss(a.at), a.kind, a.label) for a in ordered]
    return Summary(overview, duration_s, key_events, tools, Template())


class TemplateBackend:
    """Backend sentinel that routes summarize() to the template engine."""

    model = "template"


class RemoteBackend:
    """HTTP chat-completion backend: one text-in/text-out call.

    Request body is {model, messages, max_tokens}; the reply text is taken
    from the first message content. The auth token comes only from the
    environment, never from configuration files.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        retries: int = 1,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.timeout_s = timeout_s
        self.retries = retries
        self._transport = transport

    def complete(self, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": max_tokens,
        }
        headers = {}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with httpx.Client(timeout=self.timeout_s, transport=self._transport) as client:
                    response = client.post(self.endpoint, json=body, headers=headers)
                    response.raise_for_status()
                    return _extract_reply(response.json())
            except (httpx.HTTPError, ValueError, KeyError, IndexError, TypeError) as e:
                last_error = e
        raise BackendError(f"remote completion failed after {self.retries + 1} attempts: {last_error}")


def _extract_reply(data: dict) -> str:
    choices = data.get("choices")
    if isinstance(choices, list) and choices:
        first = choices[0]
        if isinstance(first, dict):
            message = first.get("message")
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
            if isinstance(first.get("text"), str):
                return first["text"]
    if isinstance(data.get("content"), str):
        return data["content"]
    raise ValueError("no message content in completion response")


class _ReplyParseError(ValueError):
    pass


def _parse_reply(text: str, model_name: str) -> Summary:
    overview: str | None = None
    duration_s: float | None = None
    key_events: list[KeyEvent] = []
    tools: list[str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("OVERVIEW:"):
            if overview is not None:
                raise _ReplyParseError("duplicate OVERVIEW line")
            overview = line[len("OVERVIEW:") :].strip()
        elif line.startswith("DURATION_S:"):
            if duration_s is not None:
                raise _ReplyParseError("duplicate DURATION_S line")
            try:
                duration_s = float(line[len("DURATION_S:") :].strip())
            except ValueError as e:
                raise _ReplyParseError(f"bad DURATION_S: {e}") from e
        elif line.startswith("EVENT:"):
            parts = [p.strip() for p in line[len("EVENT:") :].split("|")]
            if len(parts) != 3:
                raise _ReplyParseError(f"EVENT line needs 3 fields: {line!r}")
            time, kind_name, label = parts
            if not _EVENT_TIME_RE.match(time):
                raise _ReplyParseError(f"bad event time {time!r}")
            try:
                kind = AnnotationKind(kind_name)
            except ValueError as e:
                raise _ReplyParseError(f"unknown event kind {kind_name!r}") from e
            key_events.append(KeyEvent(time, kind, label))
        elif line.startswith("TOOLS:"):
            if tools is not None:
                raise _ReplyParseError("duplicate TOOLS line")
            tools = [t.strip() for t in line[len("TOOLS:") :].split(",") if t.strip()]
        else:
            raise _ReplyParseError(f"unexpected line {line!r}")
    if overview is None or duration_s is None or duration_s < 0:
        raise _ReplyParseError("reply missing OVERVIEW or valid DURATION_S")
    if not key_events:
        raise _ReplyParseError("reply has no EVENT lines")
    if tools is None:
        tools = []
        for ev in key_events:
            if ev.kind is AnnotationKind.ACQUIRE and ev.label not in tools:
                tools.append(ev.label)
    return Summary(overview, duration_s, key_events, tools, RemoteModel(model_name))


def summarize(pod: MemoryPod, backend) -> Summary:
    """Summarise via the backend, falling back to the template on failure."""
    if isinstance(backend, TemplateBackend):
        return template_summary(pod)
    digest = build_digest(pod)
    prompt = PROMPT_INSTRUCTIONS + digest.text
    model_name = getattr(backend, "model", "remote")
    try:
        reply = backend.complete(prompt)
    except BackendError as e:
        return replace(template_summary(pod), warnings=[f"remote backend failed: {e}"])
    try:
        return _parse_reply(reply, model_name)
    except _ReplyParseError as e:
        return replace(template_summary(pod), warnings=[f"reply did not parse: {e}"])


# -- JSON projections shared by the server and CLI --------------------------


def generator_to_obj(generator: SummaryGenerator) -> dict:
    if isinstance(generator, RemoteModel):
        return {"kind": "remote", "model": generator.name}
    return {"kind": "template"}


def summary_to_obj(summary: Summary) -> dict:
    return {
        "overview": summary.overview,
        "duration_s": summary.duration_s,
        "key_events": [
            {"time": ev.time, "kind": ev.kind.value, "label": ev.label}
            for ev in summary.key_events
        ],
        "tools": list(summary.tools),
        "generator": generator_to_obj(summary.generator),
        "warnings": list(summary.warnings),
    }


def summary_from_obj(obj: dict) -> Summary:
    generator_obj = obj.get("generator", {})
    if generator_obj.get("kind") == "remote":
        generator: SummaryGenerator = RemoteModel(str(generator_obj.get("model", "remote")))
    else:
        generator = Template()
    return Summary(
        overview=str(obj["overview"]),
        duration_s=float(obj["duration_s"]),
        key_events=[
            KeyEvent(str(e["time"]), AnnotationKind(e["kind"]), str(e["label"]))
            for e in obj.get("key_events", [])
        ],
        tools=[str(t) for t in obj.get("tools", [])],
        generator=generator,
        warnings=[str(w) for w in obj.get("warnings", [])],
    )
