"""Capture events and the .mpcap JSON-lines wire format.

One event per line, discriminated by "type". Times are microseconds from
session start; geometry events carry coord="world" — positions are in the
capture device's world frame until the recorder converts them to the
anchor frame. Device adapters and the scenario simulator share this one
ingestion path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import CaptureLogError
from .geometry import Pose, UnitQuat, Vec3
from .pod import AnnotationKind, EntityRole


@dataclass(frozen=True)
class AnchorDetected:
    pose: Pose


@dataclass(frozen=True)
class DefineEntity:
    entity_id: int
    role: EntityRole
    label: str


@dataclass(frozen=True)
class SamplePose:
    entity_id: int
    t_us: int
    pose: Pose


@dataclass(frozen=True)
class Annotate:
    kind: AnnotationKind
    label: str
    t_us: int
    position: Vec3
    entity_ref: int | None = None
    # simulator provenance only; the recorder ignores it
    zone: str | None = None


@dataclass(frozen=True)
class TranscriptEvent:
    start_us: int
    end_us: int
    speaker: str
    text: str


@dataclass(frozen=True)
class MeshSnapshot:
    t_us: int
    vertices: list[Vec3] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class SessionEnd:
    t_us: int


CaptureEvent = Union[
    AnchorDetected,
    DefineEntity,
    SamplePose,
    Annotate,
    TranscriptEvent,
    MeshSnapshot,
    SessionEnd,
]


def _pose_obj(pose: Pose) -> dict:
    q = pose.orientation
    return {"p": [pose.position.x, pose.position.y, pose.position.z], "q": [q.w, q.x, q.y, q.z]}


def _pose_of(obj: dict) -> Pose:
    p = obj["p"]
    q = obj["q"]
    return Pose(Vec3(p[0], p[1], p[2]), UnitQuat(q[0], q[1], q[2], q[3]))


def event_to_obj(ev: CaptureEvent) -> dict:
    if isinstance(ev, AnchorDetected):
        return {"type": "anchor_detected", "pose": _pose_obj(ev.pose)}
    if isinstance(ev, DefineEntity):
        return {"type": "define_entity", "entity": ev.entity_id, "role": ev.role.value, "label": ev.label}
    if isinstance(ev, SamplePose):
        return {
            "type": "sample_pose",
            "t_us": ev.t_us,
            "entity": ev.entity_id,
            "pose": _pose_obj(ev.pose),
            "coord": "world",
        }
    if isinstance(ev, Annotate):
        obj = {
            "type": "annotate",
            "t_us": ev.t_us,
            "kind": ev.kind.value,
            "label": ev.label,
            "pose": {"p": [ev.position.x, ev.position.y, ev.position.z], "q": [1.0, 0.0, 0.0, 0.0]},
            "coord": "world",
        }
        if ev.entity_ref is not None:
            obj["entity"] = ev.entity_ref
        if ev.zone is not None:
            obj["zone"] = ev.zone
        return obj
    if isinstance(ev, TranscriptEvent):
        return {
            "type": "transcript",
            "t_us": ev.start_us,
            "end_us": ev.end_us,
            "speaker": ev.speaker,
            "text": ev.text,
        }
    if isinstance(ev, MeshSnapshot):
        return {
            "type": "mesh_snapshot",
            "t_us": ev.t_us,
            "vertices": [[v.x, v.y, v.z] for v in ev.vertices],
            "triangles": [list(t) for t in ev.triangles],
            "coord": "world",
        }
    if isinstance(ev, SessionEnd):
        return {"type": "session_end", "t_us": ev.t_us}
    raise CaptureLogError(f"unknown event object {ev!r}")


def event_from_obj(obj: dict) -> CaptureEvent:
    try:
        kind = obj["type"]
        if kind == "anchor_detected":
            return AnchorDetected(_pose_of(obj["pose"]))
        if kind == "define_entity":
            return DefineEntity(int(obj["entity"]), EntityRole(obj["role"]), str(obj["label"]))
        if kind == "sample_pose":
            return SamplePose(int(obj["entity"]), int(obj["t_us"]), _pose_of(obj["pose"]))
        if kind == "annotate":
            p = obj["pose"]["p"]
            ref = obj.get("entity")
            return Annotate(
                AnnotationKind(obj["kind"]),
                str(obj["label"]),
                int(obj["t_us"]),
                Vec3(p[0], p[1], p[2]),
                None if ref is None else int(ref),
                obj.get("zone"),
            )
        if kind == "transcript":
            return TranscriptEvent(
                int(obj["t_us"]), int(obj["end_us"]), str(obj["speaker"]), str(obj["text"])
            )
        if kind == "mesh_snapshot":
            return MeshSnapshot(
                int(obj["t_us"]),
                [Vec3(v[0], v[1], v[2]) for v in obj["vertices"]],
                [(int(t[0]), int(t[1]), int(t[2])) for t in obj["triangles"]],
            )
        if kind == "session_end":
            return SessionEnd(int(obj["t_us"]))
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise CaptureLogError(f"malformed capture event {obj!r}: {e}") from e
    raise CaptureLogError(f"unknown capture event type {kind!r}")


def dumps_capture_log(events: list[CaptureEvent]) -> str:
    lines = [json.dumps(event_to_obj(ev), sort_keys=True, separators=(",", ":")) for ev in events]
    return "".join(line + "\n" for line in lines)


def loads_capture_log(text: str) -> list[CaptureEvent]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise CaptureLogError(f"line {lineno}: not valid JSON: {e}") from e
        events.append(event_from_obj(obj))
    return events


def write_capture_log(events: list[CaptureEvent], path: str | Path) -> None:
    Path(path).write_text(dumps_capture_log(events), encoding="utf-8")


def read_capture_log(path: str | Path) -> list[CaptureEvent]:
    return loads_capture_log(Path(path).read_text(encoding="utf-8"))
