"""Event-recording state machine: capture-event stream in, MemoryPod out.

A session moves Created -> Anchored (anchor detected) -> Recording (first
Start annotation) -> Finished (End annotation or explicit session end).
World-frame geometry is converted into the anchor frame the moment it is
stored. Each session is owned by a single ingestion thread.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from .errors import (
    AlreadyFinished,
    EventBeforeAnchor,
    InvalidPod,
    NonMonotonicSample,
    NotFinished,
    UnknownEntity,
)
from .events import (
    AnchorDetected,
    Annotate,
    CaptureEvent,
    DefineEntity,
    MeshSnapshot,
    SamplePose,
    SessionEnd,
    TranscriptEvent,
)
from .geometry import AnchorFrame, Pose, Vec3, Zone, to_anchor_frame, to_anchor_point
from .pod import (
    Annotation,
    AnnotationKind,
    EntityRole,
    EntityTrack,
    EnvironmentMesh,
    MemoryPod,
    TranscriptSegment,
    validate,
)


class SessionState(Enum):
    CREATED = "Created"
    ANCHORED = "Anchored"
    RECORDING = "Recording"
    FINISHED = "Finished"


@dataclass
class _TrackAccum:
    role: EntityRole
    label: str
    samples: list[tuple[int, Pose]]


class RecorderSession:
    """Accumulates one recording. Identity and wall clock are fixed at
    construction so finalize() is pure and repeatable."""

    def __init__(
        self,
        title: str = "untitled session",
        pod_id: str | None = None,
        created_at: str | None = None,
        zones: list[Zone] | None = None,
    ):
        self.state = SessionState.CREATED
        self.title = title
        self.pod_id = pod_id or str(uuid.uuid4())
        self.created_at = created_at or datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.zones = list(zones or [])
        self.anchor: AnchorFrame | None = None
        self.meta: dict = {}
        self._tracks: dict[int, _TrackAccum] = {}
        self._annotations: list[Annotation] = []
        self._transcript: list[TranscriptSegment] = []
        self._mesh = EnvironmentMesh()
        self._next_annotation_id = 1
        self._has_end = False

    # -- event ingestion --------------------------------------------------

    def apply(self, ev: CaptureEvent) -> RecorderSession:
        """Apply one capture event; rejects events illegal for the state."""
        if self.state is SessionState.FINISHED:
            raise AlreadyFinished(f"session is finished; rejected {type(ev).__name__}")

        if isinstance(ev, DefineEntity):
            self._define_entity(ev)
        elif isinstance(ev, AnchorDetected):
            self._set_anchor(ev)
        elif isinstance(ev, TranscriptEvent):
            self._transcript.append(TranscriptSegment(ev.start_us, ev.end_us, ev.speaker, ev.text))
        elif isinstance(ev, SamplePose):
            self._require_anchor(ev)
            self._add_sample(ev)
        elif isinstance(ev, Annotate):
            self._require_anchor(ev)
            self._annotate(ev)
        elif isinstance(ev, MeshSnapshot):
            self._require_anchor(ev)
            self._snapshot_mesh(ev)
        elif isinstance(ev, SessionEnd):
            self._require_anchor(ev)
            self._finish(ev.t_us)
        else:
            raise TypeError(f"not a capture event: {ev!r}")
        return self

    def _require_anchor(self, ev: CaptureEvent) -> None:
        if self.anchor is None:
            raise EventBeforeAnchor(f"{type(ev).__name__} before anchor detection")

    def _define_entity(self, ev: DefineEntity) -> None:
        existing = self._tracks.get(ev.entity_id)
        if existing is not None:
            if existing.role is ev.role and existing.label == ev.label:
                return  # idempotent redefinition
            raise ValueError(f"entity {ev.entity_id} redefined with different role/label")
        self._tracks[ev.entity_id] = _TrackAccum(ev.role, ev.label, [])

    def _set_anchor(self, ev: AnchorDetected) -> None:
        if self.anchor is not None:
            raise ValueError("anchor already established for this session")
        self.anchor = AnchorFrame(ev.pose)
        self.state = SessionState.ANCHORED

    def _add_sample(self, ev: SamplePose) -> None:
        accum = self._tracks.get(ev.entity_id)
        if accum is None:
            raise UnknownEntity(f"sample for undefined entity {ev.entity_id}")
        if accum.samples and ev.t_us <= accum.samples[-1][0]:
            raise NonMonotonicSample(
                f"entity {ev.entity_id}: t={ev.t_us} does not increase past {accum.samples[-1][0]}"
            )
        accum.samples.append((ev.t_us, to_anchor_frame(self.anchor, ev.pose)))

    def _annotate(self, ev: Annotate) -> None:
        if ev.entity_ref is not None and ev.entity_ref not in self._tracks:
            raise UnknownEntity(f"annotation references undefined entity {ev.entity_ref}")
        annotation = Annotation(
            self._next_annotation_id,
            ev.kind,
            ev.label,
            ev.t_us,
            to_anchor_point(self.anchor, ev.position),
            ev.entity_ref,
        )
        self._next_annotation_id += 1
        self._annotations.append(annotation)
        if ev.kind is AnnotationKind.START and self.state is SessionState.ANCHORED:
            self.state = SessionState.RECORDING
        elif ev.kind is AnnotationKind.END:
            self._has_end = True
            if self.state is SessionState.RECORDING:
                self.state = SessionState.FINISHED

    def _snapshot_mesh(self, ev: MeshSnapshot) -> None:
        # latest snapshot wins: each snapshot is the whole environment
        vertices = [to_anchor_point(self.anchor, v) for v in ev.vertices]
        self._mesh = EnvironmentMesh(vertices, list(ev.triangles))

    def _finish(self, t_us: int) -> None:
        if not self._has_end:
            self._synthesize_end(t_us)
        self.state = SessionState.FINISHED

    def _synthesize_end(self, fallback_t: int) -> None:
        last_t = fallback_t
        position = Vec3(0.0, 0.0, 0.0)
        sampled = [a for a in self._tracks.values() if a.samples]
        if sampled:
            last_t = max(a.samples[-1][0] for a in sampled)
            heads = [a for a in sampled if a.role is EntityRole.HEAD]
            position = (heads[0] if heads else sampled[0]).samples[-1][1].position
        self._annotations.append(
            Annotation(self._next_annotation_id, AnnotationKind.END, "session end", last_t, position)
        )
        self._next_annotation_id += 1
        self._has_end = True
        self.meta["synthesized_end"] = True

    # -- output -----------------------------------------------------------

    def finalize(self) -> MemoryPod:
        """Freeze the accumulated state into a validated pod."""
        if self.state is not SessionState.FINISHED:
            raise NotFinished(f"session is {self.state.value}, not Finished")
        pod = MemoryPod(
            pod_id=self.pod_id,
            title=self.title,
            created_at=self.created_at,
            anchor=self.anchor if self.anchor is not None else AnchorFrame(Pose.identity()),
            tracks=[
                EntityTrack(eid, accum.role, accum.label, list(accum.samples))
                for eid, accum in sorted(self._tracks.items())
            ],
            annotations=list(self._annotations),
            transcript=list(self._transcript),
            mesh=self._mesh,
            zones=list(self.zones),
            meta=dict(self.meta),
        )
        report = validate(pod)
        if not report.ok:
            raise InvalidPod(report)
        return pod


def record_events(
    events: list[CaptureEvent],
    title: str = "untitled session",
    pod_id: str | None = None,
    created_at: str | None = None,
    zones: list[Zone] | None = None,
) -> MemoryPod:
    """Run a whole event stream through a fresh session and finalize it."""
    session = RecorderSession(title=title, pod_id=pod_id, created_at=created_at, zones=zones)
    for ev in events:
        session.apply(ev)
    return session.finalize()


def downsample(track: EntityTrack, target_hz: float) -> EntityTrack:
    """Thin a track to roughly target_hz, always keeping first and last samples."""
    if target_hz <= 0:
        raise ValueError("target_hz must be positive")
    samples = track.samples
    if len(samples) <= 2:
        return EntityTrack(track.entity_id, track.role, track.label, list(samples))
    min_gap_us = 1e6 / target_hz
    kept = [samples[0]]
    for sample in samples[1:]:
        if sample[0] - kept[-1][0] >= min_gap_us:
            kept.append(sample)
    if kept[-1] is not samples[-1]:
        kept.append(samples[-1])
    return EntityTrack(track.entity_id, track.role, track.label, kept)
