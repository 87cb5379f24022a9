"""Playback engine: real-scale and miniature modes, seeking, keyframe jumps.

The clock is caller-driven (advance receives measured wall seconds), so
the engine is deterministic and testable; real-time pacing belongs to
whatever drives it. A session is owned by one controller at a time; the
pod underneath is shared read-only.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import (
    AmbiguousLabel,
    AnnotationOutsideZones,
    EmptyResponses,
    InvalidPod,
    NoKeyframes,
    OutOfRange,
    UnmatchedLabel,
)
from .geometry import (
    DEFAULT_FOV_DEPTH,
    DEFAULT_FOV_HALF_ANGLE,
    AnchorFrame,
    MiniaturePlacement,
    Pose,
    Vec3,
    apply_miniature,
    fov_footprint,
    from_anchor_frame,
    zone_of,
)
from .pod import (
    EntityRole,
    KeyframeIndex,
    MemoryPod,
    Timestamp,
    TranscriptSegment,
    build_keyframe_index,
    sample_at,
    validate,
)

DEFAULT_ANNOTATION_WINDOW_US = 1_000_000


@dataclass(frozen=True)
class RealScale:
    """Replay re-anchored onto the anchor pose detected in the viewer's world."""

    anchor: AnchorFrame = field(default_factory=AnchorFrame)


@dataclass(frozen=True)
class Miniature:
    placement: MiniaturePlacement = field(default_factory=MiniaturePlacement)


ReplayMode = RealScale | Miniature


@dataclass(frozen=True)
class FrameState:
    """World-space snapshot of the replay at one instant."""

    t: Timestamp
    entities: list[tuple[int, EntityRole, Pose]]
    fov: tuple[Vec3, Vec3, Vec3] | None
    active_annotations: list[int]
    current_transcript: TranscriptSegment | None


@dataclass(frozen=True)
class RecallResponse:
    """A reviewer's recollection of one annotated event."""

    label: str
    reported_t_us: Timestamp
    zone_id: str


def _map_pose(mode: ReplayMode, rel: Pose) -> Pose:
    if isinstance(mode, RealScale):
        return from_anchor_frame(mode.anchor, rel)
    return apply_miniature(mode.placement, rel)


def _mode_scale(mode: ReplayMode) -> float:
    return mode.placement.scale if isinstance(mode, Miniature) else 1.0


class ReplaySession:
    def __init__(
        self,
        pod: MemoryPod,
        mode: ReplayMode,
        annotation_window_us: int = DEFAULT_ANNOTATION_WINDOW_US,
        fov_half_angle: float = DEFAULT_FOV_HALF_ANGLE,
        fov_depth: float = DEFAULT_FOV_DEPTH,
    ):
        self.pod = pod
        self.mode = mode
        self.cursor: Timestamp = 0
        self.rate: float = 1.0
        self.playing: bool = False
        self.annotation_window_us = annotation_window_us
        self.fov_half_angle = fov_half_angle
        self.fov_depth = fov_depth
        self.duration_us: Timestamp = pod.duration_us()
        self.keyframes: KeyframeIndex = build_keyframe_index(pod.annotations)
        self._sampled_tracks = [t for t in pod.tracks if t.samples]
        self._head_track = next(
            (t for t in self._sampled_tracks if t.role is EntityRole.HEAD), None
        )
        self._annotations_by_time = sorted(pod.annotations, key=lambda a: (a.at, a.id))

    def set_mode(self, mode: ReplayMode) -> None:
        """Switch real-scale/miniature placement; cursor and rate persist."""
        self.mode = mode

    def seek(self, t: Timestamp) -> None:
        """Clamp-seek the cursor (stream-facing; frame_at stays strict)."""
        self.cursor = min(max(t, 0), self.duration_us)

    def frame_at(self, t: Timestamp) -> FrameState:
        """Pure snapshot of entity poses, FOV, annotations, transcript at t."""
        if not (0 <= t <= self.duration_us):
            raise OutOfRange(f"t={t} outside [0, {self.duration_us}]")
        entities = []
        head_world: Pose | None = None
        for track in self._sampled_tracks:
            world = _map_pose(self.mode, sample_at(track, t))
            entities.append((track.entity_id, track.role, world))
            if track is self._head_track:
                head_world = world
        fov = None
        if head_world is not None:
            fov = fov_footprint(
                head_world, self.fov_half_angle, self.fov_depth * _mode_scale(self.mode)
            )
        window = self.annotation_window_us
        active = [a.id for a in self._annotations_by_time if abs(a.at - t) <= window]
        transcript = next(
            (seg for seg in self.pod.transcript if seg.start <= t <= seg.end), None
        )
        return FrameState(t, entities, fov, active, transcript)

    def advance(self, wall_dt_s: float) -> FrameState:
        """Move the playback clock by rate x wall_dt and return the frame.

        Clamps at the end of the pod and auto-pauses there; a paused
        session returns the current frame unchanged.
        """
        if self.playing:
            raw = self.cursor + round(self.rate * wall_dt_s * 1e6)
            self.cursor = min(max(raw, 0), self.duration_us)
            if self.cursor >= self.duration_us:
                self.playing = False
        return self.frame_at(self.cursor)

    def jump_keyframe(self, direction: str) -> Timestamp:
        """Move the cursor to the next/previous keyframe time, strictly
        beyond the current cursor; no such keyframe leaves it unchanged."""
        if not self.keyframes.entries:
            raise NoKeyframes("pod has no keyframes")
        if direction not in ("next", "prev"):
            raise ValueError(f"direction must be 'next' or 'prev', got {direction!r}")
        times = self.keyframes.times
        if direction == "next":
            i = bisect.bisect_right(times, self.cursor)
            if i < len(times):
                self.cursor = times[i]
        else:
            i = bisect.bisect_left(times, self.cursor)
            if i > 0:
                self.cursor = times[i - 1]
        return self.cursor


def open_session(
    pod: MemoryPod,
    mode: ReplayMode,
    annotation_window_us: int = DEFAULT_ANNOTATION_WINDOW_US,
    fov_half_angle: float = DEFAULT_FOV_HALF_ANGLE,
    fov_depth: float = DEFAULT_FOV_DEPTH,
) -> ReplaySession:
    """Validate the pod and open a paused session at cursor 0, rate 1."""
    report = validate(pod)
    if not report.ok:
        raise InvalidPod(report)
    return ReplaySession(pod, mode, annotation_window_us, fov_half_angle, fov_depth)


class PodShelf:
    """Independently placed concurrent replays; sessions share nothing."""

    def __init__(self):
        self._entries: list[tuple[MemoryPod, ReplaySession]] = []

    def add(self, pod: MemoryPod, mode: ReplayMode, **session_kwargs) -> int:
        session = open_session(pod, mode, **session_kwargs)
        self._entries.append((pod, session))
        return len(self._entries) - 1

    def remove(self, index: int) -> None:
        del self._entries[index]

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, index: int) -> tuple[MemoryPod, ReplaySession]:
        return self._entries[index]

    @property
    def sessions(self) -> list[ReplaySession]:
        return [s for _, s in self._entries]


# -- review-accuracy metrics ------------------------------------------------


def _match_annotation(pod: MemoryPod, label: str):
    matches = [a for a in pod.annotations if a.label == label]
    if not matches:
        raise UnmatchedLabel(f"no annotation labelled {label!r}")
    if len(matches) > 1:
        raise AmbiguousLabel(f"{len(matches)} annotations labelled {label!r}")
    return matches[0]


def mean_time_offset(responses: list[RecallResponse], pod: MemoryPod) -> float:
    """Mean absolute offset, in seconds, between recalled and annotated times."""
    if not responses:
        raise EmptyResponses("no responses to score")
    total_us = 0
    for r in responses:
        annotation = _match_annotation(pod, r.label)
        total_us += abs(r.reported_t_us - annotation.at)
    return total_us / len(responses) / 1e6


def area_accuracy(responses: list[RecallResponse], pod: MemoryPod) -> float:
    """Fraction of responses naming the zone that contains the event."""
    if not responses:
        raise EmptyResponses("no responses to score")
    correct = 0
    for r in responses:
        annotation = _match_annotation(pod, r.label)
        zone = zone_of(pod.zones, annotation.position)
        if zone is None:
            raise AnnotationOutsideZones(
                f"annotation {annotation.id} ({annotation.label!r}) lies in no zone"
            )
        if r.zone_id == zone.id:
            correct += 1
    return correct / len(responses)


__all__ = [
    "DEFAULT_ANNOTATION_WINDOW_US",
    "FrameState",
    "Miniature",
    "PodShelf",
    "RealScale",
    "RecallResponse",
    "ReplayMode",
    "ReplaySession",
    "area_accuracy",
    "mean_time_offset",
    "open_session",
]
