"""The MemoryPod data model: pose tracks, annotations, transcript, mesh, zones.

Timestamps throughout are unsigned 64-bit microseconds from session start;
wall-clock time lives only in the pod header metadata.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum

from .errors import DuplicateAnnotationId, EmptyIndex, EmptyTrack
from .geometry import AnchorFrame, Pose, Vec3, Zone, pose_interpolate

Timestamp = int

QUAT_NORM_TOL = 1e-6
ENTITY_REF_NONE = 0xFFFF


class EntityRole(str, Enum):
    HEAD = "Head"
    LEFT_HAND = "LeftHand"
    RIGHT_HAND = "RightHand"
    OBJECT = "Object"


class AnnotationKind(str, Enum):
    START = "Start"
    END = "End"
    ACQUIRE = "Acquire"
    USE = "Use"
    DEPOSIT = "Deposit"


@dataclass(frozen=True)
class EntityTrack:
    """Anchor-frame pose samples for one tracked entity, strictly time-ordered."""

    entity_id: int
    role: EntityRole
    label: str
    samples: list[tuple[Timestamp, Pose]]


@dataclass(frozen=True)
class Annotation:
    id: int
    kind: AnnotationKind
    label: str
    at: Timestamp
    position: Vec3
    entity_ref: int | None = None


@dataclass(frozen=True)
class TranscriptSegment:
    start: Timestamp
    end: Timestamp
    speaker: str
    text: str


@dataclass(frozen=True)
class EnvironmentMesh:
    vertices: list[Vec3] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)


@dataclass(frozen=True)
class MemoryPod:
    """One complete, immutable recording."""

    pod_id: str
    title: str
    created_at: str
    anchor: AnchorFrame
    tracks: list[EntityTrack]
    annotations: list[Annotation]
    transcript: list[TranscriptSegment]
    mesh: EnvironmentMesh
    zones: list[Zone]
    meta: dict = field(default_factory=dict)

    def sample_time_range(self) -> tuple[Timestamp, Timestamp] | None:
        """(first, last) sample time across all tracks, or None if no samples."""
        lo: Timestamp | None = None
        hi: Timestamp | None = None
        for track in self.tracks:
            if track.samples:
                t0 = track.samples[0][0]
                t1 = track.samples[-1][0]
                lo = t0 if lo is None else min(lo, t0)
                hi = t1 if hi is None else max(hi, t1)
        if lo is None or hi is None:
            return None
        return lo, hi

    def duration_us(self) -> Timestamp:
        """Replay duration: last sample time (0 when the pod has no samples)."""
        span = self.sample_time_range()
        return span[1] if span else 0


@dataclass(frozen=True)
class KeyframeIndex:
    """Navigation entries (timestamp, annotation id), sorted by (time, id)."""

    entries: list[tuple[Timestamp, int]]

    @property
    def times(self) -> list[Timestamp]:
        return [t for t, _ in self.entries]


def build_keyframe_index(annotations: list[Annotation]) -> KeyframeIndex:
    """One entry per annotation, sorted by (timestamp, id)."""
    seen: set[int] = set()
    for a in annotations:
        if a.id in seen:
            raise DuplicateAnnotationId(f"annotation id {a.id} appears more than once")
        seen.add(a.id)
    return KeyframeIndex(sorted((a.at, a.id) for a in annotations))


class ValidationCode(str, Enum):
    # MissingStart/MissingEnd fire whenever the count differs from exactly
    # one; OverlappingTranscript also covers a segment with start > end.
    NON_MONOTONIC_TRACK = "NonMonotonicTrack"
    MISSING_START = "MissingStart"
    MISSING_END = "MissingEnd"
    START_AFTER_END = "StartAfterEnd"
    ANNOTATION_OUT_OF_RANGE = "AnnotationOutOfRange"
    DANGLING_ENTITY_REF = "DanglingEntityRef"
    BAD_QUATERNION = "BadQuaternion"
    BAD_MESH_INDEX = "BadMeshIndex"
    OVERLAPPING_TRANSCRIPT = "OverlappingTranscript"


@dataclass(frozen=True)
class Violation:
    code: ValidationCode
    detail: str

    def __str__(self) -> str:
        return f"{self.code.value}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> list[ValidationCode]:
        return [v.code for v in self.violations]

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations)


def _quat_ok(q) -> bool:
    return abs(q.norm() - 1.0) <= QUAT_NORM_TOL


def validate(pod: MemoryPod) -> ValidationReport:
    """Check every structural invariant; violations are data, not errors."""
    out: list[Violation] = []

    if not _quat_ok(pod.anchor.pose.orientation):
        out.append(Violation(ValidationCode.BAD_QUATERNION, "anchor orientation is not unit"))

    track_ids = {t.entity_id for t in pod.tracks}
    for track in pod.tracks:
        prev: Timestamp | None = None
        for t, pose in track.samples:
            if prev is not None and t <= prev:
                out.append(
                    Violation(
                        ValidationCode.NON_MONOTONIC_TRACK,
                        f"entity {track.entity_id}: sample at {t} does not increase past {prev}",
                    )
                )
                break
            prev = t
        for t, pose in track.samples:
            if not _quat_ok(pose.orientation):
                out.append(
                    Violation(
                        ValidationCode.BAD_QUATERNION,
                        f"entity {track.entity_id}: non-unit orientation at t={t}",
                    )
                )
                break

    starts = [a for a in pod.annotations if a.kind is AnnotationKind.START]
    ends = [a for a in pod.annotations if a.kind is AnnotationKind.END]
    if len(starts) != 1:
        out.append(
            Violation(ValidationCode.MISSING_START, f"expected exactly one Start, found {len(starts)}")
        )
    if len(ends) != 1:
        out.append(
            Violation(ValidationCode.MISSING_END, f"expected exactly one End, found {len(ends)}")
        )
    if len(starts) == 1 and len(ends) == 1 and starts[0].at >= ends[0].at:
        out.append(
            Violation(
                ValidationCode.START_AFTER_END,
                f"Start at {starts[0].at} is not before End at {ends[0].at}",
            )
        )

    span = pod.sample_time_range()
    for a in pod.annotations:
        if span is None or not (span[0] <= a.at <= span[1]):
            out.append(
                Violation(
                    ValidationCode.ANNOTATION_OUT_OF_RANGE,
                    f"annotation {a.id} at {a.at} outside sampled range {span}",
                )
            )
        if a.entity_ref is not None and a.entity_ref not in track_ids:
            out.append(
                Violation(
                    ValidationCode.DANGLING_ENTITY_REF,
                    f"annotation {a.id} references unknown entity {a.entity_ref}",
                )
            )

    n_vertices = len(pod.mesh.vertices)
    for i, tri in enumerate(pod.mesh.triangles):
        if any(idx < 0 or idx >= n_vertices for idx in tri):
            out.append(
                Violation(ValidationCode.BAD_MESH_INDEX, f"triangle {i} references vertex out of range")
            )
            break

    prev_seg: TranscriptSegment | None = None
    for i, seg in enumerate(pod.transcript):
        if seg.start > seg.end:
            out.append(
                Violation(ValidationCode.OVERLAPPING_TRANSCRIPT, f"segment {i} has start > end")
            )
            break
        if prev_seg is not None and seg.start < prev_seg.end:
            out.append(
                Violation(
                    ValidationCode.OVERLAPPING_TRANSCRIPT,
                    f"segment {i} starts at {seg.start} before previous ends at {prev_seg.end}",
                )
            )
            break
        prev_seg = seg

    return ValidationReport(out)


def sample_at(track: EntityTrack, t: Timestamp) -> Pose:
    """Pose at time t: exact sample, interpolation, or clamped endpoint."""
    samples = track.samples
    if not samples:
        raise EmptyTrack(f"entity {track.entity_id} has no samples")
    i = bisect.bisect_left(samples, t, key=lambda s: s[0])
    if i < len(samples) and samples[i][0] == t:
        return samples[i][1]
    if i == 0:
        return samples[0][1]
    if i == len(samples):
        return samples[-1][1]
    return pose_interpolate(samples[i - 1], samples[i], t)


def locate_chunk(chunk_index: list[tuple[Timestamp, int]], t: Timestamp) -> int:
    """Ordinal of the last chunk whose start time is <= t (binary search)."""
    if not chunk_index:
        raise EmptyIndex("chunk index is empty")
    i = bisect.bisect_right(chunk_index, t, key=lambda c: c[0]) - 1
    return max(i, 0)
