"""memorypod: record, store, and replay anchor-relative spatio-temporal XR sessions."""

from .codec import DEFAULT_CHUNK_DURATION_US, decode_pod, encode_pod, read_chunk_index
from .events import (
    AnchorDetected,
    Annotate,
    CaptureEvent,
    DefineEntity,
    MeshSnapshot,
    SamplePose,
    SessionEnd,
    TranscriptEvent,
    read_capture_log,
    write_capture_log,
)
from .geometry import (
    AnchorFrame,
    MiniaturePlacement,
    Pose,
    UnitQuat,
    Vec3,
    Zone,
    apply_miniature,
    fov_footprint,
    from_anchor_frame,
    point_in_zone,
    pose_interpolate,
    slerp,
    to_anchor_frame,
    zone_of,
)
from .narrative import (
    Digest,
    RemoteBackend,
    RemoteModel,
    Summary,
    Template,
    TemplateBackend,
    build_digest,
    summarize,
    template_summary,
)
from .pod import (
    Annotation,
    AnnotationKind,
    EntityRole,
    EntityTrack,
    EnvironmentMesh,
    KeyframeIndex,
    MemoryPod,
    TranscriptSegment,
    ValidationCode,
    ValidationReport,
    build_keyframe_index,
    locate_chunk,
    sample_at,
    validate,
)
from .recorder import RecorderSession, downsample, record_events
from .replay import (
    FrameState,
    Miniature,
    PodShelf,
    RealScale,
    RecallResponse,
    ReplaySession,
    area_accuracy,
    mean_time_offset,
    open_session,
)
from .scenario import Lcg64, ScenarioConfig, ScenarioStep, load_scenario, simulate_scenario
from .server import create_app
from .store import PodStore

__version__ = "0.1.0"

__all__ = [
    "AnchorDetected",
    "AnchorFrame",
    "Annotate",
    "Annotation",
    "AnnotationKind",
    "CaptureEvent",
    "DEFAULT_CHUNK_DURATION_US",
    "DefineEntity",
    "Digest",
    "EntityRole",
    "EntityTrack",
    "EnvironmentMesh",
    "FrameState",
    "KeyframeIndex",
    "Lcg64",
    "MemoryPod",
    "MeshSnapshot",
    "Miniature",
    "MiniaturePlacement",
    "PodShelf",
    "PodStore",
    "Pose",
    "RealScale",
    "RecallResponse",
    "RecorderSession",
    "RemoteBackend",
    "RemoteModel",
    "ReplaySession",
    "SamplePose",
    "ScenarioConfig",
    "ScenarioStep",
    "SessionEnd",
    "Summary",
    "Template",
    "TemplateBackend",
    "TranscriptEvent",
    "TranscriptSegment",
    "UnitQuat",
    "ValidationCode",
    "ValidationReport",
    "Vec3",
    "Zone",
    "apply_miniature",
    "area_accuracy",
    "build_digest",
    "build_keyframe_index",
    "create_app",
    "decode_pod",
    "downsample",
    "encode_pod",
    "fov_footprint",
    "from_anchor_frame",
    "load_scenario",
    "locate_chunk",
    "mean_time_offset",
    "open_session",
    "point_in_zone",
    "pose_interpolate",
    "read_capture_log",
    "read_chunk_index",
    "record_events",
    "sample_at",
    "simulate_scenario",
    "slerp",
    "summarize",
    "template_summary",
    "to_anchor_frame",
    "validate",
    "write_capture_log",
    "zone_of",
]
