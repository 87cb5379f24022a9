"""Shared test helpers: independent oracles and seeded random generators.

The rotation-matrix oracle here is deliberately a separate code path from
the package's quaternion math so transform tests check against an
independent formulation.
"""

from __future__ import annotations

import random
import struct
import uuid

from memorypod.geometry import AnchorFrame, Pose, UnitQuat, Vec3, Zone
from memorypod.pod import (
    Annotation,
    AnnotationKind,
    EntityRole,
    EntityTrack,
    EnvironmentMesh,
    MemoryPod,
    TranscriptSegment,
)

Mat3 = list[list[float]]


def quat_to_matrix(q: UnitQuat) -> Mat3:
    """Textbook unit-quaternion to 3x3 rotation matrix conversion."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return [
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ]


def mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return Vec3(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )


def mat_transpose(m: Mat3) -> Mat3:
    return [[m[j][i] for j in range(3)] for i in range(3)]


def rand_vec(rng: random.Random, span: float = 10.0) -> Vec3:
    return Vec3(
        rng.uniform(-span, span),
        rng.uniform(-span, span),
        rng.uniform(-span, span),
    )


def rand_quat(rng: random.Random) -> UnitQuat:
    while True:
        q = UnitQuat(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        if q.norm() > 1e-3:
            return q.normalized()


def rand_pose(rng: random.Random, span: float = 10.0) -> Pose:
    return Pose(rand_vec(rng, span), rand_quat(rng))


def rand_anchor(rng: random.Random, span: float = 10.0) -> AnchorFrame:
    return AnchorFrame(rand_pose(rng, span))


def vec_close(a: Vec3, b: Vec3, tol: float) -> bool:
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol and abs(a.z - b.z) <= tol


def quat_close_up_to_sign(a: UnitQuat, b: UnitQuat, tol: float) -> bool:
    """Component-wise closeness treating q and -q as the same rotation."""
    same = max(abs(a.w - b.w), abs(a.x - b.x), abs(a.y - b.y), abs(a.z - b.z))
    flip = max(abs(a.w + b.w), abs(a.x + b.x), abs(a.y + b.y), abs(a.z + b.z))
    return min(same, flip) <= tol


def f32(x: float) -> float:
    """Round through 32-bit float, matching on-disk sample precision."""
    return struct.unpack("<f", struct.pack("<f", x))[0]


def f32_vec(rng: random.Random, span: float = 10.0) -> Vec3:
    return Vec3(f32(rng.uniform(-span, span)), f32(rng.uniform(-span, span)), f32(rng.uniform(-span, span)))


def f32_quat(rng: random.Random) -> UnitQuat:
    q = rand_quat(rng)
    return UnitQuat(f32(q.w), f32(q.x), f32(q.y), f32(q.z))


def f32_pose(rng: random.Random, span: float = 10.0) -> Pose:
    return Pose(f32_vec(rng, span), f32_quat(rng))


def demo_scenario(seed: int = 7, anchor: Pose | None = None, sample_rate_hz: float = 30.0):
    """Five-step maintenance scenario (drive swap shape) shared by tests."""
    import math

    from memorypod.scenario import ScenarioConfig, ScenarioStep

    if anchor is None:
        anchor = Pose(
            Vec3(10.0, 0.5, -3.0),
            UnitQuat.from_axis_angle(Vec3(0, 1, 0), math.radians(30)),
        )
    zones = [
        Zone("staging", "Staging table", 0.0, 2.0, 0.0, 2.0),
        Zone("rack", "Server rack", 3.0, 5.0, 0.0, 2.0),
        Zone("bench", "Work bench", 0.0, 2.0, 3.0, 5.0),
    ]
    steps = [
        ScenarioStep(AnnotationKind.START, "begin procedure", "staging", 2_000_000),
        ScenarioStep(AnnotationKind.ACQUIRE, "acquire replacement drive", "staging", 10_000_000),
        ScenarioStep(AnnotationKind.USE, "install replacement drive", "rack", 30_000_000),
        ScenarioStep(AnnotationKind.DEPOSIT, "stow old drive", "bench", 45_000_000),
        ScenarioStep(AnnotationKind.END, "finish procedure", "staging", 60_000_000),
    ]
    return ScenarioConfig(
        seed=seed,
        duration_us=60_000_000,
        entities=[
            (EntityRole.HEAD, "technician head"),
            (EntityRole.LEFT_HAND, "left hand"),
            (EntityRole.RIGHT_HAND, "right hand"),
        ],
        steps=steps,
        zones=zones,
        sample_rate_hz=sample_rate_hz,
        anchor=anchor,
        title="drive swap walkthrough",
    )


def make_minimal_pod(**overrides) -> MemoryPod:
    """Small hand-built pod satisfying every structural invariant."""
    samples = [
        (0, Pose(Vec3(0, 1.5, 0), UnitQuat.identity())),
        (1_000_000, Pose(Vec3(1, 1.5, 0), UnitQuat.identity())),
        (2_000_000, Pose(Vec3(2, 1.5, 0), UnitQuat.identity())),
    ]
    fields = dict(
        pod_id="00000000-0000-0000-0000-000000000001",
        title="minimal",
        created_at="2026-01-01T00:00:00Z",
        anchor=AnchorFrame(Pose.identity()),
        tracks=[EntityTrack(1, EntityRole.HEAD, "head", samples)],
        annotations=[
            Annotation(1, AnnotationKind.START, "begin", 0, Vec3(0, 1, 0)),
            Annotation(2, AnnotationKind.END, "finish", 2_000_000, Vec3(2, 1, 0)),
        ],
        transcript=[],
        mesh=EnvironmentMesh(),
        zones=[],
    )
    fields.update(overrides)
    return MemoryPod(**fields)


def scenario_json_obj(cfg) -> dict:
    """Project a ScenarioConfig onto the scenario-config JSON schema."""
    return {
        "seed": cfg.seed,
        "duration_s": cfg.duration_us / 1e6,
        "sample_rate_hz": cfg.sample_rate_hz,
        "title": cfg.title,
        "anchor": {
            "p": [cfg.anchor.position.x, cfg.anchor.position.y, cfg.anchor.position.z],
            "q": [
                cfg.anchor.orientation.w,
                cfg.anchor.orientation.x,
                cfg.anchor.orientation.y,
                cfg.anchor.orientation.z,
            ],
        },
        "entities": [{"role": role.value, "label": label} for role, label in cfg.entities],
        "zones": [
            {"id": z.id, "name": z.name, "min_x": z.min_x, "max_x": z.max_x,
             "min_z": z.min_z, "max_z": z.max_z}
            for z in cfg.zones
        ],
        "steps": [
            {"kind": s.kind.value, "label": s.label, "zone": s.zone_id, "offset_s": s.offset_us / 1e6}
            for s in cfg.steps
        ],
    }


def invalid_pod_bytes() -> bytes:
    """MPOD bytes for a pod missing its End annotation (validation bypassed)."""
    from unittest.mock import patch

    import memorypod.codec as codec
    from memorypod.pod import ValidationReport

    pod = make_minimal_pod(annotations=make_minimal_pod().annotations[:1])
    with patch.object(codec, "validate", lambda _: ValidationReport([])):
        return codec.encode_pod(pod)


def rand_valid_pod(rng: random.Random) -> MemoryPod:
    """Random pod passing validation, floats quantized to wire precision."""
    n_tracks = rng.randint(1, 4)
    roles = [EntityRole.HEAD, EntityRole.LEFT_HAND, EntityRole.RIGHT_HAND, EntityRole.OBJECT]
    tracks = []
    for i in range(n_tracks):
        t = 0
        samples = []
        for _ in range(rng.randint(2, 40)):
            samples.append((t, f32_pose(rng)))
            t += rng.randint(1_000, 500_000)
        tracks.append(EntityTrack(i + 1, roles[i], f"entity-{i + 1}", samples))
    t_min = min(tr.samples[0][0] for tr in tracks)
    t_max = max(tr.samples[-1][0] for tr in tracks)

    annotations = [Annotation(1, AnnotationKind.START, "begin", t_min, f32_vec(rng))]
    next_id = 2
    mid_kinds = [AnnotationKind.ACQUIRE, AnnotationKind.USE, AnnotationKind.DEPOSIT]
    for _ in range(rng.randint(0, 5)):
        at = rng.randint(t_min, t_max)
        ref = rng.choice([None, rng.randint(1, n_tracks)])
        annotations.append(
            Annotation(next_id, rng.choice(mid_kinds), f"step-{next_id}", at, f32_vec(rng), ref)
        )
        next_id += 1
    annotations.append(Annotation(next_id, AnnotationKind.END, "finish", t_max, f32_vec(rng)))

    transcript = []
    t = t_min
    for i in range(rng.randint(0, 4)):
        start = t + rng.randint(0, 200_000)
        end = start + rng.randint(0, 800_000)
        transcript.append(TranscriptSegment(start, end, f"speaker{i % 2}", f"line {i}"))
        t = end

    vertices = [f32_vec(rng) for _ in range(rng.randint(0, 10))]
    triangles = []
    if len(vertices) >= 3:
        for _ in range(rng.randint(0, 6)):
            triangles.append(
                (
                    rng.randrange(len(vertices)),
                    rng.randrange(len(vertices)),
                    rng.randrange(len(vertices)),
                )
            )

    zones = []
    for i in range(rng.randint(0, 3)):
        x0, z0 = i * 3.0, 0.0
        zones.append(Zone(f"z{i}", f"zone {i}", x0, x0 + 2.5, z0, z0 + 2.5))

    return MemoryPod(
        pod_id=str(uuid.UUID(int=rng.getrandbits(128))),
        title=f"session {rng.randint(0, 999)}",
        created_at="2026-03-14T09:26:53Z",
        anchor=AnchorFrame(rand_pose(rng)),
        tracks=tracks,
        annotations=annotations,
        transcript=transcript,
        mesh=EnvironmentMesh(vertices, triangles),
        zones=zones,
        meta={} if rng.random() < 0.5 else {"note": "synthetic"},
    )
