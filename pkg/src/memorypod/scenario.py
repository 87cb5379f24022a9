"""Synthetic capture-event generator for maintenance-style scenarios.

Stands in for a real headset: given a seeded config describing zones,
tracked entities, and an ordered list of annotated steps, it emits the
exact capture-event stream a device adapter would produce. Streams are
bit-reproducible per seed; randomness comes only from the LCG below.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidScenario
from .events import (
    AnchorDetected,
    Annotate,
    CaptureEvent,
    DefineEntity,
    MeshSnapshot,
    SamplePose,
    TranscriptEvent,
)
from .geometry import AnchorFrame, Pose, UnitQuat, Vec3, Zone, from_anchor_frame, from_anchor_point
from .pod import AnnotationKind, EntityRole

HEAD_HEIGHT_M = 1.7
HAND_DROP_M = 0.55
HAND_SIDE_M = 0.25
OBJECT_HEIGHT_M = 0.9
ANNOTATION_HEIGHT_M = 1.0
JITTER_M = 0.02
TRANSCRIPT_SPEAKER = "operator"
_SEGMENT_MAX_US = 2_000_000


class Lcg64:
    """64-bit linear congruential generator, fixed across implementations.

    state' = (state * 6364136223846793005 + 1442695040888963407) mod 2^64
    (Knuth's MMIX constants); uniform() maps the top 53 bits of the new
    state onto [0, 1).
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) / float(1 << 53))


@dataclass(frozen=True)
class ScenarioStep:
    kind: AnnotationKind
    label: str
    zone_id: str
    offset_us: int


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    duration_us: int
    entities: list[tuple[EntityRole, str]]
    steps: list[ScenarioStep]
    zones: list[Zone]
    sample_rate_hz: float = 30.0
    anchor: Pose = field(default_factory=Pose.identity)
    title: str = "simulated session"


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidScenario(message)


def validate_scenario(cfg: ScenarioConfig) -> None:
    _check(cfg.duration_us > 0, "duration must be positive")
    _check(cfg.sample_rate_hz > 0, "sample rate must be positive")
    heads = [e for e in cfg.entities if e[0] is EntityRole.HEAD]
    _check(len(heads) == 1, "exactly one Head entity is required")
    zone_ids = [z.id for z in cfg.zones]
    _check(len(zone_ids) == len(set(zone_ids)), "zone ids must be unique")
    _check(len(cfg.steps) >= 2, "need at least Start and End steps")
    _check(cfg.steps[0].kind is AnnotationKind.START, "first step must be Start")
    _check(cfg.steps[-1].kind is AnnotationKind.END, "last step must be End")
    for step in cfg.steps[1:-1]:
        _check(
            step.kind not in (AnnotationKind.START, AnnotationKind.END),
            "Start/End allowed only as first/last steps",
        )
    previous = -1
    for step in cfg.steps:
        _check(step.offset_us > previous, "step offsets must be strictly increasing")
        _check(0 <= step.offset_us <= cfg.duration_us, "step offset outside scenario duration")
        _check(step.zone_id in zone_ids, f"step references unknown zone {step.zone_id!r}")
        previous = step.offset_us


def _zone_center(zone: Zone) -> tuple[float, float]:
    return (zone.min_x + zone.max_x) / 2.0, (zone.min_z + zone.max_z) / 2.0


def _lerp(a: float, b: float, u: float) -> float:
    return a + (b - a) * u


def _head_base(waypoints: list[tuple[int, float, float]], t: int) -> tuple[float, float, float]:
    """Piecewise-linear (x, z) through zone centers, plus facing yaw."""
    if t <= waypoints[0][0]:
        x, z = waypoints[0][1], waypoints[0][2]
        return x, z, 0.0
    for (t0, x0, z0), (t1, x1, z1) in zip(waypoints, waypoints[1:]):
        if t <= t1:
            u = (t - t0) / (t1 - t0)
            dx, dz = x1 - x0, z1 - z0
            yaw = math.atan2(-dx, -dz) if (dx or dz) else 0.0
            return _lerp(x0, x1, u), _lerp(z0, z1, u), yaw
    return waypoints[-1][1], waypoints[-1][2], 0.0


def simulate_scenario(cfg: ScenarioConfig) -> list[CaptureEvent]:
    """Generate the full capture stream for one scenario run."""
    validate_scenario(cfg)
    rng = Lcg64(cfg.seed)
    anchor = AnchorFrame(cfg.anchor)
    zones_by_id = {z.id: z for z in cfg.zones}

    events: list[CaptureEvent] = [
        DefineEntity(i + 1, role, label) for i, (role, label) in enumerate(cfg.entities)
    ]
    events.append(AnchorDetected(cfg.anchor))

    waypoints = []
    for step in cfg.steps:
        cx, cz = _zone_center(zones_by_id[step.zone_id])
        waypoints.append((step.offset_us, cx, cz))
    t_end = cfg.steps[-1].offset_us

    dt_us = max(1, round(1e6 / cfg.sample_rate_hz))
    times = sorted(set(range(0, t_end + 1, dt_us)) | {w[0] for w in waypoints})

    first_cx, first_cz = _zone_center(zones_by_id[cfg.steps[0].zone_id])
    # (t, priority, sequence) ordering key keeps the stream deterministic
    # and ensures the End annotation arrives after same-time samples.
    timed: list[tuple[int, int, int, CaptureEvent]] = []
    seq = 0

    floor = _floor_mesh(cfg.zones)
    timed.append(
        (
            0,
            0,
            seq,
            MeshSnapshot(
                0,
                [from_anchor_point(anchor, v) for v in floor[0]],
                floor[1],
            ),
        )
    )
    seq += 1

    for t in times:
        hx, hz, yaw = _head_base(waypoints, t)
        head_q = UnitQuat.from_axis_angle(Vec3(0.0, 1.0, 0.0), yaw)
        for i, (role, _label) in enumerate(cfg.entities):
            if role is EntityRole.HEAD:
                base = Vec3(hx, HEAD_HEIGHT_M, hz)
                orientation = head_q
            elif role is EntityRole.LEFT_HAND:
                base = Vec3(hx - HAND_SIDE_M, HEAD_HEIGHT_M - HAND_DROP_M, hz)
                orientation = UnitQuat.identity()
            elif role is EntityRole.RIGHT_HAND:
                base = Vec3(hx + HAND_SIDE_M, HEAD_HEIGHT_M - HAND_DROP_M, hz)
                orientation = UnitQuat.identity()
            else:
                base = Vec3(first_cx, OBJECT_HEIGHT_M, first_cz)
                orientation = UnitQuat.identity()
            jitter = Vec3(
                rng.uniform(-JITTER_M, JITTER_M),
                rng.uniform(-JITTER_M, JITTER_M),
                rng.uniform(-JITTER_M, JITTER_M),
            )
            world = from_anchor_frame(anchor, Pose(base + jitter, orientation))
            timed.append((t, 1, seq, SamplePose(i + 1, t, world)))
            seq += 1

    for idx, step in enumerate(cfg.steps):
        start = step.offset_us
        if idx + 1 < len(cfg.steps):
            end = min(start + _SEGMENT_MAX_US, cfg.steps[idx + 1].offset_us - 1)
        else:
            end = start + _SEGMENT_MAX_US
        timed.append(
            (
                start,
                2,
                seq,
                TranscriptEvent(
                    start, max(start, end), TRANSCRIPT_SPEAKER, f"{step.label} at zone {step.zone_id}"
                ),
            )
        )
        seq += 1
        cx, cz = _zone_center(zones_by_id[step.zone_id])
        world_pos = from_anchor_point(anchor, Vec3(cx, ANNOTATION_HEIGHT_M, cz))
        timed.append(
            (start, 3, seq, Annotate(step.kind, step.label, start, world_pos, None, step.zone_id))
        )
        seq += 1

    timed.sort(key=lambda item: (item[0], item[1], item[2]))
    events.extend(ev for _, _, _, ev in timed)
    return events


def _floor_mesh(zones: list[Zone]) -> tuple[list[Vec3], list[tuple[int, int, int]]]:
    min_x = min(z.min_x for z in zones)
    max_x = max(z.max_x for z in zones)
    min_z = min(z.min_z for z in zones)
    max_z = max(z.max_z for z in zones)
    vertices = [
        Vec3(min_x, 0.0, min_z),
        Vec3(max_x, 0.0, min_z),
        Vec3(max_x, 0.0, max_z),
        Vec3(min_x, 0.0, max_z),
    ]
    return vertices, [(0, 1, 2), (0, 2, 3)]


# -- config file ----------------------------------------------------------


def scenario_from_dict(obj: dict) -> ScenarioConfig:
    try:
        entities = [(EntityRole(e["role"]), str(e["label"])) for e in obj["entities"]]
        zones = [
            Zone(z["id"], z.get("name", z["id"]), z["min_x"], z["max_x"], z["min_z"], z["max_z"])
            for z in obj["zones"]
        ]
        steps = [
            ScenarioStep(
                AnnotationKind(s["kind"]),
                str(s["label"]),
                str(s["zone"]),
                round(float(s["offset_s"]) * 1e6),
            )
            for s in obj["steps"]
        ]
        anchor = Pose.identity()
        if "anchor" in obj:
            p = obj["anchor"]["p"]
            q = obj["anchor"]["q"]
            anchor = Pose(Vec3(p[0], p[1], p[2]), UnitQuat(q[0], q[1], q[2], q[3]).normalized())
        cfg = ScenarioConfig(
            seed=int(obj["seed"]),
            duration_us=round(float(obj["duration_s"]) * 1e6),
            entities=entities,
            steps=steps,
            zones=zones,
            sample_rate_hz=float(obj.get("sample_rate_hz", 30.0)),
            anchor=anchor,
            title=str(obj.get("title", "simulated session")),
        )
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise InvalidScenario(f"bad scenario config: {e}") from e
    validate_scenario(cfg)
    return cfg


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidScenario(f"scenario config is not valid JSON: {e}") from e
    return scenario_from_dict(obj)
