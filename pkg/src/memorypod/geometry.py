"""Poses, quaternion math, anchor-frame transforms, miniature scaling, zones.

Coordinate convention used everywhere in this package: right-handed,
Y is up, forward is -Z, positions in meters, angles in radians.
All types are immutable values and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Rendering defaults for the field-of-view triangle; both overridable
# wherever a footprint is computed.
DEFAULT_FOV_HALF_ANGLE = math.radians(30.0)
DEFAULT_FOV_DEPTH = 1.5

_NLERP_DOT_THRESHOLD = 1.0 - 1e-6


@dataclass(frozen=True)
class Vec3:
    """Point or direction in meters. Components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Vec3 components must be finite, got ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> Vec3:
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: Vec3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance(self, other: Vec3) -> float:
        return (self - other).norm()


@dataclass(frozen=True)
class UnitQuat:
    """Rotation quaternion, stored as (w, x, y, z).

    Construction does not normalize or reject non-unit components so that
    decoded files round-trip bit-exactly and validation can flag bad data;
    use normalized() or the factory methods to obtain unit quaternions.
    Rotation operations normalize their inputs defensively.
    """

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> UnitQuat:
        return UnitQuat(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle: float) -> UnitQuat:
        n = axis.norm()
        if n == 0.0:
            raise ValueError("rotation axis must be non-zero")
        half = 0.5 * angle
        s = math.sin(half) / n
        return UnitQuat(math.cos(half), axis.x * s, axis.y * s, axis.z * s)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> UnitQuat:
        n = self.norm()
        if n < 1e-12:
            return UnitQuat.identity()
        return UnitQuat(self.w / n, self.x / n, self.y / n, self.z / n)

    def conjugate(self) -> UnitQuat:
        return UnitQuat(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> UnitQuat:
        # Inverse of a unit quaternion is its conjugate.
        return self.normalized().conjugate()

    def dot(self, other: UnitQuat) -> float:
        return self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z

    def multiply(self, other: UnitQuat) -> UnitQuat:
        """Hamilton product self ⊗ other."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return UnitQuat(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def rotate(self, v: Vec3) -> Vec3:
        """Rotate a vector by this quaternion (q v q*), normalizing first."""
        q = self.normalized()
        # Expanded q*v*q^-1 for unit q: v + 2*cross(qv, cross(qv, v) + w*v).
        qx, qy, qz, qw = q.x, q.y, q.z, q.w
        tx = 2.0 * (qy * v.z - qz * v.y)
        ty = 2.0 * (qz * v.x - qx * v.z)
        tz = 2.0 * (qx * v.y - qy * v.x)
        return Vec3(
            v.x + qw * tx + (qy * tz - qz * ty),
            v.y + qw * ty + (qz * tx - qx * tz),
            v.z + qw * tz + (qx * ty - qy * tx),
        )


@dataclass(frozen=True)
class Pose:
    position: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))
    orientation: UnitQuat = field(default_factory=UnitQuat.identity)

    @staticmethod
    def identity() -> Pose:
        return Pose(Vec3(0.0, 0.0, 0.0), UnitQuat.identity())


@dataclass(frozen=True)
class AnchorFrame:
    """The anchor marker's pose in the capture device's world frame."""

    pose: Pose = field(default_factory=Pose.identity)


@dataclass(frozen=True)
class MiniaturePlacement:
    """Where a scaled-down scene sits (e.g. a tabletop) and its scale."""

    placement: Pose = field(default_factory=Pose.identity)
    scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.scale <= 1.0):
            raise ValueError(f"miniature scale must be in (0, 1], got {self.scale}")


@dataclass(frozen=True)
class Zone:
    """Named axis-aligned rectangle in the anchor frame's ground plane."""

    id: str
    name: str
    min_x: float
    max_x: float
    min_z: float
    max_z: float

    def __post_init__(self):
        if not (self.min_x < self.max_x and self.min_z < self.max_z):
            raise ValueError(f"zone {self.id!r}: min bounds must be strictly below max bounds")


def slerp(q0: UnitQuat, q1: UnitQuat, u: float) -> UnitQuat:
    """Spherical interpolation along the shortest arc, u in [0, 1].

    q1 is negated when dot(q0, q1) < 0 so the path takes the short way
    around; falls back to normalized linear interpolation when the inputs
    are nearly parallel.
    """
    q0 = q0.normalized()
    q1 = q1.normalized()
    u = min(max(u, 0.0), 1.0)
    d = q0.dot(q1)
    if d < 0.0:
        q1 = UnitQuat(-q1.w, -q1.x, -q1.y, -q1.z)
        d = -d
    if d > _NLERP_DOT_THRESHOLD:
        return UnitQuat(
            q0.w + u * (q1.w - q0.w),
            q0.x + u * (q1.x - q0.x),
            q0.y + u * (q1.y - q0.y),
            q0.z + u * (q1.z - q0.z),
        ).normalized()
    theta = math.acos(min(d, 1.0))
    sin_theta = math.sin(theta)
    s0 = math.sin((1.0 - u) * theta) / sin_theta
    s1 = math.sin(u * theta) / sin_theta
    return UnitQuat(
        s0 * q0.w + s1 * q1.w,
        s0 * q0.x + s1 * q1.x,
        s0 * q0.y + s1 * q1.y,
        s0 * q0.z + s1 * q1.z,
    ).normalized()


def to_anchor_frame(anchor: AnchorFrame, world: Pose) -> Pose:
    """Express a world-frame pose relative to the anchor."""
    qa = anchor.pose.orientation.normalized()
    inv = qa.conjugate()
    rel_pos = inv.rotate(world.position - anchor.pose.position)
    rel_q = inv.multiply(world.orientation)
    return Pose(rel_pos, rel_q)


def from_anchor_frame(anchor: AnchorFrame, rel: Pose) -> Pose:
    """Exact inverse of to_anchor_frame for the same anchor."""
    qa = anchor.pose.orientation.normalized()
    world_pos = qa.rotate(rel.position) + anchor.pose.position
    world_q = qa.multiply(rel.orientation)
    return Pose(world_pos, world_q)


def to_anchor_point(anchor: AnchorFrame, world: Vec3) -> Vec3:
    qa = anchor.pose.orientation.normalized()
    return qa.conjugate().rotate(world - anchor.pose.position)


def from_anchor_point(anchor: AnchorFrame, rel: Vec3) -> Vec3:
    qa = anchor.pose.orientation.normalized()
    return qa.rotate(rel) + anchor.pose.position


def apply_miniature(m: MiniaturePlacement, rel: Pose) -> Pose:
    """Map an anchor-relative pose into a scaled scene at the placement.

    Positions are scaled uniformly about the anchor origin before the
    placement transform; orientations are never scaled.
    """
    qp = m.placement.orientation.normalized()
    pos = qp.rotate(rel.position.scaled(m.scale)) + m.placement.position
    return Pose(pos, qp.multiply(rel.orientation))


def apply_miniature_point(m: MiniaturePlacement, rel: Vec3) -> Vec3:
    qp = m.placement.orientation.normalized()
    return qp.rotate(rel.scaled(m.scale)) + m.placement.position


def pose_interpolate(a: tuple[int, Pose], b: tuple[int, Pose], t: int) -> Pose:
    """Interpolate between two timestamped poses at time t.

    Positions interpolate linearly, orientations via slerp; t is clamped
    to [a.t, b.t]. Equal timestamps return a's pose.
    """
    ta, pa = a
    tb, pb = b
    if tb < ta:
        raise ValueError("pose_interpolate requires a.t <= b.t")
    if ta == tb:
        return pa
    u = (t - ta) / (tb - ta)
    u = min(max(u, 0.0), 1.0)
    pos = Vec3(
        pa.position.x + u * (pb.position.x - pa.position.x),
        pa.position.y + u * (pb.position.y - pa.position.y),
        pa.position.z + u * (pb.position.z - pa.position.z),
    )
    return Pose(pos, slerp(pa.orientation, pb.orientation, u))


def point_in_zone(zone: Zone, p: Vec3) -> bool:
    """Half-open containment test on the ground plane; y is ignored."""
    return zone.min_x <= p.x < zone.max_x and zone.min_z <= p.z < zone.max_z


def zone_of(zones: list[Zone], p: Vec3) -> Zone | None:
    """First zone containing p, or None. Disjoint zones yield at most one."""
    for zone in zones:
        if point_in_zone(zone, p):
            return zone
    return None


def fov_footprint(
    head: Pose,
    half_angle: float = DEFAULT_FOV_HALF_ANGLE,
    depth: float = DEFAULT_FOV_DEPTH,
) -> tuple[Vec3, Vec3, Vec3]:
    """Triangle approximating the head's field of view on the scene.

    Returns (apex, base_left, base_right): the apex sits at the head
    position, the base vertices at depth along the forward direction
    rotated by +half_angle and -half_angle about the head's local up.
    """
    if not (0.0 < half_angle < math.pi / 2):
        raise ValueError("half_angle must be in (0, pi/2)")
    if depth <= 0.0:
        raise ValueError("depth must be positive")
    q = head.orientation.normalized()
    forward = q.rotate(Vec3(0.0, 0.0, -1.0))
    up = q.rotate(Vec3(0.0, 1.0, 0.0))
    left_dir = UnitQuat.from_axis_angle(up, half_angle).rotate(forward)
    right_dir = UnitQuat.from_axis_angle(up, -half_angle).rotate(forward)
    apex = head.position
    return (apex, apex + left_dir.scaled(depth), apex + right_dir.scaled(depth))
