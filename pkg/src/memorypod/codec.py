"""MPOD file format v1: the chunked, time-indexed binary pod container.

Layout (all integers little-endian):

    magic   4 bytes  "MPOD"
    version u16      1
    flags   u16      0
    header  u32 length + UTF-8 JSON
    then the five data sections, in this order:
        chunk index: u32 count, then (u64 start_us, u64 byte_offset) each
        chunks:      per chunk, u32 sample count then 38-byte samples
                     (u16 entity_id, u64 t_us, 3xf32 position, 4xf32 quat wxyz)
        annotations: u32 count, then (u32 id, u8 kind, u64 t_us, 3xf32 position,
                     u16 entity_ref, u16 label length + UTF-8 label) each;
                     kind 0=Start 1=End 2=Acquire 3=Use 4=Deposit,
                     entity_ref 0xFFFF = none
        transcript:  u32 count, then (u64 start_us, u64 end_us,
                     u16-length-prefixed speaker, u16-length-prefixed text) each
        mesh:        u32 vertex count, 3xf32 vertices,
                     u32 triangle count, 3xu32 triangles

The header JSON holds pod_id, title, created_at, anchor pose, chunk
duration, entity table, zone table, free-form meta, and a section table
with offsets (relative to the end of the header), lengths, and CRC32s.
Chunk byte_offsets are relative to the start of the chunks section.
Samples are grouped into fixed-duration chunks by timestamp so a seek
decodes at most one chunk before its target. Coordinates are meters,
right-handed, Y-up, forward -Z. Encoding is deterministic: one pod, one
byte stream.
"""

from __future__ import annotations

import json
import struct
import zlib

from .errors import BadMagic, ChecksumMismatch, InvalidPod, TruncatedSection, UnsupportedVersion
from .geometry import AnchorFrame, Pose, UnitQuat, Vec3, Zone
from .pod import (
    ENTITY_REF_NONE,
    Annotation,
    AnnotationKind,
    EntityRole,
    EntityTrack,
    EnvironmentMesh,
    MemoryPod,
    TranscriptSegment,
    validate,
)

MAGIC = b"MPOD"
VERSION = 1
DEFAULT_CHUNK_DURATION_US = 5_000_000

_SAMPLE = struct.Struct("<HQ3f4f")  # 38 bytes
_ANN_FIXED = struct.Struct("<IBQ3fH")  # 27 bytes before the label
_SECTION_NAMES = ("chunk_index", "chunks", "annotations", "transcript", "mesh")

_KIND_TO_CODE = {
    AnnotationKind.START: 0,
    AnnotationKind.END: 1,
    AnnotationKind.ACQUIRE: 2,
    AnnotationKind.USE: 3,
    AnnotationKind.DEPOSIT: 4,
}
_CODE_TO_KIND = {v: k for k, v in _KIND_TO_CODE.items()}


def _short_bytes(text: str, what: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"{what} exceeds 65535 UTF-8 bytes")
    return struct.pack("<H", len(raw)) + raw


def _pose_json(pose: Pose) -> dict:
    q = pose.orientation
    return {"p": [pose.position.x, pose.position.y, pose.position.z], "q": [q.w, q.x, q.y, q.z]}


def _pose_from_json(obj: dict) -> Pose:
    px, py, pz = obj["p"]
    qw, qx, qy, qz = obj["q"]
    return Pose(Vec3(px, py, pz), UnitQuat(qw, qx, qy, qz))


def _encode_chunks(pod: MemoryPod, chunk_duration_us: int) -> tuple[bytes, bytes]:
    merged: list[tuple[int, int, Pose]] = []
    for track in pod.tracks:
        if not (0 <= track.entity_id < ENTITY_REF_NONE):
            raise ValueError(f"entity_id {track.entity_id} does not fit the u16 wire field")
        for t, pose in track.samples:
            merged.append((t, track.entity_id, pose))
    merged.sort(key=lambda s: (s[0], s[1]))

    index: list[tuple[int, int]] = []
    chunks = bytearray()
    if merged:
        n_chunks = merged[-1][0] // chunk_duration_us + 1
        pos = 0
        for k in range(n_chunks):
            lo, hi = k * chunk_duration_us, (k + 1) * chunk_duration_us
            batch = []
            while pos < len(merged) and lo <= merged[pos][0] < hi:
                batch.append(merged[pos])
                pos += 1
            index.append((lo, len(chunks)))
            chunks.extend(struct.pack("<I", len(batch)))
            for t, eid, pose in batch:
                p, q = pose.position, pose.orientation
                chunks.extend(_SAMPLE.pack(eid, t, p.x, p.y, p.z, q.w, q.x, q.y, q.z))

    index_bytes = bytearray(struct.pack("<I", len(index)))
    for start, offset in index:
        index_bytes.extend(struct.pack("<QQ", start, offset))
    return bytes(index_bytes), bytes(chunks)


def _encode_annotations(annotations: list[Annotation]) -> bytes:
    out = bytearray(struct.pack("<I", len(annotations)))
    for a in annotations:
        ref = ENTITY_REF_NONE if a.entity_ref is None else a.entity_ref
        out.extend(
            _ANN_FIXED.pack(
                a.id,
                _KIND_TO_CODE[a.kind],
                a.at,
                a.position.x,
                a.position.y,
                a.position.z,
                ref,
            )
        )
        out.extend(_short_bytes(a.label, "annotation label"))
    return bytes(out)


def _encode_transcript(segments: list[TranscriptSegment]) -> bytes:
    out = bytearray(struct.pack("<I", len(segments)))
    for seg in segments:
        out.extend(struct.pack("<QQ", seg.start, seg.end))
        out.extend(_short_bytes(seg.speaker, "speaker"))
        out.extend(_short_bytes(seg.text, "transcript text"))
    return bytes(out)


def _encode_mesh(mesh: EnvironmentMesh) -> bytes:
    out = bytearray(struct.pack("<I", len(mesh.vertices)))
    for v in mesh.vertices:
        out.extend(struct.pack("<3f", v.x, v.y, v.z))
    out.extend(struct.pack("<I", len(mesh.triangles)))
    for tri in mesh.triangles:
        out.extend(struct.pack("<3I", *tri))
    return bytes(out)


def encode_pod(pod: MemoryPod, chunk_duration_us: int = DEFAULT_CHUNK_DURATION_US) -> bytes:
    """Serialize a valid pod to MPOD bytes. Deterministic per pod."""
    if chunk_duration_us <= 0:
        raise ValueError("chunk_duration_us must be positive")
    report = validate(pod)
    if not report.ok:
        raise InvalidPod(report)

    index_bytes, chunk_bytes = _encode_chunks(pod, chunk_duration_us)
    payloads = {
        "chunk_index": index_bytes,
        "chunks": chunk_bytes,
        "annotations": _encode_annotations(pod.annotations),
        "transcript": _encode_transcript(pod.transcript),
        "mesh": _encode_mesh(pod.mesh),
    }

    sections = {}
    offset = 0
    for name in _SECTION_NAMES:
        data = payloads[name]
        sections[name] = {"offset": offset, "length": len(data), "crc32": zlib.crc32(data)}
        offset += len(data)

    header_obj = {
        "pod_id": pod.pod_id,
        "title": pod.title,
        "created_at": pod.created_at,
        "anchor": _pose_json(pod.anchor.pose),
        "chunk_duration_us": chunk_duration_us,
        "entities": [[t.entity_id, t.role.value, t.label] for t in pod.tracks],
        "zones": [
            {
                "id": z.id,
                "name": z.name,
                "min_x": z.min_x,
                "max_x": z.max_x,
                "min_z": z.min_z,
                "max_z": z.max_z,
            }
            for z in pod.zones
        ],
        "meta": pod.meta,
        "sections": sections,
    }
    header = json.dumps(header_obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )

    out = bytearray()
    out.extend(MAGIC)
    out.extend(struct.pack("<HH", VERSION, 0))
    out.extend(struct.pack("<I", len(header)))
    out.extend(header)
    for name in _SECTION_NAMES:
        out.extend(payloads[name])
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes, context: str):
        self.data = data
        self.pos = 0
        self.context = context

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedSection(f"{self.context}: needed {n} bytes at offset {self.pos}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def text(self, what: str) -> str:
        n = self.u16()
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as e:
            raise InvalidPod(f"{self.context}: bad UTF-8 in {what}") from e


def _section(data: bytes, body_start: int, sections: dict, name: str) -> bytes:
    try:
        entry = sections[name]
        offset, length, crc = int(entry["offset"]), int(entry["length"]), int(entry["crc32"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidPod(f"header section table missing or malformed for {name!r}") from e
    start = body_start + offset
    if start < 0 or start + length > len(data):
        raise TruncatedSection(f"section {name!r} extends past end of file")
    payload = data[start : start + length]
    if zlib.crc32(payload) != crc:
        raise ChecksumMismatch(f"section {name!r} CRC32 mismatch")
    return payload


def read_chunk_index(payload: bytes) -> list[tuple[int, int]]:
    """Parse a chunk-index section payload into (start_us, byte_offset) pairs."""
    r = _Reader(payload, "chunk_index")
    count = r.u32()
    return [struct.unpack("<QQ", r.take(16)) for _ in range(count)]


def decode_pod(data: bytes, lenient: bool = False) -> MemoryPod:
    """Parse MPOD bytes back into a pod; validates unless lenient."""
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not an MPOD file")
    if len(data) < 12:
        raise TruncatedSection("file ends inside the fixed header")
    version, _flags = struct.unpack("<HH", data[4:8])
    if version != VERSION:
        raise UnsupportedVersion(f"version {version} not supported (expected {VERSION})")
    header_len = struct.unpack("<I", data[8:12])[0]
    body_start = 12 + header_len
    if body_start > len(data):
        raise TruncatedSection("header section extends past end of file")
    try:
        header = json.loads(data[12:body_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidPod(f"header JSON malformed: {e}") from e

    try:
        return _decode_body(data, body_start, header, lenient)
    except (struct.error, ValueError, KeyError, TypeError) as e:
        raise InvalidPod(f"malformed pod content: {e}") from e


def _decode_body(data: bytes, body_start: int, header: dict, lenient: bool) -> MemoryPod:
    sections = header["sections"]

    index_payload = _section(data, body_start, sections, "chunk_index")
    chunk_index = read_chunk_index(index_payload)

    chunks_payload = _section(data, body_start, sections, "chunks")
    entities = [(int(e[0]), EntityRole(e[1]), str(e[2])) for e in header["entities"]]
    by_entity: dict[int, list[tuple[int, Pose]]] = {eid: [] for eid, _, _ in entities}
    for start_us, byte_offset in chunk_index:
        r = _Reader(chunks_payload[byte_offset:], "chunks")
        count = r.u32()
        for _ in range(count):
            eid, t, px, py, pz, qw, qx, qy, qz = _SAMPLE.unpack(r.take(_SAMPLE.size))
            if eid not in by_entity:
                raise InvalidPod(f"sample references undeclared entity {eid}")
            by_entity[eid].append((t, Pose(Vec3(px, py, pz), UnitQuat(qw, qx, qy, qz))))
    tracks = [EntityTrack(eid, role, label, by_entity[eid]) for eid, role, label in entities]

    ann_reader = _Reader(_section(data, body_start, sections, "annotations"), "annotations")
    annotations = []
    for _ in range(ann_reader.u32()):
        aid, kind_code, at, x, y, z, ref = _ANN_FIXED.unpack(ann_reader.take(_ANN_FIXED.size))
        if kind_code not in _CODE_TO_KIND:
            raise InvalidPod(f"annotation {aid}: unknown kind code {kind_code}")
        label = ann_reader.text("annotation label")
        annotations.append(
            Annotation(
                aid,
                _CODE_TO_KIND[kind_code],
                label,
                at,
                Vec3(x, y, z),
                None if ref == ENTITY_REF_NONE else ref,
            )
        )

    ts_reader = _Reader(_section(data, body_start, sections, "transcript"), "transcript")
    transcript = []
    for _ in range(ts_reader.u32()):
        start, end = struct.unpack("<QQ", ts_reader.take(16))
        speaker = ts_reader.text("speaker")
        text = ts_reader.text("transcript text")
        transcript.append(TranscriptSegment(start, end, speaker, text))

    mesh_reader = _Reader(_section(data, body_start, sections, "mesh"), "mesh")
    vertices = []
    for _ in range(mesh_reader.u32()):
        x, y, z = struct.unpack("<3f", mesh_reader.take(12))
        vertices.append(Vec3(x, y, z))
    triangles = []
    for _ in range(mesh_reader.u32()):
        triangles.append(tuple(struct.unpack("<3I", mesh_reader.take(12))))

    pod = MemoryPod(
        pod_id=str(header["pod_id"]),
        title=str(header["title"]),
        created_at=str(header["created_at"]),
        anchor=AnchorFrame(_pose_from_json(header["anchor"])),
        tracks=tracks,
        annotations=annotations,
        transcript=transcript,
        mesh=EnvironmentMesh(vertices, triangles),
        zones=[
            Zone(z["id"], z["name"], z["min_x"], z["max_x"], z["min_z"], z["max_z"])
            for z in header["zones"]
        ],
        meta=dict(header.get("meta", {})),
    )
    if not lenient:
        report = validate(pod)
        if not report.ok:
            raise InvalidPod(report)
    return pod
