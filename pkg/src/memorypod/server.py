"""Review API: pod upload/inspection over HTTP, interactive replay over WS.

Each replay stream owns exactly one session; the pod underneath is shared
read-only, so concurrent streams on the same pod never interfere. While a
session plays, the server emits frames at a fixed wall-clock tick, feeding
measured dt into the engine's caller-driven clock.
"""

from __future__ import annotations

import asyncio
import time
from typing import Mapping

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from .errors import (
    BadMagic,
    ChecksumMismatch,
    InvalidPod,
    OutOfRange,
    TruncatedSection,
    UnsupportedVersion,
)
from .geometry import AnchorFrame, MiniaturePlacement, Pose, UnitQuat, Vec3
from .narrative import TemplateBackend, summarize, summary_to_obj
from .pod import MemoryPod, build_keyframe_index
from .replay import (
    DEFAULT_ANNOTATION_WINDOW_US,
    FrameState,
    Miniature,
    RealScale,
    ReplayMode,
    open_session,
)
from .store import PodStore

DEFAULT_TICK_HZ = 20.0


def frame_to_obj(frame: FrameState) -> dict:
    transcript = None
    if frame.current_transcript is not None:
        seg = frame.current_transcript
        transcript = {
            "start_us": seg.start,
            "end_us": seg.end,
            "speaker": seg.speaker,
            "text": seg.text,
        }
    return {
        "type": "frame",
        "t_us": frame.t,
        "entities": [
            {
                "id": eid,
                "role": role.value,
                "p": [pose.position.x, pose.position.y, pose.position.z],
                "q": [
                    pose.orientation.w,
                    pose.orientation.x,
                    pose.orientation.y,
                    pose.orientation.z,
                ],
            }
            for eid, role, pose in frame.entities
        ],
        "fov": [[v.x, v.y, v.z] for v in frame.fov] if frame.fov is not None else None,
        "active_annotations": list(frame.active_annotations),
        "transcript": transcript,
    }


def _floats(value, expected_len: int, what: str) -> list[float]:
    if isinstance(value, str):
        parts = value.split(",")
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise ValueError(f"{what} must be a comma-separated string or a list")
    if len(parts) != expected_len:
        raise ValueError(f"{what} needs {expected_len} components")
    return [float(p) for p in parts]


def parse_mode(params: Mapping) -> ReplayMode:
    """Shared mode parser for frame queries and stream mode messages."""
    name = params.get("mode", "real")
    pos = _floats(params.get("pos", [0.0, 0.0, 0.0]), 3, "pos")
    quat = _floats(params.get("quat", [1.0, 0.0, 0.0, 0.0]), 4, "quat")
    pose = Pose(Vec3(*pos), UnitQuat(*quat).normalized())
    if name == "real":
        return RealScale(AnchorFrame(pose))
    if name in ("mini", "miniature"):
        scale = float(params.get("scale", 1.0))
        return Miniature(MiniaturePlacement(pose, scale))
    raise ValueError(f"unknown mode {name!r} (expected 'real' or 'mini')")


def keyframes_obj(pod: MemoryPod) -> list[dict]:
    by_id = {a.id: a for a in pod.annotations}
    return [
        {
            "t_us": t,
            "annotation_id": aid,
            "kind": by_id[aid].kind.value,
            "label": by_id[aid].label,
        }
        for t, aid in build_keyframe_index(pod.annotations).entries
    ]


def create_app(
    store: PodStore,
    tick_hz: float = DEFAULT_TICK_HZ,
    summarizer=None,
    annotation_window_us: int = DEFAULT_ANNOTATION_WINDOW_US,
) -> FastAPI:
    if tick_hz <= 0:
        raise ValueError("tick_hz must be positive")
    backend = summarizer if summarizer is not None else TemplateBackend()
    app = FastAPI(title="memorypod", docs_url=None, redoc_url=None)

    def _not_found(pod_id: str) -> JSONResponse:
        return JSONResponse({"error": "unknown_pod", "pod_id": pod_id}, status_code=404)

    @app.post("/pods")
    async def upload(request: Request):
        body = await request.body()
        try:
            pod_id = store.add(body)
        except (BadMagic, UnsupportedVersion, TruncatedSection, ChecksumMismatch) as e:
            return JSONResponse(
                {"error": type(e).__name__, "detail": str(e)}, status_code=400
            )
        except InvalidPod as e:
            violations = []
            if hasattr(e.report, "violations"):
                violations = [
                    {"code": v.code.value, "detail": v.detail} for v in e.report.violations
                ]
            return JSONResponse(
                {"error": "InvalidPod", "detail": str(e), "violations": violations},
                status_code=422,
            )
        except OSError as e:
            return JSONResponse(
                {"error": "storage_failure", "detail": str(e)}, status_code=507
            )
        return JSONResponse({"pod_id": pod_id}, status_code=201)

    @app.get("/pods")
    def list_pods():
        return store.entries()

    @app.get("/pods/{pod_id}")
    def pod_metadata(pod_id: str):
        if pod_id not in store:
            return _not_found(pod_id)
        return store.entry(pod_id)

    @app.get("/pods/{pod_id}/file")
    def pod_file(pod_id: str):
        if pod_id not in store:
            return _not_found(pod_id)
        return Response(store.get_bytes(pod_id), media_type="application/octet-stream")

    @app.get("/pods/{pod_id}/keyframes")
    def pod_keyframes(pod_id: str):
        if pod_id not in store:
            return _not_found(pod_id)
        return keyframes_obj(store.get(pod_id))

    @app.get("/pods/{pod_id}/zones")
    def pod_zones(pod_id: str):
        if pod_id not in store:
            return _not_found(pod_id)
        return [
            {
                "id": z.id,
                "name": z.name,
                "min_x": z.min_x,
                "max_x": z.max_x,
                "min_z": z.min_z,
                "max_z": z.max_z,
            }
            for z in store.get(pod_id).zones
        ]

    @app.get("/pods/{pod_id}/mesh")
    def pod_mesh(pod_id: str):
        if pod_id not in store:
            return _not_found(pod_id)
        mesh = store.get(pod_id).mesh
        return {
            "vertices": [[v.x, v.y, v.z] for v in mesh.vertices],
            "triangles": [list(t) for t in mesh.triangles],
        }

    @app.get("/pods/{pod_id}/summary")
    def pod_summary(pod_id: str, refresh: int = 0):
        if pod_id not in store:
            return _not_found(pod_id)
        if not refresh:
            cached = store.load_summary(pod_id)
            if cached is not None:
                return cached
        obj = summary_to_obj(summarize(store.get(pod_id), backend))
        store.store_summary(pod_id, obj)
        return obj

    @app.get("/pods/{pod_id}/frame")
    def pod_frame(pod_id: str, request: Request, t_us: int = 0):
        if pod_id not in store:
            return _not_found(pod_id)
        try:
            mode = parse_mode(request.query_params)
            session = open_session(
                store.get(pod_id), mode, annotation_window_us=annotation_window_us
            )
            return frame_to_obj(session.frame_at(t_us))
        except OutOfRange as e:
            return JSONResponse({"error": "OutOfRange", "detail": str(e)}, status_code=400)
        except ValueError as e:
            return JSONResponse({"error": "bad_mode", "detail": str(e)}, status_code=400)

    @app.websocket("/pods/{pod_id}/replay")
    async def replay_stream(ws: WebSocket, pod_id: str):
        await ws.accept()
        try:
            if pod_id not in store:
                await ws.send_json({"type": "error", "code": "unknown_pod", "detail": pod_id})
                await ws.close()
                return
            await _drive_stream(ws, store.get(pod_id))
        except WebSocketDisconnect:
            return

    async def _protocol_violation(ws: WebSocket, detail: str) -> None:
        await ws.send_json({"type": "error", "code": "protocol_violation", "detail": detail})
        await ws.close()

    async def _drive_stream(ws: WebSocket, pod: MemoryPod) -> None:
        try:
            first = await ws.receive_json()
        except ValueError:
            await _protocol_violation(ws, "first message must be JSON")
            return
        if not isinstance(first, dict) or first.get("op") != "mode":
            await _protocol_violation(ws, "first message must be the mode selection")
            return
        try:
            session = open_session(
                pod, parse_mode(first), annotation_window_us=annotation_window_us
            )
        except ValueError as e:
            await _protocol_violation(ws, f"bad mode: {e}")
            return
        await ws.send_json(frame_to_obj(session.frame_at(session.cursor)))

        tick_s = 1.0 / tick_hz
        last_tick = time.monotonic()
        while True:
            if session.playing:
                try:
                    message = await asyncio.wait_for(ws.receive_json(), timeout=tick_s)
                except asyncio.TimeoutError:
                    now = time.monotonic()
                    frame = session.advance(now - last_tick)
                    last_tick = now
                    await ws.send_json(frame_to_obj(frame))
                    continue
                except ValueError:
                    await _protocol_violation(ws, "control message must be JSON")
                    return
            else:
                try:
                    message = await ws.receive_json()
                except ValueError:
                    await _protocol_violation(ws, "control message must be JSON")
                    return
            if not isinstance(message, dict):
                await _protocol_violation(ws, "control message must be a JSON object")
                return
            op = message.get("op")
            try:
                if op == "play":
                    session.playing = True
                    last_tick = time.monotonic()
                elif op == "pause":
                    session.playing = False
                elif op == "seek":
                    session.seek(int(message["t_us"]))
                    await ws.send_json(frame_to_obj(session.frame_at(session.cursor)))
                elif op == "rate":
                    rate = float(message["rate"])
                    if rate <= 0:
                        raise ValueError("rate must be positive")
                    session.rate = rate
                elif op == "keyframe":
                    direction = message.get("dir")
                    if direction not in ("next", "prev"):
                        raise ValueError("keyframe dir must be 'next' or 'prev'")
                    session.jump_keyframe(direction)
                    await ws.send_json(frame_to_obj(session.frame_at(session.cursor)))
                elif op == "mode":
                    session.set_mode(parse_mode(message))
                    await ws.send_json(frame_to_obj(session.frame_at(session.cursor)))
                else:
                    raise ValueError(f"unknown op {op!r}")
            except (KeyError, TypeError, ValueError) as e:
                await _protocol_violation(ws, f"malformed control: {e}")
                return

    return app
