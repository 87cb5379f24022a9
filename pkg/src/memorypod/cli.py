"""Operator command line: simulate, ingest, validate, inspect, serve.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O failure.
Machine-readable output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .codec import DEFAULT_CHUNK_DURATION_US, decode_pod, encode_pod
from .errors import (
    BadMagic,
    ChecksumMismatch,
    InvalidPod,
    InvalidScenario,
    MemoryPodError,
    TruncatedSection,
    UnsupportedVersion,
)
from .events import read_capture_log, write_capture_log
from .narrative import (
    RemoteBackend,
    TemplateBackend,
    format_mmss,
    summarize,
    summary_to_obj,
)
from .pod import AnnotationKind, MemoryPod, validate
from .recorder import RecorderSession, downsample
from .replay import open_session
from .scenario import load_scenario, simulate_scenario
from .server import DEFAULT_TICK_HZ, create_app, frame_to_obj, keyframes_obj, parse_mode

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3

_VALIDATION_ERRORS = (BadMagic, UnsupportedVersion, TruncatedSection, ChecksumMismatch, InvalidPod)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="memorypod", description="Record, store, and replay XR sessions")
    parser.add_argument("--version", action="version", version=f"memorypod {__version__}")
    parser.add_argument("--format", choices=("json", "text"), default="text", help="output format")
    parser.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")
    # accept the global flags after the subcommand too; SUPPRESS keeps the
    # root-parsed values when the subcommand omits them
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_parser(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    p = add_parser("simulate", "Generate a capture log from a scenario config")
    p.add_argument("--config", required=True, help="scenario JSON path")
    p.add_argument("--out", required=True, help="output .mpcap path")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = add_parser("ingest", "Turn a capture log into a pod file")
    p.add_argument("capture", help="input .mpcap path")
    p.add_argument("--out", required=True, help="output .mpod path")
    p.add_argument("--scenario", default=None, help="scenario JSON supplying zones and title")
    p.add_argument("--title", default=None, help="pod title (overrides scenario title)")
    p.add_argument("--pod-id", default=None, help="fixed pod id (defaults to a fresh UUID)")
    p.add_argument("--created-at", default=None, help="fixed creation timestamp (ISO-8601)")
    p.add_argument("--downsample-hz", type=float, default=None, help="thin tracks to this rate")
    p.add_argument(
        "--chunk-duration-s",
        type=float,
        default=DEFAULT_CHUNK_DURATION_US / 1e6,
        help="seconds of samples per storage chunk",
    )

    p = add_parser("validate", "Check a pod file against every invariant")
    p.add_argument("pod", help=".mpod path")

    p = add_parser("info", "Show pod metadata")
    p.add_argument("pod", help=".mpod path")
    p.add_argument("--lenient", action="store_true", help="skip validation while decoding")

    p = add_parser("keyframes", "List keyframes (same shape as the server endpoint)")
    p.add_argument("pod", help=".mpod path")
    p.add_argument("--lenient", action="store_true")

    p = add_parser("frame", "Compute one replay frame")
    p.add_argument("pod", help=".mpod path")
    p.add_argument("--t", type=int, required=True, help="time in microseconds")
    p.add_argument("--mode", choices=("real", "mini"), default="real")
    p.add_argument("--scale", type=float, default=1.0, help="miniature scale in (0,1]")
    p.add_argument("--pos", default="0,0,0", help="anchor/placement position x,y,z")
    p.add_argument("--quat", default="1,0,0,0", help="anchor/placement orientation w,x,y,z")

    p = add_parser("summarize", "Produce a structured summary")
    p.add_argument("pod", help=".mpod path")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--template", action="store_true", help="use the template engine (default)")
    group.add_argument("--remote", action="store_true", help="use a remote completion endpoint")
    p.add_argument("--endpoint", default=os.environ.get("MEMORYPOD_LLM_ENDPOINT"))
    p.add_argument("--model", default=os.environ.get("MEMORYPOD_LLM_MODEL", "summarizer"))

    p = add_parser("export", "Dump the full pod content as JSON")
    p.add_argument("pod", help=".mpod path")
    p.add_argument("--lenient", action="store_true")

    p = add_parser("serve", "Run the review API server")
    p.add_argument("--root", default=os.environ.get("MEMORYPOD_ROOT", "./memorypod-data"))
    p.add_argument("--host", default=os.environ.get("MEMORYPOD_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("MEMORYPOD_PORT", "8080")))
    p.add_argument(
        "--tick-hz", type=float, default=float(os.environ.get("MEMORYPOD_TICK_HZ", DEFAULT_TICK_HZ))
    )
    p.add_argument("--llm-endpoint", default=os.environ.get("MEMORYPOD_LLM_ENDPOINT"))
    p.add_argument("--llm-model", default=os.environ.get("MEMORYPOD_LLM_MODEL", "summarizer"))

    return parser


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _emit(args, obj, text_lines) -> None:
    if args.format == "json":
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def _load_pod(path: str, lenient: bool = False) -> MemoryPod:
    return decode_pod(Path(path).read_bytes(), lenient=lenient)


def _cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    events = simulate_scenario(cfg)
    write_capture_log(events, args.out)
    _say(args, f"wrote {len(events)} events to {args.out}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    events = read_capture_log(args.capture)
    zones = []
    title = args.title
    if args.scenario:
        cfg = load_scenario(args.scenario)
        zones = cfg.zones
        title = title or cfg.title
    session = RecorderSession(
        title=title or "untitled session",
        pod_id=args.pod_id,
        created_at=args.created_at,
        zones=zones,
    )
    for ev in events:
        session.apply(ev)
    pod = session.finalize()
    if args.downsample_hz:
        from dataclasses import replace

        pod = replace(pod, tracks=[downsample(t, args.downsample_hz) for t in pod.tracks])
    data = encode_pod(pod, chunk_duration_us=round(args.chunk_duration_s * 1e6))
    Path(args.out).write_bytes(data)
    _say(args, f"wrote pod {pod.pod_id} ({len(data)} bytes) to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = validate(_load_pod(args.pod, lenient=True))
    if args.format == "json":
        print(
            json.dumps(
                {"ok": report.ok, "violations": [
                    {"code": v.code.value, "detail": v.detail} for v in report.violations
                ]},
                sort_keys=True,
                indent=2,
            )
        )
    if report.ok:
        _say(args, "ok")
        return EXIT_OK
    for violation in report.violations:
        print(str(violation), file=sys.stderr)
    return EXIT_VALIDATION


def _cmd_info(args) -> int:
    pod = _load_pod(args.pod, lenient=args.lenient)
    starts = [a for a in pod.annotations if a.kind is AnnotationKind.START]
    ends = [a for a in pod.annotations if a.kind is AnnotationKind.END]
    process_duration_us = ends[0].at - starts[0].at if starts and ends else None
    obj = {
        "pod_id": pod.pod_id,
        "title": pod.title,
        "created_at": pod.created_at,
        "duration_us": process_duration_us,
        "replay_duration_us": pod.duration_us(),
        "entities": len(pod.tracks),
        "samples": sum(len(t.samples) for t in pod.tracks),
        "annotations": len(pod.annotations),
        "transcript_segments": len(pod.transcript),
        "mesh_vertices": len(pod.mesh.vertices),
        "zones": len(pod.zones),
        "meta": pod.meta,
    }
    duration_text = format_mmss(process_duration_us) if process_duration_us is not None else "n/a"
    _emit(
        args,
        obj,
        [
            f"pod      {pod.pod_id}",
            f"title    {pod.title}",
            f"created  {pod.created_at}",
            f"duration {duration_text} (annotated process)",
            f"replay   {format_mmss(pod.duration_us())}",
            f"tracks   {obj['entities']} entities, {obj['samples']} samples",
            f"extras   {obj['annotations']} annotations, {obj['transcript_segments']} transcript "
            f"segments, {obj['mesh_vertices']} mesh vertices, {obj['zones']} zones",
        ],
    )
    return EXIT_OK


def _cmd_keyframes(args) -> int:
    pod = _load_pod(args.pod, lenient=args.lenient)
    keyframes = keyframes_obj(pod)
    _emit(
        args,
        keyframes,
        [f"[{format_mmss(k['t_us'])}] #{k['annotation_id']} {k['kind']} {k['label']}" for k in keyframes],
    )
    return EXIT_OK


def _cmd_frame(args) -> int:
    pod = _load_pod(args.pod)
    mode = parse_mode(
        {"mode": args.mode, "scale": args.scale, "pos": args.pos, "quat": args.quat}
    )
    session = open_session(pod, mode)
    frame = frame_to_obj(session.frame_at(args.t))
    print(json.dumps(frame, sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_summarize(args) -> int:
    pod = _load_pod(args.pod)
    if args.remote:
        if not args.endpoint:
            raise _UsageError("--remote requires --endpoint (or MEMORYPOD_LLM_ENDPOINT)")
        backend = RemoteBackend(args.endpoint, args.model)
    else:
        backend = TemplateBackend()
    summary = summarize(pod, backend)
    obj = summary_to_obj(summary)
    for warning in summary.warnings:
        _say(args, f"warning: {warning}")
    _emit(
        args,
        obj,
        [
            summary.overview,
            f"duration: {summary.duration_s} s",
            "events:",
            *[f"  [{e.time}] {e.kind.value} {e.label}" for e in summary.key_events],
            f"tools: {', '.join(summary.tools) if summary.tools else '(none)'}",
        ],
    )
    return EXIT_OK


def _cmd_export(args) -> int:
    pod = _load_pod(args.pod, lenient=args.lenient)
    obj = {
        "pod_id": pod.pod_id,
        "title": pod.title,
        "created_at": pod.created_at,
        "anchor": {
            "p": [pod.anchor.pose.position.x, pod.anchor.pose.position.y, pod.anchor.pose.position.z],
            "q": [
                pod.anchor.pose.orientation.w,
                pod.anchor.pose.orientation.x,
                pod.anchor.pose.orientation.y,
                pod.anchor.pose.orientation.z,
            ],
        },
        "meta": pod.meta,
        "tracks": [
            {
                "entity_id": t.entity_id,
                "role": t.role.value,
                "label": t.label,
                "samples": [
                    {
                        "t_us": ts,
                        "p": [p.position.x, p.position.y, p.position.z],
                        "q": [p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z],
                    }
                    for ts, p in t.samples
                ],
            }
            for t in pod.tracks
        ],
        "annotations": [
            {
                "id": a.id,
                "kind": a.kind.value,
                "label": a.label,
                "t_us": a.at,
                "p": [a.position.x, a.position.y, a.position.z],
                "entity_ref": a.entity_ref,
            }
            for a in pod.annotations
        ],
        "transcript": [
            {"start_us": s.start, "end_us": s.end, "speaker": s.speaker, "text": s.text}
            for s in pod.transcript
        ],
        "mesh": {
            "vertices": [[v.x, v.y, v.z] for v in pod.mesh.vertices],
            "triangles": [list(t) for t in pod.mesh.triangles],
        },
        "zones": [
            {"id": z.id, "name": z.name, "min_x": z.min_x, "max_x": z.max_x,
             "min_z": z.min_z, "max_z": z.max_z}
            for z in pod.zones
        ],
    }
    print(json.dumps(obj, sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .store import PodStore

    summarizer = None
    if args.llm_endpoint:
        summarizer = RemoteBackend(args.llm_endpoint, args.llm_model)
    store = PodStore(args.root)
    app = create_app(store, tick_hz=args.tick_hz, summarizer=summarizer)
    _say(args, f"serving {len(store.entries())} pods from {args.root} on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "ingest": _cmd_ingest,
    "validate": _cmd_validate,
    "info": _cmd_info,
    "keyframes": _cmd_keyframes,
    "frame": _cmd_frame,
    "summarize": _cmd_summarize,
    "export": _cmd_export,
    "serve": _cmd_serve,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as e:  # argparse --help/--version
        return int(e.code or 0)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _VALIDATION_ERRORS as e:
        report = getattr(e, "report", None)
        if report is not None and hasattr(report, "violations"):
            for violation in report.violations:
                print(str(violation), file=sys.stderr)
        else:
            print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except InvalidScenario as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except MemoryPodError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
