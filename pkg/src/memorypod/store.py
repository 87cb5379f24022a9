"""Filesystem pod store with an atomically rewritten manifest.

Layout under the root directory:

    manifest.json           index: pod_id -> path, title, duration, ...
    pods/<id>.mpod          immutable pod files, server-assigned UUID names
    pods/<id>.summary.json  lazily cached summaries

Every manifest rewrite goes through write-temp-then-rename so a crash
between the two leaves the previous manifest intact. Uploads serialize
through one writer lock; pods are immutable once stored, so reads need
no locking.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path

from .codec import decode_pod
from .pod import MemoryPod


class PodStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.pods_dir = self.root / "pods"
        self.pods_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / "manifest.json"
        self._write_lock = threading.Lock()
        self._cache: dict[str, MemoryPod] = {}
        if self.manifest_path.exists():
            self._pods: dict[str, dict] = json.loads(
                self.manifest_path.read_text(encoding="utf-8")
            )["pods"]
        else:
            self._pods = {}

    # -- reads -------------------------------------------------------------

    def __contains__(self, pod_id: str) -> bool:
        return pod_id in self._pods

    def entries(self) -> list[dict]:
        out = [{"pod_id": pid, **entry} for pid, entry in self._pods.items()]
        out.sort(key=lambda e: (e["created_at"], e["pod_id"]))
        return out

    def entry(self, pod_id: str) -> dict:
        return {"pod_id": pod_id, **self._pods[pod_id]}

    def pod_path(self, pod_id: str) -> Path:
        return self.root / self._pods[pod_id]["path"]

    def get_bytes(self, pod_id: str) -> bytes:
        return self.pod_path(pod_id).read_bytes()

    def get(self, pod_id: str) -> MemoryPod:
        pod = self._cache.get(pod_id)
        if pod is None:
            pod = decode_pod(self.get_bytes(pod_id))
            self._cache[pod_id] = pod
        return pod

    # -- writes ------------------------------------------------------------

    def add(self, data: bytes) -> str:
        """Validate, store under a fresh UUID, and index an uploaded pod."""
        pod = decode_pod(data)  # codec errors propagate to the caller
        pod_id = str(uuid.uuid4())
        with self._write_lock:
            path = self.pods_dir / f"{pod_id}.mpod"
            self._write_atomic(path, data)
            entry = {
                "path": str(path.relative_to(self.root)),
                "title": pod.title,
                "duration_us": pod.duration_us(),
                "created_at": pod.created_at,
                "annotation_count": len(pod.annotations),
            }
            candidate = dict(self._pods)
            candidate[pod_id] = entry
            self._save_manifest(candidate)
            self._pods = candidate
            self._cache[pod_id] = pod
        return pod_id

    def _write_atomic(self, path: Path, data: bytes) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    def _save_manifest(self, pods: dict[str, dict]) -> None:
        payload = json.dumps({"pods": pods}, sort_keys=True, indent=2)
        tmp = self.manifest_path.with_name(self.manifest_path.name + ".tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, self.manifest_path)

    # -- summary cache -------------------------------------------------------

    def summary_path(self, pod_id: str) -> Path:
        return self.pods_dir / f"{pod_id}.summary.json"

    def load_summary(self, pod_id: str) -> dict | None:
        path = self.summary_path(pod_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def store_summary(self, pod_id: str, obj: dict) -> None:
        payload = json.dumps(obj, sort_keys=True, indent=2)
        tmp = self.summary_path(pod_id).with_name(f"{pod_id}.summary.json.tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, self.summary_path(pod_id))
