"""Exception hierarchy shared across the memorypod package."""

from __future__ import annotations


class MemoryPodError(Exception):
    """Base class for all package errors."""


# --- pod / codec ---------------------------------------------------------


class DuplicateAnnotationId(MemoryPodError):
    pass


class EmptyTrack(MemoryPodError):
    pass


class EmptyIndex(MemoryPodError):
    pass


class BadMagic(MemoryPodError):
    pass


class UnsupportedVersion(MemoryPodError):
    pass


class TruncatedSection(MemoryPodError):
    pass


class ChecksumMismatch(MemoryPodError):
    pass


class InvalidPod(MemoryPodError):
    """Pod failed validation; carries the offending report (or a description)."""

    def __init__(self, report, message: str = "pod failed validation"):
        if isinstance(report, str):
            super().__init__(report)
        else:
            super().__init__(f"{message}: {report}")
        self.report = report


# --- recorder / scenario -------------------------------------------------


class EventBeforeAnchor(MemoryPodError):
    pass


class NonMonotonicSample(MemoryPodError):
    pass


class UnknownEntity(MemoryPodError):
    pass


class AlreadyFinished(MemoryPodError):
    pass


class NotFinished(MemoryPodError):
    pass


class InvalidScenario(MemoryPodError):
    pass


class CaptureLogError(MemoryPodError):
    """Malformed capture-log line or unknown event type."""


# --- replay --------------------------------------------------------------


class OutOfRange(MemoryPodError):
    pass


class NoKeyframes(MemoryPodError):
    pass


class UnmatchedLabel(MemoryPodError):
    pass


class AmbiguousLabel(MemoryPodError):
    pass


class AnnotationOutsideZones(MemoryPodError):
    pass


class EmptyResponses(MemoryPodError):
    pass


# --- narrative -----------------------------------------------------------


class BackendError(MemoryPodError):
    """Remote summarizer call failed after retries."""
