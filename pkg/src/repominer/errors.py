"""Exception hierarchy shared by the client, pipeline and exporters."""

from __future__ import annotations


class RepominerError(Exception):
    """Base class for every error raised by this package."""


class ApiError(RepominerError):
    """A GitHub API call failed."""

    def __init__(self, message: str, status: int | None = None, path: str | None = None):
        super().__init__(message)
        self.status = status
        self.path = path


class AuthError(ApiError):
    pass


class NotFound(ApiError):
    pass


class HttpError(ApiError):
    """Any other non-retryable HTTP status."""


class RateLimitDeadlineExceeded(ApiError):
    pass


class TransportError(ApiError):
    """Network failure (or persistent 5xx) after all retries."""


class DecodeError(ApiError):
    pass


class PartialResult(ApiError):
    """Pagination failed part-way; ``items`` holds what was fetched before the failure."""

    def __init__(self, items: list, cause: ApiError):
        super().__init__(f"pagination stopped after {len(items)} items: {cause}", cause.status, cause.path)
        self.items = items
        self.cause = cause


class SchemaError(RepominerError):
    """A raw API record is missing a required field or violates a model invariant."""

    def __init__(self, field: str, detail: str = ""):
        super().__init__(field if not detail else f"{field}: {detail}")
        self.field = field


class ExportError(RepominerError):
    pass


class IoError(ExportError):
    def __init__(self, path, cause: Exception | None = None):
        super().__init__(f"cannot write {path}" + (f": {cause}" if cause else ""))
        self.path = path


class SchemaConflict(ExportError):
    pass


class UnmatchedRequest(RepominerError):
    """Strict replay saw a request with no recorded fixture."""

    def __init__(self, request_key: str):
        super().__init__(f"no fixture recorded for {request_key}")
        self.request_key = request_key


class FixtureCorrupt(RepominerError):
    pass


class UsageError(RepominerError):
    pass
