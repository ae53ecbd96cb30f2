"""Build filtered datasets of GitHub repositories and export them to CSV and SQLite."""

from .analytics import ContributionShare, LanguageShare, contribution_report, user_language_report
from .client import ApiRequest, Credentials, GitHubClient, Page, RetryPolicy
from .errors import (
    ApiError,
    AuthError,
    DecodeError,
    FixtureCorrupt,
    IoError,
    NotFound,
    PartialResult,
    RateLimitDeadlineExceeded,
    RepominerError,
    SchemaConflict,
    SchemaError,
    TransportError,
    UnmatchedRequest,
    UsageError,
)
from .export import ExportBundle, export_csv, export_db, export_user, read_csv_records
from .model import (
    CommitRecord,
    Contributor,
    Issue,
    IssueComment,
    LanguageBreakdown,
    PullRequest,
    Release,
    RepositoryRecord,
    RepositorySummary,
    Subscriber,
    UserProfile,
    classify_languages,
    summary_from_raw,
)
from .pipeline import DatasetManifest, Extractor, FilterCriteria, run_dataset, run_single_repo, run_single_user
from .replay import FixtureEntry, RecordingTransport, ReplayTransport, record

__version__ = "0.1.0"
