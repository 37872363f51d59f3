"""Exception hierarchy shared across the pipeline.

Each class carries the process exit code the CLI uses when it escapes
uncaught: 1 usage/config, 2 I/O, 3 backend. Exit 4 is reserved for
validation failures reported by `dagam validate`.
"""


class DagamError(Exception):
    exit_code = 1


class ConfigError(DagamError):
    """Bad configuration file, flag, or environment override."""

    exit_code = 1


class PlanError(DagamError):
    """Inconsistent augmentation plan or unplannable corpus."""

    exit_code = 1


class CorpusError(DagamError):
    """Unreadable, unparsable, or structurally invalid corpus file."""

    exit_code = 2


class BackendError(DagamError):
    """Summarization backend unreachable or misbehaving."""

    exit_code = 3


class MalformedResponseError(BackendError):
    """Backend answered, but with mismatched ids or empty summaries."""
