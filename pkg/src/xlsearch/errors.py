"""Exception types shared across the package."""


class XLSearchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(XLSearchError):
    """Invalid configuration: bad paths, out-of-range settings, missing runners.

    ``problems`` collects every issue found so callers can report them all
    at once instead of failing on the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class FormatError(XLSearchError):
    """A serialized artifact (embedding table, encoder, index, score table)
    failed to parse.  ``location`` is a line number or byte offset depending
    on the format."""

    def __init__(self, message, *, line=None, offset=None):
        loc = ""
        if line is not None:
            loc = f" (line {line})"
        elif offset is not None:
            loc = f" (byte offset {offset})"
        super().__init__(message + loc)
        self.line = line
        self.offset = offset


class MissingEmbeddingError(XLSearchError):
    """An embedding provider had no vector for the requested sample id."""

    def __init__(self, sample_id):
        super().__init__(f"no embedding for sample id {sample_id!r}")
        self.sample_id = sample_id


class DimensionError(XLSearchError):
    """Vector or parameter dimensions do not chain."""


class TrainingError(XLSearchError):
    """Training aborted: non-finite loss or gradient."""


class ExecutionError(XLSearchError):
    """A sample execution could not be set up (missing runner, bad template)."""
