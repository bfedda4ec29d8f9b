"""Exception types shared across the toolkit."""


class RuleSetError(ValueError):
    """A rule set violates one of its invariants."""


class RuleFileSyntaxError(RuleSetError):
    def __init__(self, path, lineno, message):
        super().__init__(path, lineno, message)
        self.path = path
        self.lineno = lineno
        self.message = message

    def __str__(self):
        return f"{self.path}:{self.lineno}: {self.message}"


class InvalidUTF8Error(ValueError):
    """Input bytes are not valid UTF-8. ``offset`` is absolute within the stream."""

    def __init__(self, offset, reason="invalid utf-8"):
        super().__init__(offset, reason)
        self.offset = offset
        self.reason = reason

    def __str__(self):
        return f"invalid UTF-8 at byte offset {self.offset}: {self.reason}"


class PartialOutputError(OSError):
    """Writing to the sink failed; ``report`` covers everything processed so far."""

    def __init__(self, report, cause):
        super().__init__(f"sink write failed after {report.lines_in} lines: {cause}")
        self.report = report
        self.cause = cause


class ShardWriteError(OSError):
    """Shard output failed part way; ``manifest`` is marked incomplete."""

    def __init__(self, manifest, cause):
        super().__init__(f"shard write failed after {len(manifest.shards)} shards: {cause}")
        self.manifest = manifest
        self.cause = cause


class UndefinedRatioError(ZeroDivisionError):
    pass


class HistogramBaseMismatch(ValueError):
    pass
