"""Exception types shared across the toolkit."""


class SFTrackError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SFTrackError):
    """A file could not be parsed. Carries the offending line number when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class ConfigError(SFTrackError):
    """Invalid configuration key or value."""


class NumericalError(SFTrackError):
    """A numerically degenerate state was encountered (e.g. singular innovation)."""
