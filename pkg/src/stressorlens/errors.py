"""Exception types shared across the package."""


class StressorlensError(Exception):
    """Base class for package-specific failures."""


class ConfigError(StressorlensError, ValueError):
    """Invalid or inconsistent configuration."""


class EmptyVocabularyError(StressorlensError, ValueError):
    """Feature filtering removed every candidate term."""


class NumericalError(StressorlensError, ArithmeticError):
    """An optimizer produced NaN/inf and cannot continue."""


class MissingArtifactError(StressorlensError, RuntimeError):
    """A pipeline stage ran before its prerequisite produced its artifact."""

    def __init__(self, artifact: str, hint: str = ""):
        self.artifact = artifact
        msg = f"missing artifact: {artifact}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)


class IntegrityError(StressorlensError, RuntimeError):
    """A persisted snapshot or matrix file failed its integrity check."""
