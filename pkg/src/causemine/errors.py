"""Exception types shared across the pipeline."""


class CauseMineError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(CauseMineError):
    """Configuration file missing, unparseable, or invalid."""


class ProviderUnavailableError(CauseMineError):
    """An external provider (tagger, embedder, concept service) could not be reached."""


class MalformedPretaggedError(CauseMineError):
    """Pre-tagged input violates the surface/POS line format."""


class UndefinedSimilarityError(CauseMineError):
    """Cosine similarity requested against a zero-norm vector."""


class DimensionMismatchError(CauseMineError):
    """Vector dimension does not match the store or provider declaration."""


class UnknownPhraseError(CauseMineError):
    """A precomputed-file embedding provider has no entry for a phrase."""


class AllTokensUnknownError(CauseMineError):
    """A word-vector-average provider found none of a phrase's tokens in its vocabulary."""


class ClassificationIncompleteError(CauseMineError):
    """A panel member failed during ensemble classification; no partial voting."""


class EnrichmentIncompleteError(CauseMineError):
    """The concept provider failed mid-enrichment; no silent passthrough."""


class NotFoundError(CauseMineError):
    """Unknown run, quad, or other addressed entity."""


class EvolveInProgressError(CauseMineError):
    """Another evolution holds the run's exclusive writer lock."""


class StageOrderError(CauseMineError):
    """A CLI stage was invoked before its prerequisite stage produced artifacts."""

    def __init__(self, message: str, required_stage: str):
        super().__init__(message)
        self.required_stage = required_stage
