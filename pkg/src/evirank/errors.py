"""Exception hierarchy for the evirank engine.

Every error raised by the library derives from EviRankError so callers can
catch the whole family at the service boundary.
"""


class EviRankError(Exception):
    """Base class for all evirank errors."""


class EmptyCollection(EviRankError):
    """Corpus ingest produced zero indexable documents."""


class UnknownDocument(EviRankError):
    """A doc_id was requested that the index does not contain."""


class EmptyContext(EviRankError):
    """A prompt or fallback text was requested with no evidence passages."""


class NoEvidenceFound(EviRankError):
    """The knowledge base returned zero articles or passages for a query."""


class KnowledgeBaseUnavailable(EviRankError):
    """The knowledge base could not be reached (transport failure)."""


class ProviderFailure(EviRankError):
    """A model provider call failed (timeout, malformed response, refusal).

    Carries the provider operation name so failures can be attributed to a
    pipeline stage.
    """

    def __init__(self, operation: str, message: str = ""):
        self.operation = operation
        super().__init__(f"{operation}: {message}" if message else operation)


class GenerationFailed(EviRankError):
    """Generation retries exhausted without a parseable cited paragraph."""


class NoValidSentences(EviRankError):
    """Generated text contains no sentence with resolvable citations."""


class DomainError(EviRankError):
    """A numeric argument fell outside its documented range."""


class DuplicateDocument(EviRankError):
    """The same doc_id appeared twice in one ranking input."""


class MalformedRun(EviRankError):
    """A run file line does not match the expected 6-column format."""


class NoLabels(EviRankError):
    """Grid search over the passage discount requires labeled passages."""


class OverlapError(EviRankError):
    """Tuning queries overlap the held-out test queries."""
