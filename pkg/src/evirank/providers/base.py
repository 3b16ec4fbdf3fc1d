"""Provider contracts shared by the offline doubles and the remote adapters.

The pipeline only ever sees these interfaces; which side is plugged in is a
configuration matter and must not change behavior contracts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    import numpy as np

    from ..evidence import Article

PROVIDER_KINDS = ("embedding", "generation", "stance", "ner", "knowledge_base")
PROVIDER_MODES = ("remote", "double")

EMBEDDING_DIM = 256


@dataclass(frozen=True)
class ProviderConfig:
    """How one provider slot is wired."""

    kind: str
    mode: str = "double"
    endpoint: str = ""
    timeout: float = 30.0
    batch_size: int = 32
    token: str = ""

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ValueError(f"unknown provider kind: {self.kind}")
        if self.mode not in PROVIDER_MODES:
            raise ValueError(f"unknown provider mode: {self.mode}")
        if self.mode == "remote" and not self.endpoint:
            raise ValueError(f"{self.kind}: remote mode requires an endpoint")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@runtime_checkable
class EmbeddingProvider(Protocol):
    def embed(self, texts: list[str]) -> list["np.ndarray"]:
        """One unit-norm vector of fixed dimension per input text."""
        ...


@runtime_checkable
class GenerationProvider(Protocol):
    def generate(self, prompt_text: str) -> str:
        """Free text answering the prompt."""
        ...


@runtime_checkable
class StanceProvider(Protocol):
    def stance(self, premise: str, hypothesis: str) -> float:
        """Support score in [0, 1]: 0 no support, 1 maximum support."""
        ...


@runtime_checkable
class NerProvider(Protocol):
    def ner(self, text: str) -> list[tuple[str, str]]:
        """(surface, type) pairs; type is medicine, disease or other."""
        ...


@runtime_checkable
class KnowledgeBaseClient(Protocol):
    def search(self, query_text: str, m: int) -> list["Article"]:
        """Top-m articles by the knowledge base's own lexical ranking."""
        ...
