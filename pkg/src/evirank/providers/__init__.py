"""Model-provider contracts, offline doubles and remote HTTP adapters."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .base import (
    EMBEDDING_DIM,
    EmbeddingProvider,
    GenerationProvider,
    KnowledgeBaseClient,
    NerProvider,
    ProviderConfig,
    StanceProvider,
)
from .doubles import (
    FixtureKnowledgeBase,
    GazetteerNer,
    HashEmbedding,
    OverlapStance,
    TemplateGeneration,
)
from .remote import (
    RemoteEmbedding,
    RemoteGeneration,
    RemoteKnowledgeBase,
    RemoteNer,
    RemoteStance,
)

__all__ = [
    "EMBEDDING_DIM",
    "EmbeddingProvider",
    "GenerationProvider",
    "KnowledgeBaseClient",
    "NerProvider",
    "StanceProvider",
    "ProviderConfig",
    "ProviderSet",
    "HashEmbedding",
    "TemplateGeneration",
    "OverlapStance",
    "GazetteerNer",
    "FixtureKnowledgeBase",
    "RemoteEmbedding",
    "RemoteGeneration",
    "RemoteStance",
    "RemoteNer",
    "RemoteKnowledgeBase",
    "build_provider",
    "build_provider_set",
]

_DOUBLES = {
    "embedding": HashEmbedding,
    "generation": TemplateGeneration,
    "stance": OverlapStance,
    "ner": GazetteerNer,
}

_REMOTES = {
    "embedding": RemoteEmbedding,
    "generation": RemoteGeneration,
    "stance": RemoteStance,
    "ner": RemoteNer,
    "knowledge_base": RemoteKnowledgeBase,
}


def build_provider(config: ProviderConfig, kb_fixture_path: str | Path | None = None):
    """Instantiate the provider a config row asks for."""
    if config.mode == "remote":
        return _REMOTES[config.kind](config)
    if config.kind == "knowledge_base":
        return FixtureKnowledgeBase(kb_fixture_path)
    return _DOUBLES[config.kind]()


@dataclass
class ProviderSet:
    """The five provider slots the pipeline consumes, plus a stable
    fingerprint used to key caches."""

    embedding: EmbeddingProvider
    generation: GenerationProvider
    stance: StanceProvider
    ner: NerProvider
    knowledge_base: KnowledgeBaseClient
    fingerprint: str = ""


def build_provider_set(
    configs: dict[str, ProviderConfig],
    kb_fixture_path: str | Path | None = None,
) -> ProviderSet:
    """Build all five providers from a kind-keyed config mapping.

    Missing kinds default to the offline doubles.
    """
    resolved = {}
    for kind in ("embedding", "generation", "stance", "ner", "knowledge_base"):
        config = configs.get(kind, ProviderConfig(kind=kind, mode="double"))
        resolved[kind] = (config, build_provider(config, kb_fixture_path))
    digest = hashlib.blake2b(digest_size=8)
    for kind, (config, _) in sorted(resolved.items()):
        digest.update(f"{kind}={config.mode}:{config.endpoint};".encode("utf-8"))
    if kb_fixture_path:
        digest.update(str(kb_fixture_path).encode("utf-8"))
    return ProviderSet(
        embedding=resolved["embedding"][1],
        generation=resolved["generation"][1],
        stance=resolved["stance"][1],
        ner=resolved["ner"][1],
        knowledge_base=resolved["knowledge_base"][1],
        fingerprint=digest.hexdigest(),
    )
