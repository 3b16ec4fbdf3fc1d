"""evirank: health search that ranks documents by fused topical relevance
and evidence-grounded factual accuracy."""

from .config import EngineConfig, load_config
from .corpus import Document, InvertedIndex, QuerySpec, build_index, normalize_text
from .pipeline import SearchPipeline
from .providers import ProviderConfig, ProviderSet, build_provider_set

__version__ = "0.1.0"

__all__ = [
    "Document",
    "QuerySpec",
    "InvertedIndex",
    "build_index",
    "normalize_text",
    "EngineConfig",
    "load_config",
    "SearchPipeline",
    "ProviderConfig",
    "ProviderSet",
    "build_provider_set",
    "__version__",
]
