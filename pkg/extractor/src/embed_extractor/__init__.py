"""Static embedding-table extraction from pretrained translation models."""

from .extract import ExtractionManifest, extract_static_embeddings

__all__ = ["ExtractionManifest", "extract_static_embeddings"]
__version__ = "0.1.0"
