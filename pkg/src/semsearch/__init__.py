"""Generalized vector-space semantic text search over keywords, named
entities, and word senses, with query-oriented spreading activation and a
TREC-style evaluation pipeline."""

__version__ = "0.1.0"

from .expand import Model

__all__ = ["Model", "__version__"]
