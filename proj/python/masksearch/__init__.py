"""Pixel-count queries over image masks (Python bindings)."""

from ._core import (
    Catalog,
    ChiConfig,
    Index,
    FormatError,
    IoError,
    MaskSearchError,
    ParseError,
    ValidationError,
    augment,
    confusion_matrix,
    cp,
    generate,
    load_mask,
    parse,
    query,
    query_naive,
    save_mask,
)

__all__ = [
    "Catalog",
    "ChiConfig",
    "Index",
    "FormatError",
    "IoError",
    "MaskSearchError",
    "ParseError",
    "ValidationError",
    "augment",
    "confusion_matrix",
    "cp",
    "generate",
    "load_mask",
    "parse",
    "query",
    "query_naive",
    "save_mask",
]
