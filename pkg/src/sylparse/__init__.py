"""Joint word segmentation, POS tagging and dependency parsing for
syllable-delimited text, built on a small reverse-mode autodiff engine."""

__version__ = "0.1.0"

from sylparse.autodiff import Node, ParameterStore

__all__ = ["Node", "ParameterStore", "__version__"]
