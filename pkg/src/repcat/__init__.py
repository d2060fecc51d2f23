"""Repetition cat code: noise models, circuit sampling, MWPM decoding and threshold analysis."""

__version__ = "0.1.0"
