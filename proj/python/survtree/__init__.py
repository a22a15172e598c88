"""Provably optimal sparse survival trees.

Trains survival trees that minimize the integrated Brier score plus a
per-leaf penalty, with an optimality certificate, and evaluates them with
standard censored-data metrics.
"""

from ._core import (
    ConfigurationError,
    DataError,
    Dataset,
    evaluate,
    fit_reference_losses,
    greedy,
    train,
)

__all__ = [
    "ConfigurationError",
    "DataError",
    "Dataset",
    "evaluate",
    "fit_reference_losses",
    "greedy",
    "train",
]
