"""Warm-up detection for iterative benchmark measurements."""

from ._core import (
    ConfigError,
    DataError,
    RocketModel,
    a12,
    annotate,
    changepoints,
    heuristic_stop,
    rank_biserial,
    ratio_ci,
    run_stopper,
    sampling_steps,
    standardize,
    synthetic_corpus,
    train_rocket,
    wee,
    wilcoxon,
)

__all__ = [
    "ConfigError",
    "DataError",
    "RocketModel",
    "a12",
    "annotate",
    "changepoints",
    "heuristic_stop",
    "rank_biserial",
    "ratio_ci",
    "run_stopper",
    "sampling_steps",
    "standardize",
    "synthetic_corpus",
    "train_rocket",
    "wee",
    "wilcoxon",
]
