"""Repeat-purchase recommender: survival-curve category features, gap
forecasts, a small neural category ranker, and recency/frequency item
ranking, glued together by a staged file-based pipeline.

The heavy lifting lives in the compiled ``_core`` extension; this package
just re-exports its surface.
"""

from ._core import (
    CategoryModel,
    config_keys,
    depletion_feature,
    feature_names,
    fit_arima,
    gap_feature,
    ndcg_at_k,
    rank_items,
    recall_at_k,
    run_stage,
    simulate_pair_days,
    stage_names,
    survival_curves,
)

__all__ = [
    "CategoryModel",
    "config_keys",
    "depletion_feature",
    "feature_names",
    "fit_arima",
    "gap_feature",
    "ndcg_at_k",
    "rank_items",
    "recall_at_k",
    "run_stage",
    "simulate_pair_days",
    "stage_names",
    "survival_curves",
]

__version__ = "0.1.0"
