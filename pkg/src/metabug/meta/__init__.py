"""Group-relational scoring: refinement, loss, training, ranking, metrics."""

from .evaluate import RankMetrics, evaluate_groups, random_baseline
from .loss import group_loss, group_scores
from .rank import ScoredSlice, TooFewPrograms, rank_slices, score_slices
from .relational import evolve_relational
from .train import GroupSample, TrainConfig, TrainResult, load_groups, train

__all__ = [
    "RankMetrics", "evaluate_groups", "random_baseline",
    "group_loss", "group_scores",
    "ScoredSlice", "TooFewPrograms", "rank_slices", "score_slices",
    "evolve_relational",
    "GroupSample", "TrainConfig", "TrainResult", "load_groups", "train",
]
