"""Ranking quality on held-out groups, with a chance baseline.

For each group, candidates are scored and sorted most-anomalous-first;
the rank of the best-placed true bug yields the reciprocal rank and the
hit@k indicators.  The baseline is the same corpus ranked by a seeded
random shuffle, averaged over many trials — what a no-signal model would
score."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..nn.params import ModelParams
from .rank import rank_slices, score_slices
from .train import GroupSample


@dataclass
class RankMetrics:
    n_groups: int
    mrr: float
    hit_at_1: float
    hit_at_3: float

    def as_dict(self) -> dict:
        return {
            "n_groups": self.n_groups, "mrr": self.mrr,
            "hit_at_1": self.hit_at_1, "hit_at_3": self.hit_at_3,
        }


def _metrics_from_ranks(first_hit_ranks: list[int], n: int) -> RankMetrics:
    mrr = sum(1.0 / r for r in first_hit_ranks) / n
    h1 = sum(1 for r in first_hit_ranks if r <= 1) / n
    h3 = sum(1 for r in first_hit_ranks if r <= 3) / n
    return RankMetrics(n_groups=n, mrr=mrr, hit_at_1=h1, hit_at_3=h3)


def evaluate_groups(
    groups: list[GroupSample],
    params: ModelParams,
    attended: bool = True,
    relational: bool = True,
) -> RankMetrics:
    ranks: list[int] = []
    for gs in groups:
        scored = score_slices(gs.slices, params, attended=attended, relational=relational)
        ordered = rank_slices(scored)
        positive_ids = {
            id(s) for s, lab in zip(gs.slices, gs.labels) if lab == 1
        }
        hit = next(
            i + 1 for i, r in enumerate(ordered) if id(r.slice) in positive_ids
        )
        ranks.append(hit)
    return _metrics_from_ranks(ranks, len(groups))


def random_baseline(groups: list[GroupSample], seed: int = 0, trials: int = 200) -> RankMetrics:
    """Expected metrics for a ranker with no signal, by Monte Carlo."""
    rng = random.Random(seed)
    mrr = h1 = h3 = 0.0
    for _ in range(trials):
        ranks = []
        for gs in groups:
            order = list(range(len(gs.labels)))
            rng.shuffle(order)
            hit = next(i + 1 for i, j in enumerate(order) if gs.labels[j] == 1)
            ranks.append(hit)
        m = _metrics_from_ranks(ranks, len(groups))
        mrr += m.mrr
        h1 += m.hit_at_1
        h3 += m.hit_at_3
    return RankMetrics(
        n_groups=len(groups), mrr=mrr / trials,
        hit_at_1=h1 / trials, hit_at_3=h3 / trials,
    )
