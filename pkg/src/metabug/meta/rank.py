"""Scoring and ranking candidate slices with a trained model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..collectors import TestSlice
from ..nn.autodiff import concat
from ..nn.gnn import AttentionMap, GraphTensors, graph_embed, graph_tensors
from ..nn.params import ModelParams
from .loss import group_scores
from .relational import evolve_relational


class TooFewPrograms(ValueError):
    """Ranking needs at least two slices; one point has no group context."""


@dataclass
class ScoredSlice:
    slice: TestSlice
    score: float
    attention: AttentionMap
    tensors: GraphTensors


def score_slices(
    slices: list[TestSlice],
    params: ModelParams,
    attended: bool = True,
    relational: bool = True,
) -> list[ScoredSlice]:
    """Anomaly score per slice, computed jointly over the whole pool."""
    if len(slices) < 2:
        raise TooFewPrograms(f"need at least 2 slices to rank, got {len(slices)}")
    gts = [graph_tensors(s.build_graph()) for s in slices]
    embeds = []
    maps = []
    for gt in gts:
        x, amap = graph_embed(gt, params, attended=attended)
        embeds.append(x)
        maps.append(amap)
    raw = concat(embeds, axis=0)
    refined = evolve_relational(raw, params) if relational else raw
    scores = group_scores(raw, refined).data.ravel()
    return [
        ScoredSlice(slice=s, score=float(v), attention=m, tensors=gt)
        for s, v, m, gt in zip(slices, scores, maps, gts)
    ]


def rank_slices(scored: list[ScoredSlice]) -> list[ScoredSlice]:
    """Most anomalous first; ties broken by origin then site for stability."""
    return sorted(
        scored,
        key=lambda r: (-r.score, r.slice.origin, r.slice.bug_kind, r.slice.key),
    )
