"""Anomaly scores and the margin loss that shapes them.

A program's score is its squared distance from the group's center — the
mean of the *raw* embeddings, so the anchor cannot chase the refined
points.  Training pushes every buggy program at least `margin` further
from the center than every correct one, pairwise:

    loss = sum over (correct q, buggy p) of relu(score(q) - score(p) + margin)
"""

from __future__ import annotations

import numpy as np

from ..nn.autodiff import Tensor, const, gather_rows, sqnorm_rows


def group_scores(raw: Tensor, refined: Tensor) -> Tensor:
    """Squared distance (n, 1) of each refined embedding from the raw mean."""
    n = raw.shape[0]
    center = raw.sum(axis=0, keepdims=True) * const(1.0 / n)
    return sqnorm_rows(refined - center)


def group_loss(scores: Tensor, labels: list[int], margin: float) -> Tensor:
    """Pairwise hinge over the group; `labels` marks buggy entries with 1."""
    p_idx = np.array([i for i, l in enumerate(labels) if l == 1], dtype=np.int64)
    q_idx = np.array([i for i, l in enumerate(labels) if l == 0], dtype=np.int64)
    sp = gather_rows(scores, p_idx)     # (np, 1) buggy
    sq = gather_rows(scores, q_idx)     # (nq, 1) correct
    diff = sq - sp.T + const(float(margin))
    return diff.relu().sum()
