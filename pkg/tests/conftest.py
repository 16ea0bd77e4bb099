"""Shared fixtures: a small generated corpus and a model trained on it.

Both are session-scoped because generation and training dominate the
suite's runtime; tests must treat them as read-only.
"""

from __future__ import annotations

import pytest

from metabug.meta.train import TrainConfig, load_groups, train
from metabug.synthgen.generator import GenConfig, generate_corpus


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    cfg = GenConfig(seed=11, groups_per_kind=2, buggy_per_group=1)
    generate_corpus(cfg, root)
    return root


@pytest.fixture(scope="session")
def trained(tiny_corpus):
    groups, _ = load_groups(tiny_corpus)
    cfg = TrainConfig(seed=11, d=16, lr=1e-2, margin=0.5, epochs=20, patience=20)
    res = train(groups, cfg)
    return res.params, groups
