"""Training: grouped margin-ranking over collected slices.

The unit of training is a corpus group — one batch of programs that share
a bug kind and a cosmetic theme.  Every program in the group is scanned by
that kind's collector; slices from buggy programs are positives when they
sit on the recorded bug point, everything else is a negative.  Each group
contributes one SGD step per epoch, in a fixed order, so a given seed and
corpus always produce the same weights.

Progress lands in a CSV (epoch, mean loss) and optional parameter
checkpoints; training stops early once the mean loss stops improving.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..collectors import TestSlice, collect
from ..minilang.parser import parse_program
from ..nn.autodiff import concat
from ..nn.gnn import GraphTensors, graph_embed, graph_tensors
from ..nn.params import ModelParams
from .loss import group_loss, group_scores
from .relational import evolve_relational


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    d: int = 24
    gnn_steps: int = 3
    rounds: int = 2
    rel_steps: int = 3
    lr: float = 1e-3
    epochs: int = 60
    margin: float = 1.0
    patience: int = 8
    min_delta: float = 1e-4
    attended: bool = True        # summary-node attention in the encoder
    relational: bool = True      # joint refinement before scoring


@dataclass
class GroupSample:
    kind: str
    group_id: str
    slices: list[TestSlice]
    labels: list[int]
    tensors: list[GraphTensors] = field(default_factory=list)

    def prepare(self) -> None:
        if not self.tensors:
            self.tensors = [graph_tensors(s.build_graph()) for s in self.slices]


@dataclass
class TrainResult:
    params: ModelParams
    history: list[dict]
    stopped_epoch: int
    skipped_groups: list[str]


def _slices_for_file(root: Path, rel: str, kind: str) -> list[TestSlice]:
    program = parse_program((root / rel).read_text())
    found = collect(kind, program)
    for ts in found:
        ts.origin = rel
    return found


def load_groups(corpus_dir: str | Path) -> tuple[list[GroupSample], list[str]]:
    """Build group samples from a generated corpus.

    Returns (groups, skipped) where skipped lists groups left out because
    they could not provide both labels (e.g. the collector produced no
    candidate on any correct program)."""
    root = Path(corpus_dir)
    manifest = json.loads((root / "manifest.json").read_text())
    groups: list[GroupSample] = []
    skipped: list[str] = []
    for kind in sorted(manifest["kinds"]):
        for entry in manifest["kinds"][kind]["groups"]:
            slices: list[TestSlice] = []
            labels: list[int] = []
            for rel in entry["buggy"]:
                truth = json.loads(
                    (root / rel).with_suffix("").with_suffix(".truth.json").read_text())
                for ts in _slices_for_file(root, rel, kind):
                    slices.append(ts)
                    labels.append(1 if ts.bug_point == truth["bug_point"] else 0)
            for rel in entry["correct"]:
                for ts in _slices_for_file(root, rel, kind):
                    slices.append(ts)
                    labels.append(0)
            name = f"{kind}/{entry['id']}"
            if len(slices) < 2 or 1 not in labels or 0 not in labels:
                skipped.append(name)
                continue
            groups.append(GroupSample(kind, entry["id"], slices, labels))
    return groups, skipped


def train(
    groups: list[GroupSample],
    cfg: TrainConfig,
    log_path: str | Path | None = None,
    checkpoint_dir: str | Path | None = None,
    checkpoint_every: int = 0,
    resume: ModelParams | None = None,
) -> TrainResult:
    for gs in groups:
        gs.prepare()
    params = resume or ModelParams.init(
        seed=cfg.seed, d=cfg.d, gnn_steps=cfg.gnn_steps,
        rounds=cfg.rounds, rel_steps=cfg.rel_steps,
    )
    trainables = params.trainables()
    history: list[dict] = []
    best = float("inf")
    stale = 0
    stopped = cfg.epochs

    for epoch in range(cfg.epochs):
        total = 0.0
        for gs in groups:
            embeds = [graph_embed(gt, params, attended=cfg.attended)[0]
                      for gt in gs.tensors]
            raw = concat(embeds, axis=0)
            refined = evolve_relational(raw, params) if cfg.relational else raw
            scores = group_scores(raw, refined)
            loss = group_loss(scores, gs.labels, cfg.margin)
            for t in trainables.values():
                t.zero_grad()
            loss.backward()
            for t in trainables.values():
                if t.grad is not None:
                    t.data = t.data - cfg.lr * t.grad
            total += float(loss.data)
        mean = total / max(1, len(groups))
        history.append({"epoch": epoch, "mean_loss": mean})
        if checkpoint_dir and checkpoint_every and (epoch + 1) % checkpoint_every == 0:
            ckdir = Path(checkpoint_dir)
            ckdir.mkdir(parents=True, exist_ok=True)
            params.save(ckdir / f"checkpoint-{epoch:04d}.json")
        if best - mean > cfg.min_delta:
            best = mean
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                stopped = epoch + 1
                break

    if log_path is not None:
        path = Path(log_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["epoch", "mean_loss"])
            w.writeheader()
            for row in history:
                w.writerow(row)
    return TrainResult(params=params, history=history, stopped_epoch=stopped,
                       skipped_groups=[])
