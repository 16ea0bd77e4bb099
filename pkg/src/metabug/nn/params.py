"""Model parameters: initialization, flattening, and versioned JSON storage.

One `ModelParams` bundle covers the whole pipeline: token embeddings, one
weight/bias pair per directed dependence-edge kind, the GRU doing message
passing, the LSTM evolving relational embeddings, the residual projection,
and two fixed seeded constants — the initial summary-node state and the
initial LSTM cell.  The constants are saved alongside the weights (a model
is not reproducible without them) but never receive gradients.

Stored form is JSON with an explicit shape manifest; loading anything with
a different version, vocabulary size, or array shape set fails with
`ParamsError` rather than silently misreading weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..graph.pdg import EdgeKind
from ..graph.vocab import VOCAB
from .autodiff import Tensor, const, param
from .cells import gru_init, lstm_init

FORMAT_VERSION = "metabug-params/1"

# dependence-edge kinds that carry messages, each in both directions;
# summary-node links are handled by attention instead
PASSING_KINDS: tuple[str, ...] = tuple(
    k.value for k in EdgeKind if k != EdgeKind.META_LINK
)
DIRECTED_KINDS: tuple[str, ...] = tuple(
    name for k in PASSING_KINDS for name in (k, f"{k}:rev")
)


class ParamsError(ValueError):
    """Stored parameters do not match this build (version, vocab, shapes)."""


@dataclass
class ModelParams:
    d: int
    gnn_steps: int
    rounds: int          # attention/readout rounds over the graph
    rel_steps: int       # relational evolution steps per group
    embed: Tensor
    edge: dict[str, dict[str, Tensor]]
    gru: dict[str, Tensor]
    lstm: dict[str, Tensor]
    proj: Tensor
    meta_h0: Tensor      # fixed: initial summary-node embedding
    c0: Tensor           # fixed: initial LSTM cell row
    seed: int = 0

    @classmethod
    def init(cls, seed: int = 0, d: int = 24, gnn_steps: int = 3,
             rounds: int = 2, rel_steps: int = 3) -> "ModelParams":
        rng = np.random.default_rng(seed)
        s = 1.0 / np.sqrt(d)
        embed = param(rng.normal(0.0, s, size=(len(VOCAB), d)), name="embed")
        edge = {
            name: {
                "W": param(rng.normal(0.0, s, size=(d, d)), name=f"edge.{name}.W"),
                "b": param(np.zeros((1, d)), name=f"edge.{name}.b"),
            }
            for name in DIRECTED_KINDS
        }
        gru = gru_init(rng, d, d)
        lstm = lstm_init(rng, d_in=d, d_hidden=2 * d, d=d)
        proj = param(rng.normal(0.0, s, size=(d, d)), name="proj")
        meta_h0 = const(rng.normal(0.0, 1.0, size=(1, d)), name="meta_h0")
        c0 = const(rng.normal(0.0, 1.0, size=(1, d)), name="c0")
        return cls(
            d=d, gnn_steps=gnn_steps, rounds=rounds, rel_steps=rel_steps,
            embed=embed, edge=edge, gru=gru, lstm=lstm, proj=proj,
            meta_h0=meta_h0, c0=c0, seed=seed,
        )

    # --- traversal --------------------------------------------------------

    def named_arrays(self) -> dict[str, Tensor]:
        """Every array in the bundle, trainable or not, by stable name."""
        out: dict[str, Tensor] = {"embed": self.embed, "proj": self.proj,
                                  "meta_h0": self.meta_h0, "c0": self.c0}
        for name, wb in self.edge.items():
            out[f"edge.{name}.W"] = wb["W"]
            out[f"edge.{name}.b"] = wb["b"]
        for k, t in self.gru.items():
            out[f"gru.{k}"] = t
        for k, t in self.lstm.items():
            out[f"lstm.{k}"] = t
        return out

    def trainables(self) -> dict[str, Tensor]:
        return {k: t for k, t in self.named_arrays().items() if t.requires_grad}

    # --- storage ------------------------------------------------------------

    def save(self, path: str | Path) -> None:
        arrays = {
            name: {"shape": list(t.data.shape), "data": t.data.ravel().tolist()}
            for name, t in sorted(self.named_arrays().items())
        }
        doc = {
            "version": FORMAT_VERSION,
            "vocab_size": len(VOCAB),
            "d": self.d,
            "gnn_steps": self.gnn_steps,
            "rounds": self.rounds,
            "rel_steps": self.rel_steps,
            "seed": self.seed,
            "arrays": arrays,
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ModelParams":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ParamsError(f"cannot read parameters from {path}: {e}") from e
        if doc.get("version") != FORMAT_VERSION:
            raise ParamsError(
                f"parameter format {doc.get('version')!r} does not match {FORMAT_VERSION!r}")
        if doc.get("vocab_size") != len(VOCAB):
            raise ParamsError(
                f"vocabulary size {doc.get('vocab_size')} does not match build ({len(VOCAB)})")
        fresh = cls.init(
            seed=doc.get("seed", 0), d=doc["d"], gnn_steps=doc["gnn_steps"],
            rounds=doc["rounds"], rel_steps=doc["rel_steps"],
        )
        stored = doc["arrays"]
        mine = fresh.named_arrays()
        if set(stored) != set(mine):
            missing = sorted(set(mine) - set(stored))
            extra = sorted(set(stored) - set(mine))
            raise ParamsError(f"array set mismatch: missing={missing} extra={extra}")
        for name, t in mine.items():
            spec = stored[name]
            if tuple(spec["shape"]) != t.data.shape:
                raise ParamsError(
                    f"shape mismatch for {name}: stored {spec['shape']}, expected {list(t.data.shape)}")
            t.data = np.array(spec["data"], dtype=np.float64).reshape(t.data.shape)
        return fresh
