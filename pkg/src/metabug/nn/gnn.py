"""Graph encoding: gated message passing plus summary-node attention.

The dependence graph is first lowered to dense tensors: a token index per
node and one adjacency matrix per directed edge kind.  Message passing then
runs vectorized over all nodes of one graph,

    M = sum_k  A_k @ ((S @ W_k + b_k) * alpha)
    S' = GRU(M, S)

where `alpha` is a per-node weight column.  The attended pass computes
`alpha` from the summary node's current state (softmax over all nodes of
their dot product with it) and lets the summary state follow the weighted
node states round by round; the plain pass runs the identical code with
`alpha = None`, which skips the weighting.  The summary node never
exchanges messages over its own edges — attention is its only channel, so
attached/stripped summary nodes do not disturb the native encoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph.pdg import EdgeKind, Pdg
from ..graph.vocab import TOKEN_INDEX
from .autodiff import Tensor, const, gather_rows
from .cells import gru_step
from .params import DIRECTED_KINDS, ModelParams


@dataclass
class GraphTensors:
    """Dense, order-stable view of one graph."""
    node_ids: list[int]                    # row -> PDG node id (sorted)
    row_of: dict[int, int]
    tokens: np.ndarray                     # (n,) vocab indices
    adjacency: dict[str, Tensor]           # directed kind -> (n, n) constant
    stmt_of_row: list[int | None]          # enclosing statement per row


def graph_tensors(graph: Pdg) -> GraphTensors:
    ids = sorted(graph.native_ids())
    row_of = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    tokens = np.array([TOKEN_INDEX[graph.nodes[i].token] for i in ids], dtype=np.int64)
    mats: dict[str, np.ndarray] = {}
    for e in graph.edges:
        if e.kind == EdgeKind.META_LINK:
            continue
        if e.src not in row_of or e.dst not in row_of:
            continue
        s, t = row_of[e.src], row_of[e.dst]
        fwd = mats.setdefault(e.kind.value, np.zeros((n, n)))
        fwd[t, s] = 1.0
        rev = mats.setdefault(f"{e.kind.value}:rev", np.zeros((n, n)))
        rev[s, t] = 1.0
    adjacency = {k: const(m, name=f"A[{k}]") for k, m in sorted(mats.items())}
    stmt_of_row = [graph.nodes[i].stmt_nid for i in ids]
    return GraphTensors(ids, row_of, tokens, adjacency, stmt_of_row)


def passing_rounds(gt: GraphTensors, params: ModelParams,
                   S: Tensor, alpha: Tensor | None) -> Tensor:
    """`gnn_steps` iterations of gated message passing over one graph."""
    for _ in range(params.gnn_steps):
        msg_total: Tensor | None = None
        for name in DIRECTED_KINDS:
            A = gt.adjacency.get(name)
            if A is None:
                continue
            m = S @ params.edge[name]["W"] + params.edge[name]["b"]
            if alpha is not None:
                m = m * alpha
            contrib = A @ m
            msg_total = contrib if msg_total is None else msg_total + contrib
        if msg_total is None:  # graph with no edges at all
            break
        S = gru_step(params.gru, msg_total, S)
    return S


@dataclass
class AttentionMap:
    """Final per-node attention of the summary node over one graph."""
    node_ids: list[int]
    weights: np.ndarray  # (n,)

    def by_statement(self, gt: GraphTensors) -> dict[int, float]:
        """Attention mass per enclosing statement."""
        acc: dict[int, float] = {}
        for w, stmt in zip(self.weights, gt.stmt_of_row):
            if stmt is not None:
                acc[stmt] = acc.get(stmt, 0.0) + float(w)
        return acc

    def top_statements(self, gt: GraphTensors, k: int) -> list[int]:
        mass = self.by_statement(gt)
        order = sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))
        return [stmt for stmt, _ in order[:k]]


def graph_embed(
    gt: GraphTensors, params: ModelParams, attended: bool = True,
    alpha_sink: list[np.ndarray] | None = None,
) -> tuple[Tensor, AttentionMap]:
    """Embed one graph; returns (summary embedding (1, d), attention map).

    Attended mode interleaves: weight the pass by the summary node's
    attention, re-read the node states, repeat.  Plain mode runs unweighted
    passes and mean-pools.  When given, alpha_sink collects each round's
    attention row."""
    S = gather_rows(params.embed, gt.tokens)
    n = len(gt.node_ids)
    if attended:
        h = params.meta_h0
        alpha_row: Tensor | None = None
        for _ in range(params.rounds):
            e = h @ S.T                      # (1, n)
            alpha_row = e.softmax_rows()
            if alpha_sink is not None:
                alpha_sink.append(alpha_row.data.ravel().copy())
            S = passing_rounds(gt, params, S, alpha_row.T)
            h = alpha_row @ S                # follow the weighted node states
        assert alpha_row is not None
        return h, AttentionMap(gt.node_ids, alpha_row.data.ravel().copy())
    for _ in range(params.rounds):
        S = passing_rounds(gt, params, S, None)
    uniform = const(np.full((1, n), 1.0 / n))
    pooled = uniform @ S
    return pooled, AttentionMap(gt.node_ids, np.full(n, 1.0 / n))
