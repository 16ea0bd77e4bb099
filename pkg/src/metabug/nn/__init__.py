"""Tensor autodiff, recurrent cells, graph encoder, parameter storage."""

from .autodiff import NonFinite, Tensor, concat, const, gather_rows, param, sqnorm_rows
from .cells import gru_init, gru_step, lstm_init, lstm_step
from .gnn import AttentionMap, GraphTensors, graph_embed, graph_tensors, passing_rounds
from .params import DIRECTED_KINDS, FORMAT_VERSION, ModelParams, ParamsError

__all__ = [
    "NonFinite", "Tensor", "concat", "const", "gather_rows", "param", "sqnorm_rows",
    "gru_init", "gru_step", "lstm_init", "lstm_step",
    "AttentionMap", "GraphTensors", "graph_embed", "graph_tensors", "passing_rounds",
    "DIRECTED_KINDS", "FORMAT_VERSION", "ModelParams", "ParamsError",
]
