"""Gated recurrent cells over row-batched tensors.

Both cells treat rows as independent items: hidden states are (n, d)
matrices, weights are shared across rows.  Parameters live in plain dicts
so the serializer and the optimizer can walk them uniformly.
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, const, param


def gru_init(rng: np.random.Generator, d_in: int, d: int) -> dict[str, Tensor]:
    s = 1.0 / np.sqrt(d)
    p = {}
    for gate in ("r", "z", "n"):
        p[f"W{gate}"] = param(rng.normal(0.0, s, size=(d_in, d)))
        p[f"U{gate}"] = param(rng.normal(0.0, s, size=(d, d)))
        p[f"b{gate}"] = param(np.zeros((1, d)))
    return p


def gru_step(p: dict[str, Tensor], x: Tensor, h: Tensor) -> Tensor:
    r = (x @ p["Wr"] + h @ p["Ur"] + p["br"]).sigmoid()
    z = (x @ p["Wz"] + h @ p["Uz"] + p["bz"]).sigmoid()
    n = (x @ p["Wn"] + (r * h) @ p["Un"] + p["bn"]).tanh()
    one = const(1.0)
    return (one - z) * h + z * n


def lstm_init(rng: np.random.Generator, d_in: int, d_hidden: int, d: int) -> dict[str, Tensor]:
    """LSTM whose gate input is [x (d_in), h (d_hidden)] and cell is d wide."""
    s = 1.0 / np.sqrt(d)
    p = {}
    for gate in ("i", "f", "o", "g"):
        p[f"W{gate}"] = param(rng.normal(0.0, s, size=(d_in, d)))
        p[f"U{gate}"] = param(rng.normal(0.0, s, size=(d_hidden, d)))
        p[f"b{gate}"] = param(np.zeros((1, d)))
    return p


def lstm_step(
    p: dict[str, Tensor], x: Tensor, h: Tensor, c: Tensor
) -> tuple[Tensor, Tensor]:
    i = (x @ p["Wi"] + h @ p["Ui"] + p["bi"]).sigmoid()
    f = (x @ p["Wf"] + h @ p["Uf"] + p["bf"]).sigmoid()
    o = (x @ p["Wo"] + h @ p["Uo"] + p["bo"]).sigmoid()
    g = (x @ p["Wg"] + h @ p["Ug"] + p["bg"]).tanh()
    c2 = f * c + i * g
    h2 = o * c2.tanh()
    return h2, c2
