"""Joint evolution of per-program embeddings within a group.

A group's programs start from their raw graph embeddings and are refined
together: each step, every program attends over the *other* programs
(self-attention with the diagonal masked out), the attention context is
concatenated onto the program's own state as the recurrent hidden input,
and an LSTM cell — fed the constant raw embedding as its per-step input —
produces an update that lands through a learned projection and a residual.
Programs that fit the group consensus drift toward it; outliers do not.
"""

from __future__ import annotations

import numpy as np

from ..nn.autodiff import Tensor, concat, const
from ..nn.cells import lstm_step
from ..nn.params import ModelParams

# additive mask that removes the diagonal from row softmax
_MASK = -1e30


def evolve_relational(raw: Tensor, params: ModelParams, steps: int | None = None) -> Tensor:
    """Refined embeddings (n, d) for a group of raw embeddings (n, d)."""
    n = raw.shape[0]
    if steps is None:
        steps = params.rel_steps
    mask_data = np.zeros((n, n))
    np.fill_diagonal(mask_data, _MASK)
    mask = const(mask_data, name="diag-mask")
    delta = raw
    c = const(np.repeat(params.c0.data, n, axis=0), name="c0-rows")
    for _ in range(steps):
        e = delta @ delta.T + mask
        a = e.softmax_rows()
        z = a @ delta                       # context from the other programs
        hidden = concat([delta, z], axis=1)
        h2, c = lstm_step(params.lstm, raw, hidden, c)
        delta = delta + h2 @ params.proj
    return delta
