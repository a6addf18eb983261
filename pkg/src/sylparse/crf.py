"""Linear-chain CRF: forward-algorithm NLL and Viterbi decoding.

The transition table is (T+2) x (T+2) with two virtual tags appended: index
T is the start state (its row scores start transitions) and T+1 the stop
state (its column scores stop transitions).  The stop row and start column
can never occur in a path; they are pinned at -1e9 and, since no loss ever
reads them, Adam leaves them untouched.
"""

from __future__ import annotations

import numpy as np

from sylparse import autodiff as ad
from sylparse import kernels
from sylparse.autodiff import Node, ParameterStore

MASK = -1e9


class LinearChainCrf:
    def __init__(self, store: ParameterStore, name: str, num_tags: int):
        if num_tags < 1:
            raise ValueError(f"need at least one tag, got {num_tags}")
        self.num_tags = num_tags
        init = np.zeros((num_tags + 2, num_tags + 2))
        init[num_tags + 1, :] = MASK  # out of the stop state
        init[:, num_tags] = MASK  # into the start state
        self.transitions = store.parameter(f"{name}/transitions", init.shape, init=init)

    # transition slices actually used by paths
    def _pieces(self):
        t = self.num_tags
        trans = self.transitions
        start = ad.slice1d(ad.pick_row(trans, t), 0, t)
        inner = ad.slice2d(trans, 0, t, 0, t)
        stop = ad.reshape(ad.slice2d(trans, 0, t, t + 1, t + 2), (t,))
        return start, inner, stop

    def nll(self, emissions: list[Node], gold: list[int]) -> Node:
        """Negative log-likelihood of the gold tag sequence.

        log Z comes from the forward algorithm run in log space on the
        graph, so exp(-nll) over all tag sequences sums to one.
        """
        n = len(emissions)
        if n == 0:
            raise ValueError("cannot score an empty sequence")
        if len(gold) != n:
            raise ValueError(f"{len(gold)} gold tags for {n} positions")
        for g in gold:
            if not 0 <= g < self.num_tags:
                raise ValueError(f"gold tag {g} out of range 0..{self.num_tags - 1}")
        t = self.num_tags
        start, inner, stop = self._pieces()

        alpha = start + emissions[0]
        for j in range(1, n):
            moved = ad.reshape(alpha, (t, 1)) + inner
            alpha = ad.logsumexp(moved, axis=0) + emissions[j]
        log_z = ad.logsumexp(alpha + stop)

        score = ad.pick(start, gold[0]) + ad.pick(emissions[0], gold[0])
        for j in range(1, n):
            step = ad.pick(ad.pick_row(inner, gold[j - 1]), gold[j])
            score = score + step + ad.pick(emissions[j], gold[j])
        score = score + ad.pick(stop, gold[n - 1])
        return log_z - score

    def decode(self, emissions: np.ndarray) -> np.ndarray:
        """Viterbi path over plain emission scores (no graph, no gradient)."""
        t = self.num_tags
        table = self.transitions.value
        return kernels.viterbi_decode(
            emissions, table[t, :t], table[:t, :t], table[:t, t + 1]
        )


def softmax_nll(emissions: list[Node], gold: list[int]) -> Node:
    """Per-position cross-entropy summed over the sequence.

    The structure-free replacement for `LinearChainCrf.nll` used by the
    tagging ablations.
    """
    if not emissions:
        raise ValueError("cannot score an empty sequence")
    if len(gold) != len(emissions):
        raise ValueError(f"{len(gold)} gold tags for {len(emissions)} positions")
    total = None
    for e, g in zip(emissions, gold):
        term = ad.logsumexp(e) - ad.pick(e, g)
        total = term if total is None else total + term
    return total


def argmax_decode(emissions: np.ndarray) -> np.ndarray:
    """Position-wise argmax; ties take the lowest tag index."""
    return emissions.argmax(axis=1)
