"""Network building blocks: feed-forward layers, LSTM cells, stacked
BiLSTMs, and the training-time dropout context.

Dropout policy: inverted dropout with a configurable keep probability is
applied to the *inputs* of every BiLSTM stack and every feed-forward layer,
nowhere else.  Word-level dropout replaces embedding lookups with the
unknown row at a rate tied to training frequency.  Both live on
`TrainContext`; decoding passes ctx=None and is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from sylparse import autodiff as ad
from sylparse.autodiff import Node, ParameterStore


def word_dropout_probability(count: int, alpha: float = 0.25) -> float:
    """alpha / (alpha + count): rarer tokens are replaced more often."""
    if count < 0:
        raise ValueError(f"negative count {count}")
    if alpha < 0:
        raise ValueError(f"negative alpha {alpha}")
    if alpha == 0:
        return 0.0
    return alpha / (alpha + count)


@dataclass
class TrainContext:
    """Everything forward passes need only while training."""

    rng: np.random.Generator
    keep_prob: float = 1.0
    word_dropout_alpha: float = 0.0
    syllable_counts: Mapping[str, int] = field(default_factory=dict)
    word_counts: Mapping[str, int] = field(default_factory=dict)

    def drop_input(self, x: Node) -> Node:
        if self.keep_prob >= 1.0:
            return x
        mask = (self.rng.random(x.value.shape) < self.keep_prob) / self.keep_prob
        return x * Node(mask)

    def replace_with_unknown(self, count: int) -> bool:
        p = word_dropout_probability(count, self.word_dropout_alpha)
        return p > 0.0 and self.rng.random() < p


class Linear:
    """W x + b with optional tanh; dropout applies to x when training."""

    def __init__(self, store: ParameterStore, name: str, in_dim: int, out_dim: int, activation=None):
        if activation not in (None, "tanh"):
            raise ValueError(f"unknown activation {activation!r}")
        self.w = store.parameter(f"{name}/w", (out_dim, in_dim))
        self.b = store.parameter(f"{name}/b", (out_dim,), init="zeros")
        self.activation = activation
        self.in_dim = in_dim
        self.out_dim = out_dim

    def __call__(self, x: Node, ctx: TrainContext | None = None) -> Node:
        if ctx is not None:
            x = ctx.drop_input(x)
        h = ad.matvec(self.w, x) + self.b
        return ad.tanh(h) if self.activation == "tanh" else h


class LstmCell:
    """Single LSTM step; gates packed as input, forget, output, candidate."""

    def __init__(self, store: ParameterStore, name: str, input_dim: int, hidden_dim: int):
        self.hidden_dim = hidden_dim
        self.wx = store.parameter(f"{name}/wx", (4 * hidden_dim, input_dim))
        self.wh = store.parameter(f"{name}/wh", (4 * hidden_dim, hidden_dim))
        self.b = store.parameter(f"{name}/b", (4 * hidden_dim,), init="zeros")
        self._zero = Node(np.zeros(hidden_dim))

    def initial(self) -> tuple[Node, Node]:
        return self._zero, self._zero

    def step(self, x: Node, h: Node, c: Node) -> tuple[Node, Node]:
        hd = self.hidden_dim
        gates = ad.matvec(self.wx, x) + ad.matvec(self.wh, h) + self.b
        i = ad.sigmoid(ad.slice1d(gates, 0, hd))
        f = ad.sigmoid(ad.slice1d(gates, hd, 2 * hd))
        o = ad.sigmoid(ad.slice1d(gates, 2 * hd, 3 * hd))
        g = ad.tanh(ad.slice1d(gates, 3 * hd, 4 * hd))
        c_next = f * c + i * g
        h_next = o * ad.tanh(c_next)
        return h_next, c_next


class BiLstm:
    """Stack of bidirectional LSTM layers over a sequence of vectors.

    Each position's output is the forward and backward hidden states
    concatenated, so output_dim = 2 * hidden_dim regardless of depth.
    Input dropout applies once, to the layer-0 inputs.
    """

    def __init__(self, store: ParameterStore, name: str, input_dim: int, hidden_dim: int, num_layers: int):
        if num_layers < 1:
            raise ValueError(f"need at least one layer, got {num_layers}")
        self.input_dim = input_dim
        self.layers = []
        dim = input_dim
        for k in range(num_layers):
            fwd = LstmCell(store, f"{name}/l{k}f", dim, hidden_dim)
            bwd = LstmCell(store, f"{name}/l{k}b", dim, hidden_dim)
            self.layers.append((fwd, bwd))
            dim = 2 * hidden_dim
        self.output_dim = dim

    def __call__(self, inputs: list[Node], ctx: TrainContext | None = None) -> list[Node]:
        if not inputs:
            return []
        if ctx is not None:
            seq = [ctx.drop_input(x) for x in inputs]
        else:
            seq = list(inputs)
        for fwd, bwd in self.layers:
            forward = []
            h, c = fwd.initial()
            for x in seq:
                h, c = fwd.step(x, h, c)
                forward.append(h)
            backward: list[Node | None] = [None] * len(seq)
            h, c = bwd.initial()
            for idx in range(len(seq) - 1, -1, -1):
                h, c = bwd.step(seq[idx], h, c)
                backward[idx] = h
            seq = [ad.concat([f, b]) for f, b in zip(forward, backward)]
        return seq
