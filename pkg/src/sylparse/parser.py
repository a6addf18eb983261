"""Arc-factored dependency scoring, projective decoding, margin loss.

Every position (the artificial root included) gets four projections of its
BiLSTM state: head/dependent views for arc scoring and again for labeling.
An arc h -> d is scored by a feed-forward network over the concatenated head
and dependent views; decoding maximizes the arc-score sum over projective
trees.  The scorer needs its tanh layer *after* the concatenation: a plain
linear map over [head; dep] decomposes into a(h) + b(d), which makes every
dependent in the sentence agree on a single favorite head.

Training uses a cost-augmented hinge: decode with every non-gold arc's score
raised by 1, then push the gold tree above that margin.  Labels train as
plain cross-entropy on the gold arcs and are predicted arc by arc at decode
time, so label choices never influence the tree.
"""

from __future__ import annotations

import numpy as np

from sylparse import autodiff as ad
from sylparse import kernels
from sylparse.autodiff import Node, ParameterStore
from sylparse.nn import Linear, TrainContext


class DependencyParser:
    def __init__(self, store: ParameterStore, name: str, state_dim: int, proj_dim: int, num_labels: int):
        if num_labels < 1:
            raise ValueError(f"need at least one label, got {num_labels}")
        self.num_labels = num_labels
        self.arc_head = Linear(store, f"{name}/arc_head", state_dim, proj_dim, activation="tanh")
        self.arc_dep = Linear(store, f"{name}/arc_dep", state_dim, proj_dim, activation="tanh")
        self.label_head = Linear(store, f"{name}/label_head", state_dim, proj_dim, activation="tanh")
        self.label_dep = Linear(store, f"{name}/label_dep", state_dim, proj_dim, activation="tanh")
        self.arc_hidden = Linear(store, f"{name}/arc_hidden", 2 * proj_dim, proj_dim, activation="tanh")
        self.arc_out = Linear(store, f"{name}/arc_out", proj_dim, 1)
        self.label_hidden = Linear(store, f"{name}/label_hidden", 2 * proj_dim, proj_dim, activation="tanh")
        self.label_out = Linear(store, f"{name}/label_out", proj_dim, num_labels)

    # -- projections (computed once per position) ---------------------------

    def project_arc(self, states: list[Node], ctx: TrainContext | None = None):
        return [self.arc_head(s, ctx) for s in states], [self.arc_dep(s, ctx) for s in states]

    def project_label(self, states: list[Node], ctx: TrainContext | None = None):
        return [self.label_head(s, ctx) for s in states], [self.label_dep(s, ctx) for s in states]

    # -- arcs ----------------------------------------------------------------

    def arc_scores(self, heads_proj, deps_proj, ctx: TrainContext | None = None):
        """Score every arc h -> d (d >= 1, h != d).

        Returns ({(h, d): Node}, values) where values is the (n+1, n+1)
        float matrix for the decoder; unused cells stay 0.
        """
        n_pos = len(heads_proj)
        nodes: dict[tuple[int, int], Node] = {}
        values = np.zeros((n_pos, n_pos))
        for h in range(n_pos):
            for d in range(1, n_pos):
                if h == d:
                    continue
                pair = self.arc_hidden(ad.concat([heads_proj[h], deps_proj[d]]), ctx)
                score = ad.pick(self.arc_out(pair), 0)
                nodes[(h, d)] = score
                values[h, d] = float(score.value)
        return nodes, values

    def decode_arcs(self, values: np.ndarray) -> np.ndarray:
        return kernels.eisner_decode(values)

    def hinge_loss(self, score_nodes, values: np.ndarray, gold_heads) -> Node:
        """max(0, augmented score of the decoded tree - gold tree score).

        The margin adds 1 to every non-gold arc before decoding, so the gold
        tree must win by that margin for the loss to reach 0.  The gradient
        is +1 on predicted-but-not-gold arcs and -1 on gold-but-not-predicted
        ones.  The gold tree may be non-projective: its score is a plain sum,
        only the prediction comes from the projective decoder.
        """
        n = len(gold_heads)
        if values.shape[0] != n + 1:
            raise ValueError(f"{n} gold heads for a {values.shape} score matrix")
        augmented = values + 1.0
        deps = np.arange(1, n + 1)
        augmented[np.asarray(gold_heads), deps] -= 1.0
        predicted = kernels.eisner_decode(augmented)

        total: Node | None = None
        for d in range(1, n + 1):
            g, p = gold_heads[d - 1], int(predicted[d - 1])
            if g == p:
                continue
            margin = score_nodes[(p, d)] + 1.0 - score_nodes[(g, d)]
            total = margin if total is None else total + margin
        if total is None:
            return Node(0.0)
        return ad.relu(total)

    # -- labels ---------------------------------------------------------------

    def label_loss(self, label_heads, label_deps, gold_heads, gold_labels, ctx=None) -> Node:
        """Cross-entropy of gold labels over gold arcs, summed."""
        n = len(gold_heads)
        if len(gold_labels) != n:
            raise ValueError(f"{len(gold_labels)} labels for {n} arcs")
        total: Node | None = None
        for d in range(1, n + 1):
            h = gold_heads[d - 1]
            logits = self.label_out(self.label_hidden(ad.concat([label_heads[h], label_deps[d]]), ctx))
            term = ad.logsumexp(logits) - ad.pick(logits, gold_labels[d - 1])
            total = term if total is None else total + term
        if total is None:
            return Node(0.0)
        return total

    def predict_labels(self, label_heads, label_deps, heads) -> list[int]:
        out = []
        for d in range(1, len(heads) + 1):
            h = int(heads[d - 1])
            logits = self.label_out(self.label_hidden(ad.concat([label_heads[h], label_deps[d]])))
            out.append(int(logits.value.argmax()))
        return out
