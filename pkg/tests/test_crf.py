"""CRF loss against enumeration, probability normalization, gradients."""

import itertools

import numpy as np
import pytest

from sylparse import autodiff as ad
from sylparse.autodiff import Node, ParameterStore
from sylparse.crf import MASK, LinearChainCrf, argmax_decode, softmax_nll

from oracles import (
    crf_log_partition,
    finite_difference,
    max_rel_error,
    sequence_scores,
    viterbi_oracle,
)

RNG = np.random.default_rng(99)


def make_crf(num_tags, rng=None, store=None):
    store = store or ParameterStore(seed=5)
    crf = LinearChainCrf(store, "crf", num_tags)
    if rng is not None:
        t = num_tags
        block = crf.transitions.value
        block[t, :t] = rng.normal(size=t)
        block[:t, :t] = rng.normal(size=(t, t))
        block[:t, t + 1] = rng.normal(size=t)
    return store, crf


def pieces(crf):
    t = crf.num_tags
    table = crf.transitions.value
    return table[t, :t], table[:t, :t], table[:t, t + 1]


class TestNll:
    def test_matches_enumeration(self):
        for _ in range(20):
            n = int(RNG.integers(1, 6))
            t = int(RNG.integers(1, 5))
            _, crf = make_crf(t, rng=RNG)
            values = RNG.normal(size=(n, t))
            emissions = [Node(row) for row in values]
            gold = [int(g) for g in RNG.integers(0, t, size=n)]
            start, inner, stop = pieces(crf)
            seqs, scores = sequence_scores(values, start, inner, stop)
            k = np.flatnonzero((seqs == gold).all(axis=1))[0]
            expected = crf_log_partition(values, start, inner, stop) - scores[k]
            assert abs(float(crf.nll(emissions, gold).value) - expected) < 1e-9

    def test_probabilities_sum_to_one(self):
        for _ in range(5):
            n, t = 3, 3
            _, crf = make_crf(t, rng=RNG)
            emissions = [Node(RNG.normal(size=t)) for _ in range(n)]
            total = sum(
                np.exp(-float(crf.nll(emissions, list(gold)).value))
                for gold in itertools.product(range(t), repeat=n)
            )
            assert abs(total - 1.0) < 1e-10

    def test_uniform_scores_give_n_log_t(self):
        # zero emissions, fresh (zero) transitions: every path ties, so the
        # gold path carries probability T^-n
        for n, t in [(1, 3), (4, 3), (5, 2)]:
            _, crf = make_crf(t)
            emissions = [Node(np.zeros(t)) for _ in range(n)]
            loss = float(crf.nll(emissions, [0] * n).value)
            assert abs(loss - n * np.log(t)) < 1e-12

    def test_input_validation(self):
        _, crf = make_crf(3)
        with pytest.raises(ValueError, match="empty"):
            crf.nll([], [])
        with pytest.raises(ValueError, match="gold"):
            crf.nll([Node(np.zeros(3))], [])
        with pytest.raises(ValueError, match="range"):
            crf.nll([Node(np.zeros(3))], [3])

    def test_gradients(self):
        n, t = 4, 3
        store, crf = make_crf(t, rng=RNG)
        values = [RNG.normal(size=t) for _ in range(n)]
        holders = [store.parameter(f"e{j}", (t,), init=values[j]) for j in range(n)]
        gold = [2, 0, 1, 0]

        def build():
            return crf.nll(list(holders), gold)

        loss = build()
        loss.backward()
        params = holders + [crf.transitions]
        analytic = [p.grad for p in params]
        numeric = finite_difference(lambda: float(build().value), params)
        for a, f in zip(analytic, numeric):
            assert max_rel_error(a, f) <= 1e-6


class TestMasking:
    def test_forbidden_transitions_masked(self):
        _, crf = make_crf(4)
        table = crf.transitions.value
        assert (table[5, :] == MASK).all()  # out of stop
        assert (table[:, 4] == MASK).all()  # into start

    def test_mask_survives_training_steps(self):
        store, crf = make_crf(3, rng=RNG)
        for _ in range(3):
            emissions = [Node(RNG.normal(size=3)) for _ in range(4)]
            crf.nll(emissions, [0, 1, 2, 1]).backward()
            store.adam_step(0.05)
        table = crf.transitions.value
        assert (table[4, :] == MASK).all()
        assert (table[:, 3] == MASK).all()


class TestDecode:
    def test_matches_oracle(self):
        for _ in range(30):
            n = int(RNG.integers(1, 6))
            t = int(RNG.integers(1, 5))
            _, crf = make_crf(t, rng=RNG)
            values = RNG.normal(size=(n, t))
            _, expected = viterbi_oracle(values, *pieces(crf))
            assert np.array_equal(crf.decode(values), expected)

    def test_all_ties_choose_lowest_tag(self):
        _, crf = make_crf(3)
        assert np.array_equal(crf.decode(np.zeros((4, 3))), [0, 0, 0, 0])


class TestSoftmax:
    def test_value_is_positionwise_cross_entropy(self):
        values = RNG.normal(size=(3, 4))
        emissions = [Node(v) for v in values]
        gold = [1, 3, 0]
        expected = sum(
            np.log(np.exp(v).sum()) - v[g] for v, g in zip(values, gold)
        )
        assert abs(float(softmax_nll(emissions, gold).value) - expected) < 1e-12

    def test_gradients(self):
        store = ParameterStore()
        holders = [store.parameter(f"e{j}", (4,), init=RNG.normal(size=4)) for j in range(3)]
        gold = [0, 2, 3]

        def build():
            return softmax_nll(list(holders), gold)

        build().backward()
        numeric = finite_difference(lambda: float(build().value), holders)
        for h, f in zip(holders, numeric):
            assert max_rel_error(h.grad, f) <= 1e-6

    def test_argmax_decode_breaks_ties_low(self):
        scores = np.array([[0.0, 0.0], [1.0, 2.0]])
        assert np.array_equal(argmax_decode(scores), [0, 1])
