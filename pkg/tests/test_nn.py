"""Feed-forward, LSTM, BiLSTM, dropout context."""

import numpy as np
import pytest

from sylparse.autodiff import Node, ParameterStore
from sylparse.nn import BiLstm, Linear, LstmCell, TrainContext, word_dropout_probability

from oracles import finite_difference, max_rel_error

RNG = np.random.default_rng(4242)


def check_against_fd(build, params, tol=1e-6):
    for p in params:
        p.grad = None
    build().backward()
    numeric = finite_difference(lambda: float(build().value), params)
    for p, f in zip(params, numeric):
        analytic = p.grad if p.grad is not None else np.zeros_like(p.value)
        assert max_rel_error(analytic, f) <= tol


class TestLinear:
    def test_tanh_and_plain_gradients(self):
        store = ParameterStore(seed=0)
        x = store.parameter("x", (4,), init=RNG.normal(size=4))
        plain = Linear(store, "plain", 4, 3)
        act = Linear(store, "act", 4, 3, activation="tanh")
        params = [x, plain.w, plain.b, act.w, act.b]
        check_against_fd(lambda: (plain(x).sum() + act(x).sum()), params)

    def test_unknown_activation_rejected(self):
        with pytest.raises(ValueError, match="activation"):
            Linear(ParameterStore(), "l", 2, 2, activation="relu6")


class TestLstm:
    def test_cell_step_gradients(self):
        store = ParameterStore(seed=1)
        cell = LstmCell(store, "cell", 3, 2)
        x = store.parameter("x", (3,), init=RNG.normal(size=3))
        h0 = store.parameter("h0", (2,), init=RNG.normal(size=2))
        c0 = store.parameter("c0", (2,), init=RNG.normal(size=2))

        def build():
            h, c = cell.step(x, h0, c0)
            return (h + c).sum()

        check_against_fd(build, [x, h0, c0, cell.wx, cell.wh, cell.b])

    def test_bilstm_output_width_and_depth(self):
        store = ParameterStore(seed=2)
        net = BiLstm(store, "enc", 5, 4, num_layers=2)
        assert net.output_dim == 8
        out = net([Node(RNG.normal(size=5)) for _ in range(3)])
        assert [o.value.shape for o in out] == [(8,), (8,), (8,)]
        assert net([]) == []

    def test_bilstm_gradients(self):
        store = ParameterStore(seed=3)
        net = BiLstm(store, "enc", 2, 2, num_layers=1)
        xs = [store.parameter(f"x{j}", (2,), init=RNG.normal(size=2)) for j in range(3)]
        fwd, bwd = net.layers[0]
        params = xs + [fwd.wx, fwd.wh, fwd.b, bwd.wx, bwd.wh, bwd.b]
        check_against_fd(lambda: sum((o * o).sum() for o in net(list(xs))), params)

    def test_state_depends_on_both_directions(self):
        store = ParameterStore(seed=4)
        net = BiLstm(store, "enc", 2, 3, num_layers=1)
        xs = [Node(RNG.normal(size=2)) for _ in range(4)]
        out1 = [o.value.copy() for o in net(xs)]
        xs2 = list(xs)
        xs2[-1] = Node(RNG.normal(size=2))
        out2 = [o.value.copy() for o in net(xs2)]
        # changing the last input must reach position 0 through the backward pass
        assert not np.allclose(out1[0], out2[0])


class TestDropout:
    def ctx(self, keep=0.5, alpha=0.0, seed=0):
        return TrainContext(
            rng=np.random.default_rng(seed), keep_prob=keep, word_dropout_alpha=alpha
        )

    def test_keep_one_is_identity(self):
        x = Node(RNG.normal(size=6))
        assert self.ctx(keep=1.0).drop_input(x) is x

    def test_inverted_scaling(self):
        x = Node(np.ones(2000))
        out = self.ctx(keep=0.67, seed=9).drop_input(x).value
        assert set(np.round(np.unique(out), 10)) <= {0.0, round(1 / 0.67, 10)}
        assert abs(out.mean() - 1.0) < 0.05  # unbiased in expectation

    def test_seeded_masks_reproduce(self):
        x = Node(RNG.normal(size=50))
        a = self.ctx(seed=3).drop_input(x).value
        b = self.ctx(seed=3).drop_input(x).value
        assert np.array_equal(a, b)

    def test_word_dropout_probability(self):
        assert word_dropout_probability(1) == pytest.approx(0.2)
        assert word_dropout_probability(3) == pytest.approx(0.25 / 3.25)
        assert word_dropout_probability(7, alpha=0.0) == 0.0
        with pytest.raises(ValueError):
            word_dropout_probability(-1)

    def test_alpha_zero_never_replaces(self):
        ctx = self.ctx(alpha=0.0)
        assert not any(ctx.replace_with_unknown(1) for _ in range(100))

    def test_replacement_rate_tracks_formula(self):
        ctx = self.ctx(alpha=0.25, seed=11)
        hits = sum(ctx.replace_with_unknown(1) for _ in range(20000))
        assert abs(hits / 20000 - 0.2) < 0.01
