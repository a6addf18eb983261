"""Reverse-mode automatic differentiation over dense float64 arrays.

Each training sentence builds its own small graph of `Node` objects; calling
`backward()` on the scalar loss walks the graph once in reverse topological
order and accumulates gradients into every reachable node that requires them.
The graph is ordinary Python objects, so dropping the loss reference after the
optimizer step frees the whole thing.

Every op checks its result for NaN/Inf and raises immediately: a non-finite
value anywhere in a forward pass is a bug, never something to propagate.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GraphError",
    "Node",
    "ParameterStore",
    "concat",
    "logsumexp",
    "matvec",
    "pick",
    "pick_row",
    "relu",
    "reshape",
    "sigmoid",
    "slice1d",
    "slice2d",
    "tanh",
    "vmax",
]


class GraphError(ValueError):
    """Shape or structure error while building or running a graph."""


def _check_finite(op: str, value: np.ndarray) -> np.ndarray:
    if not np.isfinite(value).all():
        raise FloatingPointError(f"{op}: non-finite value in forward pass")
    return value


class Node:
    """One vertex of a computation graph.

    `value` is a float64 ndarray, `grad` is a same-shaped array once backward
    has touched the node (None before), and `parents` is a tuple of
    (parent, local_grad_fn) pairs where each function maps the upstream
    gradient to this parent's contribution.
    """

    __slots__ = ("value", "grad", "parents", "requires_grad")

    def __init__(self, value, parents=(), requires_grad: bool | None = None):
        self.value = np.asarray(value, dtype=np.float64)
        _check_finite("node", self.value)
        self.parents: tuple = tuple(parents)
        if requires_grad is None:
            requires_grad = any(p.requires_grad for p, _ in self.parents)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple:
        return self.value.shape

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, -_lift(other))

    def __rsub__(self, other):
        return add(_lift(other), -self)

    def __neg__(self):
        return _unary("neg", self, -self.value, lambda g: -g)

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__

    def sum(self) -> "Node":
        shape = self.value.shape
        return _unary("sum", self, self.value.sum(), lambda g: np.broadcast_to(g, shape))

    def backward(self) -> None:
        """Accumulate d(self)/d(node) into `grad` across the whole graph."""
        if self.value.size != 1:
            raise GraphError(f"backward requires a scalar loss, got shape {self.value.shape}")
        order = self._toposort()
        self.grad = np.ones_like(self.value)
        for node in reversed(order):
            g = node.grad
            if g is None:
                continue
            for parent, fn in node.parents:
                if not parent.requires_grad:
                    continue
                contrib = fn(g)
                if parent.grad is None:
                    parent.grad = np.array(contrib, dtype=np.float64, copy=True)
                else:
                    parent.grad = parent.grad + contrib

    def _toposort(self) -> list:
        # Iterative DFS: LSTM chains get deep enough to overflow recursion.
        order: list[Node] = []
        visited: set[int] = set()
        stack: list[tuple[Node, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent, _ in node.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order


def _lift(x) -> Node:
    if isinstance(x, Node):
        return x
    return Node(np.asarray(x, dtype=np.float64))


def _unary(op: str, x: Node, value: np.ndarray, fn: Callable) -> Node:
    return Node(_check_finite(op, np.asarray(value, dtype=np.float64)), parents=((x, fn),))


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a: Node, b: Node) -> Node:
    try:
        out = a.value + b.value
    except ValueError:
        raise GraphError(f"add: shapes {a.value.shape} and {b.value.shape} do not broadcast")
    return Node(
        _check_finite("add", out),
        parents=(
            (a, lambda g: _unbroadcast(g, a.value.shape)),
            (b, lambda g: _unbroadcast(g, b.value.shape)),
        ),
    )


def mul(a: Node, b: Node) -> Node:
    try:
        out = a.value * b.value
    except ValueError:
        raise GraphError(f"mul: shapes {a.value.shape} and {b.value.shape} do not broadcast")
    return Node(
        _check_finite("mul", out),
        parents=(
            (a, lambda g: _unbroadcast(g * b.value, a.value.shape)),
            (b, lambda g: _unbroadcast(g * a.value, b.value.shape)),
        ),
    )


def matvec(w: Node, x: Node) -> Node:
    if w.value.ndim != 2 or x.value.ndim != 1 or w.value.shape[1] != x.value.shape[0]:
        raise GraphError(f"matvec: shapes {w.value.shape} and {x.value.shape} do not conform")
    out = w.value @ x.value
    return Node(
        _check_finite("matvec", out),
        parents=(
            (w, lambda g: np.outer(g, x.value)),
            (x, lambda g: w.value.T @ g),
        ),
    )


def concat(parts: Sequence[Node]) -> Node:
    if not parts:
        raise GraphError("concat: no inputs")
    for p in parts:
        if p.value.ndim != 1:
            raise GraphError(f"concat: expected vectors, got shape {p.value.shape}")
    out = np.concatenate([p.value for p in parts])
    parents = []
    offset = 0
    for p in parts:
        size = p.value.shape[0]
        start = offset

        def fn(g, start=start, size=size):
            return g[start : start + size]

        parents.append((p, fn))
        offset += size
    return Node(_check_finite("concat", out), parents=tuple(parents))


def tanh(x: Node) -> Node:
    out = np.tanh(x.value)
    return _unary("tanh", x, out, lambda g: g * (1.0 - out * out))


def sigmoid(x: Node) -> Node:
    # Stable in both tails: exp() of a non-positive argument only.
    v = x.value
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    e = np.exp(v[~pos])
    out[~pos] = e / (1.0 + e)
    return _unary("sigmoid", x, out, lambda g: g * out * (1.0 - out))


def relu(x: Node) -> Node:
    mask = x.value > 0
    return _unary("relu", x, np.where(mask, x.value, 0.0), lambda g: g * mask)


def logsumexp(x: Node, axis: int | None = None) -> Node:
    """Overflow-safe log-sum-exp of a vector (axis=None) or along a matrix axis."""
    v = x.value
    if axis is None:
        if v.ndim != 1:
            raise GraphError(f"logsumexp: expected a vector, got shape {v.shape}")
        m = v.max()
        out = m + np.log(np.exp(v - m).sum())
        soft = np.exp(v - out)
        return _unary("logsumexp", x, out, lambda g: g * soft)
    if v.ndim != 2 or axis not in (0, 1):
        raise GraphError(f"logsumexp: bad axis {axis} for shape {v.shape}")
    m = v.max(axis=axis, keepdims=True)
    out = (m + np.log(np.exp(v - m).sum(axis=axis, keepdims=True))).squeeze(axis=axis)
    soft = np.exp(v - np.expand_dims(out, axis))
    return _unary("logsumexp", x, out, lambda g: np.expand_dims(g, axis) * soft)


def vmax(x: Node) -> Node:
    """Maximum over all elements; the gradient goes to the first argmax."""
    flat = x.value.reshape(-1)
    idx = int(flat.argmax())
    shape = x.value.shape

    def fn(g, idx=idx, shape=shape):
        out = np.zeros(shape)
        out.reshape(-1)[idx] = g
        return out

    return _unary("max", x, flat[idx], fn)


def pick(x: Node, index: int) -> Node:
    if x.value.ndim != 1:
        raise GraphError(f"pick: expected a vector, got shape {x.value.shape}")
    n = x.value.shape[0]
    if not 0 <= index < n:
        raise GraphError(f"pick: index {index} out of range for length {n}")

    def fn(g):
        out = np.zeros(n)
        out[index] = g
        return out

    return _unary("pick", x, x.value[index], fn)


def pick_row(m: Node, index: int) -> Node:
    if m.value.ndim != 2:
        raise GraphError(f"pick_row: expected a matrix, got shape {m.value.shape}")
    rows = m.value.shape[0]
    if not 0 <= index < rows:
        raise GraphError(f"pick_row: row {index} out of range for {rows} rows")
    shape = m.value.shape

    def fn(g):
        out = np.zeros(shape)
        out[index] = g
        return out

    return _unary("pick_row", m, m.value[index].copy(), fn)


def slice1d(x: Node, start: int, stop: int) -> Node:
    if x.value.ndim != 1:
        raise GraphError(f"slice1d: expected a vector, got shape {x.value.shape}")
    n = x.value.shape[0]
    if not 0 <= start <= stop <= n:
        raise GraphError(f"slice1d: range [{start}, {stop}) invalid for length {n}")

    def fn(g):
        out = np.zeros(n)
        out[start:stop] = g
        return out

    return _unary("slice1d", x, x.value[start:stop].copy(), fn)


def slice2d(m: Node, r0: int, r1: int, c0: int, c1: int) -> Node:
    if m.value.ndim != 2:
        raise GraphError(f"slice2d: expected a matrix, got shape {m.value.shape}")
    rows, cols = m.value.shape
    if not (0 <= r0 <= r1 <= rows and 0 <= c0 <= c1 <= cols):
        raise GraphError(f"slice2d: block [{r0}:{r1}, {c0}:{c1}] invalid for shape {m.value.shape}")
    shape = m.value.shape

    def fn(g):
        out = np.zeros(shape)
        out[r0:r1, c0:c1] = g
        return out

    return _unary("slice2d", m, m.value[r0:r1, c0:c1].copy(), fn)


def reshape(x: Node, shape: tuple) -> Node:
    old = x.value.shape
    try:
        out = x.value.reshape(shape)
    except ValueError:
        raise GraphError(f"reshape: cannot view shape {old} as {shape}")
    return _unary("reshape", x, out, lambda g: np.asarray(g).reshape(old))


class ParameterStore:
    """Registry of named trainable parameters plus their Adam state.

    Initialization draws from a single seeded generator in registration
    order, so a fixed build sequence is bit-reproducible.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        self._params: dict[str, Node] = {}
        self._adam_m: dict[str, np.ndarray] = {}
        self._adam_v: dict[str, np.ndarray] = {}
        self._step = 0

    def parameter(self, name: str, shape: tuple, init="glorot") -> Node:
        if name in self._params:
            raise GraphError(f"duplicate parameter name: {name}")
        shape = tuple(int(d) for d in shape)
        if isinstance(init, np.ndarray):
            if init.shape != shape:
                raise GraphError(f"parameter {name}: init shape {init.shape} != {shape}")
            value = init.astype(np.float64)
        elif init == "glorot":
            fan_in = shape[-2] if len(shape) >= 2 else 1
            fan_out = shape[-1]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            value = self.rng.uniform(-limit, limit, size=shape)
        elif init == "zeros":
            value = np.zeros(shape)
        else:
            raise GraphError(f"parameter {name}: unknown init {init!r}")
        node = Node(value, requires_grad=True)
        self._params[name] = node
        return node

    def __getitem__(self, name: str) -> Node:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def num_values(self) -> int:
        return sum(p.value.size for p in self._params.values())

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None

    def adam_step(self, learning_rate: float, beta1=0.9, beta2=0.999, eps=1e-8) -> None:
        """One dense Adam update over every registered parameter.

        Parameters whose gradient is absent *and* whose moments have never
        been touched are skipped; that is bit-identical to the dense update
        (zero gradient into zero moments moves nothing).
        """
        self._step += 1
        c1 = 1.0 - beta1**self._step
        c2 = 1.0 - beta2**self._step
        for name, node in self._params.items():
            g = node.grad
            if g is None:
                if name not in self._adam_m:
                    continue
                m = self._adam_m[name]
                v = self._adam_v[name]
                m *= beta1
                v *= beta2
            else:
                m = self._adam_m.get(name)
                if m is None:
                    m = np.zeros_like(node.value)
                    v = np.zeros_like(node.value)
                    self._adam_m[name] = m
                    self._adam_v[name] = v
                else:
                    v = self._adam_v[name]
                m *= beta1
                m += (1.0 - beta1) * g
                v *= beta2
                v += (1.0 - beta2) * (g * g)
            node.value -= learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)
            node.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: node.value for name, node in self._params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(arrays)
        extra = set(arrays) - set(self._params)
        if missing or extra:
            raise GraphError(f"parameter set mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, value in arrays.items():
            node = self._params[name]
            value = np.asarray(value, dtype=np.float64)
            if value.shape != node.value.shape:
                raise GraphError(f"parameter {name}: stored shape {value.shape} != {node.value.shape}")
            node.value = value.copy()
