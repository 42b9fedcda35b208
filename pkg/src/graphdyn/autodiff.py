"""Minimal reverse-mode automatic differentiation over dense arrays.

The engine records a flat tape of nodes in creation order (a Wengert
list).  Creation order is a topological order of the expression graph,
so the backward pass is a single reverse scan that applies each node's
vector-Jacobian product once.  Ops are plain functions; when no tape is
active they still compute values, they just record nothing, which is the
cheap path used for prediction and finite differencing.

Scope is deliberately narrow: 2-D matrices and row/column vectors in
double precision, no broadcasting beyond the explicit bias-row op, no
higher-order derivatives.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DivergenceError, SizeMismatchError

_TAPE: list["Node"] | None = None
_CHECK_FINITE = False


def set_check_finite(enabled: bool) -> None:
    """Toggle per-node finite checks (slow; meant for debugging/tests)."""
    global _CHECK_FINITE
    _CHECK_FINITE = bool(enabled)


class Node:
    """One tape entry: a value and a slot for its accumulated gradient."""

    __slots__ = ("value", "grad", "op", "_vjp")

    def __init__(self, value: np.ndarray, op: str,
                 vjp: Callable[[np.ndarray], None] | None) -> None:
        self.value = value
        self.grad: np.ndarray | None = None
        self.op = op
        self._vjp = vjp

    def __repr__(self) -> str:  # pragma: no cover
        return f"Node(op={self.op}, shape={self.value.shape})"


class Tape:
    """Context manager that activates recording.

    Nested tapes shadow the outer one; leaving restores it.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._outer: list[Node] | None = None

    def __enter__(self) -> "Tape":
        global _TAPE
        self._outer = _TAPE
        _TAPE = self.nodes
        return self

    def __exit__(self, *exc) -> None:
        global _TAPE
        _TAPE = self._outer
        return None

    def backward(self, out: Node) -> None:
        """Reverse accumulation from a scalar output node."""
        if out.value.size != 1:
            raise ValueError(f"backward needs a scalar output, got shape {out.value.shape}")
        out.grad = np.ones_like(out.value)
        for node in reversed(self.nodes):
            if node.grad is not None and node._vjp is not None:
                node._vjp(node.grad)


def _record(value: np.ndarray, op: str,
            vjp: Callable[[np.ndarray], None] | None) -> Node:
    if _CHECK_FINITE and not np.all(np.isfinite(value)):
        raise DivergenceError(f"non-finite value produced by op '{op}'")
    node = Node(value, op, vjp if _TAPE is not None else None)
    if _TAPE is not None:
        _TAPE.append(node)
    return node


def _acc(node: Node, g: np.ndarray) -> None:
    if node.grad is None:
        node.grad = g.copy()
    else:
        node.grad += g


def constant(x) -> Node:
    """A node with no upstream; gradients may flow into it but stop there."""
    return _record(np.asarray(x, dtype=float), "constant", None)


leaf = constant


def _same_shape(a: Node, b: Node, op: str) -> None:
    if a.value.shape != b.value.shape:
        raise SizeMismatchError(
            f"{op}: shapes {a.value.shape} and {b.value.shape} differ")


def add(a: Node, b: Node) -> Node:
    _same_shape(a, b, "add")

    def vjp(g):
        _acc(a, g)
        _acc(b, g)
    return _record(a.value + b.value, "add", vjp)


def sub(a: Node, b: Node) -> Node:
    _same_shape(a, b, "sub")

    def vjp(g):
        _acc(a, g)
        _acc(b, -g)
    return _record(a.value - b.value, "sub", vjp)


def neg(a: Node) -> Node:
    def vjp(g):
        _acc(a, -g)
    return _record(-a.value, "neg", vjp)


def mul(a: Node, b: Node) -> Node:
    _same_shape(a, b, "mul")

    def vjp(g):
        _acc(a, g * b.value)
        _acc(b, g * a.value)
    return _record(a.value * b.value, "mul", vjp)


def scale(a: Node, c: float) -> Node:
    c = float(c)

    def vjp(g):
        _acc(a, c * g)
    return _record(c * a.value, "scale", vjp)


def add_scaled(a: Node, b: Node, c: float) -> Node:
    """a + c*b in one node; the solver's workhorse."""
    _same_shape(a, b, "add_scaled")
    c = float(c)

    def vjp(g):
        _acc(a, g)
        _acc(b, c * g)
    return _record(a.value + c * b.value, "add_scaled", vjp)


def matmul(a: Node, b: Node) -> Node:
    if a.value.ndim != 2 or b.value.ndim != 2 or a.value.shape[1] != b.value.shape[0]:
        raise SizeMismatchError(
            f"matmul: shapes {a.value.shape} and {b.value.shape} incompatible")

    def vjp(g):
        _acc(a, g @ b.value.T)
        _acc(b, a.value.T @ g)
    return _record(a.value @ b.value, "matmul", vjp)


def transpose(a: Node) -> Node:
    def vjp(g):
        _acc(a, g.T)
    return _record(a.value.T.copy(), "transpose", vjp)


def reshape(a: Node, shape: tuple[int, ...]) -> Node:
    old = a.value.shape

    def vjp(g):
        _acc(a, g.reshape(old))
    return _record(a.value.reshape(shape).copy(), "reshape", vjp)


def concat(parts: Sequence[Node], axis: int) -> Node:
    sizes = [p.value.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        for p, lo, hi in zip(parts, offsets, offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            _acc(p, g[tuple(sl)])
    return _record(np.concatenate([p.value for p in parts], axis=axis),
                   "concat", vjp)


def tanh(a: Node) -> Node:
    y = np.tanh(a.value)

    def vjp(g):
        _acc(a, g * (1.0 - y * y))
    return _record(y, "tanh", vjp)


def exp(a: Node) -> Node:
    y = np.exp(a.value)

    def vjp(g):
        _acc(a, g * y)
    return _record(y, "exp", vjp)


def sqrt(a: Node) -> Node:
    y = np.sqrt(a.value)

    def vjp(g):
        _acc(a, g * (0.5 / y))
    return _record(y, "sqrt", vjp)


def total(a: Node) -> Node:
    def vjp(g):
        _acc(a, np.full_like(a.value, float(g)))
    return _record(np.asarray(a.value.sum()), "total", vjp)


def sumsq(a: Node) -> Node:
    def vjp(g):
        _acc(a, (2.0 * float(g)) * a.value)
    return _record(np.asarray((a.value * a.value).sum()), "sumsq", vjp)


def abssum(a: Node) -> Node:
    def vjp(g):
        _acc(a, float(g) * np.sign(a.value))
    return _record(np.asarray(np.abs(a.value).sum()), "abssum", vjp)


def add_rowvec(a: Node, b: Node) -> Node:
    """a (m,k) plus bias row b (1,k), broadcast over rows."""
    if a.value.ndim != 2 or b.value.shape != (1, a.value.shape[1]):
        raise SizeMismatchError(
            f"add_rowvec: shapes {a.value.shape} and {b.value.shape}")

    def vjp(g):
        _acc(a, g)
        _acc(b, g.sum(axis=0, keepdims=True))
    return _record(a.value + b.value, "add_rowvec", vjp)


def masked_softmax(scores: Node, mask: np.ndarray) -> Node:
    """Row-wise softmax restricted to True mask positions.

    Off-mask outputs are exactly zero.  Rows whose mask is empty come out
    all-zero.  Scores are shifted by the row max over the mask before
    exponentiation, which leaves the result (and its gradient) unchanged
    but avoids overflow.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != scores.value.shape:
        raise SizeMismatchError(
            f"masked_softmax: mask {mask.shape} vs scores {scores.value.shape}")
    shifted = np.where(mask, scores.value, -np.inf)
    rowmax = shifted.max(axis=1, keepdims=True)
    rowmax = np.where(np.isfinite(rowmax), rowmax, 0.0)
    e = np.where(mask, np.exp(shifted - rowmax), 0.0)
    denom = e.sum(axis=1, keepdims=True)
    denom = np.where(denom == 0.0, 1.0, denom)
    y = e / denom

    def vjp(g):
        gy = (g * y).sum(axis=1, keepdims=True)
        _acc(scores, y * (g - gy))
    return _record(y, "masked_softmax", vjp)


def value(fn: Callable[[Mapping[str, Node]], Node],
          point: Mapping[str, np.ndarray]) -> np.ndarray:
    """Evaluate fn at point without recording anything."""
    leaves = {k: Node(np.asarray(v, dtype=float), "leaf", None)
              for k, v in point.items()}
    return fn(leaves).value


def gradient_check(fn: Callable[[Mapping[str, Node]], Node],
                   point: Mapping[str, np.ndarray],
                   h: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    Relative error per coordinate is |g_ad - g_fd| / max(1, |g_ad|); the
    maximum over all coordinates of all leaves is returned.
    """
    if not 1e-7 <= h <= 1e-4:
        raise ValueError(f"step h={h} outside [1e-7, 1e-4]")
    point = {k: np.asarray(v, dtype=float) for k, v in point.items()}
    with Tape() as tape:
        leaves = {k: leaf(v) for k, v in point.items()}
        out = fn(leaves)
        if out.value.size != 1:
            raise ValueError("gradient_check needs a scalar-valued function")
        if not np.isfinite(out.value):
            raise DivergenceError("non-finite function value at the base point")
        tape.backward(out)
    worst = 0.0
    for name, base in point.items():
        g_ad = leaves[name].grad
        if g_ad is None:
            g_ad = np.zeros_like(base)
        flat = base.reshape(-1)
        for k in range(flat.size):
            probe = dict(point)
            bumped = base.copy().reshape(-1)
            bumped[k] = flat[k] + h
            probe[name] = bumped.reshape(base.shape)
            f_plus = float(value(fn, probe))
            bumped[k] = flat[k] - h
            probe[name] = bumped.reshape(base.shape)
            f_minus = float(value(fn, probe))
            if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
                raise DivergenceError(
                    f"non-finite function value probing {name}[{k}]")
            g_fd = (f_plus - f_minus) / (2.0 * h)
            g = g_ad.reshape(-1)[k]
            worst = max(worst, abs(g - g_fd) / max(1.0, abs(g)))
    return worst


class ParameterStore:
    """Named parameter arrays with momentum-descent update state.

    leaves() emits fresh leaf nodes for one forward/backward pass; step()
    folds the accumulated gradients back into the stored values.
    """

    def __init__(self) -> None:
        self._values: dict[str, np.ndarray] = {}
        self._velocity: dict[str, np.ndarray] = {}

    def init_uniform(self, name: str, shape: tuple[int, ...],
                     rng: np.random.Generator, half_width: float = 0.1) -> None:
        if name in self._values:
            raise ValueError(f"parameter {name!r} already exists")
        self._values[name] = rng.uniform(-half_width, half_width, size=shape)
        self._velocity[name] = np.zeros(shape)

    def set(self, name: str, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise DivergenceError(f"parameter {name!r} assigned non-finite values")
        self._values[name] = value.copy()
        self._velocity.setdefault(name, np.zeros_like(value))

    def get(self, name: str) -> np.ndarray:
        return self._values[name]

    def names(self) -> tuple[str, ...]:
        return tuple(self._values)

    def leaves(self) -> dict[str, Node]:
        return {name: leaf(v) for name, v in self._values.items()}

    def step(self, leaves: Mapping[str, Node], learning_rate: float,
             momentum: float = 0.9, clip_norm: float = 10.0) -> None:
        """One momentum update from the gradients sitting on ``leaves``.

        Gradients are jointly rescaled when their global L2 norm exceeds
        ``clip_norm``.  A non-finite gradient or updated value raises.
        """
        grads = {}
        sq = 0.0
        for name in self._values:
            g = leaves[name].grad
            g = np.zeros_like(self._values[name]) if g is None else g
            if not np.all(np.isfinite(g)):
                raise DivergenceError(f"non-finite gradient for {name!r}")
            grads[name] = g
            sq += float((g * g).sum())
        norm = np.sqrt(sq)
        factor = clip_norm / norm if (clip_norm > 0 and norm > clip_norm) else 1.0
        for name, g in grads.items():
            v = momentum * self._velocity[name] - learning_rate * factor * g
            self._velocity[name] = v
            self._values[name] = self._values[name] + v
            if not np.all(np.isfinite(self._values[name])):
                raise DivergenceError(f"parameter {name!r} became non-finite")

    def to_json_dict(self) -> dict:
        return {name: {"shape": list(v.shape), "data": [float(x) for x in v.reshape(-1)]}
                for name, v in self._values.items()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ParameterStore":
        store = cls()
        for name, spec in obj.items():
            arr = np.array(spec["data"], dtype=float).reshape(spec["shape"])
            store.set(name, arr)
        return store
