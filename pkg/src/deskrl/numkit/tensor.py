"""Dense float64 tensors with reverse-mode autodiff on a dynamic tape.

Every op records its parents and a vector-Jacobian closure on the output
tensor; `backward` walks the graph in reverse topological order and
accumulates gradients additively into leaf tensors that require them.
Recording is skipped entirely when no input requires a gradient, so code
wrapped in `no_grad()` (target networks, rollouts) pays no tape cost.
"""

from __future__ import annotations

import contextlib

import numpy as np


class AutodiffError(Exception):
    """Raised for malformed backward calls or non-finite values on the tape."""


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """A float64 ndarray plus the tape bookkeeping for reverse mode.

    Tensors are immutable by convention once created: ops return new
    tensors and never write into `data` of an existing one.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "parents", "vjp")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), vjp=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.op = op
        self.parents = parents
        self.vjp = vjp
        self.grad = None
        if requires_grad and vjp is None:
            self.grad = np.zeros_like(self.data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        if self.grad is not None:
            self.grad.fill(0.0)

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.data.shape})"

    # Arithmetic sugar; the actual ops live in ops.py (imported lazily to
    # avoid a module cycle).
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.sub(other, self)

    def __neg__(self):
        from . import ops

        return ops.neg(self)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, other)

    def __matmul__(self, other):
        from . import ops

        return ops.matmul(self, other)


def as_tensor(x) -> Tensor:
    """Wrap plain arrays/scalars as constant tensors; pass tensors through."""
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=np.float64))


def make_op(op_name, data, parents, vjp) -> Tensor:
    """Record one op on the tape (or return a constant when recording is off)."""
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, op=op_name, parents=parents, vjp=vjp)
    return Tensor(data, op=op_name)


def _nan_source(node: Tensor) -> str:
    """Name of the earliest op whose output is non-finite but inputs are finite."""
    seen = set()
    stack = [node]
    while stack:
        t = stack[-1]
        bad_parent = next(
            (p for p in t.parents if id(p) not in seen and not np.isfinite(p.data).all()),
            None,
        )
        if bad_parent is None:
            return t.op
        seen.add(id(bad_parent))
        stack.append(bad_parent)
    return node.op


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every participating leaf's `.grad`.

    Gradients add onto whatever is already in `.grad`; call `zero_grad`
    on the parameters between optimization steps.
    """
    if loss.data.size != 1:
        raise AutodiffError(f"backward needs a scalar loss, got shape {loss.data.shape}")
    if not np.isfinite(loss.data).all():
        raise AutodiffError(f"non-finite loss; first produced by op {_nan_source(loss)!r}")
    if not loss.requires_grad:
        return

    topo: list[Tensor] = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if not np.isfinite(g).all():
            raise AutodiffError(f"non-finite gradient flowing into op {node.op!r}")
        if node.vjp is None:
            # Leaf: accumulate.
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            node.grad += g
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if pg is None or not parent.requires_grad:
                continue
            acc = grads.get(id(parent))
            # Stored arrays are never mutated in place: a vjp may hand the
            # incoming gradient straight through to several parents.
            grads[id(parent)] = pg if acc is None else acc + pg


class Parameter:
    """A named trainable leaf tensor."""

    __slots__ = ("name", "value")

    def __init__(self, name: str, data):
        self.name = name
        self.value = Tensor(np.array(data, dtype=np.float64), requires_grad=True)

    @property
    def grad(self) -> np.ndarray:
        return self.value.grad

    def zero_grad(self):
        self.value.zero_grad()

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"
