"""Differentiable primitives: arithmetic, reductions, activations, conv.

Each op builds the forward value eagerly with numpy and registers a
vector-Jacobian closure via `make_op`. Broadcasting follows numpy rules;
gradients are summed back over broadcast axes.
"""

from __future__ import annotations

import numpy as np

from .tensor import AutodiffError, Tensor, as_tensor, make_op


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_op("add", out, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_op("sub", out, (a, b), vjp)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return make_op("neg", -a.data, (a,), lambda g: (-g,))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def vjp(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_op("mul", out, (a, b), vjp)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data

    def vjp(g):
        ga = g / b.data
        return _unbroadcast(ga, a.shape), _unbroadcast(-ga * out, b.shape)

    return make_op("div", out, (a, b), vjp)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data @ b.data

    def vjp(g):
        return g @ b.data.T, a.data.T @ g

    return make_op("matmul", out, (a, b), vjp)


def sum(a, axis=None, keepdims=False) -> Tensor:  # noqa: A001 - mirrors numpy
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)

    return make_op("sum", out, (a,), vjp)


def mean(a, axis=None, keepdims=False) -> Tensor:
    a = as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else np.prod(
        [a.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape) / count,)

    return make_op("mean", out, (a,), vjp)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def vjp(g):
        return (g * (a.data > 0.0),)

    return make_op("relu", out, (a,), vjp)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)

    def vjp(g):
        return (g * (1.0 - out * out),)

    return make_op("tanh", out, (a,), vjp)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)

    def vjp(g):
        return (g * out,)

    return make_op("exp", out, (a,), vjp)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = np.log(a.data)

    def vjp(g):
        return (g / a.data,)

    return make_op("log", out, (a,), vjp)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out = np.sqrt(a.data)

    def vjp(g):
        return (g / (2.0 * out),)

    return make_op("sqrt", out, (a,), vjp)


def softplus(a) -> Tensor:
    """log(1 + exp(a)), computed stably for large |a|."""
    a = as_tensor(a)
    out = np.logaddexp(0.0, a.data)

    def vjp(g):
        return (g / (1.0 + np.exp(-a.data)),)

    return make_op("softplus", out, (a,), vjp)


def minimum(a, b) -> Tensor:
    """Elementwise min; on ties the subgradient goes to the first input."""
    a, b = as_tensor(a), as_tensor(b)
    out = np.minimum(a.data, b.data)
    take_a = a.data <= b.data

    def vjp(g):
        return (
            _unbroadcast(g * take_a, a.shape),
            _unbroadcast(g * ~take_a, b.shape),
        )

    return make_op("minimum", out, (a, b), vjp)


def maximum(a, b) -> Tensor:
    """Elementwise max; on ties the subgradient goes to the first input."""
    a, b = as_tensor(a), as_tensor(b)
    out = np.maximum(a.data, b.data)
    take_a = a.data >= b.data

    def vjp(g):
        return (
            _unbroadcast(g * take_a, a.shape),
            _unbroadcast(g * ~take_a, b.shape),
        )

    return make_op("maximum", out, (a, b), vjp)


def clip(a, lo: float, hi: float) -> Tensor:
    """Hard clip; gradient is zero outside [lo, hi]."""
    a = as_tensor(a)
    out = np.clip(a.data, lo, hi)
    inside = (a.data >= lo) & (a.data <= hi)

    def vjp(g):
        return (g * inside,)

    return make_op("clip", out, (a,), vjp)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return make_op("concat", out, tuple(tensors), vjp)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def vjp(g):
        return (g.reshape(a.shape),)

    return make_op("reshape", out, (a,), vjp)


def slice_cols(a, start: int, stop: int) -> Tensor:
    """Columns [start, stop) of a 2-D tensor."""
    a = as_tensor(a)
    out = a.data[:, start:stop]

    def vjp(g):
        full = np.zeros(a.shape)
        full[:, start:stop] = g
        return (full,)

    return make_op("slice_cols", out, (a,), vjp)


def atanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.arctanh(a.data)

    def vjp(g):
        return (g / (1.0 - a.data * a.data),)

    return make_op("atanh", out, (a,), vjp)


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int):
    n, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    sn, sc, sh, sw = x.strides
    cols = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, c, kh, kw, oh, ow),
        strides=(sn, sc, sh, sw, sh * stride, sw * stride),
    )
    return cols.reshape(n, c * kh * kw, oh * ow), oh, ow


def conv2d(x, w, b, stride: int = 1, pad: int = 0) -> Tensor:
    """2-D convolution, NCHW layout, zero padding only.

    x: (N, Cin, H, W); w: (Cout, Cin, KH, KW); b: (Cout,).
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    n, cin, h, wd = x.shape
    cout, cin_w, kh, kw = w.shape
    if cin != cin_w:
        raise AutodiffError(f"conv2d channel mismatch: input {cin}, kernel {cin_w}")
    cols, oh, ow = _im2col(x.data, kh, kw, stride, pad)
    wmat = w.data.reshape(cout, -1)
    out = (wmat @ cols).reshape(n, cout, oh, ow) + b.data[None, :, None, None]

    def vjp(g):
        gmat = g.reshape(n, cout, oh * ow)
        gw = np.einsum("nop,nkp->ok", gmat, cols).reshape(w.shape)
        gb = gmat.sum(axis=(0, 2))
        gcols = np.einsum("ok,nop->nkp", wmat, gmat)
        gx_pad = np.zeros((n, cin, h + 2 * pad, wd + 2 * pad))
        gcols = gcols.reshape(n, cin, kh, kw, oh, ow)
        for i in range(kh):
            for j in range(kw):
                gx_pad[:, :, i : i + oh * stride : stride, j : j + ow * stride : stride] += gcols[:, :, i, j]
        gx = gx_pad[:, :, pad : pad + h, pad : pad + wd] if pad else gx_pad
        return gx, gw, gb

    return make_op("conv2d", out, (x, w, b), vjp)
