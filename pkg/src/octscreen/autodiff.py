"""Dense tensors with a reverse-mode gradient tape.

Shape rules follow numpy: elementwise ops broadcast numpy-style (adjoints
are summed back over the broadcast axes), matmul contracts the last axis of
the left operand with the second-to-last of the right and requires the
leading batch axes to broadcast. Only float32/float64 data is supported.
Float32 is the working precision for training; gradient checks run the same
graphs in float64.

Recording only happens inside a ``with Tape():`` block, so plain forward
evaluation (inference) carries no bookkeeping cost and no hidden state.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import erf, expit

DEFAULT_DTYPE = np.float32

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class ShapeMismatch(ValueError):
    """Raised when operand shapes do not conform for an operation."""

    def __init__(self, op: str, *shapes):
        self.op = op
        self.shapes = tuple(tuple(int(d) for d in s) for s in shapes)
        pretty = " vs ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {pretty}")


class Tensor:
    """N-dimensional array plus an optional gradient slot.

    Tensors with ``requires_grad=True`` are leaves: after ``backward(loss)``
    their ``grad`` holds d(loss)/d(leaf). Outputs of operations never require
    grad themselves; their adjoints live only inside the tape walk.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() on non-scalar tensor of shape {self.shape}")
        return float(self.data.reshape(()).item())

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # arithmetic sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def reshape(self, shape) -> "Tensor":
        return reshape(self, shape)

    def transpose(self, axes=None) -> "Tensor":
        return transpose(self, axes)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tmean(self, axis, keepdims)


class Record(NamedTuple):
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    vjp: Callable[[np.ndarray], tuple]


class Tape:
    """Ordered record of primitive applications for one backward pass.

    Records are appended in execution order, which makes the list
    topologically sorted by construction: every input of a record is either
    a leaf or the output of an earlier record.
    """

    def __init__(self):
        self.records: list[Record] = []
        self._tracked: set[int] = set()
        self.leaves: dict[int, Tensor] = {}

    def __enter__(self) -> "Tape":
        _ACTIVE.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _ACTIVE.pop()
        assert popped is self
        return False


_ACTIVE: list[Tape | None] = []


class no_grad:
    """Context manager that suspends tape recording."""

    def __enter__(self):
        _ACTIVE.append(None)
        return self

    def __exit__(self, exc_type, exc, tb):
        _ACTIVE.pop()
        return False


def _current_tape() -> Tape | None:
    return _ACTIVE[-1] if _ACTIVE else None


def _emit(op: str, inputs: tuple[Tensor, ...], out: Tensor, vjp) -> Tensor:
    tape = _current_tape()
    if tape is None:
        return out
    relevant = False
    for t in inputs:
        if t.requires_grad:
            relevant = True
            tape.leaves.setdefault(id(t), t)
        elif id(t) in tape._tracked:
            relevant = True
    if relevant:
        tape._tracked.add(id(out))
        tape.records.append(Record(op, inputs, out, vjp))
    return out


def backward(loss: Tensor, tape: Tape | None = None) -> None:
    """Populate ``grad`` on every requires_grad leaf the tape has seen.

    Leaves that do not influence the loss receive a zero gradient. Walks the
    tape once in reverse; adjoints for a node are fully accumulated before
    its producing record is visited.
    """
    tape = tape if tape is not None else _current_tape()
    if tape is None:
        raise RuntimeError("backward() needs an active Tape (use 'with Tape() as tape:')")
    if loss.data.size != 1:
        raise ValueError(f"backward() expects a scalar loss, got shape {loss.shape}")
    adjoint: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for rec in reversed(tape.records):
        gout = adjoint.pop(id(rec.output), None)
        if gout is None:
            continue
        grads = rec.vjp(gout)
        for t, g in zip(rec.inputs, grads):
            if g is None:
                continue
            key = id(t)
            if key in adjoint:
                adjoint[key] = adjoint[key] + g
            else:
                adjoint[key] = g
    for key, leaf in tape.leaves.items():
        g = adjoint.get(key)
        leaf.grad = np.zeros_like(leaf.data) if g is None else np.asarray(g, dtype=leaf.data.dtype)


def as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.data.dtype if like is not None else DEFAULT_DTYPE
    return Tensor(np.asarray(x, dtype=dtype))


def parameter(data, dtype=None) -> Tensor:
    return Tensor(np.array(data, dtype=dtype if dtype is not None else DEFAULT_DTYPE), requires_grad=True)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum an adjoint back down to the shape it was broadcast from."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _binary_shapes(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatch(op, a.shape, b.shape) from None


def add(a, b) -> Tensor:
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    _binary_shapes("add", a, b)
    out = Tensor(a.data + b.data)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit("add", (a, b), out, vjp)


def sub(a, b) -> Tensor:
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    _binary_shapes("sub", a, b)
    out = Tensor(a.data - b.data)

    def vjp(g):
        return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)

    return _emit("sub", (a, b), out, vjp)


def mul(a, b) -> Tensor:
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    _binary_shapes("mul", a, b)
    ad, bd = a.data, b.data
    out = Tensor(ad * bd)

    def vjp(g):
        return _unbroadcast(g * bd, a.shape), _unbroadcast(g * ad, b.shape)

    return _emit("mul", (a, b), out, vjp)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim < 2 or b.data.ndim < 2:
        raise ShapeMismatch("matmul", a.shape, b.shape)
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch("matmul", a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeMismatch("matmul", a.shape, b.shape) from None
    ad, bd = a.data, b.data
    out = Tensor(ad @ bd)

    def vjp(g):
        ga = _unbroadcast(g @ np.swapaxes(bd, -1, -2), a.shape)
        gb = _unbroadcast(np.swapaxes(ad, -1, -2) @ g, b.shape)
        return ga, gb

    return _emit("matmul", (a, b), out, vjp)


def transpose(x, axes=None) -> Tensor:
    x = as_tensor(x)
    perm = tuple(range(x.data.ndim))[::-1] if axes is None else tuple(axes)
    out = Tensor(np.transpose(x.data, perm))
    inv = np.argsort(perm)

    def vjp(g):
        return (np.transpose(g, inv),)

    return _emit("transpose", (x,), out, vjp)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    shape = tuple(shape)
    if int(np.prod(shape, dtype=np.int64)) != x.size and -1 not in shape:
        raise ShapeMismatch("reshape", x.shape, shape)
    old = x.data.shape
    out = Tensor(x.data.reshape(shape))

    def vjp(g):
        return (g.reshape(old),)

    return _emit("reshape", (x,), out, vjp)


def take(x, key) -> Tensor:
    """Basic (slice/integer) indexing; the adjoint scatters into zeros."""
    x = as_tensor(x)
    out = Tensor(x.data[key])
    xshape = x.data.shape

    def vjp(g):
        gx = np.zeros(xshape, dtype=g.dtype)
        gx[key] = g
        return (gx,)

    return _emit("slice", (x,), out, vjp)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    if not ts:
        raise ValueError("concat: empty input list")
    base = list(ts[0].shape)
    for t in ts[1:]:
        other = list(t.shape)
        if len(other) != len(base) or any(
            i != (axis % len(base)) and other[i] != base[i] for i in range(len(base))
        ):
            raise ShapeMismatch("concat", ts[0].shape, t.shape)
    out = Tensor(np.concatenate([t.data for t in ts], axis=axis))
    sizes = [t.shape[axis] for t in ts]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return _emit("concat", tuple(ts), out, vjp)


def _norm_axis(axis, ndim):
    if axis is None:
        return None
    if isinstance(axis, int):
        return (axis % ndim,)
    return tuple(a % ndim for a in axis)


def tsum(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    axes = _norm_axis(axis, x.data.ndim)
    out = Tensor(x.data.sum(axis=axes, keepdims=keepdims))
    xshape = x.data.shape

    def vjp(g):
        if axes is not None and not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, xshape).copy(),)

    return _emit("sum", (x,), out, vjp)


def tmean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    axes = _norm_axis(axis, x.data.ndim)
    out = Tensor(x.data.mean(axis=axes, keepdims=keepdims))
    xshape = x.data.shape
    count = x.size if axes is None else int(np.prod([xshape[a] for a in axes]))

    def vjp(g):
        if axes is not None and not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g / count, xshape).astype(g.dtype),)

    return _emit("mean", (x,), out, vjp)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)

    def vjp(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - dot),)

    return _emit("softmax", (x,), out, vjp)


def layer_norm(x, axis: int = -1, eps: float = 1e-5) -> Tensor:
    """Normalize to zero mean / unit variance along one axis (no affine)."""
    x = as_tensor(x)
    mu = x.data.mean(axis=axis, keepdims=True)
    var = ((x.data - mu) ** 2).mean(axis=axis, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = Tensor(xhat)

    def vjp(g):
        gm = g.mean(axis=axis, keepdims=True)
        gx = (g * xhat).mean(axis=axis, keepdims=True)
        return (inv * (g - gm - xhat * gx),)

    return _emit("layer_norm", (x,), out, vjp)


def gelu(x) -> Tensor:
    """Exact Gaussian-CDF form: x * Phi(x)."""
    x = as_tensor(x)
    xd = x.data
    phi_cdf = 0.5 * (1.0 + erf(xd * _INV_SQRT2))
    out = Tensor(xd * phi_cdf)

    def vjp(g):
        pdf = np.exp(-0.5 * xd * xd) * _INV_SQRT_2PI
        return (g * (phi_cdf + xd * pdf),)

    return _emit("gelu", (x,), out, vjp)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    s = expit(x.data)
    out = Tensor(s)

    def vjp(g):
        return (g * s * (1.0 - s),)

    return _emit("sigmoid", (x,), out, vjp)


def log(x) -> Tensor:
    x = as_tensor(x)
    xd = x.data
    out = Tensor(np.log(xd))

    def vjp(g):
        return (g / xd,)

    return _emit("log", (x,), out, vjp)


def exp(x) -> Tensor:
    x = as_tensor(x)
    e = np.exp(x.data)
    out = Tensor(e)

    def vjp(g):
        return (g * e,)

    return _emit("exp", (x,), out, vjp)


def finite_diff_grad(f: Callable[[Tensor], Tensor], x: Tensor, eps: float = 1e-5) -> Tensor:
    """Central-difference gradient of a scalar function, one coordinate at a time.

    Independent oracle for ``backward``: evaluates ``f`` with recording
    suspended, so it never touches the tape it is checking.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    flat = x.data.reshape(-1)
    grad = np.empty(flat.shape, dtype=np.float64)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            fp = f(x)
            flat[i] = orig - eps
            fm = f(x)
            flat[i] = orig
            if fp.data.size != 1 or fm.data.size != 1:
                raise ValueError("finite_diff_grad expects a scalar-valued function")
            grad[i] = (float(fp.data.reshape(()).item()) - float(fm.data.reshape(()).item())) / (2.0 * eps)
    return Tensor(grad.reshape(x.data.shape).astype(x.data.dtype))
