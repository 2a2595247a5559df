"""Dense matrix type with a reverse-mode gradient tape.

Every tensor is a 2-D float64 matrix. Operations record themselves on an
implicit tape (the parent links of each result); ``Tensor.backward`` replays
the tape in reverse topological order. The op set is deliberately small:
exactly what a GCN / hypergraph / GAN stack at desk scale needs, plus a
differentiable symmetric eigendecomposition.

Scalars are 1x1 tensors, vectors are nx1 or 1xn. There is no broadcasting
beyond the dedicated row/column helpers (``scale_rows``, ``add_row_bias``).
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "Tape",
    "EigPair",
    "DimensionError",
    "DomainError",
    "no_grad",
    "is_grad_enabled",
    "matmul",
    "transpose",
    "add",
    "sub",
    "hadamard",
    "smul",
    "add_const",
    "row_sum",
    "col_sum",
    "full_sum",
    "mean_all",
    "relu",
    "sigmoid",
    "tanh",
    "log",
    "exp",
    "softmax_rows",
    "emin",
    "emax",
    "masked_select",
    "safe_pow",
    "scale_rows",
    "scale_cols",
    "add_row_bias",
    "hstack_cols",
    "sym_from_upper",
    "straight_through",
    "sym_eig",
    "grad_check",
    "save_tensors",
    "load_tensors",
]


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class DomainError(ValueError):
    """Operand values are outside the operation's numeric domain."""


_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


class no_grad:
    """Context manager that disables tape recording on this thread."""

    def __enter__(self):
        self._prev = is_grad_enabled()
        _state.grad_enabled = False
        return self

    def __exit__(self, *exc):
        _state.grad_enabled = self._prev
        return False


def _coerce(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise DimensionError(f"tensors are 2-D matrices, got ndim={arr.ndim}")
    return arr


class Tensor:
    """2-D float64 matrix participating in reverse-mode differentiation."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = _coerce(data)
        if not np.isfinite(arr).all():
            raise DomainError("tensor values must be finite (no NaN/Inf)")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], tuple[np.ndarray, ...]] | None = None

    @classmethod
    def _from_op(cls, data: np.ndarray, parents: tuple["Tensor", ...], op: str) -> "Tensor":
        if not np.isfinite(data).all():
            raise DomainError(f"non-finite result from op '{op}'")
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        if is_grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
        else:
            out.requires_grad = False
            out._parents = ()
        out._backward = None
        return out

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def backward(self, seed: np.ndarray | None = None) -> None:
        """Replay the tape reachable from this tensor in reverse order."""
        if seed is None:
            if self.data.shape != (1, 1):
                raise DimensionError("backward() without a seed requires a scalar output")
            seed = np.ones((1, 1))
        Tape(self).replay(np.asarray(seed, dtype=np.float64))

    # -- operator sugar (hadamard multiply, matrix multiply, add/sub) --------
    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return hadamard(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


class Tape:
    """Topologically ordered record of the ops reachable from a root tensor.

    Each non-leaf tensor is one recorded primitive: its parent links are the
    op's input identities and its backward closure holds the saved forward
    values. Replaying the record in reverse accumulates the gradient of every
    requires_grad leaf exactly once.
    """

    def __init__(self, root: Tensor):
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.root = root
        self.order = order  # inputs before outputs; root last

    def __len__(self) -> int:
        return len(self.order)

    def replay(self, seed: np.ndarray) -> None:
        if seed.shape != self.root.data.shape:
            raise DimensionError("seed gradient shape must match the root tensor")
        pending: dict[int, np.ndarray] = {id(self.root): seed}
        for node in reversed(self.order):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node._backward is not None:
                parent_grads = node._backward(g)
                for parent, pg in zip(node._parents, parent_grads):
                    if pg is None or not parent.requires_grad:
                        continue
                    key = id(parent)
                    if key in pending:
                        pending[key] = pending[key] + pg
                    else:
                        pending[key] = pg
            elif node.requires_grad:
                # leaf: deposit the accumulated gradient
                node.grad = g.copy() if node.grad is None else node.grad + g


def _tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# ---------------------------------------------------------------------------
# primitive operations
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    if a.cols != b.rows:
        raise DimensionError(f"matmul: inner dims differ ({a.shape} @ {b.shape})")
    out = Tensor._from_op(a.data @ b.data, (a, b), "matmul")
    if out.requires_grad:
        ad, bd = a.data, b.data
        out._backward = lambda g: (g @ bd.T, ad.T @ g)
    return out


def transpose(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data.T.copy(), (a,), "transpose")
    if out.requires_grad:
        out._backward = lambda g: (g.T,)
    return out


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    _check_same_shape(a, b, "add")
    out = Tensor._from_op(a.data + b.data, (a, b), "add")
    if out.requires_grad:
        out._backward = lambda g: (g, g)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    _check_same_shape(a, b, "sub")
    out = Tensor._from_op(a.data - b.data, (a, b), "sub")
    if out.requires_grad:
        out._backward = lambda g: (g, -g)
    return out


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    _check_same_shape(a, b, "hadamard")
    out = Tensor._from_op(a.data * b.data, (a, b), "hadamard")
    if out.requires_grad:
        ad, bd = a.data, b.data
        out._backward = lambda g: (g * bd, g * ad)
    return out


def smul(a: Tensor, c: float) -> Tensor:
    a = _tensor(a)
    c = float(c)
    out = Tensor._from_op(a.data * c, (a,), "smul")
    if out.requires_grad:
        out._backward = lambda g: (g * c,)
    return out


def add_const(a: Tensor, c: float) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data + float(c), (a,), "add_const")
    if out.requires_grad:
        out._backward = lambda g: (g,)
    return out


def row_sum(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data.sum(axis=1, keepdims=True), (a,), "row_sum")
    if out.requires_grad:
        cols = a.cols
        out._backward = lambda g: (np.repeat(g, cols, axis=1),)
    return out


def col_sum(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data.sum(axis=0, keepdims=True), (a,), "col_sum")
    if out.requires_grad:
        rows = a.rows
        out._backward = lambda g: (np.repeat(g, rows, axis=0),)
    return out


def full_sum(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data.sum().reshape(1, 1), (a,), "full_sum")
    if out.requires_grad:
        shape = a.shape
        out._backward = lambda g: (np.full(shape, g[0, 0]),)
    return out


def mean_all(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(a.data.mean().reshape(1, 1), (a,), "mean")
    if out.requires_grad:
        shape = a.shape
        scale = 1.0 / a.data.size
        out._backward = lambda g: (np.full(shape, g[0, 0] * scale),)
    return out


def relu(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(np.maximum(a.data, 0.0), (a,), "relu")
    if out.requires_grad:
        mask = a.data > 0.0
        out._backward = lambda g: (g * mask,)
    return out


def sigmoid(a: Tensor) -> Tensor:
    a = _tensor(a)
    x = a.data
    # stable two-branch evaluation avoids overflow in exp
    pos = x >= 0
    z = np.empty_like(x)
    z[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    z[~pos] = ez / (1.0 + ez)
    out = Tensor._from_op(z, (a,), "sigmoid")
    if out.requires_grad:
        out._backward = lambda g: (g * z * (1.0 - z),)
    return out


def tanh(a: Tensor) -> Tensor:
    a = _tensor(a)
    z = np.tanh(a.data)
    out = Tensor._from_op(z, (a,), "tanh")
    if out.requires_grad:
        out._backward = lambda g: (g * (1.0 - z * z),)
    return out


def log(a: Tensor) -> Tensor:
    a = _tensor(a)
    if np.any(a.data <= 0.0):
        raise DomainError("log: all entries must be positive")
    out = Tensor._from_op(np.log(a.data), (a,), "log")
    if out.requires_grad:
        ad = a.data
        out._backward = lambda g: (g / ad,)
    return out


def exp(a: Tensor) -> Tensor:
    a = _tensor(a)
    out = Tensor._from_op(np.exp(a.data), (a,), "exp")
    if out.requires_grad:
        z = out.data
        out._backward = lambda g: (g * z,)
    return out


def softmax_rows(a: Tensor) -> Tensor:
    a = _tensor(a)
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    z = ez / ez.sum(axis=1, keepdims=True)
    out = Tensor._from_op(z, (a,), "softmax_rows")
    if out.requires_grad:
        out._backward = lambda g: (z * (g - (g * z).sum(axis=1, keepdims=True)),)
    return out


def emin(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    _check_same_shape(a, b, "emin")
    out = Tensor._from_op(np.minimum(a.data, b.data), (a, b), "emin")
    if out.requires_grad:
        take_a = a.data <= b.data  # ties route to the first operand
        out._backward = lambda g: (g * take_a, g * ~take_a)
    return out


def emax(a: Tensor, b: Tensor) -> Tensor:
    a, b = _tensor(a), _tensor(b)
    _check_same_shape(a, b, "emax")
    out = Tensor._from_op(np.maximum(a.data, b.data), (a, b), "emax")
    if out.requires_grad:
        take_a = a.data >= b.data
        out._backward = lambda g: (g * take_a, g * ~take_a)
    return out


def masked_select(a: Tensor, mask) -> Tensor:
    """Select entries of ``a`` where ``mask`` is true, as a column (row-major order)."""
    a = _tensor(a)
    m = np.asarray(mask, dtype=bool)
    if m.shape != a.shape:
        raise DimensionError(f"masked_select: mask shape {m.shape} != tensor shape {a.shape}")
    out = Tensor._from_op(a.data[m].reshape(-1, 1), (a,), "masked_select")
    if out.requires_grad:
        shape = a.shape

        def backward(g):
            full = np.zeros(shape)
            full[m] = g.ravel()
            return (full,)

        out._backward = backward
    return out


def safe_pow(a: Tensor, exponent: float) -> Tensor:
    """Elementwise x**exponent where x > 0, exactly 0 elsewhere.

    The zero branch carries zero gradient; this implements the isolated-vertex
    convention for inverse degree powers.
    """
    a = _tensor(a)
    exponent = float(exponent)
    pos = a.data > 0.0
    z = np.zeros_like(a.data)
    z[pos] = np.power(a.data[pos], exponent)
    out = Tensor._from_op(z, (a,), "safe_pow")
    if out.requires_grad:
        deriv = np.zeros_like(a.data)
        deriv[pos] = exponent * np.power(a.data[pos], exponent - 1.0)
        out._backward = lambda g: (g * deriv,)
    return out


def scale_rows(a: Tensor, v: Tensor) -> Tensor:
    """Multiply row i of ``a`` by v[i]; ``v`` is a column vector."""
    a, v = _tensor(a), _tensor(v)
    if v.shape != (a.rows, 1):
        raise DimensionError(f"scale_rows: need {a.rows}x1 vector, got {v.shape}")
    out = Tensor._from_op(a.data * v.data, (a, v), "scale_rows")
    if out.requires_grad:
        ad, vd = a.data, v.data
        out._backward = lambda g: (g * vd, (g * ad).sum(axis=1, keepdims=True))
    return out


def scale_cols(a: Tensor, v: Tensor) -> Tensor:
    """Multiply column j of ``a`` by v[j]; ``v`` is a row vector."""
    a, v = _tensor(a), _tensor(v)
    if v.shape != (1, a.cols):
        raise DimensionError(f"scale_cols: need 1x{a.cols} vector, got {v.shape}")
    out = Tensor._from_op(a.data * v.data, (a, v), "scale_cols")
    if out.requires_grad:
        ad, vd = a.data, v.data
        out._backward = lambda g: (g * vd, (g * ad).sum(axis=0, keepdims=True))
    return out


def add_row_bias(a: Tensor, b: Tensor) -> Tensor:
    """Add the row vector ``b`` to every row of ``a``."""
    a, b = _tensor(a), _tensor(b)
    if b.shape != (1, a.cols):
        raise DimensionError(f"add_row_bias: need 1x{a.cols} bias, got {b.shape}")
    out = Tensor._from_op(a.data + b.data, (a, b), "add_row_bias")
    if out.requires_grad:
        out._backward = lambda g: (g, g.sum(axis=0, keepdims=True))
    return out


def hstack_cols(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate column vectors / matrices horizontally."""
    ts = [_tensor(t) for t in tensors]
    if not ts:
        raise DimensionError("hstack_cols: need at least one tensor")
    rows = ts[0].rows
    if any(t.rows != rows for t in ts):
        raise DimensionError("hstack_cols: all tensors must share the row count")
    out = Tensor._from_op(np.hstack([t.data for t in ts]), tuple(ts), "hstack_cols")
    if out.requires_grad:
        widths = [t.cols for t in ts]
        edges = np.cumsum([0] + widths)

        def backward(g):
            return tuple(g[:, edges[i]:edges[i + 1]] for i in range(len(widths)))

        out._backward = backward
    return out


def sym_from_upper(u: Tensor, n: int) -> Tensor:
    """Build a symmetric zero-diagonal n x n matrix from its strict upper triangle.

    ``u`` holds the n(n-1)/2 upper-triangle entries in row-major order.
    """
    u = _tensor(u)
    m = n * (n - 1) // 2
    if u.shape != (m, 1):
        raise DimensionError(f"sym_from_upper: need {m}x1 values for n={n}, got {u.shape}")
    iu = np.triu_indices(n, k=1)
    full = np.zeros((n, n))
    full[iu] = u.data.ravel()
    full = full + full.T
    out = Tensor._from_op(full, (u,), "sym_from_upper")
    if out.requires_grad:
        out._backward = lambda g: ((g + g.T)[iu].reshape(-1, 1),)
    return out


def straight_through(soft: Tensor, hard_values) -> Tensor:
    """Forward the hard values; route gradients through the soft surrogate unchanged."""
    soft = _tensor(soft)
    hv = _coerce(hard_values)
    if hv.shape != soft.shape:
        raise DimensionError(f"straight_through: hard shape {hv.shape} != soft shape {soft.shape}")
    out = Tensor._from_op(hv.copy(), (soft,), "straight_through")
    if out.requires_grad:
        out._backward = lambda g: (g,)
    return out


# ---------------------------------------------------------------------------
# symmetric eigendecomposition
# ---------------------------------------------------------------------------

_JACOBI_TOL = 1e-10
_JACOBI_MAX_SWEEPS = 100
_EIGENGAP_MIN = 1e-6


@dataclass(frozen=True)
class EigPair:
    """Ascending eigenvalues (n x 1 tensor) paired with orthonormal eigenvectors."""

    eigenvalues: Tensor
    eigenvectors: np.ndarray


def _jacobi_sweeps(a: np.ndarray, v: np.ndarray) -> None:
    """Cyclic Jacobi rotation sweeps, in place, until off-diagonal convergence."""
    n = a.shape[0]
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if np.sqrt(2.0 * off) < _JACOBI_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for i in range(n):
                    rp = a[p, i]
                    rq = a[q, i]
                    a[p, i] = c * rp - s * rq
                    a[q, i] = s * rp + c * rq
                for i in range(n):
                    cp = a[i, p]
                    cq = a[i, q]
                    a[i, p] = c * cp - s * cq
                    a[i, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    vp = v[i, p]
                    vq = v[i, q]
                    v[i, p] = c * vp - s * vq
                    v[i, q] = s * vp + c * vq


try:  # compiled sweeps; the pure-Python path is a correct but slow fallback
    from numba import njit as _njit

    _jacobi_sweeps = _njit(cache=True)(_jacobi_sweeps)  # type: ignore[assignment]
except ImportError:  # pragma: no cover
    pass


def _jacobi(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations; returns ascending eigenvalues and eigenvectors."""
    a = np.ascontiguousarray(mat, dtype=np.float64).copy()
    n = a.shape[0]
    v = np.eye(n)
    _jacobi_sweeps(a, v)
    evals = np.diag(a).copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


def sym_eig(m: Tensor) -> EigPair:
    """Eigendecomposition of a (nearly) symmetric matrix.

    The input is symmetrized as (M + M^T)/2 before factorization. Only the
    eigenvalues participate in differentiation, with d(lambda_i)/dM = u_i u_i^T;
    eigenvalues closer than the minimum gap have their gradient zeroed because
    the rank-one rule is ill-defined under degeneracy.
    """
    m = _tensor(m)
    if m.rows != m.cols:
        raise DimensionError(f"sym_eig: matrix must be square, got {m.shape}")
    if m.rows > 256:
        raise DimensionError(f"sym_eig: size {m.rows} exceeds the 256 limit")
    sym = 0.5 * (m.data + m.data.T)
    evals, evecs = _jacobi(sym)
    out = Tensor._from_op(evals.reshape(-1, 1), (m,), "sym_eig")
    if out.requires_grad:
        n = m.rows

        def backward(g):
            gv = g.ravel().copy()
            for i in range(n - 1):
                if evals[i + 1] - evals[i] < _EIGENGAP_MIN:
                    gv[i] = 0.0
                    gv[i + 1] = 0.0
            gm = (evecs * gv) @ evecs.T
            return (0.5 * (gm + gm.T),)

        out._backward = backward
    return EigPair(eigenvalues=out, eigenvectors=evecs)


# ---------------------------------------------------------------------------
# gradient verification
# ---------------------------------------------------------------------------

def grad_check(function: Callable[[], Tensor], leaves: Iterable[Tensor], epsilon: float = 1e-5) -> float:
    """Compare analytic gradients of a scalar function against central differences.

    Returns max over all leaf entries of |analytic - fd| / max(1, |fd|).
    ``function`` must be re-runnable: it is re-evaluated with perturbed leaf
    data for every finite-difference probe.
    """
    if not (1e-7 <= epsilon <= 1e-3):
        raise ValueError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    leaves = list(leaves)
    for leaf in leaves:
        leaf.zero_grad()
    out = function()
    if out.shape != (1, 1):
        raise DimensionError(f"grad_check requires a scalar-valued function, got {out.shape}")
    out.backward()
    analytic = [np.zeros_like(l.data) if l.grad is None else l.grad.copy() for l in leaves]
    max_err = 0.0
    with no_grad():
        for leaf, ana in zip(leaves, analytic):
            flat = leaf.data
            for i in range(flat.shape[0]):
                for j in range(flat.shape[1]):
                    orig = flat[i, j]
                    flat[i, j] = orig + epsilon
                    f_plus = function().item()
                    flat[i, j] = orig - epsilon
                    f_minus = function().item()
                    flat[i, j] = orig
                    fd = (f_plus - f_minus) / (2.0 * epsilon)
                    err = abs(ana[i, j] - fd) / max(1.0, abs(fd))
                    if err > max_err:
                        max_err = err
    return max_err


# ---------------------------------------------------------------------------
# named-tensor container serialization
# ---------------------------------------------------------------------------

_FORMAT_VERSION = 1


def save_tensors(path, tensors: dict[str, np.ndarray]) -> None:
    """Write a named-tensor container: header then per-tensor name/shape/values."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", _FORMAT_VERSION, len(tensors)))
        for name, arr in tensors.items():
            arr = np.asarray(arr, dtype=np.float64)
            if arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            if arr.ndim != 2:
                raise DimensionError(f"tensor '{name}' must be 2-D, got ndim={arr.ndim}")
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
            fh.write(arr.astype("<f8").tobytes(order="C"))


def load_tensors(path) -> dict[str, np.ndarray]:
    """Read a container written by ``save_tensors``; preserves entry order."""
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        head = fh.read(8)
        if len(head) != 8:
            raise ValueError(f"{path}: truncated tensor container header")
        version, count = struct.unpack("<II", head)
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        for _ in range(count):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode("utf-8")
            rows, cols = struct.unpack("<II", fh.read(8))
            payload = fh.read(rows * cols * 8)
            if len(payload) != rows * cols * 8:
                raise ValueError(f"{path}: truncated values for tensor '{name}'")
            out[name] = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
    return out
