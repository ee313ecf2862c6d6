"""Truncated multivariate jets.

A :class:`Jet` holds the value and all partial derivatives up to a fixed
order ``K <= MAX_ORDER`` of a (possibly tensor-valued) quantity at one chart
point.  ``coeffs[k]`` has shape ``shape + (dim,) * k`` and is symmetric in its
trailing ``k`` derivative axes; the stored numbers are partial derivatives,
not Taylor coefficients (no ``1/k!`` factors).

Products use the Leibniz rule, unary functions the scalar Faa di Bruno
formula, and composition with a vector jet the multivariate chain rule.  Every
coefficient of order ``k`` is computed from coefficients of order ``<= k``
only, so truncating an order-3 jet gives bit-identical numbers to a direct
order-2 evaluation.
"""

from __future__ import annotations

import contextlib
import contextvars
import itertools
import math
from typing import Callable, Sequence

import numpy as np

MAX_ORDER = 3

# einsum letters reserved for derivative axes
_DERIV_LETTERS = "PQR"
_VALUE_LETTERS = "abcdefghijklmno"


class OrderBudgetError(ValueError):
    """Raised when a computation needs derivatives beyond ``MAX_ORDER``."""


_budget: contextvars.ContextVar[int] = contextvars.ContextVar("jet_order_budget", default=MAX_ORDER)


def order_budget() -> int:
    """Highest jet order field evaluations may currently request."""
    return _budget.get()


@contextlib.contextmanager
def limit_order(order: int):
    """Temporarily lower the jet order available to field evaluations."""
    if not 0 <= order <= MAX_ORDER:
        raise OrderBudgetError(f"jet order budget {order} outside [0, {MAX_ORDER}]")
    token = _budget.set(order)
    try:
        yield
    finally:
        _budget.reset(token)


def check_order(order: int) -> None:
    limit = _budget.get()
    if order < 0 or order > limit:
        raise OrderBudgetError(f"jet order {order} outside [0, {limit}]")


class Jet:
    """Value plus partial derivatives up to ``order`` at a single point."""

    __slots__ = ("dim", "coeffs")
    # make numpy scalars/arrays defer to the reflected jet operators
    __array_ufunc__ = None

    def __init__(self, dim: int, coeffs: Sequence[np.ndarray]):
        self.dim = int(dim)
        self.coeffs = tuple(np.asarray(c, dtype=float) for c in coeffs)
        if not 1 <= len(self.coeffs) <= MAX_ORDER + 1:
            raise OrderBudgetError(f"jet with {len(self.coeffs)} coefficient levels")

    # -- construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, dim: int, order: int) -> "Jet":
        check_order(order)
        value = np.asarray(value, dtype=float)
        return cls(dim, [value] + [np.zeros(value.shape + (dim,) * k) for k in range(1, order + 1)])

    @classmethod
    def stack(cls, jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        """Stack jets of equal shape along a new *value* axis."""
        order = min(j.order for j in jets)
        dim = jets[0].dim
        nval = jets[0].ndim
        if axis < 0:
            axis += nval + 1
        return cls(dim, [np.stack([j.coeffs[k] for j in jets], axis=axis) for k in range(order + 1)])

    @classmethod
    def concatenate(cls, jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        order = min(j.order for j in jets)
        return cls(jets[0].dim, [np.concatenate([j.coeffs[k] for j in jets], axis=axis) for k in range(order + 1)])

    # -- basic properties -------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def shape(self) -> tuple:
        return self.coeffs[0].shape

    @property
    def ndim(self) -> int:
        return self.coeffs[0].ndim

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderBudgetError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.dim, self.coeffs[: order + 1])

    def derivative(self, k: int) -> np.ndarray:
        return self.coeffs[k]

    # -- differentiation --------------------------------------------------

    def grad(self) -> "Jet":
        """Jet of the gradient: a new trailing value axis indexes ``d/dx_j``.

        Costs one order: an order-K jet yields an order-(K-1) gradient.
        """
        if self.order < 1:
            raise OrderBudgetError("gradient of an order-0 jet")
        # the first derivative axis of coeffs[k+1] becomes the new value axis
        return Jet(self.dim, self.coeffs[1:])

    def partial(self, axis: int) -> "Jet":
        if not 0 <= axis < self.dim:
            raise IndexError(f"axis {axis} out of range for dim {self.dim}")
        if self.order < 1:
            raise OrderBudgetError("partial derivative of an order-0 jet")
        idx = (slice(None),) * self.ndim + (axis,)
        return Jet(self.dim, [c[idx] for c in self.coeffs[1:]])

    # -- indexing and reshaping of the value part ---------------------------

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        if any(i is Ellipsis or i is None for i in idx):
            raise IndexError("Ellipsis/newaxis are not supported on jets")
        return Jet(self.dim, [c[idx] for c in self.coeffs])

    def transpose(self, *axes: int) -> "Jet":
        nval = self.ndim
        if not axes:
            axes = tuple(reversed(range(nval)))
        out = []
        for k, c in enumerate(self.coeffs):
            out.append(np.transpose(c, tuple(axes) + tuple(range(nval, nval + k))))
        return Jet(self.dim, out)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def reshape(self, *shape: int) -> "Jet":
        out = []
        for k, c in enumerate(self.coeffs):
            out.append(c.reshape(tuple(shape) + (self.dim,) * k))
        return Jet(self.dim, out)

    def sum(self, axis: int | None = None) -> "Jet":
        nval = self.ndim
        axes = tuple(range(nval)) if axis is None else (axis % nval,)
        return Jet(self.dim, [c.sum(axis=axes) for c in self.coeffs])

    # -- linear arithmetic ------------------------------------------------

    def _match(self, other: "Jet") -> int:
        if self.dim != other.dim:
            raise ValueError(f"jet dimension mismatch {self.dim} != {other.dim}")
        return min(self.order, other.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            K = self._match(other)
            return Jet(self.dim, [_add(self.coeffs[k], other.coeffs[k], self.ndim, other.ndim, k) for k in range(K + 1)])
        other = np.asarray(other, dtype=float)
        return Jet(self.dim, (self.coeffs[0] + other,) + self.coeffs[1:])

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.dim, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return multiply(self, other)
        other = np.asarray(other, dtype=float)
        if other.ndim == 0:
            return Jet(self.dim, [c * other for c in self.coeffs])
        # broadcast value axes only; derivative axes stay trailing
        nd, no = self.ndim, other.ndim
        nv = max(nd, no)
        out = []
        for k, c in enumerate(self.coeffs):
            out.append(c.reshape((1,) * (nv - nd) + c.shape) * other.reshape((1,) * (nv - no) + other.shape + (1,) * k))
        return Jet(self.dim, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return multiply(self, reciprocal(other))
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if p == 2:
            return multiply(self, self)
        return apply_unary(self, lambda v: _power_derivs(v, p))


def _add(a: np.ndarray, b: np.ndarray, na: int, nb: int, k: int) -> np.ndarray:
    if na == nb:
        return a + b
    # a scalar jet broadcast against a tensor jet: insert value axes ahead of
    # the derivative axes of the scalar side
    if na == 0:
        a = a.reshape((1,) * nb + a.shape)
    elif nb == 0:
        b = b.reshape((1,) * na + b.shape)
    else:
        raise ValueError("jet addition needs equal value shapes or a scalar jet")
    return a + b


def contract(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Bilinear einsum of two jets with the Leibniz rule.

    ``subscripts`` is an einsum spec over value axes only, e.g. ``"ij,jk->ik"``.
    Letters ``P, Q, R`` are reserved for derivative axes.
    """
    if a.dim != b.dim:
        raise ValueError("jet dimension mismatch")
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    K = min(a.order, b.order)
    coeffs = []
    for k in range(K + 1):
        letters = _DERIV_LETTERS[:k]
        total = None
        # each derivative index goes to exactly one factor
        for mask in itertools.product((0, 1), repeat=k):
            da = "".join(l for l, s in zip(letters, mask) if s == 0)
            db = "".join(l for l, s in zip(letters, mask) if s == 1)
            term = np.einsum(f"{sa}{da},{sb}{db}->{out}{letters}", a.coeffs[len(da)], b.coeffs[len(db)])
            total = term if total is None else total + term
        coeffs.append(total)
    return Jet(a.dim, coeffs)


def multiply(a: Jet, b: Jet) -> Jet:
    """Elementwise product; value shapes must match or one side is scalar."""
    if a.ndim == b.ndim:
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
        s = _VALUE_LETTERS[: a.ndim]
        return contract(f"{s},{s}->{s}", a, b)
    if a.ndim == 0:
        s = _VALUE_LETTERS[: b.ndim]
        return contract(f",{s}->{s}", a, b)
    if b.ndim == 0:
        s = _VALUE_LETTERS[: a.ndim]
        return contract(f"{s},->{s}", a, b)
    raise ValueError("jet product needs equal value shapes or a scalar jet")


def matmul(a: Jet, b: Jet) -> Jet:
    """Matrix-matrix or matrix-vector product of jets."""
    if a.ndim == 2 and b.ndim == 2:
        return contract("ij,jk->ik", a, b)
    if a.ndim == 2 and b.ndim == 1:
        return contract("ij,j->i", a, b)
    if a.ndim == 1 and b.ndim == 2:
        return contract("i,ij->j", a, b)
    if a.ndim == 1 and b.ndim == 1:
        return contract("i,i->", a, b)
    raise ValueError(f"matmul of shapes {a.shape} and {b.shape}")


def linear(A: np.ndarray, x: Jet) -> Jet:
    """Apply a constant matrix to the first value axis of ``x``."""
    A = np.asarray(A, dtype=float)
    return Jet(x.dim, [np.tensordot(A, c, axes=(1, 0)) for c in x.coeffs])


def outer(a: Jet, b: Jet) -> Jet:
    sa = _VALUE_LETTERS[: a.ndim]
    sb = _VALUE_LETTERS[a.ndim : a.ndim + b.ndim]
    return contract(f"{sa},{sb}->{sa}{sb}", a, b)


def apply_unary(f: Jet, derivs: Callable[[np.ndarray], Sequence[np.ndarray]]) -> Jet:
    """Compose an elementwise scalar function with ``f``.

    ``derivs(v)`` returns ``[u(v), u'(v), u''(v), u'''(v)]`` (at least
    ``f.order + 1`` entries) evaluated elementwise on the value array.
    """
    u = derivs(f.coeffs[0])
    K = f.order
    out = [np.asarray(u[0], dtype=float)]
    if K >= 1:
        f1 = f.coeffs[1]
        out.append(np.einsum("...,...i->...i", u[1], f1))
    if K >= 2:
        f2 = f.coeffs[2]
        out.append(np.einsum("...,...i,...j->...ij", u[2], f1, f1) + np.einsum("...,...ij->...ij", u[1], f2))
    if K >= 3:
        f3 = f.coeffs[3]
        t = np.einsum("...ij,...k->...ijk", f2, f1)
        mixed = t + np.swapaxes(t, -1, -2) + np.moveaxis(t, -1, -3)
        out.append(
            np.einsum("...,...i,...j,...k->...ijk", u[3], f1, f1, f1)
            + np.einsum("...,...ijk->...ijk", u[2], mixed)
            + np.einsum("...,...ijk->...ijk", u[1], f3)
        )
    return Jet(f.dim, out)


def _power_derivs(v: np.ndarray, p: float):
    return [v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2), p * (p - 1) * (p - 2) * v ** (p - 3)]


def reciprocal(f: Jet) -> Jet:
    v = f.coeffs[0]
    if np.any(v == 0):
        raise ZeroDivisionError("reciprocal of a jet with zero value part")
    return apply_unary(f, lambda x: [1 / x, -1 / x**2, 2 / x**3, -6 / x**4])


def sqrt(f: Jet) -> Jet:
    v = f.coeffs[0]
    if np.any(v <= 0):
        raise ValueError("sqrt of a jet with nonpositive value part")
    return apply_unary(
        f,
        lambda x: [np.sqrt(x), 0.5 / np.sqrt(x), -0.25 * x**-1.5, 0.375 * x**-2.5],
    )


def exp(f: Jet) -> Jet:
    return apply_unary(f, lambda x: [np.exp(x)] * 4)


def sin(f: Jet) -> Jet:
    return apply_unary(f, lambda x: [np.sin(x), np.cos(x), -np.sin(x), -np.cos(x)])


def cos(f: Jet) -> Jet:
    return apply_unary(f, lambda x: [np.cos(x), -np.sin(x), -np.cos(x), np.sin(x)])


def inv(a: Jet) -> Jet:
    """Matrix inverse, solving ``A B = I`` order by order."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"inverse of non-square jet {a.shape}")
    try:
        b0 = np.linalg.inv(a.coeffs[0])
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular matrix in jet inverse") from exc
    B = Jet(a.dim, [b0])
    for k in range(1, a.order + 1):
        # (A B)_k = 0; the unknown B_k enters only through A_0 B_k
        trial = Jet(a.dim, list(B.coeffs) + [np.zeros(b0.shape + (a.dim,) * k)])
        rhs = contract("ij,jk->ik", a.truncate(k), trial).coeffs[k]
        bk = -np.einsum("ij,jk...->ik...", b0, rhs)
        B = Jet(a.dim, list(B.coeffs) + [bk])
    return B


def compose(outer_jet: Jet, inner: Jet) -> Jet:
    """Chain rule: ``outer_jet`` holds derivatives of ``f`` with respect to
    ``x`` at ``x0 = inner.value``; ``inner`` is the vector jet ``x(w)``.

    Returns the jet of ``f(x(w))`` with respect to ``w``.
    """
    if inner.ndim != 1 or inner.shape[0] != outer_jet.dim:
        raise ValueError("inner jet must be a vector of length outer.dim")
    K = min(outer_jet.order, inner.order)
    f = outer_jet.coeffs
    x = inner.coeffs
    out = [f[0]]
    if K >= 1:
        out.append(np.einsum("...i,ia->...a", f[1], x[1]))
    if K >= 2:
        out.append(
            np.einsum("...ij,ia,jb->...ab", f[2], x[1], x[1]) + np.einsum("...i,iab->...ab", f[1], x[2])
        )
    if K >= 3:
        t = np.einsum("...ij,iab,jc->...abc", f[2], x[2], x[1])
        mixed = t + np.swapaxes(t, -1, -2) + np.moveaxis(t, -1, -3)
        out.append(
            np.einsum("...ijk,ia,jb,kc->...abc", f[3], x[1], x[1], x[1])
            + mixed
            + np.einsum("...i,iabc->...abc", f[1], x[3])
        )
    return Jet(inner.dim, out)


# -- coordinate jets ----------------------------------------------------------


def lift_coordinate(i: int, p, order: int) -> Jet:
    """Jet of the coordinate function ``x_i`` at ``p``."""
    p = np.asarray(p, dtype=float)
    m = p.shape[0]
    if not 0 <= i < m:
        raise IndexError(f"axis {i} out of range for dimension {m}")
    check_order(order)
    coeffs = [np.array(p[i])]
    if order >= 1:
        e = np.zeros(m)
        e[i] = 1.0
        coeffs.append(e)
    for k in range(2, order + 1):
        coeffs.append(np.zeros((m,) * k))
    return Jet(m, coeffs)


def lift_point(p, order: int) -> Jet:
    """Vector jet of the identity map (all coordinates) at ``p``."""
    p = np.asarray(p, dtype=float)
    m = p.shape[0]
    check_order(order)
    coeffs = [p.copy()]
    if order >= 1:
        coeffs.append(np.eye(m))
    for k in range(2, order + 1):
        coeffs.append(np.zeros((m,) + (m,) * k))
    return Jet(m, coeffs)


def n_coefficients(dim: int, order: int) -> int:
    """Number of independent coefficients of a scalar jet."""
    return math.comb(dim + order, order)


__all__ = [
    "MAX_ORDER",
    "limit_order",
    "order_budget",
    "Jet",
    "OrderBudgetError",
    "apply_unary",
    "check_order",
    "compose",
    "contract",
    "cos",
    "exp",
    "inv",
    "lift_coordinate",
    "lift_point",
    "linear",
    "matmul",
    "multiply",
    "n_coefficients",
    "outer",
    "reciprocal",
    "sin",
    "sqrt",
]
