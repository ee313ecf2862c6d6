"""Tensor fields on one chart, and the exterior/Lie calculus built on jets.

A :class:`Field` is a pure map ``(point, order) -> Jet``.  Component layout:

========  ==============  =========================================
kind      value shape     meaning
========  ==============  =========================================
scalar    ()              f
vector    (m,)            X^i
form      (m,) * k        omega_{i1..ik}, totally antisymmetric
endo      (m, m)          phi^i_j, so (phi X)^i = phi^i_j X^j
metric    (m, m)          g_ij, symmetric positive definite
sym2      (m, m)          symmetric covariant 2-tensor
tensor    anything        other component arrays (connection coefficients, ...)
========  ==============  =========================================

Convention for forms (used everywhere in this package): the wedge product and
exterior derivative carry the 1/(p+1) normalization,

    (a ^ b)(X, Y) = (a(X) b(Y) - a(Y) b(X)) / 2
    d eta(X, Y)   = (X eta(Y) - Y eta(X) - eta([X, Y])) / 2

so that a Sasakian structure with ``nabla xi = -phi`` and
``Phi(E, F) = g(E, phi F)`` satisfies ``d eta = Phi``.
"""

from __future__ import annotations

import itertools
from collections import OrderedDict
from typing import Callable, Sequence

import numpy as np

from . import jets
from .jets import MAX_ORDER, Jet, OrderBudgetError, contract, matmul

KINDS = ("scalar", "vector", "form", "endo", "metric", "sym2", "tensor")

_CACHE_SIZE = 96


class Field:
    """Jet-valued field on a chart of dimension ``dim``.

    Evaluations are memoized per field on ``(point, order)``; a cached jet of
    higher order serves lower-order requests by truncation, which is exact.
    """

    def __init__(self, fn: Callable[[np.ndarray, int], Jet], kind: str, dim: int,
                 degree: int | None = None, name: str = "", cache: bool = True):
        if kind not in KINDS:
            raise ValueError(f"unknown field kind {kind!r}")
        self._fn = fn
        self.kind = kind
        self.dim = int(dim)
        self.degree = degree if degree is not None else {"form": 1}.get(kind)
        self.name = name
        self._cache: OrderedDict | None = OrderedDict() if cache else None

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Field{label} kind={self.kind} dim={self.dim}>"

    def __call__(self, p, order: int = 0) -> Jet:
        jets.check_order(order)
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"point of shape {p.shape} for a field on a {self.dim}-chart")
        if self._cache is None:
            return self._fn(p, order)
        key = p.tobytes()
        for k in range(order, MAX_ORDER + 1):
            hit = self._cache.get((key, k))
            if hit is not None:
                self._cache.move_to_end((key, k))
                return hit if k == order else hit.truncate(order)
        out = self._fn(p, order)
        if out.order < order:
            raise OrderBudgetError(f"{self!r} returned order {out.order} < {order}")
        out = out.truncate(order)
        self._cache[(key, order)] = out
        if len(self._cache) > _CACHE_SIZE:
            self._cache.popitem(last=False)
        return out

    def at(self, p) -> np.ndarray:
        """Plain value at ``p``."""
        return self(p, 0).value

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "Field") -> "Field":
        _same_chart(self, other)
        return Field(lambda p, K: self(p, K) + other(p, K), self.kind, self.dim, self.degree)

    def __sub__(self, other: "Field") -> "Field":
        _same_chart(self, other)
        return Field(lambda p, K: self(p, K) - other(p, K), self.kind, self.dim, self.degree)

    def __neg__(self) -> "Field":
        return Field(lambda p, K: -self(p, K), self.kind, self.dim, self.degree)

    def __mul__(self, other) -> "Field":
        if isinstance(other, Field):
            if other.kind == "scalar":
                scalar, tensor = other, self
            elif self.kind == "scalar":
                scalar, tensor = self, other
            else:
                raise TypeError("field product needs a scalar factor")
            _same_chart(scalar, tensor)
            return Field(lambda p, K: scalar(p, K) * tensor(p, K), tensor.kind, tensor.dim, tensor.degree)
        c = float(other)
        return Field(lambda p, K: self(p, K) * c, self.kind, self.dim, self.degree)

    __rmul__ = __mul__


def _same_chart(*fields: Field) -> None:
    dims = {f.dim for f in fields}
    if len(dims) != 1:
        raise ValueError(f"fields live on charts of different dimension {sorted(dims)}")


def _need(order: int, extra: int) -> int:
    total = order + extra
    if total > MAX_ORDER:
        raise OrderBudgetError(f"needs jets of order {total} > {MAX_ORDER}")
    return total


def derived(fn: Callable[..., Jet], inputs: Sequence[Field], kind: str, extra: int = 0,
            degree: int | None = None, name: str = "") -> Field:
    """Field computed pointwise from jets of ``inputs`` at ``order + extra``."""
    _same_chart(*inputs)
    dim = inputs[0].dim

    def evaluate(p, K):
        K2 = _need(K, extra)
        return fn(*[f(p, K2) for f in inputs])

    return Field(evaluate, kind, dim, degree, name)


# -- constructors ------------------------------------------------------------


def constant(value, kind: str, dim: int | None = None, degree: int | None = None, name: str = "") -> Field:
    value = np.array(value, dtype=float)
    if dim is None:
        dim = value.shape[0]
    return Field(lambda p, K: Jet.constant(value, dim, K), kind, dim, degree, name, cache=False)


def coordinate_vector(i: int, dim: int) -> Field:
    """The coordinate vector field d/dx_i."""
    e = np.zeros(dim)
    e[i] = 1.0
    return constant(e, "vector", dim, name=f"d/dx{i}")


def coordinate_differential(i: int, dim: int) -> Field:
    e = np.zeros(dim)
    e[i] = 1.0
    return constant(e, "form", dim, degree=1, name=f"dx{i}")


def coordinate_function(i: int, dim: int) -> Field:
    return Field(lambda p, K: jets.lift_coordinate(i, p, K), "scalar", dim, name=f"x{i}", cache=False)


def from_function(fn: Callable[[Jet], Jet], kind: str, dim: int, degree: int | None = None,
                  name: str = "") -> Field:
    """Field given by a jet expression in the coordinate vector jet."""
    return Field(lambda p, K: fn(jets.lift_point(p, K)), kind, dim, degree, name)


def partial(f: Field, i: int) -> Field:
    """Coordinate derivative d f / d x_i, componentwise for tensor fields."""
    if not 0 <= i < f.dim:
        raise IndexError(f"axis {i} out of range for dimension {f.dim}")
    return derived(lambda F: F.partial(i), [f], f.kind, extra=1, degree=f.degree)


# -- pointwise algebra ---------------------------------------------------------


def apply(phi: Field, X: Field) -> Field:
    """(phi X)^i = phi^i_j X^j."""
    return derived(lambda A, V: matmul(A, V), [phi, X], "vector")


def compose_endo(a: Field, b: Field) -> Field:
    return derived(lambda A, B: matmul(A, B), [a, b], "endo")


def pair(omega: Field, X: Field) -> Field:
    """omega(X) for a one-form."""
    return derived(lambda w, V: contract("i,i->", w, V), [omega, X], "scalar")


def inner(g: Field, X: Field, Y: Field) -> Field:
    return derived(lambda G, A, B: contract("i,i->", contract("ij,j->i", G, B), A), [g, X, Y], "scalar")


def evaluate2(omega: Field, X: Field, Y: Field) -> Field:
    """omega(X, Y) for a covariant 2-tensor (form, metric or sym2)."""
    return derived(lambda w, A, B: contract("i,i->", contract("ij,j->i", w, B), A), [omega, X, Y], "scalar")


def tensor_product(a: Field, b: Field, kind: str) -> Field:
    return derived(jets.outer, [a, b], kind)


def directional_derivative(X: Field, f: Field) -> Field:
    """X(f) = X^k d_k f for a scalar field f."""
    return derived(lambda V, F: contract("k,k->", V, F.grad()), [X, f], "scalar", extra=1)


# -- Lie and exterior calculus -------------------------------------------------


def lie_bracket(X: Field, Y: Field) -> Field:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    _same_chart(X, Y)

    def fn(A, B):
        return contract("ij,j->i", B.grad(), A) - contract("ij,j->i", A.grad(), B)

    return derived(fn, [X, Y], "vector", extra=1, name="bracket")


def exterior_derivative(omega: Field) -> Field:
    """d of a 1-form or 2-form, with the 1/(p+1) normalization.

    For a 1-form ``(d w)_ij = (d_i w_j - d_j w_i) / 2``; for a 2-form
    ``(d w)_ijk = (d_i w_jk + d_j w_ki + d_k w_ij) / 3``.
    """
    if omega.kind not in ("form", "scalar"):
        raise TypeError(f"exterior derivative of a {omega.kind} field")
    if omega.kind == "scalar":
        return derived(lambda F: F.grad(), [omega], "form", extra=1, degree=1)
    if omega.degree == 1:
        def d1(W):
            D = W.grad()  # D[j, i] = d_i w_j
            return (D.transpose(1, 0) - D) * 0.5
        return derived(d1, [omega], "form", extra=1, degree=2)
    if omega.degree == 2:
        def d2(W):
            D = W.grad()  # D[j, k, i] = d_i w_jk
            return (D.transpose(2, 0, 1) + D.transpose(1, 2, 0) + D) * (1.0 / 3.0)
        return derived(d2, [omega], "form", extra=1, degree=3)
    raise ValueError(f"exterior derivative of degree {omega.degree} forms is not supported")


def lie_derivative_endo(xi: Field, phi: Field) -> Field:
    """(L_xi phi)^i_j = xi^k d_k phi^i_j - phi^k_j d_k xi^i + phi^i_k d_j xi^k."""
    _same_chart(xi, phi)

    def fn(V, A):
        DV = V.grad()  # DV[i, k] = d_k xi^i
        DA = A.grad()  # DA[i, j, k] = d_k phi^i_j
        return contract("ijk,k->ij", DA, V) - contract("kj,ik->ij", A, DV) + contract("ik,kj->ij", A, DV)

    return derived(fn, [xi, phi], "endo", extra=1, name="lie_endo")


def lie_derivative_endo_on(xi: Field, phi: Field, X: Field) -> Field:
    """(L_xi phi) X evaluated as [xi, phi X] - phi [xi, X]."""
    return lie_bracket(xi, apply(phi, X)) - apply(phi, lie_bracket(xi, X))


def lie_derivative_metric(xi: Field, g: Field) -> Field:
    """(L_xi g)_ij = xi^k d_k g_ij + g_kj d_i xi^k + g_ik d_j xi^k."""
    _same_chart(xi, g)

    def fn(V, G):
        DV = V.grad()
        DG = G.grad()
        return contract("ijk,k->ij", DG, V) + contract("kj,ki->ij", G, DV) + contract("ik,kj->ij", G, DV)

    return derived(fn, [xi, g], "sym2", extra=1, name="lie_metric")


def lie_derivative_metric_on(xi: Field, g: Field, X: Field, Y: Field) -> Field:
    """xi(g(X, Y)) - g([xi, X], Y) - g(X, [xi, Y])."""
    return (directional_derivative(xi, inner(g, X, Y))
            - inner(g, lie_bracket(xi, X), Y)
            - inner(g, X, lie_bracket(xi, Y)))


def d_on(omega: Field, X: Field, Y: Field) -> Field:
    """Invariant formula d omega(X, Y) = (X omega(Y) - Y omega(X) - omega([X, Y])) / 2."""
    return 0.5 * (directional_derivative(X, pair(omega, Y))
                  - directional_derivative(Y, pair(omega, X))
                  - pair(omega, lie_bracket(X, Y)))


# -- metric musicals -----------------------------------------------------------


def musical_flat(g: Field, X: Field) -> Field:
    """Lower an index: X_i = g_ij X^j."""
    return derived(lambda G, V: contract("ij,j->i", G, V), [g, X], "form", degree=1)


def musical_sharp(g: Field, omega: Field) -> Field:
    """Raise an index: omega^i = g^ij omega_j."""
    return derived(lambda G, w: contract("ij,j->i", jets.inv(G), w), [g, omega], "vector")


def inverse_metric(g: Field) -> Field:
    return derived(jets.inv, [g], "tensor")


def is_positive_definite(g: Field, p) -> bool:
    G = g.at(p)
    try:
        np.linalg.cholesky(0.5 * (G + G.T))
    except np.linalg.LinAlgError:
        return False
    return bool(np.allclose(G, G.T, atol=1e-12 * max(1.0, np.abs(G).max())))


# -- wedge products ------------------------------------------------------------


def wedge_constant(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Components of a ^ b for constant covectors, half normalization."""
    return 0.5 * (np.outer(a, b) - np.outer(b, a))


def antisymmetry_residual(w: np.ndarray) -> float:
    """Max deviation of a component array from total antisymmetry."""
    k = w.ndim
    worst = 0.0
    for perm in itertools.permutations(range(k)):
        sign = np.linalg.det(np.eye(k)[list(perm)])
        worst = max(worst, float(np.abs(np.transpose(w, perm) - sign * w).max()))
    return worst


__all__ = [
    "Field",
    "KINDS",
    "antisymmetry_residual",
    "apply",
    "compose_endo",
    "constant",
    "coordinate_differential",
    "coordinate_function",
    "coordinate_vector",
    "d_on",
    "derived",
    "directional_derivative",
    "evaluate2",
    "exterior_derivative",
    "from_function",
    "inner",
    "inverse_metric",
    "is_positive_definite",
    "lie_bracket",
    "lie_derivative_endo",
    "lie_derivative_endo_on",
    "lie_derivative_metric",
    "lie_derivative_metric_on",
    "musical_flat",
    "musical_sharp",
    "pair",
    "partial",
    "tensor_product",
    "wedge_constant",
]
