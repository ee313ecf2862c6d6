"""Affine connections, Levi-Civita machinery and curvature.

Connection coefficients are stored as ``C[i, k, j] = (nabla_{d_k} d_j)^i`` so
that ``nabla_X Y = X^k d_k Y^i + C[i, k, j] X^k Y^j``.  Curvature follows

    R_{XY} Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X, Y]} Z

with components ``R[i, j, k, l] = (R_{d_k d_l} d_j)^i``.  Residuals are
reported as max absolute component in the coordinate frame.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from . import fields as F
from . import jets
from .fields import Field
from .jets import Jet, contract


class AffineConnection:
    """Covariant derivative given by its coefficient field."""

    def __init__(self, coefficients: Field, is_levi_civita: bool = False, name: str = ""):
        self.coefficients = coefficients
        self.is_levi_civita = is_levi_civita
        self.name = name
        self.dim = coefficients.dim

    def __repr__(self) -> str:
        return f"<AffineConnection {self.name or '?'} dim={self.dim}>"

    # -- on vector fields -------------------------------------------------

    def covariant_derivative(self, X: Field, Y: Field) -> Field:
        C = self.coefficients

        def evaluate(p, K):
            Yj = Y(p, K + 1) if K + 1 <= jets.MAX_ORDER else _budget()
            Xj = X(p, K)
            return contract("ik,k->i", Yj.grad(), Xj) + contract("ij,j->i", contract("ikj,k->ij", C(p, K), Xj), Yj)

        return Field(evaluate, "vector", self.dim, name="covariant_derivative")

    def torsion(self, X: Field, Y: Field) -> Field:
        return self.covariant_derivative(X, Y) - self.covariant_derivative(Y, X) - F.lie_bracket(X, Y)

    def torsion_components(self) -> Field:
        """T[i, k, j] = C[i, k, j] - C[i, j, k] = (T(d_k, d_j))^i."""
        return F.derived(lambda C: C - C.transpose(0, 2, 1), [self.coefficients], "tensor")

    # -- on other tensors, operator form ----------------------------------

    def derivative_endo_on(self, E: Field, phi: Field, X: Field) -> Field:
        """(nabla_E phi) X = nabla_E (phi X) - phi (nabla_E X)."""
        return self.covariant_derivative(E, F.apply(phi, X)) - F.apply(phi, self.covariant_derivative(E, X))

    def derivative_metric_on(self, E: Field, g: Field, X: Field, Y: Field) -> Field:
        """(nabla_E g)(X, Y) = E g(X, Y) - g(nabla_E X, Y) - g(X, nabla_E Y)."""
        return (F.directional_derivative(E, F.inner(g, X, Y))
                - F.inner(g, self.covariant_derivative(E, X), Y)
                - F.inner(g, X, self.covariant_derivative(E, Y)))

    def derivative_form_on(self, E: Field, omega: Field, X: Field) -> Field:
        """(nabla_E omega) X = E omega(X) - omega(nabla_E X)."""
        return F.directional_derivative(E, F.pair(omega, X)) - F.pair(omega, self.covariant_derivative(E, X))

    # -- on other tensors, component form -----------------------------------

    def _with_coeffs(self, fn, tensor: Field, kind: str = "tensor") -> Field:
        C = self.coefficients

        def evaluate(p, K):
            if K + 1 > jets.MAX_ORDER:
                _budget()
            return fn(tensor(p, K + 1), C(p, K))

        return Field(evaluate, kind, self.dim)

    def nabla_vector(self, V: Field) -> Field:
        """D[i, k] = (nabla_k V)^i."""
        return self._with_coeffs(lambda Vj, C: Vj.grad() + contract("ikj,j->ik", C, Vj), V)

    def nabla_endo(self, phi: Field) -> Field:
        """D[i, j, k] = (nabla_k phi)^i_j."""
        def fn(A, C):
            return A.grad() + contract("ikl,lj->ijk", C, A) - contract("lkj,il->ijk", C, A)
        return self._with_coeffs(fn, phi)

    def nabla_form(self, omega: Field) -> Field:
        """D[j, k] = (nabla_k omega)_j."""
        return self._with_coeffs(lambda W, C: W.grad() - contract("lkj,l->jk", C, W), omega)

    def nabla_cov2(self, h: Field) -> Field:
        """D[i, j, k] = (nabla_k h)_ij."""
        def fn(H, C):
            return H.grad() - contract("lki,lj->ijk", C, H) - contract("lkj,il->ijk", C, H)
        return self._with_coeffs(fn, h)


def _budget():
    raise jets.OrderBudgetError(f"connection derivative needs order > {jets.MAX_ORDER}")


def christoffel(g: Field) -> Field:
    """C[i, k, j] = 1/2 g^il (d_k g_jl + d_j g_kl - d_l g_kj)."""

    def fn(G):
        DG = G.grad()  # DG[a, b, c] = d_c g_ab
        S = DG.transpose(1, 2, 0) + DG.transpose(1, 0, 2) - DG.transpose(2, 0, 1)
        return contract("il,lkj->ikj", jets.inv(G.truncate(G.order - 1)), S) * 0.5

    return F.derived(fn, [g], "tensor", extra=1, name="christoffel")


def levi_civita(g: Field) -> AffineConnection:
    return AffineConnection(christoffel(g), is_levi_civita=True, name="levi-civita")


class CurvatureTensor:
    """Curvature of an affine connection, from its coefficient jets."""

    def __init__(self, connection: AffineConnection):
        self.connection = connection
        self.dim = connection.dim
        C = connection.coefficients

        def fn(Cj):
            DC = Cj.grad()  # DC[i, k, j, a] = d_a C[i, k, j]
            Cj = Cj.truncate(Cj.order - 1)
            return (DC.transpose(0, 2, 3, 1) - DC.transpose(0, 2, 1, 3)
                    + contract("ikm,mlj->ijkl", Cj, Cj) - contract("ilm,mkj->ijkl", Cj, Cj))

        self.field = F.derived(fn, [C], "tensor", extra=1, name="riemann")

    def components(self, p) -> np.ndarray:
        return self.field.at(p)

    def __call__(self, X, Y, Z, p) -> np.ndarray:
        """R_{XY} Z at p; X, Y, Z may be fields or plain vectors."""
        x, y, z = (_vec(v, p) for v in (X, Y, Z))
        return np.einsum("ijkl,j,k,l->i", self.components(p), z, x, y)


def _vec(v, p) -> np.ndarray:
    if isinstance(v, Field):
        return v.at(p)
    return np.asarray(v, dtype=float)


def riemann_curvature(conn: AffineConnection) -> CurvatureTensor:
    return CurvatureTensor(conn)


def curvature_operator(conn: AffineConnection, X: Field, Y: Field, Z: Field) -> Field:
    """Nested operator form of R_{XY} Z (cross-check route)."""
    nab = conn.covariant_derivative
    return nab(X, nab(Y, Z)) - nab(Y, nab(X, Z)) - nab(F.lie_bracket(X, Y), Z)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal basis: E^T g E = I (Cholesky based)."""
    L = np.linalg.cholesky(0.5 * (g + g.T))
    return np.linalg.inv(L).T


def ricci(curv: CurvatureTensor, g: Field, p, frame: np.ndarray | None = None) -> np.ndarray:
    """Ric(X, Y) = sum_a g(R_{E_a X} Y, E_a) over a g-orthonormal frame."""
    G = g.at(p)
    E = orthonormal_frame(G) if frame is None else np.asarray(frame, dtype=float)
    R = curv.components(p)
    # (R_{E_a, d_x} d_y)^i = R[i, y, k, x] E^k_a
    RE = np.einsum("iykx,ka->aixy", R, E)
    return np.einsum("aixy,ij,ja->xy", RE, G, E)


def scalar_curvature(curv: CurvatureTensor, g: Field, p, frame: np.ndarray | None = None) -> float:
    G = g.at(p)
    E = orthonormal_frame(G) if frame is None else np.asarray(frame, dtype=float)
    Ric = ricci(curv, g, p, frame=E)
    return float(np.einsum("xy,xa,ya->", Ric, E, E))


def sectional_curvature(curv: CurvatureTensor, g: Field, X, Y, p) -> float:
    """K(X, Y) = g(R_{XY} Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2)."""
    G = g.at(p)
    x, y = _vec(X, p), _vec(Y, p)
    num = x @ G @ curv(x, y, y, p)
    den = (x @ G @ x) * (y @ G @ y) - (x @ G @ y) ** 2
    return float(num / den)


def is_killing(xi: Field, g: Field, points: Iterable, tol: float) -> tuple[bool, float]:
    """Whether max over points of |L_xi g|_inf <= tol, with that residual."""
    L = F.lie_derivative_metric(xi, g)
    worst = max((float(np.abs(L.at(p)).max()) for p in points), default=0.0)
    return worst <= tol, worst


def random_orthonormal_frame(g: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A g-orthonormal frame rotated by a random orthogonal matrix."""
    E = orthonormal_frame(g)
    Q, R = np.linalg.qr(rng.normal(size=g.shape))
    return E @ (Q * np.sign(np.diag(R)))


__all__ = [
    "AffineConnection",
    "CurvatureTensor",
    "christoffel",
    "curvature_operator",
    "is_killing",
    "levi_civita",
    "orthonormal_frame",
    "random_orthonormal_frame",
    "ricci",
    "riemann_curvature",
    "scalar_curvature",
    "sectional_curvature",
]
