"""Almost contact metric (3-)structures and their identities.

Structure indices ``alpha`` are 1-based in the public API (``alpha in {1,2,3}``)
and 0-based in the stored tuples, so ``S.xis[0]`` is xi_1.

The fundamental form is always derived, ``Phi(E, F) = g(E, phi F)``, i.e.
``Phi_ij = g_ik phi^k_j``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import fields as F
from . import jets
from . import riemann
from .fields import Field
from .jets import contract

# totally antisymmetric symbol, 0-based; EPS[0, 1, 2] = 1
EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[_a, _b, _c] = 1.0
    EPS[_a, _c, _b] = -1.0
DELTA = np.eye(3)


def epsilon(alpha: int, beta: int, gamma: int) -> float:
    """epsilon_{alpha beta gamma} with 1-based indices."""
    return float(EPS[alpha - 1, beta - 1, gamma - 1])


@dataclass
class ResidualReport:
    """Named max residuals over sampled points, with a tolerance verdict."""

    residuals: dict[str, float]
    tol: float
    points: int
    notes: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def __getitem__(self, name: str) -> float:
        return self.residuals[name]

    def banner(self) -> str:
        return "" if self.passed else "structure invalid"


def _update(res: dict, name: str, value) -> None:
    v = float(np.max(np.abs(value))) if np.size(value) else 0.0
    res[name] = max(res.get(name, 0.0), v)


@dataclass(frozen=True)
class AlmostContactMetricStructure:
    phi: Field
    xi: Field
    eta: Field
    g: Field

    @functools.cached_property
    def fundamental_form(self) -> Field:
        return fundamental_form(self)

    @property
    def dim(self) -> int:
        return self.g.dim


@dataclass(frozen=True)
class AlmostContactMetric3Structure:
    phis: tuple
    xis: tuple
    etas: tuple
    g: Field
    name: str = ""

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def n(self) -> int:
        return (self.dim - 3) // 4

    def structure(self, alpha: int) -> AlmostContactMetricStructure:
        a = alpha - 1
        return AlmostContactMetricStructure(self.phis[a], self.xis[a], self.etas[a], self.g)

    @functools.cached_property
    def Phis(self) -> tuple:
        return tuple(fundamental_form(self.structure(a)) for a in (1, 2, 3))

    @functools.cached_property
    def d_etas(self) -> tuple:
        return tuple(F.exterior_derivative(eta) for eta in self.etas)

    @functools.cached_property
    def projector(self) -> Field:
        """P = I - sum_alpha xi_alpha (x) eta_alpha, the horizontal projector."""
        m = self.dim
        eye = np.eye(m)

        def fn(*js):
            xis, etas = js[:3], js[3:]
            out = jets.Jet.constant(eye, m, xis[0].order)
            for x, e in zip(xis, etas):
                out = out - jets.outer(x, e)
            return out

        return F.derived(fn, list(self.xis) + list(self.etas), "endo", name="projector")

    def replace_metric(self, g: Field) -> "AlmostContactMetric3Structure":
        return AlmostContactMetric3Structure(self.phis, self.xis, self.etas, g, self.name + "+g")


# -- fundamental forms, normality --------------------------------------------


def fundamental_form(s: AlmostContactMetricStructure) -> Field:
    """Phi(E, F) = g(E, phi F)."""
    return F.derived(lambda G, A: contract("ik,kj->ij", G, A), [s.g, s.phi], "form", degree=2, name="Phi")


def nijenhuis(s: AlmostContactMetricStructure) -> Field:
    """N = [phi, phi] + 2 d eta (x) xi, components N[i, j, k] = N(d_j, d_k)^i."""

    def fn(A, V, W):
        DA = A.grad()  # DA[i, j, l] = d_l phi^i_j
        A0 = A.truncate(A.order - 1)
        bracket = (contract("lj,ikl->ijk", A0, DA) - contract("lk,ijl->ijk", A0, DA)
                   - contract("il,lkj->ijk", A0, DA) + contract("il,ljk->ijk", A0, DA))
        DW = W.grad()  # DW[j, k] = d_k eta_j
        deta = (DW.transpose(1, 0) - DW) * 0.5
        return bracket + jets.outer(V.truncate(V.order - 1), deta) * 2.0

    return F.derived(fn, [s.phi, s.xi, s.eta], "tensor", extra=1, name="nijenhuis")


def nijenhuis_on(s: AlmostContactMetricStructure, X: Field, Y: Field) -> Field:
    """Operator form [phi X, phi Y] + phi^2 [X, Y] - phi [phi X, Y] - phi [X, phi Y] + 2 d eta(X, Y) xi."""
    phi = s.phi
    bx = F.lie_bracket
    ph = lambda V: F.apply(phi, V)  # noqa: E731
    torsion = bx(ph(X), ph(Y)) + ph(ph(bx(X, Y))) - ph(bx(ph(X), Y)) - ph(bx(X, ph(Y)))
    return torsion + 2.0 * (F.d_on(s.eta, X, Y) * s.xi)


# -- residual checks -----------------------------------------------------------


def check_acms(s: AlmostContactMetricStructure, points: Iterable, tol: float) -> ResidualReport:
    res: dict[str, float] = {}
    count = 0
    for p in points:
        count += 1
        A, V, W, G = s.phi.at(p), s.xi.at(p), s.eta.at(p), s.g.at(p)
        m = A.shape[0]
        _update(res, "phi_squared", A @ A + np.eye(m) - np.outer(V, W))
        _update(res, "eta_xi", W @ V - 1.0)
        _update(res, "phi_xi", A @ V)
        _update(res, "eta_phi", W @ A)
        _update(res, "compatibility", A.T @ G @ A - G + np.outer(W, W))
    rep = ResidualReport(res, tol, count)
    if not rep.passed:
        rep.notes.append("structure invalid")
    return rep


def check_3structure(S: AlmostContactMetric3Structure, points: Iterable, tol: float) -> ResidualReport:
    res: dict[str, float] = {}
    count = 0
    m = S.dim
    for p in points:
        count += 1
        A = [f.at(p) for f in S.phis]
        V = [f.at(p) for f in S.xis]
        W = [f.at(p) for f in S.etas]
        G = S.g.at(p)
        for a in range(3):
            for b in range(3):
                rhs = sum(EPS[a, b, c] * A[c] for c in range(3)) - DELTA[a, b] * np.eye(m)
                _update(res, "triple_phi", A[a] @ A[b] - np.outer(V[a], W[b]) - rhs)
                _update(res, "triple_xi", A[a] @ V[b] - sum(EPS[a, b, c] * V[c] for c in range(3)))
                _update(res, "triple_eta", W[a] @ A[b] - sum(EPS[a, b, c] * W[c] for c in range(3)))
                _update(res, "reeb_orthonormal", V[a] @ G @ V[b] - DELTA[a, b])
    rep = ResidualReport(res, tol, count)
    if not rep.passed:
        rep.notes.append("structure invalid")
    return rep


@dataclass
class Classification:
    is_contact_metric: bool
    is_almost_cosymplectic: bool
    is_normal: bool
    is_sasakian: bool
    is_cosymplectic: bool
    residuals: dict[str, float]


def classify(s: AlmostContactMetricStructure, points: Sequence, tol: float,
             connection: riemann.AffineConnection | None = None) -> Classification:
    """Residual-based classification of a single almost contact metric structure."""
    lc = connection if connection is not None else riemann.levi_civita(s.g)
    d_eta = F.exterior_derivative(s.eta)
    Phi = fundamental_form(s)
    d_Phi = F.exterior_derivative(Phi)
    N = nijenhuis(s)
    nabla_phi = lc.nabla_endo(s.phi)
    nabla_xi = lc.nabla_vector(s.xi)
    res: dict[str, float] = {}
    for p in points:
        de, Ph = d_eta.at(p), Phi.at(p)
        _update(res, "contact_metric", de - Ph)
        _update(res, "d_eta", de)
        _update(res, "d_Phi", d_Phi.at(p))
        _update(res, "normal", N.at(p))
        G, V, W = s.g.at(p), s.xi.at(p), s.eta.at(p)
        m = G.shape[0]
        # (nabla_k phi)^i_j  vs  g_kj xi^i - eta_j delta^i_k
        target = np.einsum("kj,i->ijk", G, V) - np.einsum("j,ik->ijk", W, np.eye(m))
        dphi = nabla_phi.at(p)
        _update(res, "sasakian", dphi - target)
        _update(res, "cosymplectic", dphi)
        _update(res, "nabla_xi_plus_phi", nabla_xi.at(p) + s.phi.at(p))
    res["almost_cosymplectic"] = max(res.get("d_eta", 0.0), res.get("d_Phi", 0.0))
    ok = lambda k: res.get(k, 0.0) <= tol  # noqa: E731
    return Classification(
        is_contact_metric=ok("contact_metric"),
        is_almost_cosymplectic=ok("almost_cosymplectic"),
        is_normal=ok("normal"),
        is_sasakian=ok("sasakian"),
        is_cosymplectic=ok("cosymplectic"),
        residuals=res,
    )


def horizontal_projection(S: AlmostContactMetric3Structure, E: Field) -> Field:
    """E^h = E - sum_alpha eta_alpha(E) xi_alpha."""
    return F.apply(S.projector, E)


# -- horizontal musical maps --------------------------------------------------


def horizontal_basis(etas: Sequence[np.ndarray]) -> np.ndarray:
    """Euclidean-orthonormal columns spanning H = ker eta_1 & ker eta_2 & ker eta_3."""
    W = np.vstack([np.asarray(w, dtype=float) for w in etas])
    return scipy.linalg.null_space(W)


@dataclass
class HorizontalMaps:
    """Matrices of the musical maps on H at one point.

    In the basis ``B`` of H and its dual basis: ``G`` is g_H-flat, ``flat[a]``
    is Phi_{a+1}-flat (X -> Phi(X, .)), ``sharp[a]`` its inverse and
    ``phi[a]`` the restriction of phi_{a+1} to H.
    """

    B: np.ndarray
    G: np.ndarray
    flat: list
    sharp: list
    phi: list


def _phi_flat(Phi: np.ndarray, B: np.ndarray) -> np.ndarray:
    # (M x)_b = Phi(B x, B_b)
    return (B.T @ Phi @ B).T


def horizontal_maps(S: AlmostContactMetric3Structure, p) -> HorizontalMaps:
    B = horizontal_basis([w.at(p) for w in S.etas])
    G = B.T @ S.g.at(p) @ B
    flat = [_phi_flat(Ph.at(p), B) for Ph in S.Phis]
    sharp = []
    for M in flat:
        if np.linalg.cond(M) > 1e12:
            raise np.linalg.LinAlgError("fundamental form degenerate on H")
        sharp.append(np.linalg.inv(M))
    phi = [np.linalg.lstsq(B, A.at(p) @ B, rcond=None)[0] for A in S.phis]
    return HorizontalMaps(B, G, flat, sharp, phi)


def form_musical(S: AlmostContactMetric3Structure, alpha: int, direction: str, p) -> np.ndarray:
    """Phi_alpha-flat or -sharp on H at p, as a matrix in :func:`horizontal_maps` bases."""
    maps = horizontal_maps(S, p)
    if direction == "flat":
        return maps.flat[alpha - 1]
    if direction == "sharp":
        return maps.sharp[alpha - 1]
    raise ValueError(f"direction must be 'flat' or 'sharp', got {direction!r}")


def verify_lemma_antonio(S: AlmostContactMetric3Structure, points: Iterable, tol: float) -> ResidualReport:
    """g_H-flat = Phi_a-flat o phi_a^H and phi_a^H = -1/2 sum eps Phi_b-sharp o Phi_c-flat,
    plus the corollary g_H-flat = -Phi_1-flat o Phi_2-sharp o Phi_3-flat."""
    res: dict[str, float] = {}
    count = 0
    for p in points:
        count += 1
        h = horizontal_maps(S, p)
        for a in range(3):
            _update(res, "g_flat_from_phi", h.G - h.flat[a] @ h.phi[a])
            rhs = sum(EPS[a, b, c] * h.sharp[b] @ h.flat[c] for b in range(3) for c in range(3))
            _update(res, "phi_from_forms", h.phi[a] + 0.5 * rhs)
        _update(res, "g_flat_corollary", h.G + h.flat[0] @ h.sharp[1] @ h.flat[2])
        _update(res, "phi2_phi3_antisymmetry", h.flat[1] @ h.phi[2] + h.flat[2] @ h.phi[1])
        for a in range(3):
            _update(res, "sharp_flat_roundtrip", h.sharp[a] @ h.flat[a] - np.eye(h.G.shape[0]))
    return ResidualReport(res, tol, count)


def recover_metric(Phis: Sequence[np.ndarray], xis: Sequence[np.ndarray], etas: Sequence[np.ndarray]) -> np.ndarray:
    """Rebuild g at a point from the three 2-forms and the Reeb data alone.

    Horizontal block from g_H-flat = -Phi_1-flat o Phi_2-sharp o Phi_3-flat,
    vertical block delta, mixed block zero.
    """
    B = horizontal_basis(etas)
    M = [_phi_flat(np.asarray(P, dtype=float), B) for P in Phis]
    if np.linalg.cond(M[1]) > 1e12:
        raise np.linalg.LinAlgError("Phi_2 degenerate on H")
    GH = -M[0] @ np.linalg.solve(M[1], M[2])
    k = B.shape[1]
    frame = np.hstack([B, np.column_stack(xis)])
    Gf = np.zeros((frame.shape[1],) * 2)
    Gf[:k, :k] = 0.5 * (GH + GH.T)
    Gf[k:, k:] = np.eye(3)
    Finv = np.linalg.inv(frame)
    return Finv.T @ Gf @ Finv


def recover_metric_at(S: AlmostContactMetric3Structure, p) -> np.ndarray:
    return recover_metric([Ph.at(p) for Ph in S.Phis], [x.at(p) for x in S.xis], [w.at(p) for w in S.etas])


# -- Lie-derivative identities ------------------------------------------------


def lie_phi_residual(S: AlmostContactMetric3Structure, points: Iterable, factor: float) -> float:
    """max |L_{xi_a} phi_b - factor * sum_c eps_abc phi_c| over a, b and points.

    ``factor`` is 2 for 3-Sasakian and 0 for 3-cosymplectic manifolds.
    """
    lies = [[F.lie_derivative_endo(S.xis[a], S.phis[b]) for b in range(3)] for a in range(3)]
    worst = 0.0
    for p in points:
        A = [f.at(p) for f in S.phis]
        for a in range(3):
            for b in range(3):
                target = factor * sum(EPS[a, b, c] * A[c] for c in range(3))
                worst = max(worst, float(np.abs(lies[a][b].at(p) - target).max()))
    return worst


def basic_bracket_residual(S: AlmostContactMetric3Structure, X_fields: Sequence[Field], points: Iterable) -> float:
    """max |eta_b([X, xi_a])| for horizontal fields X."""
    brackets = [F.lie_bracket(X, xi) for X in X_fields for xi in S.xis]
    worst = 0.0
    for p in points:
        W = [w.at(p) for w in S.etas]
        for br in brackets:
            v = br.at(p)
            worst = max(worst, max(abs(float(w @ v)) for w in W))
    return worst


def horizontal_constant_fields(S: AlmostContactMetric3Structure, rng: np.random.Generator, count: int) -> list:
    """Seeded horizontal fields: horizontal projections of random constant fields."""
    m = S.dim
    return [horizontal_projection(S, F.constant(rng.normal(size=m), "vector", m)) for _ in range(count)]


__all__ = [
    "DELTA",
    "EPS",
    "AlmostContactMetric3Structure",
    "AlmostContactMetricStructure",
    "Classification",
    "HorizontalMaps",
    "ResidualReport",
    "basic_bracket_residual",
    "check_3structure",
    "check_acms",
    "classify",
    "epsilon",
    "form_musical",
    "fundamental_form",
    "horizontal_basis",
    "horizontal_constant_fields",
    "horizontal_maps",
    "horizontal_projection",
    "lie_phi_residual",
    "nijenhuis",
    "nijenhuis_on",
    "recover_metric",
    "recover_metric_at",
    "verify_lemma_antonio",
]
