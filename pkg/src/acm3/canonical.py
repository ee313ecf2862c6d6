"""The canonical connection of an almost 3-contact metric manifold.

For E, F arbitrary, with P the horizontal projector,

    nabla~_E F = P nabla_{PE}(PF) + sum_a eta_a(E) [xi_a, PF] + sum_a E(eta_a(F)) xi_a,

which reduces to ``(nabla_X Y)^h`` on horizontal fields, to ``[xi_a, Y]`` along
the Reeb fields, and makes every ``xi_a`` parallel.  Coefficients in the
convention of :mod:`acm3.riemann`:

    C~[i, a, j] = P^i_m P^k_a (d_k P^m_j + C[m, k, l] P^l_j)
                  + sum_a eta_a[a] (xi^k d_k P^i_j - P^k_j d_k xi^i)
                  + sum_a xi^i d_a eta_j

Curvature is computed from these coefficient jets; by tensoriality pointwise
components suffice for every reported identity.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import contact3 as c3
from . import fields as F
from . import jets
from . import riemann
from .contact3 import EPS, ResidualReport, _update
from .fields import Field
from .jets import contract


def canonical_coefficients(S: c3.AlmostContactMetric3Structure, lc: riemann.AffineConnection) -> Field:
    m = S.dim
    eye = np.eye(m)

    def evaluate(p, K):
        K1 = K + 1
        if K1 > jets.MAX_ORDER:
            riemann._budget()
        xis = [x(p, K1) for x in S.xis]
        etas = [w(p, K1) for w in S.etas]
        P = jets.Jet.constant(eye, m, K1)
        for x, w in zip(xis, etas):
            P = P - jets.outer(x, w)
        DP = P.grad()  # DP[m, j, k] = d_k P^m_j
        P0 = P.truncate(K)
        C = lc.coefficients(p, K)
        inner = DP.transpose(0, 2, 1) + contract("mkl,lj->mkj", C, P0)  # [m, k, j]
        out = contract("im,mkj->ikj", P0, inner)
        out = contract("ikj,ka->iaj", out, P0)
        for x, w in zip(xis, etas):
            x0, w0 = x.truncate(K), w.truncate(K)
            lie = contract("ijk,k->ij", DP, x0) - contract("kj,ik->ij", P0, x.grad())  # [xi, P d_j]^i
            out = out + contract("a,ij->iaj", w0, lie) + contract("i,ja->iaj", x0, w.grad())
        return out

    return Field(evaluate, "tensor", m, name="canonical-coefficients")


class CanonicalConnection(riemann.AffineConnection):
    """Canonical connection of a 3-structure, coefficient form plus an
    operator form built from the defining formula (used as a cross-check)."""

    def __init__(self, S: c3.AlmostContactMetric3Structure, lc: riemann.AffineConnection | None = None):
        self.structure = S
        self.levi_civita = lc if lc is not None else riemann.levi_civita(S.g)
        super().__init__(canonical_coefficients(S, self.levi_civita), is_levi_civita=False, name="canonical")
        self._curvature: riemann.CurvatureTensor | None = None

    @property
    def curvature(self) -> riemann.CurvatureTensor:
        if self._curvature is None:
            self._curvature = riemann.riemann_curvature(self)
        return self._curvature

    def operator_derivative(self, E: Field, Fv: Field) -> Field:
        """nabla~_E F from the defining formula, without canonical coefficients."""
        S = self.structure
        P = S.projector
        PE, PF = F.apply(P, E), F.apply(P, Fv)
        out = F.apply(P, self.levi_civita.covariant_derivative(PE, PF))
        for x, w in zip(S.xis, S.etas):
            out = out + F.pair(w, E) * F.lie_bracket(x, PF)
            out = out + F.directional_derivative(E, F.pair(w, Fv)) * x
        return out


def canonical_derivative(C: CanonicalConnection, E: Field, Fv: Field) -> Field:
    return C.covariant_derivative(E, Fv)


def _vec(v, p) -> np.ndarray:
    return v.at(p) if isinstance(v, Field) else np.asarray(v, dtype=float)


def canonical_torsion(C: CanonicalConnection, E, Fv, p) -> np.ndarray:
    """T~(E, F) at p from the coefficient jets (E, F fields or vectors)."""
    T = C.torsion_components().at(p)
    return np.einsum("ikj,k,j->i", T, _vec(E, p), _vec(Fv, p))


def canonical_curvature(C: CanonicalConnection, X, Y, Z, p) -> np.ndarray:
    """R~_{XY} Z at p."""
    return C.curvature(X, Y, Z, p)


# -- pointwise helpers ---------------------------------------------------------


class PointData:
    """Structure values at one point, used by the residual checks."""

    def __init__(self, S: c3.AlmostContactMetric3Structure, p):
        self.p = p
        self.G = S.g.at(p)
        self.A = [f.at(p) for f in S.phis]
        self.V = [f.at(p) for f in S.xis]
        self.W = [f.at(p) for f in S.etas]
        self.dW = [f.at(p) for f in S.d_etas]
        self.P = S.projector.at(p)
        self.m = self.G.shape[0]


def _random_vectors(rng, m: int, count: int) -> list:
    return [rng.normal(size=m) for _ in range(count)]


# -- residual checks ------------------------------------------------------------


def check_metric_compat(C: CanonicalConnection, points: Sequence, tol: float) -> ResidualReport:
    """Components of nabla~ g, with the Killing residuals of each xi_a alongside."""
    S = C.structure
    Dg = C.nabla_cov2(S.g)
    lies = [F.lie_derivative_metric(x, S.g) for x in S.xis]
    res: dict[str, float] = {}
    for p in points:
        _update(res, "nabla_g", Dg.at(p))
        for a, L in enumerate(lies):
            _update(res, f"killing_xi{a + 1}", L.at(p))
    rep = ResidualReport({"nabla_g": res.get("nabla_g", 0.0)}, tol, len(points))
    rep.notes.append("killing " + " ".join(f"xi{a + 1}={res.get(f'killing_xi{a + 1}', 0.0):.3e}" for a in range(3)))
    rep.residuals.update({k: v for k, v in res.items() if k.startswith("killing")})
    return rep


def check_eta_parallel(C: CanonicalConnection, points: Sequence, tol: float) -> ResidualReport:
    """nabla~ eta_a components and d eta_a(X, xi_b) for horizontal X."""
    S = C.structure
    Dw = [C.nabla_form(w) for w in S.etas]
    res: dict[str, float] = {}
    for p in points:
        d = PointData(S, p)
        for a in range(3):
            D = Dw[a].at(p)  # [j, k] = (nabla~_k eta)_j
            _update(res, "nabla_eta", D)
            for b in range(3):
                _update(res, "d_eta_horizontal_reeb", d.P.T @ d.dW[a] @ d.V[b])
                _update(res, "nabla_eta_on_reeb", D.T @ d.V[b])
    return ResidualReport(res, tol, len(points))


def uno1_rhs(d: PointData, alpha: int) -> np.ndarray:
    """[i, j, k] = -sum eps_abc (eta_b[k] (phi_c P)^i_j - eta_c[k] (phi_b P)^i_j)."""
    a = alpha - 1
    out = np.zeros((d.m,) * 3)
    for b in range(3):
        for c in range(3):
            e = EPS[a, b, c]
            if e == 0.0:
                continue
            out -= e * (np.einsum("k,ij->ijk", d.W[b], d.A[c] @ d.P) - np.einsum("k,ij->ijk", d.W[c], d.A[b] @ d.P))
    return out


def check_nabla_tilde_phi(C: CanonicalConnection, points: Sequence, tol: float, family: str) -> ResidualReport:
    """nabla~ phi_a against the 3-Sasakian formula or zero (3-cosymplectic)."""
    S = C.structure
    Dphi = [C.nabla_endo(f) for f in S.phis]
    res: dict[str, float] = {}
    for p in points:
        d = PointData(S, p)
        for a in range(3):
            D = Dphi[a].at(p)
            if family == "3-sasakian":
                _update(res, "nabla_tilde_phi", D - uno1_rhs(d, a + 1))
                # horizontal directions and arguments give zero
                _update(res, "horizontal_block", np.einsum("ijk,jb,kc->ibc", D, d.P, d.P))
            elif family == "3-cosymplectic":
                _update(res, "nabla_tilde_phi", D)
            else:
                raise ValueError(f"unknown family {family!r}")
    return ResidualReport(res, tol, len(points))


def xi2_phi1_special(C: CanonicalConnection, p) -> float:
    """max |(nabla~_{xi_2} phi_1) X + 2 phi_3 X| over horizontal X at p."""
    S = C.structure
    d = PointData(S, p)
    D = C.nabla_endo(S.phis[0]).at(p)
    M = np.einsum("ijk,k->ij", D, d.V[1]) @ d.P + 2.0 * d.A[2] @ d.P
    return float(np.abs(M).max())


def axiom_residuals(conn: riemann.AffineConnection, S: c3.AlmostContactMetric3Structure, points: Sequence) -> dict:
    """Residuals of the three characterizing properties of the canonical
    connection, evaluated for an arbitrary connection ``conn``."""
    Dxi = [conn.nabla_vector(x) for x in S.xis]
    Dg = conn.nabla_cov2(S.g)
    T = conn.torsion_components()
    res: dict[str, float] = {}
    for p in points:
        d = PointData(S, p)
        for D in Dxi:
            _update(res, "i_reeb_parallel", D.at(p))
        _update(res, "ii_horizontal_metric", np.einsum("ijk,ia,jb,kc->abc", Dg.at(p), d.P, d.P, d.P))
        Tp = T.at(p)
        TXY = np.einsum("ikj,ka,jb->iab", Tp, d.P, d.P)
        target = 2.0 * sum(np.einsum("i,ab->iab", d.V[a], d.P.T @ d.dW[a] @ d.P) for a in range(3))
        _update(res, "iii_torsion_horizontal", TXY - target)
        for a in range(3):
            _update(res, "iii_torsion_mixed", np.einsum("ikj,ka,j->ia", Tp, d.P, d.V[a]))
    res.setdefault("i_reeb_parallel", 0.0)
    return res


def check_uniqueness_axioms(conn: riemann.AffineConnection, S: c3.AlmostContactMetric3Structure,
                            points: Sequence, tol: float) -> ResidualReport:
    return ResidualReport(axiom_residuals(conn, S, points), tol, len(points))


def perturbed(conn: riemann.AffineConnection, tensor: np.ndarray | Field, name: str = "perturbed") -> riemann.AffineConnection:
    """Connection with coefficients C + tensor (a constant array or a tensor field)."""
    extra = tensor if isinstance(tensor, Field) else F.constant(np.asarray(tensor, dtype=float), "tensor", conn.dim)
    return riemann.AffineConnection(conn.coefficients + extra, name=name)


def check_torsion(C: CanonicalConnection, points: Sequence, tol: float) -> ResidualReport:
    """The three torsion cases, plus the all-E, F formula valid when the vertical
    distribution is integrable and the eta_a are parallel."""
    S = C.structure
    T = C.torsion_components()
    brackets = {(a, b): F.lie_bracket(S.xis[b], S.xis[a]) for a in range(3) for b in range(3)}
    res: dict[str, float] = {}
    for p in points:
        d = PointData(S, p)
        Tp = T.at(p)
        TXY = np.einsum("ikj,ka,jb->iab", Tp, d.P, d.P)
        target = 2.0 * sum(np.einsum("i,ab->iab", d.V[a], d.P.T @ d.dW[a] @ d.P) for a in range(3))
        _update(res, "horizontal", TXY - target)
        for a in range(3):
            _update(res, "mixed", np.einsum("ikj,ka,j->ia", Tp, d.P, d.V[a]))
            for b in range(3):
                _update(res, "vertical", np.einsum("ikj,k,j->i", Tp, d.V[a], d.V[b]) - brackets[(a, b)].at(p))
        full = 2.0 * sum(np.einsum("i,kj->ikj", d.V[a], d.dW[a]) for a in range(3))
        _update(res, "all_pairs", Tp - full)
    return ResidualReport(res, tol, len(points))


# -- curvature identities ---------------------------------------------------------


def curvature_formula_rhs(d: PointData, R: np.ndarray, X, Y, Z, variant: str) -> np.ndarray:
    """Right-hand side for R~_{XY} Z in terms of the Levi-Civita R.

    ``"printed"``:   (R_XY Z)^h + sum (d eta(Y, Z) phi X - d eta(X, Z) phi Y)
    ``"derived"``:   (R_XY Z)^h + sum (d eta(X, Z) phi Y - d eta(Y, Z) phi X + 2 d eta(X, Y) phi Z)
    """
    RXYZ = d.P @ np.einsum("ijkl,j,k,l->i", R, Z, X, Y)
    out = RXYZ.copy()
    for a in range(3):
        dw = d.dW[a]
        yz, xz, xy = Y @ dw @ Z, X @ dw @ Z, X @ dw @ Y
        if variant == "printed":
            out += yz * (d.A[a] @ X) - xz * (d.A[a] @ Y)
        elif variant == "derived":
            out += xz * (d.A[a] @ Y) - yz * (d.A[a] @ X) + 2.0 * xy * (d.A[a] @ Z)
        else:
            raise ValueError(f"unknown variant {variant!r}")
    return out


def check_curvature(C: CanonicalConnection, points: Sequence, tol: float, seed: int = 0,
                    samples: int = 4) -> ResidualReport:
    """Vanishing statements for R~ and both forms of the horizontal formula."""
    S = C.structure
    Rt = C.curvature
    R = riemann.riemann_curvature(C.levi_civita)
    rng = np.random.default_rng(seed)
    res: dict[str, float] = {}
    for p in points:
        d = PointData(S, p)
        Rtp = Rt.components(p)  # [i, j, k, l] = (R~(d_k, d_l) d_j)^i
        Rp = R.components(p)
        for a in range(3):
            _update(res, "R_EF_xi", np.einsum("ijkl,j->ikl", Rtp, d.V[a]))
            for b in range(3):
                _update(res, "R_xi_xi", np.einsum("ijkl,k,l->ij", Rtp, d.V[a], d.V[b]))
            _update(res, "R_X_xi", np.einsum("ijkl,ka,l->ija", Rtp, d.P, d.V[a]))
        for _ in range(samples):
            X, Y, Z = (d.P @ v for v in _random_vectors(rng, d.m, 3))
            lhs = np.einsum("ijkl,j,k,l->i", Rtp, Z, X, Y)
            _update(res, "formula_printed", lhs - curvature_formula_rhs(d, Rp, X, Y, Z, "printed"))
            _update(res, "formula_derived", lhs - curvature_formula_rhs(d, Rp, X, Y, Z, "derived"))
    return ResidualReport(res, tol, len(points))


def horizontal_frame(S: c3.AlmostContactMetric3Structure, p) -> np.ndarray:
    """g-orthonormal basis of H at p as columns."""
    B = c3.horizontal_basis([w.at(p) for w in S.etas])
    G = B.T @ S.g.at(p) @ B
    return B @ riemann.orthonormal_frame(G)


def horizontal_scalar_curvature(C: riemann.AffineConnection, p, S: c3.AlmostContactMetric3Structure | None = None) -> float:
    """sum_{i,j} g(R_{X_i X_j} X_j, X_i) over a g-orthonormal horizontal frame."""
    S = S if S is not None else C.structure
    E = horizontal_frame(S, p)
    curv = C.curvature if isinstance(C, CanonicalConnection) else riemann.riemann_curvature(C)
    G = S.g.at(p)
    RE = np.einsum("ijkl,ja,kb,lc->iabc", curv.components(p), E, E, E)  # (R(X_b, X_c) X_a)^i
    return float(np.einsum("iaba,ic,cb->", RE, G, E))


__all__ = [
    "CanonicalConnection",
    "PointData",
    "axiom_residuals",
    "canonical_coefficients",
    "canonical_curvature",
    "canonical_derivative",
    "canonical_torsion",
    "check_curvature",
    "check_eta_parallel",
    "check_metric_compat",
    "check_nabla_tilde_phi",
    "check_torsion",
    "check_uniqueness_axioms",
    "curvature_formula_rhs",
    "horizontal_frame",
    "horizontal_scalar_curvature",
    "perturbed",
    "uno1_rhs",
    "xi2_phi1_special",
]
