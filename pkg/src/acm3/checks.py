"""Registry of verification checks run by the command line front end.

Each check maps a :class:`Context` to ``(max_residual, points_sampled)``.
Equalities report a max absolute residual; inequalities report their
shortfall (``max(0, bound - value)``) against a tolerance of 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import canonical as cn
from . import contact3 as c3
from . import fields as F
from . import models as M
from . import riemann as rm
from .contact3 import EPS

SUITES = ("structure", "connection", "curvature", "darboux", "musical")
SASAKIAN = "3-sasakian"
COSYMPLECTIC = "3-cosymplectic"
BOTH = (SASAKIAN, COSYMPLECTIC)


@dataclass
class Context:
    model: M.Model
    points: list
    seed: int
    tol_flat: float = 1e-9
    tol_curved: float = 1e-7
    ode_steps: int = 64

    @property
    def family(self) -> str:
        return self.model.family

    @property
    def S(self) -> c3.AlmostContactMetric3Structure:
        return self.model.structure

    @property
    def base_tol(self) -> float:
        return self.tol_curved if self.family == SASAKIAN else self.tol_flat

    @property
    def is_sasakian(self) -> bool:
        return self.family == SASAKIAN

    @functools.cached_property
    def canonical(self) -> cn.CanonicalConnection:
        return cn.CanonicalConnection(self.S, self.model.levi_civita)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def subset(self, k: int) -> list:
        return self.points[: min(k, len(self.points))]

    def horizontal_fields(self, salt: int, count: int) -> list:
        return c3.horizontal_constant_fields(self.S, self.rng(salt), count)

    @functools.cached_property
    def darboux(self) -> M.DarbouxFrame:
        return M.build_darboux_frame(self.model, self.points[0], self.ode_steps)

    def darboux_points(self, count: int) -> list:
        """Seeded points within distance 0.5 of the Darboux base point."""
        rng = self.rng(901)
        p = self.points[0]
        out = []
        for _ in range(count):
            d = rng.normal(size=p.shape[0])
            out.append(p + d / np.linalg.norm(d) * 0.5 * rng.uniform())
        return out


@dataclass(frozen=True)
class Check:
    id: str
    suite: str
    description: str
    paper_ref: str
    run: Callable[[Context], tuple]
    families: tuple = BOTH
    tolerance: Callable[[Context], float] | float | None = None
    only: Callable[[M.Model], bool] | None = None

    def applies(self, model: M.Model) -> bool:
        if model.family not in self.families:
            return False
        return self.only is None or self.only(model)

    def tol(self, ctx: Context) -> float:
        if self.tolerance is None:
            return ctx.base_tol
        if callable(self.tolerance):
            return float(self.tolerance(ctx))
        return float(self.tolerance)


REGISTRY: list = []


def check(id: str, suite: str, description: str, paper_ref: str, families=BOTH, tolerance=None, only=None):
    def deco(fn):
        REGISTRY.append(Check(id, suite, description, paper_ref, fn, tuple(families), tolerance, only))
        return fn

    return deco


def _maxabs(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def _over(points, fn) -> tuple:
    worst = 0.0
    for p in points:
        worst = max(worst, fn(p))
    return worst, len(points)


# -- structure ---------------------------------------------------------------


@check("structure-acms-axioms", "structure",
       "phi^2 = -I + eta(x)xi, eta(xi) = 1, phi xi = 0, eta o phi = 0 and metric compatibility, each alpha",
       "Eq. (compatibile)")
def _acms(ctx):
    worst = max(c3.check_acms(ctx.S.structure(a), ctx.points, ctx.base_tol).max_residual for a in (1, 2, 3))
    return worst, len(ctx.points)


@check("structure-triple-relations", "structure",
       "phi_a phi_b - eta_b(x)xi_a = sum eps phi_c - delta I, phi_a xi_b = sum eps xi_c, eta_a o phi_b = sum eps eta_c",
       "Eq. (3-sasaki)")
def _triple(ctx):
    r = c3.check_3structure(ctx.S, ctx.points, ctx.base_tol).residuals
    return max(r["triple_phi"], r["triple_xi"], r["triple_eta"]), len(ctx.points)


@check("structure-reeb-orthonormal", "structure", "g(xi_a, xi_b) = delta_ab", "preliminaries, Reeb fields orthonormal")
def _reeb_on(ctx):
    return c3.check_3structure(ctx.S, ctx.points, ctx.base_tol)["reeb_orthonormal"], len(ctx.points)


@check("metric-positive-definite", "structure",
       "g symmetric with positive spectrum (shortfall of min eigenvalue below 1e-3 plus asymmetry)",
       "Eq. (compatibile), Riemannian metric")
def _pd(ctx):
    def one(p):
        G = ctx.S.g.at(p)
        return _maxabs(G - G.T) + max(0.0, 1e-3 - float(np.linalg.eigvalsh(0.5 * (G + G.T)).min()))
    return _over(ctx.points, one)


@check("fundamental-form-antisymmetric", "structure", "Phi_a(E, F) = g(E, phi_a F) is antisymmetric",
       "preliminaries, fundamental 2-form")
def _phi_antisym(ctx):
    return _over(ctx.points, lambda p: max(_maxabs(Ph.at(p) + Ph.at(p).T) for Ph in ctx.S.Phis))


@check("horizontal-projection", "structure", "eta_a(E^h) = 0 and (E^h)^h = E^h for the horizontal projector",
       "Theorem (connessione) proof, E = E^h + sum eta(E) xi")
def _proj(ctx):
    def one(p):
        P = ctx.S.projector.at(p)
        return max(_maxabs(P @ P - P), max(_maxabs(w.at(p) @ P) for w in ctx.S.etas))
    return _over(ctx.points, one)


@check("nijenhuis-normality", "structure", "N_a = [phi_a, phi_a] + 2 d eta_a (x) xi_a vanishes", "preliminaries, normality")
def _normal(ctx):
    Ns = [c3.nijenhuis(ctx.S.structure(a)) for a in (1, 2, 3)]
    return _over(ctx.points, lambda p: max(_maxabs(N.at(p)) for N in Ns))


@check("contact-metric-d-eta-equals-fundamental-form", "structure", "d eta_a = Phi_a (half convention)",
       "preliminaries, contact metric condition", families=(SASAKIAN,))
def _contact(ctx):
    return _over(ctx.points, lambda p: max(_maxabs(d.at(p) - Ph.at(p)) for d, Ph in zip(ctx.S.d_etas, ctx.S.Phis)))


@check("cosymplectic-closed-forms", "structure", "d eta_a = 0 and d Phi_a = 0", "preliminaries, 3-cosymplectic",
       families=(COSYMPLECTIC,))
def _closed(ctx):
    dPhis = [F.exterior_derivative(Ph) for Ph in ctx.S.Phis]
    return _over(ctx.points, lambda p: max([_maxabs(d.at(p)) for d in ctx.S.d_etas] + [_maxabs(d.at(p)) for d in dPhis]))


@check("sasakian-nabla-phi", "structure", "(nabla_E phi_a) F = g(E, F) xi_a - eta_a(F) E",
       "preliminaries, Sasakian condition", families=(SASAKIAN,))
def _sasakian(ctx):
    pts = ctx.subset(16)
    return max(c3.classify(ctx.S.structure(a), pts, ctx.base_tol, ctx.model.levi_civita).residuals["sasakian"]
               for a in (1, 2, 3)), len(pts)


@check("reeb-nabla-xi-equals-minus-phi", "structure", "nabla xi_a = -phi_a", "Eq. (sasaki)", families=(SASAKIAN,))
def _nabla_xi(ctx):
    lc = ctx.model.levi_civita
    D = [lc.nabla_vector(x) for x in ctx.S.xis]
    return _over(ctx.points, lambda p: max(_maxabs(D[a].at(p) + ctx.S.phis[a].at(p)) for a in range(3)))


@check("cosymplectic-parallel-tensors", "structure", "nabla phi_a = 0, nabla xi_a = 0, nabla Phi_a = 0",
       "preliminaries, 3-cosymplectic parallel structure", families=(COSYMPLECTIC,))
def _parallel(ctx):
    lc = ctx.model.levi_civita
    fs = ([lc.nabla_endo(f) for f in ctx.S.phis] + [lc.nabla_vector(x) for x in ctx.S.xis]
          + [lc.nabla_cov2(Ph) for Ph in ctx.S.Phis])
    return _over(ctx.points, lambda p: max(_maxabs(f.at(p)) for f in fs))


@check("reeb-commutators", "structure",
       "[xi_a, xi_b] = 2 sum eps xi_c (3-Sasakian) or 0 (3-cosymplectic)", "Eq. (commutatore)")
def _commutators(ctx):
    k = 2.0 if ctx.is_sasakian else 0.0
    br = {(a, b): F.lie_bracket(ctx.S.xis[a], ctx.S.xis[b]) for a in range(3) for b in range(3)}

    def one(p):
        V = [x.at(p) for x in ctx.S.xis]
        return max(_maxabs(br[(a, b)].at(p) - k * sum(EPS[a, b, c] * V[c] for c in range(3)))
                   for a in range(3) for b in range(3))
    return _over(ctx.points, one)


@check("killing-reeb", "structure", "L_{xi_a} g = 0", "preliminaries, Reeb fields are Killing")
def _killing(ctx):
    return max(rm.is_killing(x, ctx.S.g, ctx.points, ctx.base_tol)[1] for x in ctx.S.xis), len(ctx.points)


@check("lie-derivative-phi", "structure",
       "L_{xi_a} phi_b = 2 sum eps phi_c (3-Sasakian) or 0 (3-cosymplectic)", "Lemma (derivatalie1), Eq. (derivatalie2)")
def _lie(ctx):
    return c3.lie_phi_residual(ctx.S, ctx.points, 2.0 if ctx.is_sasakian else 0.0), len(ctx.points)


@check("basic-horizontal-brackets", "structure", "eta_b([X, xi_a]) = 0 for 16 seeded horizontal X",
       "Lemma (basici)")
def _basici(ctx):
    Xs = ctx.horizontal_fields(11, 16)
    pts = ctx.subset(8)
    return c3.basic_bracket_residual(ctx.S, Xs, pts), len(pts)


@check("horizontal-integrable", "structure", "eta_a([X, Y]) = 0 for seeded horizontal X, Y",
       "canonical connection, H integrable on 3-cosymplectic manifolds", families=(COSYMPLECTIC,))
def _integrable(ctx):
    Xs = ctx.horizontal_fields(12, 6)
    brs = [F.lie_bracket(Xs[i], Xs[j]) for i in range(len(Xs)) for j in range(i + 1, len(Xs))]
    pts = ctx.subset(8)
    return _over(pts, lambda p: max(abs(float(w.at(p) @ b.at(p))) for w in ctx.S.etas for b in brs))


@check("horizontal-nonintegrability-witness", "structure",
       "shortfall of max |eta_a([X, Y])| below 0.1 over seeded horizontal X, Y",
       "canonical connection, H never integrable on 3-Sasakian manifolds", families=(SASAKIAN,), tolerance=0.0)
def _nonintegrable(ctx):
    Xs = ctx.horizontal_fields(12, 6)
    brs = [F.lie_bracket(Xs[i], Xs[j]) for i in range(len(Xs)) for j in range(i + 1, len(Xs))]
    pts = ctx.subset(4)
    best = max(abs(float(w.at(p) @ b.at(p))) for p in pts for w in ctx.S.etas for b in brs)
    return max(0.0, 0.1 - best), len(pts)


def _fd_oracle(ctx, count: int = 16, h: float = 1e-5) -> float:
    """Worst relative gap between jet first/second derivatives and central
    differences of the structure fields at seeded spot checks."""
    rng = ctx.rng(1010)
    fs = [ctx.S.g] + list(ctx.S.phis) + list(ctx.S.xis) + list(ctx.S.etas)
    lc = ctx.model.levi_civita.coefficients
    worst = 0.0
    m = ctx.model.dim
    for t in range(count):
        p = ctx.points[t % len(ctx.points)]
        f = fs[t % len(fs)]
        i = int(rng.integers(m))
        e = np.zeros(m)
        e[i] = h
        jet = f(p, 2)
        fd1 = (f.at(p + e) - f.at(p - e)) / (2 * h)
        d1 = jet.coeffs[1][..., i]
        worst = max(worst, _maxabs(d1 - fd1) / max(1.0, _maxabs(d1)))
        # second derivative through the first-order jets
        fd2 = (f(p + e, 1).coeffs[1] - f(p - e, 1).coeffs[1]) / (2 * h)
        d2 = jet.coeffs[2][..., i]
        worst = max(worst, _maxabs(d2 - fd2) / max(1.0, _maxabs(d2)))
        # Christoffel symbols, whose derivatives feed curvature
        fdc = (lc.at(p + e) - lc.at(p - e)) / (2 * h)
        dc = lc(p, 1).coeffs[1][..., i]
        worst = max(worst, _maxabs(dc - fdc) / max(1.0, _maxabs(dc)))
    return worst


@check("jet-finite-difference-oracle", "structure",
       "jet derivatives of g, phi, xi, eta and Christoffel symbols vs central differences (16 spot checks, relative)",
       "artifact: differentiation substrate", tolerance=1e-6)
def _oracle(ctx):
    return _fd_oracle(ctx), 16


# -- connection ---------------------------------------------------------------


@check("levi-civita-torsion-free", "connection", "T(X, Y) = 0 for the Levi-Civita connection",
       "Theorem (sasakiano) proof, Koszul formula")
def _lc_torsion(ctx):
    T = ctx.model.levi_civita.torsion_components()
    return _over(ctx.points, lambda p: _maxabs(T.at(p)))


@check("levi-civita-metric", "connection", "nabla g = 0", "Theorem (sasakiano) proof, Koszul formula")
def _lc_metric(ctx):
    D = ctx.model.levi_civita.nabla_cov2(ctx.S.g)
    return _over(ctx.points, lambda p: _maxabs(D.at(p)))


def _axioms(ctx):
    key = "_axiom_cache"
    if key not in ctx.__dict__:
        ctx.__dict__[key] = cn.axiom_residuals(ctx.canonical, ctx.S, ctx.points)
    return ctx.__dict__[key]


@check("canonical-reeb-parallel", "connection", "nabla~ xi_a = 0", "Theorem (connessione) (i)")
def _ax1(ctx):
    return _axioms(ctx)["i_reeb_parallel"], len(ctx.points)


@check("canonical-horizontal-metric", "connection", "(nabla~_Z g)(X, Y) = 0 for horizontal X, Y, Z",
       "Theorem (connessione) (ii)")
def _ax2(ctx):
    return _axioms(ctx)["ii_horizontal_metric"], len(ctx.points)


@check("canonical-torsion-axiom", "connection",
       "T~(X, Y) = 2 sum d eta_a(X, Y) xi_a and T~(X, xi_a) = 0 for horizontal X, Y", "Theorem (connessione) (iii)")
def _ax3(ctx):
    r = _axioms(ctx)
    return max(r["iii_torsion_horizontal"], r["iii_torsion_mixed"]), len(ctx.points)


def _torsion(ctx):
    key = "_torsion_cache"
    if key not in ctx.__dict__:
        ctx.__dict__[key] = cn.check_torsion(ctx.canonical, ctx.points, ctx.base_tol).residuals
    return ctx.__dict__[key]


@check("torsion-horizontal-formula", "connection", "T~(X, Y) = 2 sum d eta_a(X, Y) xi_a for horizontal X, Y",
       "Prop. (torsion)")
def _t1(ctx):
    return _torsion(ctx)["horizontal"], len(ctx.points)


@check("torsion-mixed-vanishes", "connection", "T~(X, xi_a) = 0 for horizontal X", "Prop. (torsion)")
def _t2(ctx):
    return _torsion(ctx)["mixed"], len(ctx.points)


@check("torsion-vertical-bracket", "connection", "T~(xi_a, xi_b) = [xi_b, xi_a]", "Prop. (torsion)")
def _t3(ctx):
    return _torsion(ctx)["vertical"], len(ctx.points)


@check("torsion-all-pairs", "connection",
       "T~(E, F) = 2 sum d eta_a(E, F) xi_a for all E, F (vertical distribution integrable)",
       "Corollary after Prop. (torsion)")
def _t4(ctx):
    return _torsion(ctx)["all_pairs"], len(ctx.points)


@check("canonical-metric-compat", "connection", "nabla~ g = 0, observed together with the Killing property of xi_a",
       "Prop. (metric)")
def _compat(ctx):
    r = cn.check_metric_compat(ctx.canonical, ctx.points, ctx.base_tol).residuals
    return max(r.values()), len(ctx.points)


@check("canonical-eta-parallel", "connection", "nabla~ eta_a = 0 together with d eta_a(X, xi_b) = 0",
       "Prop. (metric), Lemma (basici) proof")
def _eta_par(ctx):
    return cn.check_eta_parallel(ctx.canonical, ctx.points, ctx.base_tol).max_residual, len(ctx.points)


@check("nabla-tilde-phi", "connection",
       "(nabla~_E phi_a) F = -sum eps (eta_b(E) phi_c F^h - eta_c(E) phi_b F^h) (3-Sasakian) or 0 (3-cosymplectic)",
       "Theorem (connessione), Eq. (uno1)", tolerance=lambda c: 1e-6 if c.is_sasakian else c.base_tol)
def _uno1(ctx):
    rep = cn.check_nabla_tilde_phi(ctx.canonical, ctx.points, 1e-6, ctx.family)
    return rep.max_residual, len(ctx.points)


@check("nabla-tilde-phi-xi2-special", "connection", "(nabla~_{xi_2} phi_1) X = -2 phi_3 X for horizontal X",
       "Theorem (connessione) proof", families=(SASAKIAN,), tolerance=1e-6)
def _uno1_special(ctx):
    return _over(ctx.points, lambda p: cn.xi2_phi1_special(ctx.canonical, p))


@check("canonical-equals-levi-civita", "connection", "nabla~ = nabla (coefficient difference)",
       "Theorem (connessione), 3-cosymplectic case", families=(COSYMPLECTIC,), tolerance=1e-12)
def _equal_lc(ctx):
    Ct, C = ctx.canonical.coefficients, ctx.model.levi_civita.coefficients
    return _over(ctx.points, lambda p: _maxabs(Ct.at(p) - C.at(p)))


@check("canonical-operator-agreement", "connection",
       "nabla~ from coefficients agrees with the defining operator formula on seeded fields",
       "Eq. (canonica)")
def _operator(ctx):
    rng = ctx.rng(21)
    m = ctx.model.dim
    x = F.coordinate_function(int(rng.integers(m)), m)
    E = F.constant(rng.normal(size=m), "vector", m) * (x * x)
    Fv = F.constant(rng.normal(size=m), "vector", m) * x + ctx.S.xis[int(rng.integers(3))]
    a = ctx.canonical.covariant_derivative(E, Fv)
    b = ctx.canonical.operator_derivative(E, Fv)
    pts = ctx.subset(8)
    return _over(pts, lambda p: _maxabs(a.at(p) - b.at(p)))


# -- curvature -----------------------------------------------------------------


def _einstein_constant(ctx) -> float:
    return 2.0 * (2 * ctx.model.n + 1) if ctx.is_sasakian else 0.0


def _scal_target(ctx) -> float:
    n = ctx.model.n
    return 2.0 * (2 * n + 1) * (4 * n + 3) if ctx.is_sasakian else 0.0


@check("riemann-flat-vanishes", "curvature", "R = 0", "Theorem (cosimplettico), flat model",
       families=(COSYMPLECTIC,), tolerance=1e-12)
def _flat(ctx):
    return _over(ctx.points, lambda p: _maxabs(ctx.model.curvature.components(p)))


@check("ricci-einstein", "curvature", "Ric = (scal / dim) g: 2(2n+1) g on the sphere, 0 on flat models",
       "Corollary (Ricci-flat); Theorem (proiezione) (i)",
       tolerance=lambda c: 1e-6 if c.is_sasakian else 1e-12)
def _ricci(ctx):
    k = _einstein_constant(ctx)
    return _over(ctx.points, lambda p: _maxabs(rm.ricci(ctx.model.curvature, ctx.S.g, p) - k * ctx.S.g.at(p)))


@check("scalar-curvature-total", "curvature", "|scal - 2(2n+1)(4n+3)| on the sphere, |scal| on flat models",
       "Theorem (proiezione) (i)",
       tolerance=lambda c: (1e-5 if c.model.n == 1 else 1e-4) if c.is_sasakian else 1e-12)
def _scal(ctx):
    t = _scal_target(ctx)
    return _over(ctx.points, lambda p: abs(rm.scalar_curvature(ctx.model.curvature, ctx.S.g, p) - t))


@check("ricci-frame-independence", "curvature", "Ric from two seeded orthonormal frames agrees",
       "Corollary (Ricci-flat), basis independence", tolerance=1e-10)
def _frames(ctx):
    rng = ctx.rng(31)
    pts = ctx.subset(8)

    def one(p):
        G = ctx.S.g.at(p)
        a = rm.ricci(ctx.model.curvature, ctx.S.g, p, rm.random_orthonormal_frame(G, rng))
        b = rm.ricci(ctx.model.curvature, ctx.S.g, p, rm.random_orthonormal_frame(G, rng))
        return _maxabs(a - b)
    return _over(pts, one)


@check("first-bianchi", "curvature", "R_XY Z + R_YZ X + R_ZX Y = 0", "riemann: Levi-Civita curvature")
def _bianchi(ctx):
    def one(p):
        R = ctx.model.curvature.components(p)  # [i, j, k, l] = (R(d_k, d_l) d_j)^i
        return _maxabs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2))
    return _over(ctx.points, one)


@check("vertical-sectional-curvature", "curvature", "g(R_{xi_1 xi_2} xi_2, xi_1) = 1",
       "preliminaries, leaves of constant curvature 1", families=(SASAKIAN,), tolerance=1e-6)
def _vertical(ctx):
    def one(p):
        return max(abs(rm.sectional_curvature(ctx.model.curvature, ctx.S.g, ctx.S.xis[a], ctx.S.xis[b], p) - 1.0)
                   for a, b in ((0, 1), (0, 2), (1, 2)))
    return _over(ctx.points, one)


@check("curvature-operator-crosscheck", "curvature",
       "nested nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z agrees with the coefficient formula",
       "Prop. (curvatura1) proof structure", tolerance=lambda c: 1e-8 if c.is_sasakian else 1e-10)
def _nested(ctx):
    rng = ctx.rng(41)
    m = ctx.model.dim
    x = F.coordinate_function(int(rng.integers(m)), m)
    X = F.constant(rng.normal(size=m), "vector", m) * x
    Y = F.constant(rng.normal(size=m), "vector", m)
    Z = F.constant(rng.normal(size=m), "vector", m) * (x * x)
    nested = rm.curvature_operator(ctx.model.levi_civita, X, Y, Z)
    pts = ctx.subset(4)
    return _over(pts, lambda p: _maxabs(nested.at(p) - ctx.model.curvature(X, Y, Z, p)))


def _curv(ctx):
    key = "_curv_cache"
    if key not in ctx.__dict__:
        ctx.__dict__[key] = cn.check_curvature(ctx.canonical, ctx.subset(8), 1e-6, seed=ctx.seed).residuals
    return ctx.__dict__[key]


@check("canonical-curvature-reeb", "curvature", "R~_EF xi_a = 0", "Prop. (curvatura1)", tolerance=1e-6)
def _rt1(ctx):
    return _curv(ctx)["R_EF_xi"], len(ctx.subset(8))


@check("canonical-curvature-reeb-pair", "curvature", "R~_{xi_a xi_b} = 0", "Prop. (curvatura1)", tolerance=1e-6)
def _rt2(ctx):
    return _curv(ctx)["R_xi_xi"], len(ctx.subset(8))


@check("canonical-curvature-basic-mixed", "curvature",
       "R~_{X xi_a} Y = 0 for horizontal X, Y (pointwise, licensed by tensoriality; basic-field statement)",
       "Prop. (curvatura1)", tolerance=1e-6)
def _rt3(ctx):
    return _curv(ctx)["R_X_xi"], len(ctx.subset(8))


@check("curvature-formula-printed", "curvature",
       "R~_XY Z = (R_XY Z)^h + sum (d eta_a(Y, Z) phi_a X - d eta_a(X, Z) phi_a Y) as printed",
       "Eq. (formulacurvatura)", families=(SASAKIAN,), tolerance=1e-6)
def _rt4(ctx):
    return _curv(ctx)["formula_printed"], len(ctx.subset(8))


@check("curvature-formula-derived", "curvature",
       "R~_XY Z = (R_XY Z)^h + sum (d eta_a(X, Z) phi_a Y - d eta_a(Y, Z) phi_a X + 2 d eta_a(X, Y) phi_a Z)",
       "Eq. (formulacurvatura), rederived", tolerance=1e-6)
def _rt5(ctx):
    return _curv(ctx)["formula_derived"], len(ctx.subset(8))


@check("horizontal-scalar-curvature", "curvature",
       "|sum g(R~_{X_i X_j} X_j, X_i) - 16n(n+2)| over an orthonormal horizontal frame (0 on flat models)",
       "Theorem (proiezione) (iii)", tolerance=lambda c: 1e-4 if c.is_sasakian else 1e-12)
def _hscal(ctx):
    t = 16.0 * ctx.model.n * (ctx.model.n + 2) if ctx.is_sasakian else 0.0
    pts = ctx.subset(8)
    return _over(pts, lambda p: abs(cn.horizontal_scalar_curvature(ctx.canonical, p) - t))


@check("nonflatness-witness", "curvature",
       "shortfall of the horizontal canonical scalar curvature below 1 (strict positivity witness)",
       "Theorem (sasakiano) proof", families=(SASAKIAN,), tolerance=0.0)
def _witness(ctx):
    pts = ctx.subset(8)
    return _over(pts, lambda p: max(0.0, 1.0 - M.sphere_nonflatness_witness(ctx.model, p)))


# -- musical -------------------------------------------------------------------


@check("musical-g-roundtrip", "musical", "g-sharp o g-flat = id on seeded vectors",
       "musical isomorphisms", tolerance=lambda c: 1e-9 if c.is_sasakian else 1e-12)
def _g_round(ctx):
    rng = ctx.rng(51)
    m = ctx.model.dim
    Vs = [F.constant(rng.normal(size=m), "vector", m) for _ in range(4)]
    outs = [(V, F.musical_sharp(ctx.S.g, F.musical_flat(ctx.S.g, V))) for V in Vs]
    return _over(ctx.points, lambda p: max(_maxabs(W.at(p) - V.at(p)) for V, W in outs))


@check("form-musical-roundtrip", "musical", "Phi_a-sharp o Phi_a-flat = id on H", "musical isomorphisms")
def _form_round(ctx):
    return c3.verify_lemma_antonio(ctx.S, ctx.points, ctx.base_tol)["sharp_flat_roundtrip"], len(ctx.points)


def _lemma(ctx):
    key = "_lemma_cache"
    if key not in ctx.__dict__:
        ctx.__dict__[key] = c3.verify_lemma_antonio(ctx.S, ctx.points, ctx.base_tol).residuals
    return ctx.__dict__[key]


@check("lemma-g-flat-from-phi", "musical", "g_H-flat = Phi_a-flat o phi_a^H", "Lemma (antonio), Eq. (formulaantonio)")
def _l1(ctx):
    return _lemma(ctx)["g_flat_from_phi"], len(ctx.points)


@check("lemma-phi-from-forms", "musical", "phi_a^H = -1/2 sum eps Phi_b-sharp o Phi_c-flat",
       "Lemma (antonio), Eq. (formulaantonio)")
def _l2(ctx):
    return _lemma(ctx)["phi_from_forms"], len(ctx.points)


@check("corollary-g-flat-product", "musical", "g_H-flat = -Phi_1-flat o Phi_2-sharp o Phi_3-flat and "
       "Phi_2-flat o phi_3^H = -Phi_3-flat o phi_2^H", "Cor. (antonio2)")
def _l3(ctx):
    r = _lemma(ctx)
    return max(r["g_flat_corollary"], r["phi2_phi3_antisymmetry"]), len(ctx.points)


@check("metric-reconstruction-banyaga", "musical",
       "g rebuilt from Phi_1, Phi_2, Phi_3 and the Reeb data equals the model metric",
       "Cor. (antonio2) and concluding Remark")
def _banyaga(ctx):
    pts = ctx.subset(16)
    return _over(pts, lambda p: _maxabs(c3.recover_metric_at(ctx.S, p) - ctx.S.g.at(p)))


@check("darboux-forms-convention", "musical",
       "derived Phi_a in Darboux coordinates equal the printed forms with the horizontal block negated",
       "Eqs. (Phiprima)-(Phiterza), (matrice1)-(matrice3)", families=(COSYMPLECTIC,),
       only=lambda m: m.name == "flat3cos")
def _forms(ctx):
    table = M.darboux_table(ctx.model.n, "structural")
    return _over(ctx.points, lambda p: max(_maxabs(ctx.S.Phis[a].at(p) - table[a]) for a in range(3)))


# -- darboux -------------------------------------------------------------------


def _darboux_tol(ctx) -> float:
    return max(1e-6, ctx.base_tol)


@check("darboux-frame-constants", "darboux",
       "Phi_a on the transported frame equal the structural Darboux constants",
       "Eq. block (prima3)-(ultima3)", families=(COSYMPLECTIC,), tolerance=_darboux_tol)
def _d1(ctx):
    table = M.darboux_table(ctx.model.n, "structural")
    pts = ctx.darboux_points(4)
    return _over(pts, lambda q: _maxabs(ctx.darboux.form_values(q) - table))


@check("darboux-frame-orthonormal", "darboux", "transported frame is g-orthonormal",
       "Theorem (cosimplettico) proof", families=(COSYMPLECTIC,), tolerance=_darboux_tol)
def _d2(ctx):
    pts = ctx.darboux_points(4)
    return _over(pts, ctx.darboux.orthonormality_residual)


@check("darboux-phi-relations", "darboux", "Y_i = phi_1 X_i, U_i = phi_2 X_i, V_i = phi_3 X_i",
       "Eq. (fi)", families=(COSYMPLECTIC,), tolerance=_darboux_tol)
def _d3(ctx):
    pts = ctx.darboux_points(4)
    return _over(pts, ctx.darboux.phi_relation_residual)


@check("darboux-frame-brackets", "darboux", "pairwise Lie brackets of the frame vanish",
       "Theorem (cosimplettico) proof", families=(COSYMPLECTIC,), tolerance=_darboux_tol)
def _d4(ctx):
    pts = ctx.darboux_points(2)
    return _over(pts, ctx.darboux.bracket_residual)


@check("darboux-precondition-sphere", "darboux",
       "Darboux construction rejects the sphere (1 if no flatness error is raised)",
       "Theorem (sasakiano)", families=(SASAKIAN,), tolerance=0.0)
def _d5(ctx):
    try:
        M.build_darboux_frame(ctx.model, ctx.points[0], ctx.ode_steps)
    except M.NotFlatError:
        return 0.0, 1
    return 1.0, 1


def catalog() -> list:
    return list(REGISTRY)


def select(model: M.Model, suite: str = "all") -> list:
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return [c for c in REGISTRY if (suite == "all" or c.suite == suite) and c.applies(model)]


@dataclass
class CheckResult:
    id: str
    description: str
    paper_ref: str
    max_residual: float
    tolerance: float
    passed: bool
    points_sampled: int
    error: str = ""


def run_check(c: Check, ctx: Context) -> CheckResult:
    """Run one check; exceptions become a failed result with infinite residual."""
    tol = c.tol(ctx)
    try:
        value, count = c.run(ctx)
        value = float(value)
        error = ""
    except Exception as exc:  # a failing check must never crash the report
        value, count, error = math.inf, 0, f"{type(exc).__name__}: {exc}"
    passed = bool(np.isfinite(value) and value <= tol)
    return CheckResult(c.id, c.description, c.paper_ref, value, tol, passed, int(count), error)


__all__ = ["REGISTRY", "SUITES", "Check", "CheckResult", "Context", "catalog", "check", "run_check", "select"]
