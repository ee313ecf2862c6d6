"""Concrete 3-structures: the flat 3-cosymplectic model, the round 3-Sasakian
sphere in a stereographic chart, coordinate changes of them, and the
parallel-transport construction of Darboux frames on flat models.

Flat chart ordering: ``x_1..x_n, y_1..y_n, u_1..u_n, v_1..v_n, z_1, z_2, z_3``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import contact3 as c3
from . import fields as F
from . import jets
from . import riemann
from .fields import Field
from .jets import Jet, contract

SPHERE_RADIUS = 2.0

CONVENTIONS_FLAT = {
    "wedge": "half: (a^b)(X,Y) = (a(X)b(Y) - a(Y)b(X))/2, d eta(X,Y) = (X eta(Y) - Y eta(X) - eta([X,Y]))/2",
    "matrix_reading": (
        "column action, phi[i, j] = phi^i_j (printed matrices used as given); "
        "derived Phi = g(., phi .) matches the printed Darboux forms on the vertical block "
        "and is their negative on the horizontal block"
    ),
    "quaternion_side": "not applicable (constant structure)",
}

CONVENTIONS_SPHERE = {
    "wedge": CONVENTIONS_FLAT["wedge"],
    "matrix_reading": "not applicable (structure pulled back from the ambient quaternionic space)",
    "quaternion_side": (
        "right multiplication by conjugate units, J_a x = x * conj(e_a); "
        "xi_a = tangential part of -J_a x, phi_a = tangential part of J_a"
    ),
}


class ChartError(ValueError):
    """Point outside the usable part of a chart."""


class NotFlatError(ValueError):
    """Darboux construction requested on a non-flat model."""


@dataclass(frozen=True)
class Model:
    name: str
    n: int
    structure: c3.AlmostContactMetric3Structure
    family: str
    conventions: dict
    chart_radius: float | None = None

    @property
    def dim(self) -> int:
        return 4 * self.n + 3

    @property
    def g(self) -> Field:
        return self.structure.g

    @functools.cached_property
    def levi_civita(self) -> riemann.AffineConnection:
        return riemann.levi_civita(self.g)

    @functools.cached_property
    def curvature(self) -> riemann.CurvatureTensor:
        return riemann.riemann_curvature(self.levi_civita)

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,) or not np.all(np.isfinite(p)):
            raise ChartError(f"chart point must be a finite vector of length {self.dim}")
        if self.chart_radius is not None and np.linalg.norm(p) > self.chart_radius:
            raise ChartError(f"|u| = {np.linalg.norm(p):.3f} exceeds chart radius {self.chart_radius}")
        return p

    def sample(self, count: int, seed: int) -> list:
        return sample_points(self, count, seed)


class FlatModel(Model):
    pass


class SphereModel(Model):
    pass


@dataclass(frozen=True)
class ChartMap:
    """Coordinate change ``x = point(w)`` from new coordinates w to old x.

    ``jacobian(w)`` returns the jet of ``Dx/Dw`` (``[i, a] = dx_i / dw_a``) at
    the same order as ``w``, so pullbacks do not spend an extra jet order.
    """

    point: Callable[[Jet], Jet]
    jacobian: Callable[[Jet], Jet]
    name: str = ""


@dataclass(frozen=True)
class ScrambledFlatModel(FlatModel):
    chart: ChartMap | None = None
    base: Model | None = None
    to_new: Callable | None = None


# -- flat model ---------------------------------------------------------------


def _blocks(n: int) -> dict:
    return {"x": 0, "y": n, "u": 2 * n, "v": 3 * n, "z": 4 * n}


def flat_phi_matrices(n: int) -> list:
    """phi_1, phi_2, phi_3 of the flat model as column-action matrices."""
    m = 4 * n + 3
    b = _blocks(n)
    z1, z2, z3 = b["z"], b["z"] + 1, b["z"] + 2
    # images of basis vectors: (source block, target block, sign)
    maps = [
        [("x", "y", 1), ("y", "x", -1), ("u", "v", 1), ("v", "u", -1)],
        [("x", "u", 1), ("y", "v", -1), ("u", "x", -1), ("v", "y", 1)],
        [("x", "v", 1), ("y", "u", 1), ("u", "y", -1), ("v", "x", -1)],
    ]
    vertical = [[(z2, z3, 1), (z3, z2, -1)], [(z1, z3, -1), (z3, z1, 1)], [(z1, z2, 1), (z2, z1, -1)]]
    out = []
    for a in range(3):
        A = np.zeros((m, m))
        for src, dst, sign in maps[a]:
            for i in range(n):
                A[b[dst] + i, b[src] + i] = sign
        for src, dst, sign in vertical[a]:
            A[dst, src] = sign
        out.append(A)
    return out


def coordinate_labels(n: int) -> list:
    return ([f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
            + [f"u{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["z1", "z2", "z3"])


def make_flat(n: int) -> FlatModel:
    """Flat 3-cosymplectic structure on R^{4n+3} with eta_a = dz_a, g = I."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 4 * n + 3
    z = 4 * n
    phis = tuple(F.constant(A, "endo", m, name=f"phi{a + 1}") for a, A in enumerate(flat_phi_matrices(n)))
    xis = tuple(F.coordinate_vector(z + a, m) for a in range(3))
    etas = tuple(F.coordinate_differential(z + a, m) for a in range(3))
    g = F.constant(np.eye(m), "metric", m, name="g")
    S = c3.AlmostContactMetric3Structure(phis, xis, etas, g, name=f"flat3cos(n={n})")
    return FlatModel(f"flat3cos", n, S, "3-cosymplectic", dict(CONVENTIONS_FLAT))


def printed_darboux_forms(n: int) -> list:
    """Components of the three Darboux 2-forms exactly as printed, half wedge."""
    m = 4 * n + 3
    b = _blocks(n)
    e = np.eye(m)
    dx = lambda blk, i: e[b[blk] + i]  # noqa: E731
    dz = lambda a: e[b["z"] + a - 1]  # noqa: E731
    w = F.wedge_constant
    P1 = sum(2 * (w(dx("x", i), dx("y", i)) + w(dx("u", i), dx("v", i))) for i in range(n)) - 2 * w(dz(2), dz(3))
    P2 = sum(2 * (w(dx("x", i), dx("u", i)) - w(dx("y", i), dx("v", i))) for i in range(n)) + 2 * w(dz(1), dz(3))
    P3 = sum(2 * (w(dx("x", i), dx("v", i)) + w(dx("y", i), dx("u", i))) for i in range(n)) - 2 * w(dz(1), dz(2))
    return [P1, P2, P3]


def darboux_table(n: int, convention: str = "structural") -> np.ndarray:
    """Expected Phi_a(F_i, F_j) on a Darboux frame ordered (X, Y, U, V, xi).

    ``"printed"`` returns the constants as printed; ``"structural"`` returns
    the values forced by Phi(E, F) = g(E, phi F) with Y = phi_1 X, U = phi_2 X,
    V = phi_3 X, which differ from the printed ones by a sign on the
    horizontal block.
    """
    printed = np.array(printed_darboux_forms(n))
    if convention == "printed":
        return printed
    if convention != "structural":
        raise ValueError(f"unknown convention {convention!r}")
    k = 4 * n
    out = printed.copy()
    out[:, :k, :k] *= -1.0
    return out


# -- round sphere -------------------------------------------------------------


def _quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def right_multiplication(r: np.ndarray) -> np.ndarray:
    """4x4 matrix of x -> x * r on quaternions (1, i, j, k)."""
    return np.column_stack([_quat_mul(e, r) for e in np.eye(4)])


def sphere_complex_structures(n: int) -> list:
    """J_1, J_2, J_3 on H^{n+1}: right multiplication by -i, -j, -k."""
    out = []
    for a in range(3):
        unit = np.zeros(4)
        unit[a + 1] = -1.0
        out.append(np.kron(np.eye(n + 1), right_multiplication(unit)))
    return out


class _SphereChart:
    """Inverse stereographic chart and the pulled-back structure, memoized
    per (point, order) so all structure fields share one computation."""

    def __init__(self, n: int):
        self.n = n
        self.m = 4 * n + 3
        self.J = sphere_complex_structures(n)
        self._cache: dict = {}

    def bundle(self, p: np.ndarray, K: int) -> dict:
        key = (p.tobytes(), K)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if len(self._cache) > 256:
            self._cache.clear()
        m = self.m
        u = jets.lift_point(p, K)
        s = contract("i,i->", u, u)
        lam = jets.reciprocal(s + 1.0) * 2.0
        lam2 = lam * lam
        X = Jet.concatenate([u * lam, (1.0 - lam).reshape(1)])
        D = Jet.concatenate([lam * np.eye(m) - jets.outer(u, u) * lam2, (u * lam2).reshape(1, m)])
        G = contract("ai,aj->ij", D, D)
        Ginv = jets.inv(G)
        out = {"metric": G, "point": X}
        for a, J in enumerate(self.J):
            xi = contract("ij,j->i", Ginv, contract("ai,a->i", D, -jets.linear(J, X)))
            out[f"xi{a}"] = xi
            out[f"eta{a}"] = contract("ij,j->i", G, xi)
            out[f"phi{a}"] = contract("ij,jk->ik", Ginv, contract("ai,ak->ik", D, jets.linear(J, D)))
        self._cache[key] = out
        return out

    def field(self, key: str, kind: str, name: str) -> Field:
        return Field(lambda p, K: self.bundle(p, K)[key], kind, self.m, name=name)


def conformal_factor(p) -> float:
    """4 / (1 + |u|^2)^2, the round metric in stereographic coordinates."""
    s = float(np.dot(p, p))
    return 4.0 / (1.0 + s) ** 2


def make_sphere(n: int) -> SphereModel:
    """Round unit S^{4n+3} with its standard 3-Sasakian structure."""
    if n < 1:
        raise ValueError("n must be >= 1")
    chart = _SphereChart(n)
    phis = tuple(chart.field(f"phi{a}", "endo", f"phi{a + 1}") for a in range(3))
    xis = tuple(chart.field(f"xi{a}", "vector", f"xi{a + 1}") for a in range(3))
    etas = tuple(chart.field(f"eta{a}", "form", f"eta{a + 1}") for a in range(3))
    g = chart.field("metric", "metric", "g")
    S = c3.AlmostContactMetric3Structure(phis, xis, etas, g, name=f"sphere3sas(n={n})")
    return SphereModel("sphere3sas", n, S, "3-sasakian", dict(CONVENTIONS_SPHERE), chart_radius=SPHERE_RADIUS)


# -- coordinate changes ---------------------------------------------------------


def _pulled(f: Field, chart: ChartMap, transform) -> Field:
    def evaluate(w, K):
        wj = jets.lift_point(w, K)
        xj = chart.point(wj)
        fo = jets.compose(f(xj.value, K), xj)
        return transform(fo, chart.jacobian(wj))

    return Field(evaluate, f.kind, f.dim, f.degree, name=f.name)


def pullback(f: Field, chart: ChartMap) -> Field:
    """Express a field of the old chart in the new coordinates."""
    if f.kind == "vector":
        return _pulled(f, chart, lambda V, DF: contract("ai,i->a", jets.inv(DF), V))
    if f.kind == "form" and f.degree == 1:
        return _pulled(f, chart, lambda W, DF: contract("ia,i->a", DF, W))
    if f.kind == "endo":
        return _pulled(f, chart, lambda A, DF: contract("ai,ib->ab", jets.inv(DF), contract("ij,jb->ib", A, DF)))
    if f.kind in ("metric", "sym2") or (f.kind == "form" and f.degree == 2):
        return _pulled(f, chart, lambda G, DF: contract("ia,ib->ab", DF, contract("ij,jb->ib", G, DF)))
    if f.kind == "scalar":
        return _pulled(f, chart, lambda s, DF: s)
    raise TypeError(f"no pullback rule for {f.kind} fields of degree {f.degree}")


def reparametrize(model: Model, chart: ChartMap, name: str | None = None, to_new: Callable | None = None) -> ScrambledFlatModel:
    S = model.structure
    S2 = c3.AlmostContactMetric3Structure(
        tuple(pullback(f, chart) for f in S.phis),
        tuple(pullback(f, chart) for f in S.xis),
        tuple(pullback(f, chart) for f in S.etas),
        pullback(S.g, chart),
        name=f"{S.name}/{chart.name}",
    )
    return ScrambledFlatModel(name or f"{model.name}-{chart.name}", model.n, S2, model.family,
                              dict(model.conventions), model.chart_radius, chart=chart, base=model, to_new=to_new)


def affine_chart(A: np.ndarray, b: np.ndarray, name: str = "affine") -> ChartMap:
    """x = A w + b."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    return ChartMap(lambda wj: jets.linear(A, wj) + Jet.constant(b, wj.dim, wj.order),
                    lambda wj: Jet.constant(A, wj.dim, wj.order), name)


def random_orthogonal(m: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(m, m)))
    return Q * np.sign(np.diag(R))


def scramble(model: Model, seed: int, rotation: np.ndarray | None = None,
             translation: np.ndarray | None = None) -> ScrambledFlatModel:
    """Model in coordinates y = Q x + t for a seeded orthogonal Q and shift t."""
    rng = np.random.default_rng(seed)
    m = model.dim
    Q = random_orthogonal(m, rng) if rotation is None else np.asarray(rotation, dtype=float)
    t = rng.uniform(-0.5, 0.5, size=m) if translation is None else np.asarray(translation, dtype=float)
    chart = affine_chart(Q.T, -Q.T @ t, name="scrambled")
    return reparametrize(model, chart, name=f"{model.name}-scrambled", to_new=lambda x: Q @ x + t)


def warp(model: Model, amplitude: float = 0.2, seed: int = 0) -> ScrambledFlatModel:
    """Nonlinear coordinate change x_i = w_i + a sin(w_{s(i)}) for a seeded
    cyclic shift s; invertible for |a| < 1."""
    if not abs(amplitude) < 1.0:
        raise ValueError("warp amplitude must be below 1 for invertibility")
    rng = np.random.default_rng(seed)
    m = model.dim
    shift = int(rng.integers(1, m))
    P = np.roll(np.eye(m), shift, axis=1)

    def point(wj):
        return wj + jets.sin(jets.linear(P, wj)) * amplitude

    def jacobian(wj):
        c = jets.cos(jets.linear(P, wj))
        return Jet.constant(np.eye(m), m, wj.order) + contract("i,ij->ij", c, Jet.constant(P, m, wj.order)) * amplitude

    return reparametrize(model, ChartMap(point, jacobian, "warped"), name=f"{model.name}-warped")


# -- sampling -------------------------------------------------------------------


def sample_points(model: Model, count: int, seed: int) -> list:
    """Seeded chart points: uniform in [-1, 1]^m for flat charts, uniform in the
    ball |u| <= 2 for the sphere chart."""
    rng = np.random.default_rng(seed)
    m = model.dim
    if model.chart_radius is None:
        return [rng.uniform(-1.0, 1.0, size=m) for _ in range(count)]
    out = []
    for _ in range(count):
        d = rng.normal(size=m)
        d /= np.linalg.norm(d)
        out.append(d * model.chart_radius * rng.uniform() ** (1.0 / m))
    return out


# -- Darboux frames -------------------------------------------------------------


def darboux_seed(S: c3.AlmostContactMetric3Structure, p) -> np.ndarray:
    """Orthonormal basis (e, phi_1 e, phi_2 e, phi_3 e, xi) at p as columns.

    The e_i are obtained by Gram-Schmidt of the coordinate vectors against
    xi_a and the previously chosen e_j, phi_a e_j.
    """
    G = S.g.at(p)
    A = [f.at(p) for f in S.phis]
    V = [f.at(p) for f in S.xis]
    n = S.n
    basis = list(V)
    es: list = []
    for cand in np.eye(S.dim):
        v = cand.copy()
        for _ in range(2):
            for b in basis:
                v = v - (b @ G @ v) / (b @ G @ b) * b
        norm = math.sqrt(max(v @ G @ v, 0.0))
        if norm < 1e-6:
            continue
        e = v / norm
        es.append(e)
        basis.extend([e] + [Aa @ e for Aa in A])
        if len(es) == n:
            break
    if len(es) < n:
        raise np.linalg.LinAlgError("could not complete a horizontal orthonormal seed")
    cols = es + [A[0] @ e for e in es] + [A[1] @ e for e in es] + [A[2] @ e for e in es] + V
    return np.column_stack(cols)


@dataclass
class DarbouxFrame:
    """Frame X_i, Y_i, U_i, V_i (parallel transports from ``p``) plus xi_a.

    ``fields[j]`` is a vector field; ``matrix(q)`` stacks their values.
    """

    model: Model
    p: np.ndarray
    seed: np.ndarray
    ode_steps: int
    fields: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def matrix(self, q) -> np.ndarray:
        return np.column_stack([f.at(q) for f in self.fields])

    def form_values(self, q) -> np.ndarray:
        """Phi_a(F_i, F_j) at q as a (3, m, m) array."""
        Fr = self.matrix(q)
        return np.array([Fr.T @ Ph.at(q) @ Fr for Ph in self.model.structure.Phis])

    def orthonormality_residual(self, q) -> float:
        Fr = self.matrix(q)
        return float(np.abs(Fr.T @ self.model.g.at(q) @ Fr - np.eye(Fr.shape[1])).max())

    def phi_relation_residual(self, q) -> float:
        """max |Y - phi_1 X|, |U - phi_2 X|, |V - phi_3 X| at q."""
        n = self.model.n
        Fr = self.matrix(q)
        X = Fr[:, :n]
        worst = 0.0
        for a, Ph in enumerate(self.model.structure.phis):
            worst = max(worst, float(np.abs(Fr[:, (a + 1) * n:(a + 2) * n] - Ph.at(q) @ X).max()))
        return worst

    def bracket_residual(self, q) -> float:
        worst = 0.0
        for i in range(len(self.fields)):
            for j in range(i + 1, len(self.fields)):
                worst = max(worst, float(np.abs(F.lie_bracket(self.fields[i], self.fields[j]).at(q)).max()))
        return worst


def _rk4_transport(C: Field, p: np.ndarray, qj: Jet, V0: np.ndarray, steps_per_unit: int) -> Jet:
    """Parallel transport of the columns of V0 from p to q along the straight
    segment, carrying the endpoint q as a jet."""
    K = qj.order
    m = p.shape[0]
    dist = float(np.linalg.norm(qj.value - p))
    N = max(1, math.ceil(steps_per_unit * dist))
    h = 1.0 / N
    cdot = qj - Jet.constant(p, m, K)

    def rhs(t, V):
        cj = Jet.constant(p, m, K) + cdot * t
        Cj = jets.compose(C(cj.value, K), cj)
        M = contract("ikj,k->ij", Cj, cdot)
        return -contract("ij,ja->ia", M, V)

    V = Jet.constant(V0, m, K)
    for s in range(N):
        t = s * h
        k1 = rhs(t, V)
        k2 = rhs(t + h / 2, V + k1 * (h / 2))
        k3 = rhs(t + h / 2, V + k2 * (h / 2))
        k4 = rhs(t + h, V + k3 * h)
        V = V + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    return V


def build_darboux_frame(model: Model, p, ode_steps: int = 64, flat_tol: float = 1e-9) -> DarbouxFrame:
    """Darboux frame of a flat 3-cosymplectic model around p.

    Raises :class:`NotFlatError` if the Riemann tensor at p exceeds
    ``flat_tol``: the construction relies on path-independent transport.
    """
    p = model.check_point(p)
    R = float(np.abs(model.curvature.components(p)).max())
    if R > flat_tol:
        raise NotFlatError(f"Riemann tensor at p has max component {R:.3e} > {flat_tol:.1e}")
    S = model.structure
    seed = darboux_seed(S, p)
    k = 4 * S.n
    C = model.levi_civita.coefficients
    cache: dict = {}

    def transported(q, K):
        key = (q.tobytes(), K)
        if key not in cache:
            if len(cache) > 64:
                cache.clear()
            cache[key] = _rk4_transport(C, p, jets.lift_point(q, K), seed[:, :k], ode_steps)
        return cache[key]

    def column(j):
        return Field(lambda q, K: transported(q, K)[:, j], "vector", S.dim, name=f"frame{j}")

    n = S.n
    labels = [f"{L}{i + 1}" for L in "XYUV" for i in range(n)] + ["xi1", "xi2", "xi3"]
    frame_fields = [column(j) for j in range(k)] + list(S.xis)
    return DarbouxFrame(model, p, seed, ode_steps, frame_fields, labels)


def sphere_nonflatness_witness(model: Model, p) -> float:
    """Horizontal scalar curvature of the canonical connection at p.

    A strictly positive value obstructs Darboux-like coordinates."""
    from . import canonical

    return canonical.horizontal_scalar_curvature(canonical.CanonicalConnection(model.structure), model.check_point(p))


__all__ = [
    "CONVENTIONS_FLAT",
    "CONVENTIONS_SPHERE",
    "SPHERE_RADIUS",
    "ChartError",
    "ChartMap",
    "DarbouxFrame",
    "FlatModel",
    "Model",
    "NotFlatError",
    "ScrambledFlatModel",
    "SphereModel",
    "affine_chart",
    "build_darboux_frame",
    "conformal_factor",
    "coordinate_labels",
    "darboux_seed",
    "darboux_table",
    "flat_phi_matrices",
    "make_flat",
    "make_sphere",
    "printed_darboux_forms",
    "pullback",
    "random_orthogonal",
    "reparametrize",
    "right_multiplication",
    "sample_points",
    "scramble",
    "sphere_complex_structures",
    "sphere_nonflatness_witness",
    "warp",
]
