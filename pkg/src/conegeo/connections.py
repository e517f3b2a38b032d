"""Loops of flat connections on lifted surfaces, discretised as edge transports.

A connection d + omega on the trivial bundle is represented on a parameter
grid by one transport matrix per edge,

    M_e(t) = expm(-t * Omega_e),

where Omega_e is the connection 1-form evaluated at the edge midpoint and
contracted with the edge difference.  A section s is parallel when
M_e s(src) = s(dst) on every edge.  All wedge operators use

    (a ^ b) x = (a, x) b - (b, x) a.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import expm

from .errors import GeometryError, NonConserved, SpaceMismatch
from .pseudo_euclidean import Space, Vec
from .surfaces import LiftedSurface, central_sphere_congruence
from .symmetry_breaking import SubgeometryGauge

DEFAULT_TS = (-0.5, -0.1, 0.1, 0.5, 1.0)
ENVELOPE_TOL = 1e-9
CONSERVED_TOL = 1e-8


@dataclass(frozen=True)
class WedgeEndo:
    a: Vec
    b: Vec

    @property
    def matrix(self) -> np.ndarray:
        return wedge_matrix(self.a.coords, self.b.coords, self.a.space)

    def __call__(self, x: Vec) -> Vec:
        if x.space != self.a.space:
            raise SpaceMismatch("wedge applied to a vector of another space")
        sp = self.a.space
        return Vec(sp, sp.inner(self.a.coords, x.coords) * self.b.coords
                   - sp.inner(self.b.coords, x.coords) * self.a.coords)


def wedge_endo(a: Vec, b: Vec) -> WedgeEndo:
    if a.space != b.space:
        raise SpaceMismatch(f"{a.space} vs {b.space}")
    return WedgeEndo(a, b)


def wedge_matrix(a, b, space: Space) -> np.ndarray:
    """Batched matrix of a ^ b: b (G a)^T - a (G b)^T."""
    g = space.gram
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.einsum("...i,...j->...ij", b, a @ g) - np.einsum("...i,...j->...ij", a, b @ g)


def _ts(t) -> tuple[float, ...]:
    return tuple(float(x) for x in np.atleast_1d(t))


def _edges(arr: np.ndarray, axis: int, periodic: bool):
    """Start and end samples of all edges along ``axis``."""
    nxt = np.roll(arr, -1, axis=axis)
    if periodic:
        return arr, nxt
    n = arr.shape[axis]
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(0, n - 1)
    return arr[tuple(sl)], nxt[tuple(sl)]


@dataclass(frozen=True, eq=False)
class DiscreteConnection:
    """Edge transports for several loop parameters.

    Mu[k] holds the u-edge transports for ts[k], shape (Eu, nv, d, d);
    Mv[k] the v-edge transports, shape (nu, Ev, d, d).
    """

    space: Space
    grid_shape: tuple[int, int]
    ts: tuple[float, ...]
    Mu: np.ndarray
    Mv: np.ndarray
    recipe: str
    periodic_u: bool = False
    periodic_v: bool = False

    def index(self, t: float) -> int:
        hits = [k for k, s in enumerate(self.ts) if abs(s - t) <= 1e-14 * max(1.0, abs(t))]
        if not hits:
            raise KeyError(f"t={t} not among the sampled loop parameters {self.ts}")
        return hits[0]

    def transports(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        k = self.index(t)
        return self.Mu[k], self.Mv[k]


def _connection_from_forms(space, shape, ts, form_u, form_v, recipe, pu, pv):
    """form_u, form_v: t-independent edge forms Omega_e, shape (..., d, d)."""
    mu = np.stack([expm(-t * form_u) for t in ts])
    mv = np.stack([expm(-t * form_v) for t in ts])
    return DiscreteConnection(space, tuple(shape), tuple(ts), mu, mv, recipe, pu, pv)


def _edge_form(pairs, space, axis, periodic):
    """Sum of coef * (mid(x) ^ diff(y)) over pairs (coef, x, y)."""
    total = 0.0
    for coef, x, y in pairs:
        if coef == 0:
            continue
        x0, x1 = _edges(x, axis, periodic)
        y0, y1 = _edges(y, axis, periodic)
        total = total + coef * wedge_matrix(0.5 * (x0 + x1), y1 - y0, space)
    if isinstance(total, float):
        d = space.dim
        x0, _ = _edges(pairs[0][1], axis, periodic)
        total = np.zeros(x0.shape[:-1] + (d, d))
    return total


def check_envelope(gp: np.ndarray, gm: np.ndarray, space: Space, tol: float = ENVELOPE_TOL) -> float:
    """Max scaled violation of (g+,g+) = (g-,g-) = (g+,g-) = 0."""
    scale = np.linalg.norm(gp, axis=-1) * np.linalg.norm(gm, axis=-1)
    res = max(float(np.max(np.abs(space.inner(gp, gp)) / np.linalg.norm(gp, axis=-1) ** 2)),
              float(np.max(np.abs(space.inner(gm, gm)) / np.linalg.norm(gm, axis=-1) ** 2)),
              float(np.max(np.abs(space.inner(gp, gm)) / scale)))
    if res > tol:
        raise GeometryError(f"envelope condition violated (residual {res:.3e})")
    return res


def pair_connections(gamma_plus, gamma_minus, t=DEFAULT_TS, space: Space | None = None,
                     periodic_u: bool = False, periodic_v: bool = False):
    """(d+_t, d-_t) with d+-_t = d + t gamma+- ^ d gamma-+ ."""
    space = space or Space(3)
    gp = np.asarray(gamma_plus, float)
    gm = np.asarray(gamma_minus, float)
    if gp.shape != gm.shape or gp.ndim != 3:
        raise GeometryError("gamma grids must have equal shape (nu, nv, d)")
    check_envelope(gp, gm, space)
    ts = _ts(t)
    out = []
    for x, y, tag in ((gp, gm, "plus"), (gm, gp, "minus")):
        fu = _edge_form([(1.0, x, y)], space, 0, periodic_u)
        fv = _edge_form([(1.0, x, y)], space, 1, periodic_v)
        out.append(_connection_from_forms(space, gp.shape[:2], ts, fu, fv, tag, periodic_u, periodic_v))
    return tuple(out)


def middle_connection(ls: LiftedSurface, a: float, b: float, c: float, t=DEFAULT_TS) -> DiscreteConnection:
    """d + t c xi^dxi - t b (xi^dnu + nu^dxi) + t a nu^dnu."""
    s = ls.surface
    sp = ls.gauge.space
    pairs = [(c, ls.xi, ls.xi), (-b, ls.xi, ls.nu), (-b, ls.nu, ls.xi), (a, ls.nu, ls.nu)]
    fu = _edge_form(pairs, sp, 0, s.periodic_u)
    fv = _edge_form(pairs, sp, 1, s.periodic_v)
    return _connection_from_forms(sp, s.shape, _ts(t), fu, fv, "mid", s.periodic_u, s.periodic_v)


def cmc_connection(ls: LiftedSurface, H: float, t=DEFAULT_TS) -> DiscreteConnection:
    """d + (t/2) (2H xi^dxi + xi^dnu + nu^dxi).

    This is the middle connection of the linear Weingarten triple
    (a, b, c) = (0, -1/2, H), which satisfies a K + 2 b H + c = 0.
    """
    s = ls.surface
    sp = ls.gauge.space
    pairs = [(H, ls.xi, ls.xi), (0.5, ls.xi, ls.nu), (0.5, ls.nu, ls.xi)]
    fu = _edge_form(pairs, sp, 0, s.periodic_u)
    fv = _edge_form(pairs, sp, 1, s.periodic_v)
    return _connection_from_forms(sp, s.shape, _ts(t), fu, fv, "cmc", s.periodic_u, s.periodic_v)


def cmc_coefficients(H: float) -> tuple[float, float, float]:
    return (0.0, -0.5, float(H))


def cmc_pair(ls: LiftedSurface, H: float | None = None):
    """Enveloped pair (gamma+, gamma-) = (nu + H xi, xi) of a constant H surface."""
    gamma = central_sphere_congruence(ls, H)
    return gamma, ls.xi


def gauge_exp_tau(gamma_plus, gamma_minus, t: float, space: Space | None = None,
                  check: bool = True) -> np.ndarray:
    """exp(t tau) = I + t tau for tau = gamma+ ^ gamma- (nilpotent on envelopes)."""
    if isinstance(gamma_plus, Vec):
        space = gamma_plus.space
        gamma_plus, gamma_minus = gamma_plus.coords, gamma_minus.coords
    space = space or Space(3)
    gp = np.asarray(gamma_plus, float)
    gm = np.asarray(gamma_minus, float)
    if check:
        check_envelope(gp, gm, space)
    tau = wedge_matrix(gp, gm, space)
    return np.eye(space.dim) + t * tau


def tau_nilpotency(gamma_plus, gamma_minus, space: Space) -> float:
    """max ||tau^2|| / ||tau||^2 over the samples (max-abs norms)."""
    tau = wedge_matrix(gamma_plus, gamma_minus, space)
    t2 = tau @ tau
    den = np.max(np.abs(tau), axis=(-2, -1)) ** 2
    return float(np.max(np.max(np.abs(t2), axis=(-2, -1)) / np.where(den > 0, den, 1.0)))


def apply_gauge(conn: DiscreteConnection, gauges) -> DiscreteConnection:
    """Transports g(dst) M_e g(src)^-1.

    ``gauges`` has shape (T, nu, nv, d, d) matching conn.ts, or
    (nu, nv, d, d) when the same field is used for every t.
    """
    g = np.asarray(gauges, float)
    if g.ndim == 4:
        g = np.broadcast_to(g, (len(conn.ts),) + g.shape)
    ginv = np.linalg.inv(g)
    mu, mv = [], []
    for k in range(len(conn.ts)):
        g0, g1 = _edges(g[k], 0, conn.periodic_u)
        i0, _ = _edges(ginv[k], 0, conn.periodic_u)
        mu.append(g1 @ conn.Mu[k] @ i0)
        g0, g1 = _edges(g[k], 1, conn.periodic_v)
        i0, _ = _edges(ginv[k], 1, conn.periodic_v)
        mv.append(g1 @ conn.Mv[k] @ i0)
    return DiscreteConnection(conn.space, conn.grid_shape, conn.ts, np.stack(mu), np.stack(mv),
                              conn.recipe + "+gauge", conn.periodic_u, conn.periodic_v)


def holonomy(conn: DiscreteConnection, t: float) -> np.ndarray:
    """Plaquette holonomies Mv[i,j]^-1 Mu[i,j+1]^-1 Mv[i+1,j] Mu[i,j]."""
    mu, mv = conn.transports(t)
    npu = mu.shape[0]
    npv = mv.shape[1]
    south = mu[:, :npv]
    north = np.roll(mu, -1, axis=1)[:, :npv]
    west = mv[:npu]
    east = np.roll(mv, -1, axis=0)[:npu]
    return np.linalg.inv(west) @ np.linalg.inv(north) @ east @ south


def holonomy_defects(conn: DiscreteConnection, t: float) -> np.ndarray:
    hol = holonomy(conn, t)
    return np.max(np.abs(hol - np.eye(conn.space.dim)), axis=(-2, -1))


def flatness_residual(conn: DiscreteConnection, t: float) -> float:
    """Largest plaquette holonomy defect ||Hol - I||_max."""
    return float(np.max(holonomy_defects(conn, t)))


def isometry_residual(conn: DiscreteConnection) -> float:
    g = conn.space.gram
    res = 0.0
    for m in (conn.Mu, conn.Mv):
        res = max(res, float(np.max(np.abs(np.swapaxes(m, -1, -2) @ g @ m - g))))
    return res


@dataclass(frozen=True, eq=False)
class PolynomialConservedQuantity:
    """p(t) = sum_k coeffs[k] t^k; each coefficient is a grid (nu, nv, d) or a constant (d,)."""

    space: Space
    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t: float) -> np.ndarray:
        arrs = np.broadcast_arrays(*[np.asarray(c, float) for c in self.coeffs])
        out = np.zeros_like(arrs[0])
        for c in reversed(arrs):
            out = out * t + c
        return out


def lw_conserved_quantities(ls: LiftedSurface, a: float, b: float, c: float,
                            gauge: SubgeometryGauge | None = None):
    """p(t) = p + t(-b xi + a nu), q(t) = q + t(c xi - b nu)."""
    gauge = gauge or ls.gauge
    if gauge.p is None:
        raise GeometryError("conserved quantities need a point sphere complex p")
    sp = ls.gauge.space
    pq = PolynomialConservedQuantity(sp, (gauge.p.coords, -b * ls.xi + a * ls.nu))
    qq = PolynomialConservedQuantity(sp, (gauge.q.coords, c * ls.xi - b * ls.nu))
    return pq, qq


def _pair_poly(p: PolynomialConservedQuantity, q: PolynomialConservedQuantity):
    """Coefficient grids of (p(t), q(t)), lowest degree first."""
    deg = p.degree + q.degree
    grids = []
    for k in range(deg + 1):
        acc = 0.0
        for i, ai in enumerate(p.coeffs):
            j = k - i
            if 0 <= j <= q.degree:
                acc = acc + p.space.inner(np.asarray(ai, float), np.asarray(q.coeffs[j], float))
        grids.append(np.asarray(acc, float))
    return grids


def _constant_coefficients(grids, tol=CONSERVED_TOL) -> np.ndarray:
    coefs = []
    for k, g in enumerate(grids):
        mean = float(np.mean(g))
        dev = float(np.max(np.abs(g - mean))) if g.ndim else 0.0
        if dev >= tol * (1.0 + abs(mean)):
            raise NonConserved(f"coefficient of t^{k} varies over the grid by {dev:.3e}")
        coefs.append(mean)
    return np.array(coefs)


def characteristic_polynomial(pcq: PolynomialConservedQuantity, tol: float = CONSERVED_TOL) -> np.ndarray:
    """Coefficients (lowest degree first) of (p(t), p(t)); raises NonConserved
    when they are not constant over the grid."""
    return _constant_coefficients(_pair_poly(pcq, pcq), tol)


class CQClass(str, Enum):
    ISOTHERMIC = "Isothermic"
    L_ISOTHERMIC = "LIsothermic"
    GUICHARD = "Guichard"
    OTHER = "Other"


def classify_cq(poly, tol: float = 1e-10) -> CQClass:
    """Constant negative -> Isothermic (normalisable to -1), identically 0 ->
    LIsothermic, exact degree 1 -> Guichard, anything else -> Other."""
    c = np.asarray(poly, float)
    scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    nz = np.nonzero(np.abs(c) > tol * scale)[0]
    if nz.size == 0:
        return CQClass.L_ISOTHERMIC
    deg = int(nz[-1])
    if deg == 0:
        return CQClass.ISOTHERMIC if c[0] < 0 else CQClass.OTHER
    if deg == 1:
        return CQClass.GUICHARD
    return CQClass.OTHER


@dataclass(frozen=True)
class GramReport:
    pp: np.ndarray
    qq: np.ndarray
    pq: np.ndarray
    det: np.ndarray
    expected_det: np.ndarray
    expected_pp: np.ndarray
    expected_qq: np.ndarray
    expected_pq: np.ndarray
    residual: float
    ok: bool

    def as_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}


def _pad(c, n):
    out = np.zeros(n)
    c = np.asarray(c, float)
    out[:len(c)] = c
    return out


def gram_det(p: PolynomialConservedQuantity, q: PolynomialConservedQuantity, kappa: float,
             a: float, b: float, c: float, tol: float = 1e-10) -> GramReport:
    """Gram matrix of (p(t), q(t)) against the closed forms
    (p,p) = -1 - 2at, (q,q) = -kappa - 2ct, (p,q) = 2bt and
    det = kappa + 2(a kappa + c) t + 4(ac - b^2) t^2."""
    pp = _constant_coefficients(_pair_poly(p, p))
    qq = _constant_coefficients(_pair_poly(q, q))
    pq = _constant_coefficients(_pair_poly(p, q))
    det = P.polysub(P.polymul(pp, qq), P.polymul(pq, pq))
    n = max(len(det), 3)
    det = _pad(det, n)
    exp_det = _pad([kappa, 2 * (a * kappa + c), 4 * (a * c - b * b)], n)
    m = max(len(pp), 2)
    exp_pp, exp_qq, exp_pq = _pad([-1, -2 * a], m), _pad([-kappa, -2 * c], m), _pad([0, 2 * b], m)
    res = max(float(np.max(np.abs(det - exp_det))),
              float(np.max(np.abs(_pad(pp, m) - exp_pp))),
              float(np.max(np.abs(_pad(qq, m) - exp_qq))),
              float(np.max(np.abs(_pad(pq, m) - exp_pq))))
    return GramReport(pp, qq, pq, det, exp_det, exp_pp, exp_qq, exp_pq, res, res <= tol)


def parallel_residual(conn: DiscreteConnection, pcq: PolynomialConservedQuantity, t: float) -> float:
    """max over edges ||M_e(t) p(t)(src) - p(t)(dst)||_max."""
    mu, mv = conn.transports(t)
    val = np.broadcast_to(pcq(t), conn.grid_shape + (conn.space.dim,))
    res = 0.0
    for m, axis, per in ((mu, 0, conn.periodic_u), (mv, 1, conn.periodic_v)):
        s0, s1 = _edges(val, axis, per)
        res = max(res, float(np.max(np.abs(np.einsum("...ij,...j->...i", m, s0) - s1))))
    return res


def gauge_covariance_residual(conn: DiscreteConnection, pcq: PolynomialConservedQuantity,
                              gauges, t: float) -> float:
    """|parallel_residual(g.conn, g p) - parallel_residual(conn, p)|."""
    k = conn.index(t)
    g = np.asarray(gauges, float)
    gk = g[k] if g.ndim == 5 else g
    gp = PolynomialConservedQuantity(conn.space, (np.einsum("...ij,...j->...i", gk,
                                                  np.broadcast_to(pcq(t), gk.shape[:-1])),))
    gc = apply_gauge(conn, g)
    return abs(parallel_residual(gc, gp, t) - parallel_residual(conn, pcq, t))
