"""Grid-sampled surfaces in R^3, their light-cone lifts and surface-class
residuals.

Normals are chosen so that a round sphere has kappa_1 = kappa_2 = +1/r:
the unit normal points to the centre of curvature (inward for spheres),
and the principal curvatures are read off from -(dx, dn) = kappa (dx, dx)
along the coordinate directions of a curvature line parametrisation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GeometryError
from .pseudo_euclidean import LIE, Space
from .sphere_models import lift_point_coords
from .symmetry_breaking import SubgeometryGauge

LIE3 = Space(3, LIE)
CURVATURE_LINE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SampledSurface:
    kind: str
    params: dict
    u: np.ndarray
    v: np.ndarray
    f: np.ndarray
    n: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    periodic_u: bool = False
    periodic_v: bool = False
    provenance: str = "analytic"

    def __post_init__(self):
        if np.max(np.abs(np.linalg.norm(self.n, axis=-1) - 1.0)) > 1e-10:
            raise GeometryError("normals must have unit length")
        for arr in (self.u, self.v):
            if arr.ndim != 1 or len(arr) < 2 or np.any(np.diff(arr) <= 0):
                raise GeometryError("parameter grid must be increasing")

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape[:2]

    @property
    def h_u(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def h_v(self) -> float:
        return float(self.v[1] - self.v[0])

    @property
    def H(self) -> np.ndarray:
        return 0.5 * (self.k1 + self.k2)

    @property
    def K(self) -> np.ndarray:
        return self.k1 * self.k2

    @property
    def curvature_line(self) -> bool:
        scale = np.sqrt(np.abs(self.E * self.G))
        return bool(np.max(np.abs(self.F) / scale) < CURVATURE_LINE_TOL
                    and np.max(np.abs(self.M) / scale) < CURVATURE_LINE_TOL * max(1.0, self.diameter))

    @property
    def phi(self) -> np.ndarray | None:
        """Conformal factor, E = exp(2 phi), where the coordinates are conformal."""
        if np.max(np.abs(self.E - self.G) / self.E) > 1e-10 or np.max(np.abs(self.F) / self.E) > 1e-10:
            return None
        return 0.5 * np.log(self.E)

    @property
    def diameter(self) -> float:
        pts = self.f.reshape(-1, 3)
        return float(np.linalg.norm(np.ptp(pts, axis=0)))


def _grid(rng, count, periodic):
    a, b = rng
    if count < 2:
        raise GeometryError("grid needs at least 2 samples per direction")
    return np.linspace(a, b, count, endpoint=not periodic)


def _assemble(kind, params, u, v, f, fu, fv, fuu, fuv, fvv, n, pu, pv, provenance="analytic"):
    dot = lambda a, b: np.einsum("...i,...i->...", a, b)
    E, F, G = dot(fu, fu), dot(fu, fv), dot(fv, fv)
    L, M, N = dot(fuu, n), dot(fuv, n), dot(fvv, n)
    scale = np.sqrt(E * G)
    if np.max(np.abs(F) / scale) < 1e-9 and np.max(np.abs(M) / scale) < 1e-9:
        k1, k2 = L / E, N / G
    else:
        # principal curvatures from the shape operator, ordered (max, min)
        det = E * G - F * F
        Hm = (E * N - 2 * F * M + G * L) / (2 * det)
        Km = (L * N - M * M) / det
        disc = np.sqrt(np.maximum(Hm * Hm - Km, 0.0))
        k1, k2 = Hm + disc, Hm - disc
    return SampledSurface(kind, dict(params), u, v, f, n, k1, k2, E, F, G, L, M, N,
                          pu, pv, provenance)


def _stack(*comps):
    return np.stack(np.broadcast_arrays(*comps), axis=-1)


def _plane(U, V, p):
    z = np.zeros_like(U)
    one = np.ones_like(U)
    f = _stack(U, V, z)
    return (f, _stack(one, z, z), _stack(z, one, z), _stack(z, z, z), _stack(z, z, z),
            _stack(z, z, z), _stack(z, z, one))


def _sphere(U, V, p):
    r = p["r"]
    if p.get("param", "spherical") == "mercator":
        # conformal curvature line coordinates, E = G = r^2 sech^2 v
        s, t = 1.0 / np.cosh(V), np.tanh(V)
        cu, su = np.cos(U), np.sin(U)
        f = r * _stack(s * cu, s * su, t)
        fu = r * _stack(-s * su, s * cu, 0 * U)
        fv = r * _stack(-s * t * cu, -s * t * su, s * s)
        fuu = r * _stack(-s * cu, -s * su, 0 * U)
        fuv = r * _stack(s * t * su, -s * t * cu, 0 * U)
        # d/dv(-sech tanh) = sech tanh^2 - sech^3 ; d/dv sech^2 = -2 sech^2 tanh
        fvv = r * _stack((s * t * t - s ** 3) * cu, (s * t * t - s ** 3) * su, -2 * s * s * t)
    else:
        cu, su, cv, sv = np.cos(U), np.sin(U), np.cos(V), np.sin(V)
        f = r * _stack(cv * cu, cv * su, sv)
        fu = r * _stack(-cv * su, cv * cu, 0 * U)
        fv = r * _stack(-sv * cu, -sv * su, cv)
        fuu = r * _stack(-cv * cu, -cv * su, 0 * U)
        fuv = r * _stack(sv * su, -sv * cu, 0 * U)
        fvv = r * _stack(-cv * cu, -cv * su, -sv)
    return f, fu, fv, fuu, fuv, fvv, -f / r


def _cylinder(U, V, p):
    r = p["r"]
    c, s = np.cos(U / r), np.sin(U / r)
    z, one = np.zeros_like(U), np.ones_like(U)
    f = _stack(r * c, r * s, V)
    return (f, _stack(-s, c, z), _stack(z, z, one), _stack(-c / r, -s / r, z),
            _stack(z, z, z), _stack(z, z, z), _stack(-c, -s, z))


def _catenoid(U, V, p):
    a = p["a"]
    cu, su, ch, sh = np.cos(U), np.sin(U), np.cosh(V), np.sinh(V)
    z = np.zeros_like(U)
    f = _stack(a * ch * cu, a * ch * su, a * V)
    fu = _stack(-a * ch * su, a * ch * cu, z)
    fv = _stack(a * sh * cu, a * sh * su, a + z)
    fuu = _stack(-a * ch * cu, -a * ch * su, z)
    fuv = _stack(-a * sh * su, a * sh * cu, z)
    fvv = _stack(a * ch * cu, a * ch * su, z)
    n = -_stack(cu, su, -sh) / ch[..., None]
    return f, fu, fv, fuu, fuv, fvv, n


def _cone(U, V, p):
    al = p["alpha"]
    sa, ca = np.sin(al), np.cos(al)
    cu, su = np.cos(U), np.sin(U)
    z = np.zeros_like(U)
    f = _stack(V * sa * cu, V * sa * su, V * ca)
    fu = _stack(-V * sa * su, V * sa * cu, z)
    fv = _stack(sa * cu, sa * su, ca + z)
    fuu = _stack(-V * sa * cu, -V * sa * su, z)
    fuv = _stack(-sa * su, sa * cu, z)
    fvv = _stack(z, z, z)
    n = _stack(-ca * cu, -ca * su, sa + z)
    return f, fu, fv, fuu, fuv, fvv, n


def _torus(U, V, p):
    R, rho = p["R"], p["rho"]
    cu, su, cv, sv = np.cos(U), np.sin(U), np.cos(V), np.sin(V)
    w = R + rho * cv
    z = np.zeros_like(U)
    f = _stack(w * cu, w * su, rho * sv)
    fu = _stack(-w * su, w * cu, z)
    fv = _stack(-rho * sv * cu, -rho * sv * su, rho * cv)
    fuu = _stack(-w * cu, -w * su, z)
    fuv = _stack(rho * sv * su, -rho * sv * cu, z)
    fvv = _stack(-rho * cv * cu, -rho * cv * su, -rho * sv)
    n = -_stack(cv * cu, cv * su, sv)
    return f, fu, fv, fuu, fuv, fvv, n


# kind -> (builder, parameter validator, default u range, default v range, periodic u, periodic v)
_GENERATORS: dict[str, tuple[Callable, Callable, Callable, Callable, bool, bool]] = {
    "plane": (_plane, lambda p: True, lambda p: (-1.0, 1.0), lambda p: (-1.0, 1.0), False, False),
    "sphere": (_sphere, lambda p: p["r"] > 0, lambda p: (0.0, 2 * np.pi),
               lambda p: (-1.2, 1.2), True, False),
    "cylinder": (_cylinder, lambda p: p["r"] > 0, lambda p: (0.0, 2 * np.pi * p["r"]),
                 lambda p: (-1.0, 1.0), True, False),
    "catenoid": (_catenoid, lambda p: p["a"] > 0, lambda p: (0.0, 2 * np.pi),
                 lambda p: (-1.0, 1.0), True, False),
    "cone": (_cone, lambda p: 0 < p["alpha"] < np.pi / 2, lambda p: (0.0, 2 * np.pi),
             lambda p: (0.5, 1.5), True, False),
    "torus": (_torus, lambda p: 0 < p["rho"] < p["R"], lambda p: (0.0, 2 * np.pi),
              lambda p: (0.0, 2 * np.pi), True, True),
}

_DEFAULTS = {"sphere": {"r": 1.0}, "cylinder": {"r": 1.0}, "catenoid": {"a": 1.0},
             "cone": {"alpha": np.pi / 6}, "torus": {"R": np.sqrt(2.0), "rho": 1.0}, "plane": {}}


def make_surface(kind: str, params: dict | None = None, nu: int = 33, nv: int = 33,
                 u_range=None, v_range=None, periodic_u=None, periodic_v=None) -> SampledSurface:
    """Sample one of the analytic generators on a rectangular grid.

    Periodic directions (the default for closed parameter ranges) sample
    ``nu`` points without repeating the endpoint.
    """
    if kind == "revolution":
        raise GeometryError("use revolution_surface() for profile samples")
    try:
        builder, valid, du, dv, pu, pv = _GENERATORS[kind]
    except KeyError:
        raise GeometryError(f"unknown surface kind {kind!r}") from None
    p = dict(_DEFAULTS[kind])
    p.update(params or {})
    try:
        ok = valid(p)
    except KeyError as exc:
        raise GeometryError(f"missing parameter {exc} for {kind}") from None
    if not ok:
        raise GeometryError(f"invalid parameters for {kind}: {p}")
    pu = pu if periodic_u is None else periodic_u
    pv = pv if periodic_v is None else periodic_v
    if u_range is not None:
        pu = pu and periodic_u is not False and np.isclose(u_range[1] - u_range[0], du(p)[1] - du(p)[0])
    if v_range is not None:
        pv = pv and periodic_v is not False and np.isclose(v_range[1] - v_range[0], dv(p)[1] - dv(p)[0])
    u = _grid(u_range or du(p), nu, pu)
    v = _grid(v_range or dv(p), nv, pv)
    U, V = np.meshgrid(u, v, indexing="ij")
    parts = builder(U, V, p)
    return _assemble(kind, p, u, v, *parts, pu, pv)


def revolution_surface(v, r, z, nu: int = 33, periodic_v: bool = False) -> SampledSurface:
    """Surface of revolution about e_3 from profile samples r(v), z(v).

    Profile derivatives are estimated with second order differences, so
    the result is flagged ``estimated``.
    """
    v = np.asarray(v, float)
    r = np.asarray(r, float)
    z = np.asarray(z, float)
    if np.any(r <= 0):
        raise GeometryError("profile radius must be positive")
    if periodic_v:
        h = v[1] - v[0]
        d1 = lambda a: (np.roll(a, -1) - np.roll(a, 1)) / (2 * h)
        d2 = lambda a: (np.roll(a, -1) - 2 * a + np.roll(a, 1)) / (h * h)
        r1, z1, r2, z2 = d1(r), d1(z), d2(r), d2(z)
    else:
        r1, z1 = np.gradient(r, v, edge_order=2), np.gradient(z, v, edge_order=2)
        r2, z2 = np.gradient(r1, v, edge_order=2), np.gradient(z1, v, edge_order=2)
    u = _grid((0.0, 2 * np.pi), nu, True)
    U = u[:, None] * np.ones((1, len(v)))
    cu, su = np.cos(U), np.sin(U)
    R, R1, R2 = (np.broadcast_to(a, U.shape) for a in (r, r1, r2))
    Z, Z1, Z2 = (np.broadcast_to(a, U.shape) for a in (z, z1, z2))
    zero = np.zeros_like(U)
    f = _stack(R * cu, R * su, Z)
    fu = _stack(-R * su, R * cu, zero)
    fv = _stack(R1 * cu, R1 * su, Z1)
    fuu = _stack(-R * cu, -R * su, zero)
    fuv = _stack(-R1 * su, R1 * cu, zero)
    fvv = _stack(R2 * cu, R2 * su, Z2)
    m = _stack(Z1 * cu, Z1 * su, -R1) / np.sqrt(R1 * R1 + Z1 * Z1)[..., None]
    return _assemble("revolution", {}, u, v, f, fu, fv, fuu, fuv, fvv, -m, True, periodic_v,
                     provenance="estimated")


@dataclass(frozen=True, eq=False)
class LiftedSurface:
    """xi: point lifts in Q^3, nu: tangent plane lifts in P^3 (arrays (..., 6))."""

    surface: SampledSurface
    xi: np.ndarray
    nu: np.ndarray
    gauge: SubgeometryGauge = field(default_factory=SubgeometryGauge.euclidean)

    def audit(self) -> dict:
        """Maximal violation of the seven lift conditions (scale-relative)."""
        sp = self.gauge.space
        p, q = self.gauge.p.coords, self.gauge.q.coords
        scale = 1.0 + self.surface.diameter ** 2
        ip = sp.inner
        checks = {
            "(xi,xi)": ip(self.xi, self.xi),
            "(nu,nu)": ip(self.nu, self.nu),
            "(xi,nu)": ip(self.xi, self.nu),
            "(xi,p)": ip(self.xi, p),
            "(xi,q)+1": ip(self.xi, q) + 1.0,
            "(nu,p)+1": ip(self.nu, p) + 1.0,
            "(nu,q)": ip(self.nu, q),
        }
        return {k: float(np.max(np.abs(v))) / scale for k, v in checks.items()}


def _is_euclidean(g: SubgeometryGauge) -> bool:
    ref = SubgeometryGauge.euclidean(g.space)
    return (g.p is not None and g.space == LIE3
            and np.allclose(g.q.coords, ref.q.coords, atol=1e-14)
            and np.allclose(g.p.coords, ref.p.coords, atol=1e-14))


def lift_surface(s: SampledSurface, gauge: SubgeometryGauge | None = None) -> LiftedSurface:
    """xi = o + f + |f|^2 inf, nu = n + 2 (f.n) inf + p (Euclidean gauge)."""
    gauge = gauge or SubgeometryGauge.euclidean(LIE3)
    if not _is_euclidean(gauge):
        raise GeometryError("surface lifts are implemented for the Euclidean gauge q = 2 inf")
    xi = lift_point_coords(s.f, LIE3)
    nu = np.zeros_like(xi)
    nu[..., 1:4] = s.n
    nu[..., 4] = 2.0 * np.einsum("...i,...i->...", s.f, s.n)
    nu[..., 5] = 1.0
    return LiftedSurface(s, xi, nu, gauge)


def central_sphere_congruence(ls: LiftedSurface, H=None) -> np.ndarray:
    """gamma = nu + H xi (the mean curvature spheres; tangent planes where H = 0)."""
    H = ls.surface.H if H is None else np.broadcast_to(H, ls.surface.shape)
    return ls.nu + H[..., None] * ls.xi


def _edge_diffs(a: np.ndarray, periodic_u: bool, periodic_v: bool):
    du = (np.roll(a, -1, axis=0) - a) if periodic_u else np.diff(a, axis=0)
    dv = (np.roll(a, -1, axis=1) - a) if periodic_v else np.diff(a, axis=1)
    return du, dv


def cmc_residual(ls: LiftedSurface, H0: float, q=None) -> float:
    """Residual of "constant mean curvature H0 in the space form of q".

    With gamma = nu + H xi built from the surface's own mean curvature, the
    unit central sphere is s = gamma - p; the surface has constant mean
    curvature iff d gamma is orthogonal to q, and the value is -(gamma, q).
    Returns max(max_edges |(Delta gamma, q)|, max |(gamma, q) + H0|).
    """
    sp = ls.gauge.space
    qc = ls.gauge.q.coords if q is None else np.asarray(getattr(q, "coords", q), float)
    if abs(sp.inner(qc, ls.gauge.p.coords)) > 1e-12 * np.linalg.norm(qc):
        raise GeometryError("space form vector must be orthogonal to p")
    gamma = central_sphere_congruence(ls)
    gq = sp.inner(gamma, qc)
    du, dv = _edge_diffs(gq, ls.surface.periodic_u, ls.surface.periodic_v)
    edge = max(float(np.max(np.abs(du))), float(np.max(np.abs(dv))))
    value = float(np.max(np.abs(gq + H0)))
    return max(edge, value)


def _cell_average(a: np.ndarray, pu: bool, pv: bool) -> np.ndarray:
    if pu:
        a = 0.5 * (a + np.roll(a, -1, axis=0))
    else:
        a = 0.5 * (a[:-1] + a[1:])
    if pv:
        a = 0.5 * (a + np.roll(a, -1, axis=1))
    else:
        a = 0.5 * (a[:, :-1] + a[:, 1:])
    return a


def willmore_energy(s: SampledSurface) -> float:
    """W = int (H^2 - K) dA = 1/4 int (k1 - k2)^2 dA, composite midpoint rule.

    Cell-centre values of k1, k2, E, F, G are interpolated bilinearly from
    the four sampled corners; the rule is second order in the grid step
    (also on closed, periodic grids).
    """
    pu, pv = s.periodic_u, s.periodic_v
    k1, k2, E, F, G = (_cell_average(a, pu, pv) for a in (s.k1, s.k2, s.E, s.F, s.G))
    area = np.sqrt(np.maximum(E * G - F * F, 0.0))
    integrand = 0.25 * (k1 - k2) ** 2 * area
    return float(np.sum(integrand) * s.h_u * s.h_v)


def isothermic_residual(s: SampledSurface) -> tuple[float, float, float]:
    """(max|E-G|/E, max|F|/E, max|M|/sqrt(EG) * diameter); all ~0 iff the
    coordinates are conformal curvature line coordinates."""
    return (float(np.max(np.abs(s.E - s.G) / s.E)),
            float(np.max(np.abs(s.F) / s.E)),
            float(np.max(np.abs(s.M) / np.sqrt(s.E * s.G)) * max(s.diameter, 1e-300)))


def guichard_surface_residual(s: SampledSurface, c: float, eps: int = 1) -> float:
    """max |c E G (k1 - k2)^2 - (E - eps G)| for curvature line coordinates."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    if not s.curvature_line:
        raise GeometryError("Guichard condition needs curvature line coordinates")
    return float(np.max(np.abs(c * s.E * s.G * (s.k1 - s.k2) ** 2 - (s.E - eps * s.G))))


def linear_weingarten_residual(s: SampledSurface, a: float, b: float, c: float) -> float:
    return float(np.max(np.abs(a * s.K + 2 * b * s.H + c)))


@dataclass(frozen=True)
class WeingartenFit:
    coefficients: tuple[float, float, float]
    residual: float
    discriminant: float
    kernel_dim: int


def linear_weingarten_fit(s: SampledSurface) -> WeingartenFit:
    """Unit (a, b, c) minimising |a K + 2 b H + c| over the samples."""
    rows = np.column_stack([s.K.ravel(), 2 * s.H.ravel(), np.ones(s.K.size)])
    _, sv, vt = np.linalg.svd(rows, full_matrices=False)
    x = vt[-1]
    k = int(np.argmax(np.abs(x)))
    if x[k] < 0:
        x = -x
    res = float(np.max(np.abs(rows @ x)))
    kernel = int(np.sum(sv <= 1e-10 * max(sv[0], 1.0)))
    a, b, c = (float(t) for t in x)
    return WeingartenFit((a, b, c), res, b * b - a * c, kernel)
