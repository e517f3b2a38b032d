"""Subgeometry data from absolute configurations.

A :class:`SubgeometryGauge` (p, q) reduces Lie sphere geometry to a space
form: ``p`` singles out the point spheres, ``q`` the space form
Q^n = {y null : (y, p) = 0, (y, q) = -1} of curvature -(q, q), whose
tangent hyperplanes live in P^n = {y null : (y, p) = -1, (y, q) = 0}.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateError, GeometryError, SpaceMismatch
from .pseudo_euclidean import (EPS_SIG, LIE, MOEBIUS, SignatureTriple, Space,
                               Vec, signature_of_span, span_projector)
from .sphere_models import HomPoint, HomSphere, euclidean_q

GAUGE_TOL = 1e-10


@dataclass(frozen=True)
class SubgeometryGauge:
    q: Vec
    p: Vec | None = None

    def __post_init__(self):
        if self.p is None:
            return
        if self.p.space != self.q.space:
            raise SpaceMismatch("p and q live in different spaces")
        sp = self.p.space
        pp = float(sp.inner(self.p.coords, self.p.coords))
        pq = float(sp.inner(self.p.coords, self.q.coords))
        if abs(pp + 1.0) > GAUGE_TOL:
            raise GeometryError(f"point sphere complex must satisfy (p,p) = -1, got {pp}")
        if abs(pq) > GAUGE_TOL * max(1.0, np.linalg.norm(self.q.coords)):
            raise GeometryError(f"gauge requires (p,q) = 0, got {pq}")

    @property
    def space(self) -> Space:
        return self.q.space

    @property
    def kappa(self) -> float:
        return space_form_curvature(self.q)

    @classmethod
    def euclidean(cls, space: Space | None = None) -> "SubgeometryGauge":
        space = space or Space(3, LIE)
        return cls(q=euclidean_q(space), p=space.p if space.kind == LIE else None)

    @classmethod
    def spherical(cls, space: Space | None = None) -> "SubgeometryGauge":
        """Unit sphere, q = o + inf, (q, q) = -1."""
        space = space or Space(3, LIE)
        return cls(q=space.o + space.inf, p=space.p if space.kind == LIE else None)

    @classmethod
    def hyperbolic(cls, space: Space | None = None) -> "SubgeometryGauge":
        """Hyperbolic space of curvature -1, q = o - inf, (q, q) = 1."""
        space = space or Space(3, LIE)
        return cls(q=space.o - space.inf, p=space.p if space.kind == LIE else None)


def space_form_curvature(q: Vec) -> float:
    return -q.norm2()


def sphere_mean_curvature(s: HomSphere | Vec, q: Vec, tol: float = 1e-10) -> float:
    """Mean curvature -(s, q) of a unit Moebius sphere in the space form of q.

    Moebius vectors are used as given (no renormalisation); the unit check
    is relative to the coordinate size, which bounds the rounding of (s, s).
    """
    if isinstance(s, HomSphere):
        v = s.v if s.model == MOEBIUS else s.moebius()
    else:
        v = s
    nn = v.norm2()
    if abs(nn - 1.0) > tol * max(1.0, float(v.coords @ v.coords)):
        raise GeometryError(f"sphere vector is not normalised, (s,s) = {nn}")
    return -float(v.space.inner(v.coords, q.coords))


class PencilType(str, enum.Enum):
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    HYPERBOLIC = "Hyperbolic"


@dataclass(frozen=True)
class SpherePencil:
    s1: Vec
    s2: Vec

    def __post_init__(self):
        if self.s1.space != self.s2.space:
            raise SpaceMismatch("pencil spheres from different spaces")
        a = np.array([self.s1.coords, self.s2.coords])
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[1] <= 1e-12 * sv[0]:
            raise DegenerateError("pencil needs two independent spheres")

    @classmethod
    def from_spheres(cls, a: HomSphere, b: HomSphere) -> "SpherePencil":
        return cls(a.moebius(), b.moebius())

    @property
    def signature(self) -> SignatureTriple:
        return signature_of_span([self.s1, self.s2])

    @property
    def gram(self) -> np.ndarray:
        b = np.array([self.s1.coords, self.s2.coords])
        return b @ self.s1.space.gram @ b.T


def classify_pencil(pc: SpherePencil, eps: float = EPS_SIG) -> PencilType:
    sig = signature_of_span([pc.s1, pc.s2], eps)
    if sig.n_pos == 2:
        return PencilType.ELLIPTIC
    if sig.n_pos == 1 and sig.n_neg == 1:
        return PencilType.HYPERBOLIC
    if sig.n_pos == 1 and sig.n_zero == 1:
        return PencilType.PARABOLIC
    raise DegenerateError(f"pencil span has signature {tuple(sig)}")


def pencil_base_points(pc: SpherePencil, eps: float = EPS_SIG) -> list[HomPoint]:
    """Point spheres (null vectors) contained in the pencil: 0, 1 or 2."""
    kind = classify_pencil(pc, eps)
    if kind is PencilType.ELLIPTIC:
        return []
    # Euclidean-orthonormal coordinates of the span, then diagonalise the form
    sp = pc.s1.space
    a = np.array([pc.s1.coords, pc.s2.coords])
    _, _, vt = np.linalg.svd(a, full_matrices=False)
    g = vt @ sp.gram @ vt.T
    lam, w = np.linalg.eigh(g)
    if kind is PencilType.PARABOLIC:
        k = int(np.argmin(np.abs(lam)))
        return [HomPoint(Vec(sp, _sign_fix(w[:, k] @ vt)))]
    neg, pos = int(np.argmin(lam)), int(np.argmax(lam))
    u_neg = w[:, neg] / np.sqrt(-lam[neg])
    u_pos = w[:, pos] / np.sqrt(lam[pos])
    return [HomPoint(Vec(sp, _sign_fix((u_pos + sgn * u_neg) @ vt))) for sgn in (1.0, -1.0)]


def _sign_fix(c: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(c)))
    return c if c[k] > 0 else -c


def space_form_projection(s1: Vec, s2: Vec, gauge: SubgeometryGauge,
                          tol: float = 1e-9) -> tuple[Vec, Vec]:
    """Point xi in Q^3 and tangent plane nu in P^3 of a contact element.

    The contact element span{s1, s2} must be a null 2-plane.  Returns
    (xi, nu) in the span with (xi,p)=0, (xi,q)=-1, (nu,p)=-1, (nu,q)=0.
    """
    sp = s1.space
    if gauge.p is None or sp.kind != LIE:
        raise GeometryError("space form projection needs a Lie space gauge with p")
    b = np.array([s1.coords, s2.coords])
    scale = np.linalg.norm(b, axis=1)
    g = (b / scale[:, None]) @ sp.gram @ (b / scale[:, None]).T
    if np.max(np.abs(g)) > tol:
        raise DegenerateError("span is not a contact element (not totally null)")
    m = np.array([[sp.inner(s1.coords, gauge.p.coords), sp.inner(s2.coords, gauge.p.coords)],
                  [sp.inner(s1.coords, gauge.q.coords), sp.inner(s2.coords, gauge.q.coords)]])
    det = np.linalg.det(m)
    norm = np.linalg.norm(m[0]) * np.linalg.norm(m[1])
    if abs(det) <= 1e-12 * max(norm, 1e-300):
        raise DegenerateError("contact element has no representative in Q or P")
    xi_c = np.linalg.solve(m, [0.0, -1.0])
    nu_c = np.linalg.solve(m, [-1.0, 0.0])
    return Vec(sp, xi_c @ b), Vec(sp, nu_c @ b)


def space_form_projection_batch(s1: np.ndarray, s2: np.ndarray, gauge: SubgeometryGauge):
    """Vectorised :func:`space_form_projection` on arrays (..., dim)."""
    sp = gauge.space
    a11 = sp.inner(s1, gauge.p.coords)
    a12 = sp.inner(s2, gauge.p.coords)
    a21 = sp.inner(s1, gauge.q.coords)
    a22 = sp.inner(s2, gauge.q.coords)
    det = a11 * a22 - a12 * a21
    if np.any(np.abs(det) < 1e-14):
        raise DegenerateError("contact element has no representative in Q or P")
    # xi: [a11 a12; a21 a22] c = (0, -1)
    cx1, cx2 = a12 / det, -a11 / det
    # nu: rhs (-1, 0)
    cn1, cn2 = -a22 / det, a21 / det
    xi = cx1[..., None] * s1 + cx2[..., None] * s2
    nu = cn1[..., None] * s1 + cn2[..., None] * s2
    return xi, nu


@dataclass(frozen=True)
class CyclideDecomposition:
    """Orthogonal splitting of R^{4,2} into two Minkowski 3-spaces.

    ``v_plus`` and ``v_minus`` are 3 x 6 arrays whose rows span V+ and V-.
    """

    v_plus: np.ndarray
    v_minus: np.ndarray
    space: Space = Space(3, LIE)
    tol: float = 1e-10

    def __post_init__(self):
        sp = self.space
        vp = np.atleast_2d(np.asarray(self.v_plus, float))
        vm = np.atleast_2d(np.asarray(self.v_minus, float))
        object.__setattr__(self, "v_plus", vp)
        object.__setattr__(self, "v_minus", vm)
        if sp.kind != LIE or sp.n != 3:
            raise GeometryError("cyclide decompositions live in R^{4,2}")
        if vp.shape != (3, 6) or vm.shape != (3, 6):
            raise GeometryError("each half needs three basis vectors of R^{4,2}")
        cross = vp @ sp.gram @ vm.T
        scale = np.outer(np.linalg.norm(vp, axis=1), np.linalg.norm(vm, axis=1))
        if np.max(np.abs(cross) / scale) > self.tol:
            raise GeometryError("V+ and V- are not orthogonal")
        if np.linalg.matrix_rank(np.vstack([vp, vm]), tol=1e-10) != 6:
            raise GeometryError("V+ + V- is not the whole space")
        for half, name in ((vp, "V+"), (vm, "V-")):
            sig = signature_of_span([Vec(sp, r) for r in half])
            if tuple(sig) != (2, 1, 0):
                raise GeometryError(f"{name} has signature {tuple(sig)}, expected (2,1)")

    @classmethod
    def from_plus(cls, v_plus, space: Space = Space(3, LIE)) -> "CyclideDecomposition":
        vp = np.atleast_2d(np.asarray(v_plus, float))
        vm = null_space(vp @ space.gram).T
        return cls(vp, vm, space)

    @classmethod
    def torus(cls, R: float, rho: float) -> "CyclideDecomposition":
        """Torus of revolution about the e_3 axis, tube radius rho < R.

        V+ carries the spheres of radius rho centred on the circle of
        radius R in the e_1 e_2 plane.
        """
        if not 0 < rho < R:
            raise GeometryError("torus needs 0 < rho < R")
        sp = Space(3, LIE)
        v0 = np.zeros(6)
        v0[0] = 1.0
        v0[4] = R * R - rho * rho
        v0[5] = rho
        vp = np.array([v0, sp.e(1).coords, sp.e(2).coords])
        return cls.from_plus(vp, sp)

    def frame(self, which: str) -> np.ndarray:
        """Form-orthonormal rows (w0 timelike, w1, w2 spacelike) of V+ or V-."""
        b = self.v_plus if which == "+" else self.v_minus
        g = b @ self.space.gram @ b.T
        lam, w = np.linalg.eigh(g)
        rows = (w / np.sqrt(np.abs(lam))).T @ b
        rows = np.array([_sign_fix(r) for r in rows])
        # eigh sorts ascending: the single negative eigenvalue comes first
        return rows


def _conic_point(frame: np.ndarray, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return (frame[0] + np.cos(theta)[..., None] * frame[1]
            + np.sin(theta)[..., None] * frame[2])


def cyclide_contact_elements(cd: CyclideDecomposition, theta_plus, theta_minus):
    """Null spheres sigma+(theta+) in V+ and sigma-(theta-) in V-.

    Scalar angles give Vecs; arrays give coordinate arrays (broadcast).
    """
    sp_ = _conic_point(cd.frame("+"), theta_plus)
    sm_ = _conic_point(cd.frame("-"), theta_minus)
    if sp_.ndim == 1 and sm_.ndim == 1:
        return Vec(cd.space, sp_), Vec(cd.space, sm_)
    return np.broadcast_arrays(sp_, sm_)


@dataclass(frozen=True)
class CyclideReport:
    p_plus_sq: float
    p_minus_sq: float
    flags: dict

    def as_dict(self) -> dict:
        return {"p_plus_sq": self.p_plus_sq, "p_minus_sq": self.p_minus_sq,
                "sum": self.p_plus_sq + self.p_minus_sq, "flags": dict(self.flags)}


def _causal(x: float, eps: float) -> str:
    if x > eps:
        return "spacelike"
    if x < -eps:
        return "timelike"
    return "null"


def classify_cyclide(cd: CyclideDecomposition, gauge: SubgeometryGauge,
                     eps: float = 1e-10) -> CyclideReport:
    """Split p = p+ + p- along V+ (+) V- and report (p+,p+), (p-,p-)."""
    if gauge.p is None:
        raise GeometryError("cyclide classification needs a point sphere complex")
    sp = cd.space
    proj = span_projector(cd.v_plus, sp)
    pplus = proj @ gauge.p.coords
    pminus = gauge.p.coords - pplus
    a = float(sp.inner(pplus, pplus))
    b = float(sp.inner(pminus, pminus))
    flags = {"p_plus": _causal(a, eps), "p_minus": _causal(b, eps),
             "p_plus_zero": bool(np.linalg.norm(pplus) < eps),
             "p_minus_zero": bool(np.linalg.norm(pminus) < eps)}
    return CyclideReport(a, b, flags)
