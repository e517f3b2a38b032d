"""Lifts between Euclidean data and light-cone coordinates.

Conventions (see ``pseudo_euclidean`` for the basis):

* point        x      -> xi = o + x + |x|^2 inf                   (null)
* sphere (c, r)       -> s  = (o + c + (|c|^2 - r^2) inf) / r     ((s,s) = 1)
                      -> sigma = o + c + (|c|^2 - r^2) inf + r p  (null)
* plane {x.n = d}     -> s  = n + 2 d inf,  sigma = s + p

With these, (xi, 2 inf) = -1, so ``q = 2 inf`` is the Euclidean space form
vector, and (xi(x), s) = -(|x - c|^2 - r^2) / (2 r).

Orientation is the sign of the radius.  A sphere with r > 0 touches the
plane whose unit normal points towards its centre, i.e. normals point to
the side where the curvature is positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateError, InfinitePoint, SpaceMismatch
from .pseudo_euclidean import LIE, MOEBIUS, Space, Vec


@dataclass(frozen=True)
class HomPoint:
    v: Vec

    def __post_init__(self):
        c = self.v.coords
        scale = float(c @ c)
        if scale == 0.0:
            raise DegenerateError("zero vector is not a point")
        if abs(self.v.norm2()) > 1e-9 * scale:
            raise DegenerateError("point representative is not null")

    def normalized(self, q: Vec) -> Vec:
        """Representative y with (y, q) = -1."""
        vq = float(self.v.space.inner(self.v.coords, q.coords))
        if abs(vq) < 1e-12 * np.linalg.norm(self.v.coords) * np.linalg.norm(q.coords):
            raise InfinitePoint("point lies at infinity of this space form")
        return self.v * (-1.0 / vq)


@dataclass(frozen=True)
class HomSphere:
    """Sphere in the Moebius model (unit spacelike) or the Lie model (null)."""

    v: Vec
    model: str = LIE

    def __post_init__(self):
        if self.model not in (MOEBIUS, LIE):
            raise ValueError(f"unknown model {self.model!r}")
        if self.model == LIE and self.v.space.kind != LIE:
            raise SpaceMismatch("Lie sphere needs a Lie space")
        c = self.v.coords
        scale = float(c @ c)
        if scale == 0.0:
            raise DegenerateError("zero vector is not a sphere")
        if self.model == LIE and abs(self.v.norm2()) > 1e-9 * scale:
            raise DegenerateError("Lie sphere representative is not null")
        if self.model == MOEBIUS and self.v.norm2() <= 1e-12 * scale:
            raise DegenerateError("Moebius sphere must be spacelike")

    def moebius(self) -> Vec:
        """Unit spacelike part s (orientation kept); for Lie data sigma/lambda - p.

        A Moebius vector that is already unit up to the rounding of (s, s)
        is returned unchanged; rescaling it would only add that rounding.
        """
        if self.model == MOEBIUS:
            nn = self.v.norm2()
            if abs(nn - 1.0) <= 1e-13 * max(1.0, float(self.v.coords @ self.v.coords)):
                return self.v
            return self.v / np.sqrt(nn)
        sp = self.v.space
        lam = -float(sp.inner(self.v.coords, sp.p.coords))
        if abs(lam) < 1e-12 * np.linalg.norm(self.v.coords):
            raise DegenerateError("point sphere has no Moebius sphere part")
        return self.v / lam - sp.p


@dataclass(frozen=True)
class EuclideanSphereData:
    """Sphere (center, signed radius), plane (normal, offset) or point (r = 0)."""

    center: np.ndarray | None = None
    radius: float = 0.0
    normal: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        if self.normal is not None:
            nrm = np.asarray(self.normal, dtype=float)
            if abs(np.linalg.norm(nrm) - 1.0) > 1e-9:
                raise ValueError("plane normal must have unit length")
            object.__setattr__(self, "normal", nrm)
        elif self.center is None:
            raise ValueError("need a center or a plane normal")
        else:
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
            if not np.isfinite(self.radius):
                raise ValueError("radius must be finite")

    @property
    def is_plane(self) -> bool:
        return self.normal is not None

    @property
    def is_point(self) -> bool:
        return not self.is_plane and self.radius == 0.0

    @classmethod
    def sphere(cls, center, radius):
        return cls(center=np.asarray(center, float), radius=float(radius))

    @classmethod
    def plane(cls, normal, offset):
        return cls(normal=np.asarray(normal, float), offset=float(offset))


def euclidean_q(space: Space) -> Vec:
    return space.inf * 2.0


def lift_point_coords(x, space: Space) -> np.ndarray:
    """Vectorised point lift; x has shape (..., n)."""
    x = np.asarray(x, dtype=float)
    c = np.zeros(x.shape[:-1] + (space.dim,))
    c[..., 0] = 1.0
    c[..., 1:space.n + 1] = x
    c[..., space.n + 1] = np.einsum("...i,...i->...", x, x)
    return c


def lift_point(x, space: Space | None = None) -> HomPoint:
    x = np.asarray(x, dtype=float)
    space = space or Space(len(x), LIE)
    if len(x) != space.n:
        raise ValueError(f"point must have {space.n} coordinates")
    return HomPoint(Vec(space, lift_point_coords(x, space)))


def _chart_basis(q: Vec, p: Vec | None) -> np.ndarray:
    """Form-orthonormal basis (rows) of {q, p}^perp, by Gram-Schmidt on the
    coordinate axes in the order e_1..e_n, o, inf."""
    sp = q.space
    g = sp.gram
    fixed = [q.coords] + ([p.coords] if p is not None else [])
    order = list(range(1, sp.n + 1)) + [0, sp.n + 1]
    basis: list[np.ndarray] = []
    for i in order:
        w = sp._unit(i)
        for f in fixed:
            w = w - (f @ g @ w) / (f @ g @ f) * f
        for b in basis:
            w = w - (b @ g @ w) / (b @ g @ b) * b
        nn = w @ g @ w
        if abs(nn) > 1e-10:
            basis.append(w / np.sqrt(abs(nn)))
        if len(basis) == sp.n + 1:
            break
    return np.array(basis)


def project_point(hp: HomPoint, q: Vec | None = None, p: Vec | None = None) -> np.ndarray:
    """Chart coordinates of a point in the space form Q^n of ``q``.

    * q null (must be a multiple of inf): Euclidean chart, returns x in R^n
      scaled so that Q^n is isometric to R^n.
    * q non-null: returns the (n+1) coordinates of y + q/(q,q) in a
      form-orthonormal basis of {q, p}^perp; for q = o + inf these are the
      coordinates of the point on the unit sphere S^n (inverse stereographic
      image of x from the pole -e_{n+1}).
    """
    sp = hp.v.space
    q = euclidean_q(sp) if q is None else q
    if q.space != sp:
        raise SpaceMismatch("point and q in different spaces")
    y = hp.normalized(q).coords
    qq = float(sp.inner(q.coords, q.coords))
    qn = np.linalg.norm(q.coords)
    if abs(qq) <= 1e-12 * qn * qn:
        mask = np.ones(sp.dim, bool)
        mask[sp.n + 1] = False
        if np.any(np.abs(q.coords[mask]) > 1e-12 * qn):
            raise ValueError("Euclidean chart needs q parallel to inf")
        return y[1:sp.n + 1].copy()
    if p is None and sp.kind == LIE:
        p = sp.p
    rest = y + q.coords / qq
    basis = _chart_basis(q, p)
    g = sp.gram
    signs = np.einsum("ij,jk,ik->i", basis, g, basis)
    return (basis @ g @ rest) * signs


def lift_sphere(d: EuclideanSphereData, space: Space | None = None) -> tuple[HomSphere | None, HomSphere]:
    """Return (Moebius s, Lie sigma).  Points (r = 0) have no Moebius lift,
    the first entry is then None."""
    if d.is_plane:
        n = len(d.normal)
        space = space or Space(n, LIE)
        s = space.embed(d.normal)
        s[space.n + 1] = 2.0 * d.offset
        sig = s.copy()
        sig[space.i_p] = 1.0
        return HomSphere(Vec(space, s), MOEBIUS), HomSphere(Vec(space, sig), LIE)
    c = d.center
    space = space or Space(len(c), LIE)
    r = d.radius
    base = lift_point_coords(c, space)
    base[space.n + 1] -= r * r
    sig = base.copy()
    sig[space.i_p] = r
    lie = HomSphere(Vec(space, sig), LIE)
    if r == 0.0:
        return None, lie
    return HomSphere(Vec(space, base / r), MOEBIUS), lie


def sphere_data(hs: HomSphere, rel_tol: float = 1e-12) -> EuclideanSphereData:
    """Inverse of :func:`lift_sphere` in the Euclidean chart (q = 2 inf)."""
    sp = hs.v.space
    n = sp.n
    if hs.model == LIE:
        lam = -float(sp.inner(hs.v.coords, sp.p.coords))
        scale = np.linalg.norm(hs.v.coords)
        if abs(lam) <= rel_tol * scale:
            # point sphere
            x = project_point(HomPoint(hs.v))
            return EuclideanSphereData.sphere(x, 0.0)
        s = hs.v.coords / lam
        s = s.copy()
        s[sp.i_p] = 0.0
    else:
        s = hs.v.coords / np.sqrt(hs.v.norm2())
    a0 = s[0]
    if abs(a0) <= rel_tol * np.linalg.norm(s):
        nrm = s[1:n + 1]
        length = np.linalg.norm(nrm)
        if length == 0.0:
            raise DegenerateError("degenerate sphere vector")
        return EuclideanSphereData.plane(nrm / length, s[n + 1] / (2.0 * length))
    r = 1.0 / a0
    return EuclideanSphereData.sphere(s[1:n + 1] * r, r)


def incidence_residual(hp: HomPoint, hs: HomSphere, q: Vec | None = None) -> float:
    """(y, s) with y normalised by (y, q) = -1 and s the unit Moebius part.

    Zero iff the point lies on the sphere.  In the Euclidean gauge this is
    -(|x - c|^2 - r^2) / (2 r).  Transforming point, sphere and q by the
    same isometry leaves the value unchanged.
    """
    sp = hp.v.space
    q = euclidean_q(sp) if q is None else q
    try:
        y = hp.normalized(q)
    except InfinitePoint:
        y = hp.v
    s = hs.moebius()
    return float(sp.inner(y.coords, s.coords))


def contact_residual(s1: HomSphere, s2: HomSphere, q: Vec | None = None) -> float:
    """(sigma_1, sigma_2) for Lie spheres, normalised by (sigma, q) = -1
    (planes: by (sigma, p) = -1).  Zero iff in oriented contact; for spheres
    equals -(|c1 - c2|^2 - (r1 - r2)^2) / 2."""
    if s1.model != LIE or s2.model != LIE:
        raise ValueError("contact needs Lie sphere representatives")
    sp = s1.v.space
    q = euclidean_q(sp) if q is None else q

    def norm(v):
        c = v.coords
        scale = np.linalg.norm(c)
        vq = float(sp.inner(c, q.coords))
        if abs(vq) > 1e-12 * scale:
            return c / -vq
        vp = float(sp.inner(c, sp.p.coords))
        if abs(vp) > 1e-12 * scale:
            return c / -vp
        return c

    return float(sp.inner(norm(s1.v), norm(s2.v)))


def tangential_distance(s1: HomSphere, s2: HomSphere, q: Vec | None = None) -> float:
    """Length of a common tangent segment, sqrt(|c1 - c2|^2 - (r1 - r2)^2).

    Derived from the contact value; raises when the oriented spheres admit
    no common tangent (one inside the other).
    """
    d2 = -2.0 * contact_residual(s1, s2, q)
    if d2 < -1e-12 * max(1.0, abs(d2)):
        raise DegenerateError("oriented spheres have no common tangent")
    return float(np.sqrt(max(d2, 0.0)))


def parallel_transformation(delta: float, space: Space) -> np.ndarray:
    """Lie map adding ``delta`` to every signed radius.

    o -> o - delta^2 inf + delta p,  p -> p - 2 delta inf,  e_i, inf fixed.
    It maps lift_sphere(c, r) exactly to lift_sphere(c, r + delta) and a
    plane offset d to d - delta.
    """
    if space.kind != LIE:
        raise ValueError("parallel transformations act on the Lie space")
    m = np.eye(space.dim)
    io, ii, ip = 0, space.n + 1, space.i_p
    m[ii, io] = -delta * delta
    m[ip, io] = delta
    m[ii, ip] = -2.0 * delta
    return m


def circumsphere(points: Sequence, space: Space | None = None) -> HomSphere:
    """Moebius sphere through n+1 points of R^n (a circle for n = 2)."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[1]
    if pts.shape[0] != n + 1:
        raise ValueError(f"need {n + 1} points in R^{n}")
    space = space or Space(n, MOEBIUS)
    mob = Space(n, MOEBIUS)
    xi = lift_point_coords(pts, mob)
    xi = xi / np.linalg.norm(xi, axis=1, keepdims=True)
    ns = null_space(xi @ mob.gram, rcond=1e-10)
    if ns.shape[1] != 1:
        raise DegenerateError("points do not determine a unique sphere")
    s = ns[:, 0]
    diam = np.ptp(pts, axis=0).max()
    if abs(s[0]) * diam <= 1e-9 * np.linalg.norm(s[1:n + 1]) or s @ mob.gram @ s <= 0:
        raise DegenerateError("points are collinear / lie on a hyperplane")
    s = s / np.sqrt(s @ mob.gram @ s)
    if s[0] < 0:
        s = -s
    if space.kind == LIE:
        s = np.append(s, 0.0)
    return HomSphere(Vec(space, s), MOEBIUS)
