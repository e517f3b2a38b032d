"""In- and ex-centres of four points on the 2-sphere, desmic perspectivity
and the antipodal normalisation.

Circles of S^2 are unit spacelike vectors of the Moebius space R^{3,1}
(``Space(2, MOEBIUS)``).  A point X of S^2 has the null representative
C (X, 1), where C maps the diagonal basis (e_1, e_2, e_3, e_4) with form
diag(1, 1, 1, -1) to (e_1, e_2, o - inf, o + inf).  Reading the null
coordinates in the Euclidean chart is stereographic projection from -e_3.

Circumcircles s_d (through all points except x_d) are oriented so that x_d
lies on their positive side, (s_d, x_d) > 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateError, GeometryError
from .pseudo_euclidean import MOEBIUS, Space, Vec
from .sphere_models import HomPoint, HomSphere

SPACE = Space(2, MOEBIUS)
# columns: e1, e2, o - inf, o + inf in null coordinates (o, e1, e2, inf)
C = np.array([[0.0, 0.0, 1.0, 1.0],
              [1.0, 0.0, 0.0, 0.0],
              [0.0, 1.0, 0.0, 0.0],
              [0.0, 0.0, -1.0, 1.0]])
C_INV = np.linalg.inv(C)
ETA = np.diag([1.0, 1.0, 1.0, -1.0])

# Klein four-group: identity and the three double transpositions
PAIRINGS = ((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))


def sphere_point(X) -> HomPoint:
    X = np.asarray(X, float)
    if abs(np.linalg.norm(X) - 1.0) > 1e-9:
        raise GeometryError("point must lie on the unit sphere")
    return HomPoint(Vec(SPACE, C @ np.append(X, 1.0)))


def to_sphere(v) -> np.ndarray:
    """Point of S^2 represented by a null vector (null coordinates)."""
    a = C_INV @ np.asarray(getattr(v, "coords", v), float)
    if abs(a[3]) < 1e-14 * np.linalg.norm(a):
        raise DegenerateError("vector is not a point of the sphere")
    return a[:3] / a[3]


def stereographic(X, pole) -> np.ndarray:
    """Chart of S^2 minus ``pole`` onto the plane through 0 orthogonal to it.

    The plane coordinates use a fixed frame (e1, e2) with (e1, e2, -pole)
    right-handed.
    """
    pole = np.asarray(pole, float)
    R = _frame_to_south(pole)
    Y = np.asarray(X, float) @ R.T
    den = 1.0 + Y[..., 2]
    if np.any(np.abs(den) < 1e-14):
        raise DegenerateError("point at the pole of the chart")
    return Y[..., :2] / den[..., None]


def _frame_to_south(pole) -> np.ndarray:
    """Rotation R with R pole = -e3."""
    w = -np.asarray(pole, float)
    k = int(np.argmin(np.abs(w)))
    a = np.eye(3)[k]
    e1 = a - (a @ w) * w
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(w, e1)
    return np.array([e1, e2, w])


@dataclass(frozen=True, eq=False)
class PointQuadruple:
    points: np.ndarray  # (4, 3) unit vectors

    def __post_init__(self):
        X = np.asarray(self.points, float)
        if X.shape != (4, 3):
            raise GeometryError("a quadruple needs four points of S^2")
        if np.max(np.abs(np.linalg.norm(X, axis=1) - 1.0)) > 1e-9:
            raise GeometryError("points must lie on the unit sphere")
        for a, b in combinations(range(4), 2):
            if np.linalg.norm(X[a] - X[b]) < 1e-9:
                raise DegenerateError(f"points {a} and {b} coincide")
        # no four on one circle: the homogeneous vectors must be independent
        H = np.column_stack([X, np.ones(4)])
        sv = np.linalg.svd(H, compute_uv=False)
        if sv[-1] < 1e-9 * sv[0]:
            raise DegenerateError("the four points are concircular")
        object.__setattr__(self, "points", X)

    @classmethod
    def from_plane(cls, x, pole=(0.0, 0.0, -1.0)) -> "PointQuadruple":
        """Inverse of :func:`stereographic`; planar points (4, 2)."""
        x = np.asarray(x, float)
        n2 = np.einsum("ij,ij->i", x, x)
        Y = np.column_stack([2 * x, 1.0 - n2]) / (1.0 + n2)[:, None]
        R = _frame_to_south(pole)
        return cls(Y @ R)

    def lifts(self) -> np.ndarray:
        return (C @ np.column_stack([self.points, np.ones(4)]).T).T


def circumcircles(q: PointQuadruple) -> np.ndarray:
    """Rows s_d (d = 0..3): unit circle through the other three points,
    oriented with (s_d, x_d) > 0."""
    L = q.lifts()
    g = SPACE.gram
    out = np.zeros((4, 4))
    for d in range(4):
        rows = np.delete(L, d, axis=0) @ g
        _, sv, vt = np.linalg.svd(rows)
        s = vt[-1]
        nrm = float(s @ g @ s)
        if nrm <= 0:
            raise DegenerateError("degenerate circumcircle")
        s = s / np.sqrt(nrm)
        if s @ g @ L[d] < 0:
            s = -s
        out[d] = s
    return out


def angle_bisector_circle(s1, s2) -> HomSphere:
    """(s1 + s2) / |s1 + s2|; bisects the oriented angle of s1 and s2."""
    a = np.asarray(getattr(getattr(s1, "v", s1), "coords", s1), float)
    b = np.asarray(getattr(getattr(s2, "v", s2), "coords", s2), float)
    a = a / np.sqrt(SPACE.inner(a, a))
    b = b / np.sqrt(SPACE.inner(b, b))
    m = a + b
    nrm = float(SPACE.inner(m, m))
    if nrm <= 1e-24 or np.linalg.norm(m) <= 1e-12:
        raise DegenerateError("opposite circles have no bisector")
    ab = float(SPACE.inner(a, b))
    if abs(ab) >= 1.0:
        raise DegenerateError("circles do not intersect in two points")
    return HomSphere(Vec(SPACE, m / np.sqrt(nrm)), MOEBIUS)


@dataclass(frozen=True)
class InExCentres:
    centres: np.ndarray      # (4, 3): y_a on S^2
    bisectors: np.ndarray    # (4, 3, 4): the three bisecting circles through x_a
    concurrency: np.ndarray  # (4,): |(third bisector, y_a)|


def _second_point(b1, b2, xa) -> np.ndarray:
    """The null line of {b1, b2}^perp other than x_a."""
    g = SPACE.gram
    _, _, vt = np.linalg.svd(np.array([b1, b2]) @ g)
    basis = vt[2:]  # complement, 2-dimensional, signature (1,1)
    gg = basis @ g @ basis.T
    # null directions of the 2x2 form; pick the one far from x_a
    lam, vec = np.linalg.eigh(gg)
    if not (lam[0] < 0 < lam[1]):
        raise DegenerateError("bisector pencil is not elliptic")
    u = vec[:, 0] / np.sqrt(-lam[0])
    w = vec[:, 1] / np.sqrt(lam[1])
    cands = [(u + w) @ basis, (u - w) @ basis]
    xa_n = xa / np.linalg.norm(xa)
    dev = [abs(abs(c @ xa_n) / np.linalg.norm(c) - 1.0) for c in cands]
    y = cands[int(np.argmax(dev))]
    return y


def in_ex_centres(q: PointQuadruple) -> InExCentres:
    """Second common point y_a of the three bisecting circles through x_a."""
    s = circumcircles(q)
    L = q.lifts()
    cen = np.zeros((4, 3))
    bis = np.zeros((4, 3, 4))
    conc = np.zeros(4)
    for a in range(4):
        others = [d for d in range(4) if d != a]
        bs = []
        for d, e in combinations(others, 2):
            # s_d and s_e share x_a; -s_e reverses the orientation so the
            # bisectors through x_a are concurrent
            bs.append(angle_bisector_circle(s[d], -s[e]).v.coords)
        bs = np.array(bs)
        y = _second_point(bs[0], bs[1], L[a])
        Y = to_sphere(y)
        ylift = C @ np.append(Y, 1.0)
        cen[a] = Y
        bis[a] = bs
        conc[a] = abs(SPACE.inner(bs[2], ylift)) / np.linalg.norm(ylift)
    return InExCentres(cen, bis, conc)


@dataclass(frozen=True)
class DesmicCentre:
    pairing: tuple[int, int, int, int]
    point: np.ndarray     # homogeneous (4,) in RP^3
    residual: float
    interior: bool


def _line_complement(A, B) -> np.ndarray:
    """Two vectors spanning the Euclidean complement of span(A, B) in R^4."""
    _, _, vt = np.linalg.svd(np.array([A, B]))
    return vt[2:]


def desmic_centres(X: PointQuadruple, Y) -> list[DesmicCentre]:
    """Centres of perspective of the lines x_a y_pi(a) for the four pairings.

    Each centre is the homogeneous point closest (in the least-squares sense)
    to lying on all four joining lines; the residual is the smallest singular
    value of the stacked line constraints.
    """
    Yp = np.asarray(getattr(Y, "centres", Y), float)
    Xh = np.column_stack([X.points, np.ones(4)])
    Yh = np.column_stack([Yp, np.ones(4)])
    out = []
    for pi in PAIRINGS:
        rows = np.vstack([_line_complement(Xh[a], Yh[pi[a]]) for a in range(4)])
        _, sv, vt = np.linalg.svd(rows)
        z = vt[-1]
        if z[3] < 0:
            z = -z
        interior = bool(abs(z[3]) > 1e-14 and np.linalg.norm(z[:3]) < abs(z[3]))
        out.append(DesmicCentre(pi, z, float(sv[-1]), interior))
    return out


def interior_centre(centres: list[DesmicCentre]) -> DesmicCentre:
    inside = [c for c in centres if c.interior]
    if len(inside) != 1:
        raise DegenerateError(f"expected one interior centre, found {len(inside)}")
    return inside[0]


def boost(z) -> np.ndarray:
    """Lorentz boost of R^{3,1} (form diag(1,1,1,-1)) moving (z, 1) to the axis."""
    z = np.asarray(z, float)
    r = float(np.linalg.norm(z))
    if r >= 1.0:
        raise GeometryError("centre must lie strictly inside the unit ball")
    if r == 0.0:
        return np.eye(4)
    gam = 1.0 / np.sqrt(1.0 - r * r)
    zh = z / r
    L = np.eye(4)
    L[:3, :3] += (gam - 1.0) * np.outer(zh, zh)
    L[:3, 3] = -gam * z
    L[3, :3] = -gam * z
    L[3, 3] = gam
    return L


def apply_moebius(L, X) -> np.ndarray:
    """Action of a Lorentz matrix (diagonal basis) on points of S^2."""
    X = np.atleast_2d(np.asarray(X, float))
    H = np.column_stack([X, np.ones(len(X))]) @ np.asarray(L).T
    return H[:, :3] / H[:, 3:4]


@dataclass(frozen=True)
class Normalization:
    g: np.ndarray          # Lorentz matrix in the diagonal basis
    g_null: np.ndarray     # same map in null coordinates of SPACE
    pairing: tuple[int, int, int, int]
    residual: float        # max_a |g x_a + g y_pi(a)|
    X: np.ndarray
    Y: np.ndarray


def antipodal_normalization(X: PointQuadruple, Y, centre: DesmicCentre) -> Normalization:
    """Ball automorphism moving the interior desmic centre to 0."""
    z = centre.point
    if abs(z[3]) < 1e-14:
        raise GeometryError("centre at infinity")
    zc = z[:3] / z[3]
    L = boost(zc)
    Yp = np.asarray(getattr(Y, "centres", Y), float)
    gX = apply_moebius(L, X.points)
    gY = apply_moebius(L, Yp)
    pi = centre.pairing
    res = max(float(np.linalg.norm(gX[a] + gY[pi[a]])) for a in range(4))
    return Normalization(L, C @ L @ C_INV, pi, res, gX, gY)


def incenter(A, B, Cc) -> np.ndarray:
    a, b, c = np.linalg.norm(B - Cc), np.linalg.norm(Cc - A), np.linalg.norm(A - B)
    return (a * A + b * B + c * Cc) / (a + b + c)


def excenters(A, B, Cc) -> np.ndarray:
    """Excentres opposite A, B and C."""
    a, b, c = np.linalg.norm(B - Cc), np.linalg.norm(Cc - A), np.linalg.norm(A - B)
    return np.array([(-a * A + b * B + c * Cc) / (-a + b + c),
                     (a * A - b * B + c * Cc) / (a - b + c),
                     (a * A + b * B - c * Cc) / (a + b - c)])
