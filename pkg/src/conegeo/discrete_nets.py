"""Circular nets on Z^2 windows: Miquel completion, Ribaucour transforms,
cross-ratios, Christoffel duals and Darboux transforms.

Faces are the cyclically ordered quadruples (x[i,j], x[i+1,j], x[i+1,j+1],
x[i,j+1]).  A net with edge labels alpha (one per u-edge column) and beta
(one per v-edge row) is discrete isothermic when

    cr(face) = -alpha_i / beta_j ,

so an a x b rectangle has labels (a^2, b^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ClosureError, DegenerateError, GeometryError, NoCommonSphere

COLLINEAR_TOL = 1e-12
CIRCULAR_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuadNet:
    """vertices: (U+1, V+1, 3); alpha: (U,) u-edge labels; beta: (V,) v-edge labels."""

    vertices: np.ndarray
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.vertices, float)
        if x.ndim != 3 or x.shape[2] != 3 or x.shape[0] < 2 or x.shape[1] < 2:
            raise GeometryError("net vertices must have shape (U+1, V+1, 3)")
        object.__setattr__(self, "vertices", x)
        U, V = self.window
        if self.alpha is not None:
            a = np.asarray(self.alpha, float).reshape(-1)
            if a.shape != (U,):
                raise GeometryError(f"expected {U} u-edge labels")
            object.__setattr__(self, "alpha", a)
        if self.beta is not None:
            b = np.asarray(self.beta, float).reshape(-1)
            if b.shape != (V,):
                raise GeometryError(f"expected {V} v-edge labels")
            object.__setattr__(self, "beta", b)

    @property
    def window(self) -> tuple[int, int]:
        return self.vertices.shape[0] - 1, self.vertices.shape[1] - 1

    @property
    def diameter(self) -> float:
        pts = self.vertices.reshape(-1, 3)
        return float(np.linalg.norm(np.ptp(pts, axis=0)))

    def face(self, i: int, j: int) -> np.ndarray:
        x = self.vertices
        return np.array([x[i, j], x[i + 1, j], x[i + 1, j + 1], x[i, j + 1]])

    def faces(self):
        U, V = self.window
        for i in range(U):
            for j in range(V):
                yield (i, j), self.face(i, j)

    def max_face_circularity(self) -> float:
        return max(circularity_residual(q) for _, q in self.faces()) / max(self.diameter, 1e-300)

    @property
    def is_circular(self) -> bool:
        return self.max_face_circularity() < CIRCULAR_TOL


@dataclass(frozen=True)
class Circle3D:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("circle radius must be positive")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-12:
            raise GeometryError("circle normal must be a unit vector")

    def distance(self, x) -> float:
        d = np.asarray(x, float) - self.center
        h = float(d @ self.normal)
        rho = np.linalg.norm(d - h * self.normal)
        return float(np.hypot(h, rho - self.radius))

    def frame(self, start=None) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal basis (e1, e2) of the circle plane, e1 towards ``start``."""
        if start is None:
            k = int(np.argmin(np.abs(self.normal)))
            start = self.center + np.eye(3)[k]
        e1 = np.asarray(start, float) - self.center
        e1 = e1 - (e1 @ self.normal) * self.normal
        e1 /= np.linalg.norm(e1)
        return e1, np.cross(self.normal, e1)

    def point(self, angle: float, start=None) -> np.ndarray:
        e1, e2 = self.frame(start)
        return self.center + self.radius * (np.cos(angle) * e1 + np.sin(angle) * e2)


def circumcircle3(p1, p2, p3) -> Circle3D:
    p1, p2, p3 = (np.asarray(p, float) for p in (p1, p2, p3))
    a, b = p1 - p3, p2 - p3
    axb = np.cross(a, b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if np.linalg.norm(axb) <= COLLINEAR_TOL * na * nb or na == 0 or nb == 0:
        raise DegenerateError("circumcircle of collinear or coincident points")
    w = axb @ axb
    c = p3 + np.cross((a @ a) * b - (b @ b) * a, axb) / (2.0 * w)
    return Circle3D(c, float(np.linalg.norm(p1 - c)), axb / np.sqrt(w))


def circularity_residual(q) -> float:
    """Largest distance of one vertex from the circle through the other three
    (over all non-degenerate choices)."""
    q = np.asarray(q, float)
    best = []
    for k in range(4):
        rest = [q[m] for m in range(4) if m != k]
        try:
            best.append(circumcircle3(*rest).distance(q[k]))
        except DegenerateError:
            continue
    if not best:
        raise DegenerateError("all vertex triples are degenerate")
    return float(max(best))


def _chart(q, circle: Circle3D | None = None) -> np.ndarray:
    circle = circle or circumcircle3(q[0], q[1], q[2])
    e1, e2 = circle.frame(q[0])
    d = np.asarray(q, float) - circle.center
    return d @ e1 + 1j * (d @ e2)


def _cr(z1, z2, z3, z4):
    return (z1 - z2) * (z3 - z4) / ((z2 - z3) * (z4 - z1))


def _scale(q) -> float:
    return float(np.linalg.norm(np.ptp(np.asarray(q, float), axis=0)))


def cross_ratio(q, tol: float = CIRCULAR_TOL) -> float:
    """Real cross-ratio ((z1-z2)(z3-z4))/((z2-z3)(z4-z1)) in a complex chart of
    the circle plane."""
    q = np.asarray(q, float)
    s = _scale(q)
    dists = [np.linalg.norm(q[i] - q[j]) for i in range(4) for j in range(i + 1, 4)]
    if min(dists) <= 1e-12 * s:
        raise DegenerateError("coincident points in cross-ratio")
    if circularity_residual(q) > tol * s:
        raise GeometryError("cross-ratio of non-concircular points")
    cr = _cr(*_chart(q))
    return float(cr.real)


def _cr_complex(q) -> complex:
    return complex(_cr(*_chart(q)))


def isothermic_residual_discrete(net: QuadNet) -> float:
    """max over faces |cr(face) + alpha_i / beta_j|, plus a circularity
    penalty for faces that are not concircular (diameter-normalised)."""
    if net.alpha is None or net.beta is None:
        raise GeometryError("isothermic residual needs edge labels")
    scale = max(net.diameter, 1e-300)
    res = 0.0
    for (i, j), q in net.faces():
        target = -net.alpha[i] / net.beta[j]
        r = abs(_cr_complex(q) - target) + circularity_residual(q) / scale
        res = max(res, r)
    return float(res)


def _invert(y, center, radius2):
    d = y - center
    n2 = d @ d
    if n2 == 0:
        raise DegenerateError("inversion centre hit")
    return center + radius2 * d / n2


def _lift_rank_defect(pts) -> float:
    """sigma_min / sigma_max of the (homogeneous) sphere-condition matrix; ~0
    iff all points lie on a common sphere or plane."""
    pts = np.asarray(pts, float)
    c = pts.mean(axis=0)
    s = max(_scale(pts), 1e-300)
    y = (pts - c) / s
    rows = np.column_stack([np.ones(len(y)), y, np.einsum("ij,ij->i", y, y)])
    sv = np.linalg.svd(rows, compute_uv=False)
    return float(sv[-1] / sv[0]) if len(rows) >= 5 else 0.0


class MiquelResult(NamedTuple):
    point: np.ndarray
    residuals: dict


def _same(a, b, s) -> bool:
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) <= 1e-14 * max(s, 1.0)


def miquel_completion(xi, xj, xk, xl, hxi, hxj, hxl, tol: float = 1e-9) -> MiquelResult:
    """Eighth point of the Miquel configuration.

    x_hat_k is the second intersection (besides x_k) of the circles
    (x_j, x_k, x_hat_j) and (x_l, x_k, x_hat_l).  Inverting at x_k turns both
    circles into lines; their intersection is inverted back.  The residuals
    report the two constructed edge constraints and the third (transformed
    face) constraint.
    """
    pts = [np.asarray(p, float) for p in (xi, xj, xk, xl, hxi, hxj, hxl)]
    xi, xj, xk, xl, hxi, hxj, hxl = pts
    s = _scale(pts)
    if _same(hxi, xi, s) and _same(hxj, xj, s) and _same(hxl, xl, s):
        out = xk.copy()
    else:
        if _lift_rank_defect(pts) > tol:
            raise NoCommonSphere("Miquel data do not lie on a common sphere")
        r2 = float(np.linalg.norm(xj - xk) * np.linalg.norm(xl - xk))
        a1, b1 = _invert(xj, xk, r2), _invert(hxj, xk, r2)
        a2, b2 = _invert(xl, xk, r2), _invert(hxl, xk, r2)
        d1, d2 = b1 - a1, b2 - a2
        n1, n2 = np.linalg.norm(d1), np.linalg.norm(d2)
        if n1 == 0 or n2 == 0:
            raise DegenerateError("edge circle degenerates (coincident points)")
        cross = np.cross(d1, d2)
        if np.linalg.norm(cross) <= 1e-12 * n1 * n2:
            raise DegenerateError("edge circles are tangent at x_k")
        # closest points of the two lines
        m = np.array([[d1 @ d1, -(d1 @ d2)], [d1 @ d2, -(d2 @ d2)]])
        rhs = np.array([(a2 - a1) @ d1, (a2 - a1) @ d2])
        t1, t2 = np.linalg.solve(m, rhs)
        y1, y2 = a1 + t1 * d1, a2 + t2 * d2
        lscale = max(np.linalg.norm(a1 - xk), np.linalg.norm(a2 - xk), np.linalg.norm(y1 - xk))
        if np.linalg.norm(y1 - y2) > max(tol, 1e-9) * lscale:
            raise NoCommonSphere("edge circles do not meet a second time")
        out = _invert(0.5 * (y1 + y2), xk, r2)
    res = {
        "edge_jk": _quad_res([xj, xk, out, hxj], s),
        "edge_lk": _quad_res([xl, xk, out, hxl], s),
        "face": _quad_res([hxi, hxj, out, hxl], s),
    }
    return MiquelResult(out, res)


def _quad_res(q, s) -> float:
    q = np.asarray(q, float)
    try:
        return circularity_residual(q) / max(s, 1e-300)
    except DegenerateError:
        return 0.0


def edge_quads(net: QuadNet, hat: np.ndarray):
    """Yield the corresponding-edge quadruples (x, x', x_hat', x_hat)."""
    x = net.vertices
    U, V = net.window
    for i in range(U + 1):
        for j in range(V + 1):
            if i < U:
                yield ("u", i, j), np.array([x[i, j], x[i + 1, j], hat[i + 1, j], hat[i, j]])
            if j < V:
                yield ("v", i, j), np.array([x[i, j], x[i, j + 1], hat[i, j + 1], hat[i, j]])


def ribaucour_audit(net: QuadNet, other: QuadNet) -> dict:
    """Diameter-normalised circularity residuals of a transform pair."""
    s = max(net.diameter, other.diameter, 1e-300)
    edge = max((_quad_res(q, 1.0) for _, q in edge_quads(net, other.vertices)), default=0.0)
    return {
        "faces": net.max_face_circularity(),
        "transformed_faces": max(circularity_residual(q) for _, q in other.faces()) / s,
        "edges": edge / s,
        "count": sum(1 for _ in other.faces()) + sum(1 for _ in edge_quads(net, other.vertices)),
    }


def admissible_cauchy_data(net: QuadNet, hat00, angles_u, angles_v):
    """Row and column of transformed points with circular edge quads; each new
    point is taken on the circle through the previous edge and its image at the
    given angle (measured from the previous image point)."""
    x = net.vertices
    U, V = net.window
    row = [np.asarray(hat00, float)]
    for i in range(U):
        c = circumcircle3(x[i, 0], x[i + 1, 0], row[-1])
        row.append(c.point(angles_u[i], start=row[-1]))
    col = [row[0]]
    for j in range(V):
        c = circumcircle3(x[0, j], x[0, j + 1], col[-1])
        col.append(c.point(angles_v[j], start=col[-1]))
    return np.array(row), np.array(col)


def ribaucour_propagate(net: QuadNet, row0, col0, tol: float = 1e-9) -> QuadNet:
    """Fill the Ribaucour transform from x_hat[:, 0] = row0, x_hat[0, :] = col0
    by Miquel completion in lexicographic face order."""
    U, V = net.window
    row0 = np.asarray(row0, float)
    col0 = np.asarray(col0, float)
    if row0.shape != (U + 1, 3) or col0.shape != (V + 1, 3):
        raise GeometryError("Cauchy data must cover row 0 and column 0")
    if np.linalg.norm(row0[0] - col0[0]) > 1e-12 * max(net.diameter, 1.0):
        raise GeometryError("Cauchy data disagree at the corner")
    x = net.vertices
    hat = np.zeros_like(x)
    hat[:, 0] = row0
    hat[0, :] = col0
    for i in range(U):
        for j in range(V):
            try:
                r = miquel_completion(x[i, j], x[i + 1, j], x[i + 1, j + 1], x[i, j + 1],
                                      hat[i, j], hat[i + 1, j], hat[i, j + 1], tol=tol)
            except GeometryError as exc:
                raise type(exc)(f"face ({i},{j}): {exc}", object_id=f"face[{i},{j}]") from None
            hat[i + 1, j + 1] = r.point
    return QuadNet(hat, net.alpha, net.beta)


def _edge_scaled(d, label):
    return label * d / np.einsum("...i,...i->...", d, d)[..., None]


def christoffel_closure(net: QuadNet) -> float:
    """max over faces of the closure gap of the dual edge increments,
    relative to the largest dual increment."""
    x = net.vertices
    du = _edge_scaled(np.diff(x, axis=0), net.alpha[:, None, None])
    dv = _edge_scaled(np.diff(x, axis=1), -net.beta[None, :, None])
    gap = du[:, :-1] + dv[1:, :] - du[:, 1:] - dv[:-1, :]
    scale = max(float(np.max(np.linalg.norm(du, axis=-1))), float(np.max(np.linalg.norm(dv, axis=-1))))
    return float(np.max(np.linalg.norm(gap, axis=-1)) / scale)


def christoffel_dual(net: QuadNet, tol: float = 1e-10, base=None) -> QuadNet:
    """Dual net with increments alpha dx/|dx|^2 on u-edges and -beta dx/|dx|^2
    on v-edges."""
    if net.alpha is None or net.beta is None:
        raise GeometryError("Christoffel dual needs edge labels")
    gap = christoffel_closure(net)
    if gap > tol:
        raise ClosureError(f"dual increments do not close (gap {gap:.3e}); net is not isothermic")
    x = net.vertices
    du = _edge_scaled(np.diff(x, axis=0), net.alpha[:, None, None])
    dv = _edge_scaled(np.diff(x, axis=1), -net.beta[None, :, None])
    out = np.zeros_like(x)
    out[0, 0] = np.zeros(3) if base is None else base
    out[1:, 0] = out[0, 0] + np.cumsum(du[:, 0], axis=0)
    out[:, 1:] = out[:, :1] + np.cumsum(dv, axis=1)
    return QuadNet(out, net.alpha, net.beta)


def similarity_residual(a: QuadNet, b: QuadNet) -> float:
    """Residual of the best fit b ~ s R a + t (Umeyama), diameter-normalised."""
    A = a.vertices.reshape(-1, 3)
    B = b.vertices.reshape(-1, 3)
    ca, cb = A.mean(0), B.mean(0)
    A0, B0 = A - ca, B - cb
    u, sv, vt = np.linalg.svd(B0.T @ A0)
    d = np.ones(3)
    if np.linalg.det(u @ vt) < 0:
        d[-1] = -1
    R = u @ np.diag(d) @ vt
    s = float((sv * d).sum() / (A0 ** 2).sum())
    fit = s * A0 @ R.T + cb
    return float(np.max(np.linalg.norm(fit - B, axis=-1)) / max(b.diameter, 1e-300))


def _solve_fourth(z1, z2, z4, c):
    """z3 with cr(z1, z2, z3, z4) = c."""
    A, B = z1 - z2, z4 - z1
    den = A + c * B
    if abs(den) <= 1e-12 * (abs(A) + abs(c * B)):
        raise DegenerateError("degenerate cross-ratio equation")
    return (c * B * z2 + A * z4) / den


def _darboux_step(x0, x1, h0, c):
    """Point h1 with cr(x0, x1, h1, h0) = c, on the circle through x0, x1, h0."""
    circ = circumcircle3(x0, x1, h0)
    e1, e2 = circ.frame(x0)
    z = lambda p: complex((p - circ.center) @ e1, (p - circ.center) @ e2)
    w = _solve_fourth(z(x0), z(x1), z(h0), c)
    return circ.center + w.real * e1 + w.imag * e2


class DarbouxResult(NamedTuple):
    net: QuadNet
    closure: float


def darboux_transform_discrete(net: QuadNet, lam: float, seed, tol: float = 1e-9) -> DarbouxResult:
    """Darboux transform with cr(x, x_u, x_hat_u, x_hat) = lam * alpha and
    cr(x, x_v, x_hat_v, x_hat) = -lam * beta.

    Interior points are built along v-edges; the u-edge prediction is kept as
    the face closure gap (relative to the diameter of both nets).
    """
    if net.alpha is None or net.beta is None:
        raise GeometryError("Darboux transform needs edge labels")
    if abs(lam) < 1e-8:
        raise DegenerateError("spectral parameter too close to 0")
    x = net.vertices
    U, V = net.window
    hat = np.zeros_like(x)
    hat[0, 0] = seed
    for i in range(U):
        hat[i + 1, 0] = _darboux_step(x[i, 0], x[i + 1, 0], hat[i, 0], lam * net.alpha[i])
    gap = 0.0
    for j in range(V):
        for i in range(U + 1):
            hat[i, j + 1] = _darboux_step(x[i, j], x[i, j + 1], hat[i, j], -lam * net.beta[j])
            if i > 0:
                pred = _darboux_step(x[i - 1, j + 1], x[i, j + 1], hat[i - 1, j + 1],
                                     lam * net.alpha[i - 1])
                gap = max(gap, float(np.linalg.norm(pred - hat[i, j + 1])))
    out = QuadNet(hat, net.alpha, net.beta)
    gap /= max(net.diameter, out.diameter, 1e-300)
    if gap > tol:
        raise ClosureError(f"Darboux transform does not close (gap {gap:.3e})")
    return DarbouxResult(out, gap)


def exp_net(U: int, V: int, h: float, u0: float = 0.0, v0: float = 0.0) -> QuadNet:
    """Image of the square grid under z -> exp(z), a discrete isothermic net
    with labels alpha = sinh^2(h/2), beta = sin^2(h/2)."""
    i, j = np.meshgrid(np.arange(U + 1), np.arange(V + 1), indexing="ij")
    z = np.exp(u0 + h * i + 1j * (v0 + h * j))
    x = np.stack([z.real, z.imag, np.zeros_like(z.real)], axis=-1)
    return QuadNet(x, np.full(U, np.sinh(h / 2) ** 2), np.full(V, np.sin(h / 2) ** 2))


def rectangle_net(widths, heights) -> QuadNet:
    """Planar rectangle-strip grid; labels are the squared side lengths."""
    xs = np.concatenate([[0.0], np.cumsum(widths)])
    ys = np.concatenate([[0.0], np.cumsum(heights)])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    x = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    return QuadNet(x, np.asarray(widths, float) ** 2, np.asarray(heights, float) ** 2)


def invert_points(pts, center, radius: float = 1.0) -> np.ndarray:
    """Inversion in the sphere (center, radius)."""
    pts = np.asarray(pts, float)
    d = pts - center
    n2 = np.einsum("...i,...i->...", d, d)[..., None]
    if np.any(n2 == 0):
        raise DegenerateError("inversion centre hit")
    return center + radius * radius * d / n2
