"""Indefinite inner product spaces in a fixed null basis.

Coordinates are taken with respect to the basis

    (o, e_1, ..., e_n, inf[, p])

with (o, o) = (inf, inf) = 0, (o, inf) = -1/2, (e_i, e_j) = delta_ij and
(p, p) = -1; all other pairings vanish.  The Moebius space omits ``p`` and
has signature (n+1, 1); the Lie space has signature (n+1, 2).

The null pair (o, inf) keeps the point lift o + x + |x|^2 inf polynomial,
so most identities in this package hold exactly in floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import null_space

from .errors import DegenerateError, SpaceMismatch

MOEBIUS = "moebius"
LIE = "lie"

EPS_SIG = 1e-9


@dataclass(frozen=True)
class Space:
    """Coordinate space R^{n+1,1} (Moebius) or R^{n+1,2} (Lie)."""

    n: int = 3
    kind: str = LIE

    def __post_init__(self):
        if self.kind not in (MOEBIUS, LIE):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("geometry dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.n + 2 if self.kind == MOEBIUS else self.n + 3

    # slot indices
    @property
    def i_o(self) -> int:
        return 0

    @property
    def i_inf(self) -> int:
        return self.n + 1

    @property
    def i_p(self) -> int:
        if self.kind != LIE:
            raise AttributeError("Moebius space has no point sphere slot")
        return self.n + 2

    @cached_property
    def gram(self) -> np.ndarray:
        g = np.zeros((self.dim, self.dim))
        g[0, self.n + 1] = g[self.n + 1, 0] = -0.5
        g[1:self.n + 1, 1:self.n + 1] = np.eye(self.n)
        if self.kind == LIE:
            g[self.n + 2, self.n + 2] = -1.0
        g.setflags(write=False)
        return g

    @property
    def signature(self) -> tuple[int, int]:
        return (self.n + 1, 1) if self.kind == MOEBIUS else (self.n + 1, 2)

    @cached_property
    def orthonormal_basis(self) -> np.ndarray:
        """Columns (e_1..e_n, o - inf, o + inf[, p]); B^T G B is diagonal +-1.

        Only used where an eigen decomposition needs a diagonal form.
        """
        cols = []
        for i in range(1, self.n + 1):
            cols.append(self._unit(i))
        cols.append(self._unit(0) - self._unit(self.n + 1))
        cols.append(self._unit(0) + self._unit(self.n + 1))
        if self.kind == LIE:
            cols.append(self._unit(self.n + 2))
        b = np.column_stack(cols)
        b.setflags(write=False)
        return b

    def _unit(self, i: int) -> np.ndarray:
        c = np.zeros(self.dim)
        c[i] = 1.0
        return c

    def inner(self, u, v):
        """Batched inner product of coordinate arrays (..., dim).

        Evaluated slot by slot so that inner(u, v) == inner(v, u) exactly.
        """
        u = _coords(u)
        v = _coords(v)
        n = self.n
        val = (np.einsum("...i,...i->...", u[..., 1:n + 1], v[..., 1:n + 1])
               - 0.5 * (u[..., 0] * v[..., n + 1] + u[..., n + 1] * v[..., 0]))
        if self.kind == LIE:
            val = val - u[..., n + 2] * v[..., n + 2]
        return val

    def vec(self, coords) -> "Vec":
        return Vec(self, coords)

    @property
    def o(self) -> "Vec":
        return Vec(self, self._unit(0))

    @property
    def inf(self) -> "Vec":
        return Vec(self, self._unit(self.n + 1))

    @property
    def p(self) -> "Vec":
        return Vec(self, self._unit(self.i_p))

    def e(self, i: int) -> "Vec":
        """Euclidean basis vector e_i, 1-based."""
        if not 1 <= i <= self.n:
            raise IndexError(i)
        return Vec(self, self._unit(i))

    def embed(self, x) -> np.ndarray:
        """Coordinates of a Euclidean vector x in R^n (the e-slots)."""
        c = np.zeros(np.shape(x)[:-1] + (self.dim,))
        c[..., 1:self.n + 1] = x
        return c


class Vec:
    """A vector of a :class:`Space`. Immutable."""

    __slots__ = ("space", "coords")

    def __init__(self, space: Space, coords):
        c = np.array(coords, dtype=float)
        if c.shape != (space.dim,):
            raise ValueError(f"expected {space.dim} coordinates, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coordinates")
        c.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coords", c)

    def __setattr__(self, name, value):
        raise AttributeError("Vec is immutable")

    def _check(self, other: "Vec"):
        if not isinstance(other, Vec):
            return NotImplemented
        if other.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Vec(self.space, self.coords + other.coords)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Vec(self.space, self.coords - other.coords)

    def __mul__(self, k):
        if isinstance(k, Vec):
            return NotImplemented
        return Vec(self.space, self.coords * float(k))

    __rmul__ = __mul__

    def __truediv__(self, k):
        return Vec(self.space, self.coords / float(k))

    def __neg__(self):
        return Vec(self.space, -self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __repr__(self):
        return f"Vec({self.space.kind}{self.space.n}, {np.array2string(self.coords, precision=6)})"

    def norm2(self) -> float:
        return float(self.space.inner(self.coords, self.coords))


def _coords(x):
    return x.coords if isinstance(x, Vec) else np.asarray(x, dtype=float)


def inner(u: Vec, v: Vec) -> float:
    if u.space != v.space:
        raise SpaceMismatch(f"{u.space} vs {v.space}")
    return float(u.space.inner(u.coords, v.coords))


class SignatureTriple(NamedTuple):
    n_pos: int
    n_neg: int
    n_zero: int


def restricted_gram(vs: Sequence[Vec]) -> np.ndarray:
    space = vs[0].space
    for v in vs:
        if v.space != space:
            raise SpaceMismatch("vectors from different spaces")
    b = np.array([v.coords for v in vs])
    return b @ space.gram @ b.T


def signature_of_span(vs: Sequence[Vec], eps: float = EPS_SIG) -> SignatureTriple:
    """Signature of the form restricted to span(vs).

    The span is first given a Euclidean-orthonormal coordinate basis (so
    linearly dependent inputs drop out), then the restricted Gram matrix
    is diagonalised. Eigenvalues below ``eps * max(1, max|lambda|)`` count
    as null directions.
    """
    if len(vs) == 0:
        raise ValueError("empty list of vectors")
    space = vs[0].space
    for v in vs:
        if v.space != space:
            raise SpaceMismatch("vectors from different spaces")
    a = np.array([v.coords for v in vs])
    u, sv, vt = np.linalg.svd(a, full_matrices=False)
    if sv[0] == 0.0:
        return SignatureTriple(0, 0, 0)
    rank = int(np.sum(sv > sv[0] * 1e-12))
    basis = vt[:rank]
    g = basis @ space.gram @ basis.T
    lam = np.linalg.eigvalsh(g)
    thr = eps * max(1.0, float(np.max(np.abs(lam))))
    return SignatureTriple(int(np.sum(lam > thr)), int(np.sum(lam < -thr)),
                           int(np.sum(np.abs(lam) <= thr)))


def reflection_matrix(m: Vec) -> np.ndarray:
    """Matrix of x -> x - 2 (x, m)/(m, m) m."""
    mm = m.norm2()
    if abs(mm) <= 1e-14 * float(m.coords @ m.coords):
        raise DegenerateError("reflection in a null vector")
    g = m.space.gram
    return np.eye(m.space.dim) - 2.0 / mm * np.outer(m.coords, g @ m.coords)


def reflect(x: Vec, m: Vec) -> Vec:
    if x.space != m.space:
        raise SpaceMismatch(f"{x.space} vs {m.space}")
    return Vec(x.space, reflection_matrix(m) @ x.coords)


def is_isometry(mat, space: Space, tol: float = 1e-10) -> tuple[bool, float]:
    """Return (ok, ||M^T G M - G||_max)."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (space.dim, space.dim):
        raise ValueError(f"expected {space.dim}x{space.dim} matrix")
    g = space.gram
    res = float(np.max(np.abs(mat.T @ g @ mat - g)))
    return res < tol, res


def orthogonal_complement(vs: Sequence[Vec], space: Space | None = None) -> list[Vec]:
    """Basis of {vs}^perp with respect to the indefinite form."""
    if not vs:
        if space is None:
            raise ValueError("need a space for an empty list")
        return [Vec(space, row) for row in np.eye(space.dim)]
    space = vs[0].space
    a = np.array([v.coords for v in vs]) @ space.gram
    ns = null_space(a, rcond=1e-12)
    return [Vec(space, col) for col in ns.T]


def span_projector(basis: np.ndarray, space: Space) -> np.ndarray:
    """Orthogonal projector onto a nondegenerate span (rows of ``basis``).

    Returns P with P @ x the component of x in the span.
    """
    b = np.atleast_2d(basis)
    g = b @ space.gram @ b.T
    if abs(np.linalg.det(g)) < 1e-14 * max(1.0, float(np.max(np.abs(g)))) ** len(g):
        raise DegenerateError("degenerate span has no orthogonal projector")
    return b.T @ np.linalg.solve(g, b @ space.gram)
