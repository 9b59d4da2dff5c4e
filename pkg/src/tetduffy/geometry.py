"""Tetrahedra, pair canonicalisation and the distance quadratic form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTetrahedron, NotEnoughCommonVertices
from .polyalg import U, XI, Polynomial, Var

DEFAULT_RELTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Tetrahedron:
    """Four vertices as a read-only (4, 3) float array."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(4, 3)
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def edges(self) -> np.ndarray:
        """Chain edges V2-V1, V3-V2, V4-V3 as rows."""
        v = self.vertices
        return np.array([v[1] - v[0], v[2] - v[1], v[3] - v[2]])

    @property
    def volume(self) -> float:
        return volume(self)

    def max_edge(self) -> float:
        v = self.vertices
        return max(np.max(np.abs(v[i] - v[j])) for i in range(4) for j in range(i + 1, 4))

    def transformed(self, rotation=None, translation=None, scale: float = 1.0) -> "Tetrahedron":
        v = self.vertices * scale
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return Tetrahedron(v)

    def __eq__(self, other):
        return isinstance(other, Tetrahedron) and np.array_equal(self.vertices, other.vertices)

    __hash__ = None


def volume(t: Tetrahedron) -> float:
    v = t.vertices
    return abs(np.linalg.det(np.array([v[1] - v[0], v[2] - v[0], v[3] - v[0]]))) / 6.0


@dataclass(frozen=True, eq=False)
class TetPair:
    """Two tetrahedra whose first ``n_cv`` vertices coincide, in order."""

    tet_a: Tetrahedron
    tet_b: Tetrahedron
    n_cv: int
    perm_a: tuple[int, ...] = field(default=(0, 1, 2, 3))
    perm_b: tuple[int, ...] = field(default=(0, 1, 2, 3))

    @property
    def edges_a(self) -> np.ndarray:
        return self.tet_a.edges

    @property
    def edges_b(self) -> np.ndarray:
        return self.tet_b.edges

    @property
    def origin(self) -> np.ndarray:
        return self.tet_a.vertices[0]

    @property
    def jacobian(self) -> float:
        return 36.0 * volume(self.tet_a) * volume(self.tet_b)

    def x_of_xi(self) -> list[Polynomial]:
        """Cartesian x(xi) = V1 + xi1 L1 + xi2 L2 + xi3 L3, per component."""
        return _affine(self.origin, self.edges_a, [Polynomial.var(v) for v in XI])

    def xp_of_xi_u(self) -> list[Polynomial]:
        """Cartesian x'(xi + u) with the edges of ``tet_b``."""
        eta = [Polynomial.var(a) + Polynomial.var(b) for a, b in zip(XI, U)]
        return _affine(self.origin, self.edges_b, eta)


def _affine(origin, edges, params) -> list[Polynomial]:
    comps = []
    for c in range(3):
        p = Polynomial.const(origin[c])
        for i in range(3):
            if edges[i, c] != 0.0:
                p = p + params[i] * float(edges[i, c])
        comps.append(p)
    return comps


def canonicalize_pair(ta: Tetrahedron, tb: Tetrahedron, tol: float | None = None) -> TetPair:
    """Reorder the vertices of ``ta`` and ``tb`` so shared vertices come first.

    Shared vertices are those within ``tol`` in max-norm (default
    1e-12 times the longest edge).  They are listed in their ``ta`` order;
    the remaining vertices keep their original relative order.  Shared
    vertices of ``tb`` are snapped to the exact coordinates of ``ta`` so
    that the common edge vectors cancel exactly.
    """
    scale = max(ta.max_edge(), tb.max_edge())
    if tol is None:
        tol = DEFAULT_RELTOL * scale
    for t in (ta, tb):
        if volume(t) <= max(tol, DEFAULT_RELTOL * scale) ** 3:
            raise DegenerateTetrahedron(f"tetrahedron volume {volume(t):.3g} is degenerate")

    va, vb = ta.vertices, tb.vertices
    matches = []
    used_b = set()
    for i in range(4):
        for j in range(4):
            if j not in used_b and np.max(np.abs(va[i] - vb[j])) <= tol:
                matches.append((i, j))
                used_b.add(j)
                break
    n_cv = len(matches)
    if n_cv < 2:
        raise NotEnoughCommonVertices(f"pair shares {n_cv} vertices; at least 2 required")

    shared_a = [i for i, _ in matches]
    shared_b = [j for _, j in matches]
    perm_a = tuple(shared_a + [i for i in range(4) if i not in shared_a])
    perm_b = tuple(shared_b + [j for j in range(4) if j not in shared_b])
    new_a = va[list(perm_a)]
    new_b = vb[list(perm_b)].copy()
    new_b[:n_cv] = new_a[:n_cv]
    return TetPair(Tetrahedron(new_a), Tetrahedron(new_b), n_cv, perm_a, perm_b)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """|x(xi) - x'(xi + u)|^2 as a homogeneous quadratic in (xi, u)."""

    poly: Polynomial
    n_cv: int

    def coefficient(self, a: Var, b: Var | None = None) -> float:
        exps = {a: 1} if b is not None and a != b else {a: 2}
        if b is not None and a != b:
            exps[b] = 1
        return self.poly.coefficient(exps).real

    def matrix(self) -> np.ndarray:
        """Symmetric 6x6 matrix M over (xi1..3, u1..3) with form = z^T M z."""
        order = list(XI) + list(U)
        m = np.zeros((6, 6))
        for i, a in enumerate(order):
            for j, b in enumerate(order):
                if i == j:
                    m[i, i] = self.coefficient(a)
                else:
                    m[i, j] = 0.5 * self.coefficient(a, b)
        return m

    def variables(self) -> set[Var]:
        return self.poly.variables()

    def __call__(self, xi, u):
        point = {**dict(zip(XI, xi)), **dict(zip(U, u))}
        return self.poly.eval(point).real


def separation(pair: TetPair) -> list[Polynomial]:
    """Components of x(xi) - x'(xi + u); linear and homogeneous in (xi, u)."""
    return [a - b for a, b in zip(pair.x_of_xi(), pair.xp_of_xi_u())]


def quadratic_form(pair: TetPair) -> QuadraticForm:
    diff = separation(pair)
    r2 = diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]
    return QuadraticForm(r2.real(), pair.n_cv)
