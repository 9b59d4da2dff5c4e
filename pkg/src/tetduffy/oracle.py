"""Independent brute-force reference computations.

None of these share code paths with the reduction pipeline beyond the
polynomial type: the first-integral oracle is adaptive 1-D quadrature, the
6-D oracle is plain tensor Gauss-Legendre on collapsed simplex
coordinates, and tetrahedron moments use the closed-form simplex moment.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .geometry import Tetrahedron, TetPair
from .kernels import Kernel, kernel_eval, singularity_order
from .errors import NoConvergence, NonpositiveX, OrderTooLow
from .polyalg import X, XI, XP, Polynomial, Var, substitute

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def adaptive_quad(f: Callable, a: float, b: float, tol: float = 1e-13,
                  order: int = 20, max_depth: int = 40) -> complex:
    """Adaptive bisection with ``order``-point Gauss panels.

    A panel is accepted when its estimate agrees with the sum over its two
    halves to within its width-proportional share of ``tol`` times the
    first whole-interval estimate, or to within roundoff.  ``f`` must
    accept numpy arrays.
    """
    nodes, weights = gauss_legendre01(order)

    def panel(lo, hi):
        h = hi - lo
        vals = f(lo + h * nodes)
        return complex(np.sum(weights * vals) * h), float(np.sum(weights * np.abs(vals)) * h)

    whole, _ = panel(a, b)
    stack = [(a, b, whole, 0)]
    accepted = []
    scale = abs(whole)
    length = b - a
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        (left, abs_l), (right, abs_r) = panel(lo, mid), panel(mid, hi)
        refined = left + right
        # error budget shared in proportion to panel width, floored at roundoff
        budget = tol * (scale if scale > 0 else 1.0) * (hi - lo) / length
        budget = max(budget, 64 * np.finfo(float).eps * (abs_l + abs_r))
        if abs(refined - est) <= budget:
            accepted.append(refined)
            continue
        if depth >= max_depth:
            raise NoConvergence(f"adaptive quadrature did not converge on [{lo}, {hi}]")
        stack.append((mid, hi, right, depth + 1))
        stack.append((lo, mid, left, depth + 1))
    return complex(math.fsum(c.real for c in accepted) + 1j * math.fsum(c.imag for c in accepted))


def brute_first_integral(kern: Kernel, p: int, x: float, tol: float = 1e-14) -> complex:
    """K_p(X) = int_0^1 w^p K(w X) dw by adaptive quadrature."""
    if tol < 1e-14:
        raise ValueError("tol must be >= 1e-14")
    if x <= 0:
        raise NonpositiveX("X must be positive")
    if p < singularity_order(kern):
        raise OrderTooLow(f"K_{p} diverges for {kern.describe()}")
    return adaptive_quad(lambda w: w**p * kernel_eval(kern, w * x), 0.0, 1.0, tol)


def _collapsed_simplex(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points of T0 (xi1 >= xi2 >= xi3) and weights from a collapsed cube rule."""
    t, wt = gauss_legendre01(order)
    s1, s2, s3 = np.meshgrid(t, t, t, indexing="ij")
    w = (wt[:, None, None] * wt[None, :, None] * wt[None, None, :]) * s1**2 * s2
    xi = np.stack([s1, s1 * s2, s1 * s2 * s3], axis=-1).reshape(-1, 3)
    return xi, w.reshape(-1)


def _points(t: Tetrahedron, xi: np.ndarray) -> np.ndarray:
    return t.vertices[0] + xi @ t.edges


def brute_6d(pair, P: Polynomial, kern: Kernel, order: int, block: int = 2_000_000,
             order_b: int | None = None) -> complex:
    """Tensor Gauss-Legendre of the 6-D integral on collapsed coordinates.

    ``pair`` is a :class:`TetPair` or a ``(tet_a, tet_b)`` tuple.  Singular
    contact geometries converge only algebraically.  A different
    ``order_b`` for the second tetrahedron keeps the two point sets
    disjoint, which a common-tetrahedron pair needs.
    """
    order_b = order if order_b is None else order_b
    if max(order, order_b) > 24:
        raise ValueError("order must be <= 24")
    ta, tb = (pair.tet_a, pair.tet_b) if isinstance(pair, TetPair) else pair
    xi, wts = _collapsed_simplex(order)
    xi_b, wts_b = _collapsed_simplex(order_b)
    xa, xb = _points(ta, xi), _points(tb, xi_b)
    jac = 36.0 * ta.volume * tb.volume
    regular = singularity_order(kern) == 0
    step = max(1, block // len(xb))
    partials = []
    for start in range(0, len(xa), step):
        pa = xa[start:start + step]
        wa = wts[start:start + step]
        diff = pa[:, None, :] - xb[None, :, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        if regular:
            # coincident points are harmless for a bounded kernel
            r = np.maximum(r, np.finfo(float).tiny)
        point = {X[c]: pa[:, None, c] for c in range(3)}
        point.update({XP[c]: xb[None, :, c] for c in range(3)})
        pv = P.eval(point) if not P.is_zero() else 0.0
        vals = pv * kernel_eval(kern, r)
        partials.append(wa @ (vals @ wts_b))
    return jac * complex(sum(partials))


def exact_tet_moment(t: Tetrahedron, f: Polynomial) -> complex:
    """Exact integral of ``f(x1, x2, x3)`` over tetrahedron ``t``.

    Maps the unit simplex {l >= 0, l1 + l2 + l3 <= 1} onto ``t`` and uses
    int l1^a l2^b l3^c = a! b! c! / (a + b + c + 3)!.
    """
    v = t.vertices
    lam = [Polynomial.var(s) for s in XI]
    mapping = {}
    for c in range(3):
        comp = Polynomial.const(v[0, c])
        for i in range(3):
            comp = comp + lam[i] * float(v[i + 1, c] - v[0, c])
        mapping[X[c]] = comp
    g = substitute(f, mapping)
    extra = g.variables() - set(XI)
    if extra:
        raise ValueError("f must depend only on x1, x2, x3")
    total = 0j
    fact = math.factorial
    for exps, coef in g.terms():
        a, b, c = (exps[int(s)] for s in XI)
        total += coef * fact(a) * fact(b) * fact(c) / fact(a + b + c + 3)
    return total * 6.0 * t.volume


def moment_at(t: Tetrahedron, f: Polynomial, var_set=X) -> complex:
    """Exact moment of ``f`` written in the primed symbols when ``var_set`` is XP."""
    if var_set is X:
        return exact_tet_moment(t, f)
    rename = {XP[c]: Polynomial.var(X[c]) for c in range(3)}
    return exact_tet_moment(t, substitute(f, rename))
