"""Reduction of a singular tetrahedron-product integral to a smooth one.

For a canonical pair with ``n_cv`` common vertices, the integral of
``P(x, x') K(|x - x'|)`` over ``T x T'`` becomes

    J * int_{[0,1]^Y} sum_d jac_d(y) sum_n P_dn(y) K_{n+Y}(X_d(y)) dy

with ``Y = 6 - n_cv`` and ``J = 36 V V'``.  :func:`build_reduced` produces
the polynomials ``jac_d``, ``P_dn`` and ``X_d^2`` symbolically; the
resulting :class:`ReducedIntegrand` evaluates the smooth integrand
numerically, either at scattered points or on tensor grids.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import tables
from .errors import DegenerateGeometry, NegativeXSquared, SingularityTooStrong
from .geometry import TetPair, quadratic_form
from .kernels import Kernel, first_integrals, singularity_order
from .polyalg import U, X, XI, XP, Y, Polynomial, Var, collect_w, integrate, substitute

log = logging.getLogger(__name__)

NMIN_RTOL = 1e-13


def to_xi_u(P: Polynomial, pair: TetPair) -> Polynomial:
    """Rewrite P(x, x') as a polynomial in (xi, u) through x(xi), x'(xi + u)."""
    mapping = dict(zip(X, pair.x_of_xi()))
    mapping.update(zip(XP, pair.xp_of_xi_u()))
    return substitute(P, mapping)


def build_pbar(P: Polynomial, pair_or_ncv, d: int) -> Polynomial:
    """Integrate P(xi, u) over the xi components the kernel ignores."""
    n_cv = pair_or_ncv.n_cv if isinstance(pair_or_ncv, TetPair) else int(pair_or_ncv)
    _, xlim = tables.subdomain_limits()
    out = P
    for v in tables.xi_integrated(n_cv):
        lo, hi = xlim.bounds(d, v)
        out = integrate(out, v, lo, hi)
    return out


@dataclass(frozen=True, eq=False)
class SubdomainTerm:
    d: int
    jac: Polynomial
    xsq: Polynomial
    w_coeffs: dict[int, Polynomial]
    weight: float = 1.0


class _Dense:
    """Dense coefficient tensor of a y-polynomial, for tensor-grid evaluation."""

    __slots__ = ("coef", "exps", "vals")

    def __init__(self, p: Polynomial, yvars):
        self.coef = p.to_dense(yvars)
        self.exps, self.vals = p.to_arrays(yvars)

    def on_grid(self, vander: list[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid whose per-axis Vandermonde matrices are given.

        ``vander[i]`` has shape (n_i, deg_max + 1); result has shape (n_1, ..., n_Y).
        """
        t = self.coef
        for i, v in enumerate(vander):
            # contract the leading coefficient axis, append the grid axis at the end
            t = np.tensordot(t, v[:, : t.shape[0]], axes=([0], [1]))
        return t

    def at(self, pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[0], dtype=complex)
        for row, c in zip(self.exps, self.vals):
            out += c * np.prod(pts ** row, axis=1)
        return out


@dataclass(eq=False)
class ReducedIntegrand:
    n_cv: int
    global_jacobian: float
    kernel: Kernel
    terms: list[SubdomainTerm]
    n_min: int | None
    _dense: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        yv = self.y_vars
        self._dense = [
            (
                term.weight,
                _Dense(term.xsq, yv),
                {n: _Dense(term.jac * p, yv) for n, p in term.w_coeffs.items()},
            )
            for term in self.terms
        ]
        degs = [0]
        for _, xs, pn in self._dense:
            degs.extend(xs.coef.shape)
            for dn in pn.values():
                degs.extend(dn.coef.shape)
        self.max_degree = max(degs)

    @property
    def y_dim(self) -> int:
        return tables.y_dim(self.n_cv)

    @property
    def y_vars(self) -> tuple[Var, ...]:
        return Y[: self.y_dim]

    @property
    def powers(self) -> list[int]:
        """All first-integral orders n + Y that occur."""
        return sorted({n + self.y_dim for t in self.terms for n in t.w_coeffs})

    def with_kernel(self, kern: Kernel) -> "ReducedIntegrand":
        """Same polynomials, different kernel (the polynomials are kernel-independent)."""
        _check_order(self.n_min, self.n_cv, kern)
        return replace(self, kernel=kern, _dense=[])

    def _combine(self, xsq_vals: list[np.ndarray], pvals: list[dict[int, np.ndarray]]) -> np.ndarray:
        total = 0.0
        Yd = self.y_dim
        for (weight, _, _), xsq, pn in zip(self._dense, xsq_vals, pvals):
            if not pn:
                continue
            xr = xsq.real
            if np.any(xr <= 0):
                raise NegativeXSquared(f"X^2 <= 0 encountered (min {xr.min():.3g})")
            xval = np.sqrt(xr)
            kp = first_integrals(self.kernel, [n + Yd for n in pn], xval)
            acc = sum(pn[n] * kp[n + Yd] for n in pn)
            if weight != 1.0:
                acc = weight * acc
            total = total + acc
        if np.ndim(total) == 0:
            total = np.full(np.shape(xsq_vals[0]) if xsq_vals else (), total, dtype=complex)
        return self.global_jacobian * total

    def eval(self, y) -> np.ndarray | complex:
        """Integrand at points ``y`` of shape (Y,) or (M, Y)."""
        pts = np.atleast_2d(np.asarray(y, dtype=float))
        if pts.shape[1] != self.y_dim:
            raise ValueError(f"expected points of dimension {self.y_dim}")
        xsq = [xs.at(pts) for _, xs, _ in self._dense]
        pv = [{n: dn.at(pts) for n, dn in pn.items()} for _, _, pn in self._dense]
        out = self._combine(xsq, pv)
        return complex(out[0]) if np.ndim(y) == 1 else out

    def eval_grid(self, axes: list[np.ndarray]) -> np.ndarray:
        """Integrand on the tensor grid ``axes[0] x axes[1] x ...``."""
        if len(axes) != self.y_dim:
            raise ValueError(f"expected {self.y_dim} axes")
        deg = self.max_degree
        vander = [np.vander(np.asarray(a, dtype=float), deg, increasing=True) for a in axes]
        xsq = [xs.on_grid(vander) for _, xs, _ in self._dense]
        pv = [{n: dn.on_grid(vander) for n, dn in pn.items()} for _, _, pn in self._dense]
        return self._combine(xsq, pv)

    def subdomain_contributions(self, axes_weights) -> list[complex]:
        """Per-subdomain cubature values on a tensor rule (diagnostics)."""
        out = []
        for term in self.terms:
            single = ReducedIntegrand(self.n_cv, self.global_jacobian, self.kernel, [term], self.n_min)
            vals = single.eval_grid([a for a, _ in axes_weights])
            for _, w in reversed(axes_weights):
                vals = vals @ w
            out.append(complex(vals))
        return out


def _check_order(n_min: int | None, n_cv: int, kern: Kernel) -> None:
    if n_min is None:
        # P vanishes identically: nothing to desingularize
        return
    q = singularity_order(kern)
    ydim = tables.y_dim(n_cv)
    if n_min + ydim < q:
        raise SingularityTooStrong(
            f"kernel {kern.describe()} has singularity order {q} but n_cv={n_cv} "
            f"only desingularizes to order {n_min + ydim} (n_min={n_min}, Y={ydim})"
        )


def reduce_polynomials(pair: TetPair, P: Polynomial) -> list[SubdomainTerm]:
    """Symbolic part of the reduction: jac_d, X_d^2 and P_dn for every subdomain."""
    n_cv = pair.n_cv
    dmap = tables.duffy_map(n_cv)
    p_xi_u = to_xi_u(P, pair)
    r2 = quadratic_form(pair).poly
    allowed = set(U) | set(tables.xi_kept(n_cv))
    leftover = r2.variables() - allowed
    if leftover:
        raise DegenerateGeometry(
            f"distance depends on {sorted(v.label for v in leftover)}; pair is not canonical"
        )
    terms = []
    for d in range(1, tables.NSUB + 1):
        entry = dmap[d]
        mapping = entry.mapping()
        pbar = build_pbar(p_xi_u, n_cv, d)
        coeffs = collect_w(substitute(pbar, mapping))
        xw = collect_w(substitute(r2, mapping))
        xsq = xw.pop(2, Polynomial())
        scale = xsq.max_abs_coefficient()
        for n, stray in xw.items():
            if stray.max_abs_coefficient() > 1e-12 * max(scale, 1e-300):
                raise DegenerateGeometry(f"distance form not homogeneous in w (subdomain {d}, w^{n})")
        terms.append(SubdomainTerm(d, entry.jac, xsq.real(), coeffs))
    return terms


def _prune(terms: list[SubdomainTerm]) -> list[SubdomainTerm]:
    biggest = max(
        (p.max_abs_coefficient() for t in terms for p in t.w_coeffs.values()), default=0.0
    )
    cut = NMIN_RTOL * biggest
    out = []
    for t in terms:
        kept = {n: p for n, p in t.w_coeffs.items() if p.max_abs_coefficient() > cut}
        out.append(replace(t, w_coeffs=kept))
    return out


def _merge_identical(terms: list[SubdomainTerm], yvars, rtol: float = 1e-13) -> list[SubdomainTerm]:
    merged: list[SubdomainTerm] = []
    for t in terms:
        for i, m in enumerate(merged):
            if (
                set(t.w_coeffs) == set(m.w_coeffs)
                and t.jac.allclose(m.jac, rtol)
                and t.xsq.allclose(m.xsq, rtol)
                and all(t.w_coeffs[n].allclose(m.w_coeffs[n], rtol) for n in t.w_coeffs)
            ):
                merged[i] = replace(m, weight=m.weight + t.weight)
                break
        else:
            merged.append(t)
    return merged


def build_reduced(pair: TetPair, P: Polynomial, kern: Kernel, *,
                  merge_identical: bool = False, probes: int = 64,
                  seed: int = 0) -> ReducedIntegrand:
    """Reduce the singular integral for a canonical pair to a smooth integrand."""
    terms = _prune(reduce_polynomials(pair, P))
    present = [n for t in terms for n in t.w_coeffs]
    n_min = min(present) if present else None
    _check_order(n_min, pair.n_cv, kern)
    ydim = tables.y_dim(pair.n_cv)
    yvars = Y[:ydim]

    rng = np.random.default_rng(seed)
    pts = 0.02 + 0.96 * rng.random((probes, ydim))
    for t in terms:
        xs = _Dense(t.xsq, yvars).at(pts).real
        if np.any(xs <= 0):
            raise DegenerateGeometry(f"X_d^2 vanishes inside subdomain {t.d}")

    if merge_identical:
        before = len(terms)
        terms = _merge_identical(terms, yvars)
        log.info("merged %d identical subdomains", before - len(terms))
    return ReducedIntegrand(pair.n_cv, pair.jacobian, kern, terms, n_min)


def eval_reduced(ri: ReducedIntegrand, y) -> complex:
    return ri.eval(y)
