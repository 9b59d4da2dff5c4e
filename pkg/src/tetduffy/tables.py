"""Subdomain decomposition of T0 x T0 and the per-subdomain Duffy maps.

With ``u = eta - xi`` the product of two standard tetrahedra
``T0 = {0 <= xi3 <= xi2 <= xi1 <= 1}`` splits into 18 pieces.  In piece
``d`` the relative coordinate runs over a tetrahedron given by
:data:`U_LIMITS` and, for fixed ``u``, the base point runs over

    xi3 in [L3, 1 + U3],  xi2 in [xi3 + L2, 1 + U2],  xi1 in [xi2 + L1, 1 + U1]

with the offsets of :data:`XI_LIMITS`.  For each number of common vertices
the Duffy map sends ``(w, y) in [0, 1]^(Y+1)`` onto the part of the piece
the kernel depends on; every mapped coordinate is ``w`` times a polynomial
in ``y`` and the Jacobian is ``w**Y * jac(y)``.

The rows are stored as expression strings and parsed on first use.  The
``verify_*`` functions are the guards against transcription mistakes.
"""

from __future__ import annotations

import contextlib
import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedNCV
from .polyalg import U, XI, Y, Polynomial, Var, integrate, parse

NSUB = 18
BOUNDARY_MARGIN = 1e-12

# (u1min, u1max, u2min, u2max, u3min, u3max)
U_LIMITS = {
    1: ("0", "1", "u1", "1", "u2", "1"),
    2: ("0", "1", "u1", "1", "0", "u2"),
    3: ("0", "1", "u1", "1", "u2-1", "0"),
    4: ("0", "1", "0", "u1", "u2", "1-u1+u2"),
    5: ("0", "1", "0", "u1", "0", "u2"),
    6: ("0", "1", "0", "u1", "u1-1", "0"),
    7: ("0", "1", "u1-1", "0", "0", "1-u1+u2"),
    8: ("0", "1", "u1-1", "0", "u2", "0"),
    9: ("0", "1", "u1-1", "0", "u1-1", "u2"),
    10: ("-1", "0", "0", "u1+1", "u2", "1+u1"),
    11: ("-1", "0", "0", "u1+1", "0", "u2"),
    12: ("-1", "0", "0", "u1+1", "u2-u1-1", "0"),
    13: ("-1", "0", "u1", "0", "0", "u1+1"),
    14: ("-1", "0", "u1", "0", "u2", "0"),
    15: ("-1", "0", "u1", "0", "u2-u1-1", "u2"),
    16: ("-1", "0", "-1", "u1", "0", "1+u2"),
    17: ("-1", "0", "-1", "u1", "u2", "0"),
    18: ("-1", "0", "-1", "u1", "-1", "u2"),
}

# (L3, U3, L2, U2, L1, U1)
XI_LIMITS = {
    1: ("0", "-u3", "u3-u2", "-u2", "u2-u1", "-u1"),
    2: ("0", "-u2", "0", "-u2", "u2-u1", "-u1"),
    3: ("-u3", "-u2", "0", "-u2", "u2-u1", "-u1"),
    4: ("0", "u2-u1-u3", "u3-u2", "-u1", "0", "-u1"),
    5: ("0", "-u1", "0", "-u1", "0", "-u1"),
    6: ("-u3", "-u1", "0", "-u1", "0", "-u1"),
    7: ("0", "u2-u1-u3", "u3-u2", "-u1", "0", "-u1"),
    8: ("-u3", "u2-u1-u3", "u3-u2", "-u1", "0", "-u1"),
    9: ("-u3", "-u1", "0", "-u1", "0", "-u1"),
    10: ("0", "u1-u3", "u3-u2", "u1-u2", "u2-u1", "0"),
    11: ("0", "u1-u2", "0", "u1-u2", "u2-u1", "0"),
    12: ("-u3", "u1-u2", "0", "u1-u2", "u2-u1", "0"),
    13: ("0", "u1-u3", "u3-u2", "u1-u2", "u2-u1", "0"),
    14: ("-u3", "u1-u3", "u3-u2", "u1-u2", "u2-u1", "0"),
    15: ("-u3", "u1-u2", "0", "u1-u2", "u2-u1", "0"),
    16: ("0", "u2-u3", "u3-u2", "0", "0", "0"),
    17: ("-u3", "u2-u3", "u3-u2", "0", "0", "0"),
    18: ("-u3", "0", "0", "0", "0", "0"),
}

# common tetrahedron: (jac, u1, u2, u3)
DUFFY_NCV4 = {
    1: ("y1", "w*y1*y2", "w*y1", "w"),
    2: ("1", "w*y1", "w", "w*y2"),
    3: ("y1", "w*y1*y2", "w*y1", "-w*(1-y1)"),
    4: ("y1", "w*y1", "w*y1*y2", "w*(1-y1+y1*y2)"),
    5: ("y1", "w", "w*y1", "w*y1*y2"),
    6: ("y1", "w*y1", "w*y1*y2", "-w*(1-y1)"),
    7: ("y1", "w*y1*y2", "-w*y1*(1-y2)", "w*(1-y1)"),
    8: ("y1", "w*(1-y1)", "-w*y1", "-w*y1*y2"),
    9: ("y1", "w*y1*(1-y2)", "-w*y1*y2", "-w*(1-y1+y1*y2)"),
    10: ("y1", "-w*y1*y2", "w*y1*(1-y2)", "w*(1-y1*y2)"),
    11: ("y1", "-w*y1*y2", "w*(1-y1*y2)", "w*y1*(1-y2)"),
    12: ("y1", "-w*y1*y2", "w*y1*(1-y2)", "-w*(1-y1)"),
    13: ("y1", "-w*y1", "-w*y1*y2", "w*(1-y1)"),
    14: ("y1", "-w", "-w*y1", "-w*y1*y2"),
    15: ("y1", "-w*y1", "-w*y1*y2", "-w*(1-y1+y1*y2)"),
    16: ("y1", "-w*y1*y2", "-w*y1", "w*(1-y1)"),
    17: ("1", "-w*y1", "-w", "-w*(1-y2)"),
    18: ("y1", "-w*y1*y2", "-w*y1", "-w"),
}

# common face: (jac, u1, u2, u3, xi3)
DUFFY_NCV3 = {
    1: ("y1^2*y2", "w*y1*y2*y3", "w*y1*y2", "w*y1", "w*yb1"),
    2: ("y1^2", "w*y1*y2", "w*y1", "w*y1*y3", "w*yb1"),
    3: ("y1^2*y2", "w*y1*y2*y3", "w*y1*y2", "-w*y1*yb2", "w*zA"),
    4: ("y1^2*y2", "w*y1*y2", "w*y1*y2*y3", "w*y1*zD", "w*yb1"),
    5: ("y1^2*y2", "w*y1", "w*y1*y2", "w*y1*y2*y3", "w*yb1"),
    6: ("y1^2*y2", "w*y1*y2", "w*y1*y2*y3", "-w*y1*yb2", "w*zA"),
    7: ("y1^2*y2", "w*y1*y2*y3", "-w*y1*y2*yb3", "w*y1*yb2", "w*yb1"),
    8: ("y1^2*y2", "w*y1*yb2", "-w*y1*y2", "-w*y1*y2*y3", "w*zE"),
    9: ("y1^2*y2", "w*y1*y2*yb3", "-w*y1*y2*y3", "-w*y1*zD", "w*zF"),
    10: ("y1^2*y2", "-w*y1*y2*y3", "w*y1*y2*yb3", "w*y1*zC", "w*yb1"),
    11: ("y1^2*y2", "-w*y1*y2*y3", "w*y1*zC", "w*y1*y2*yb3", "w*yb1"),
    12: ("y1^2*y2", "-w*y1*y2*y3", "w*y1*y2*yb3", "-w*y1*yb2", "w*zA"),
    13: ("y1^2*y2", "-w*y1*y2", "-w*y1*y2*y3", "w*y1*yb2", "w*yb1"),
    14: ("y1^2*y2", "-w*y1", "-w*y1*y2", "-w*y1*y2*y3", "w*zE"),
    15: ("y1^2*y2", "-w*y1*y2", "-w*y1*y2*y3", "-w*y1*zD", "w*zF"),
    16: ("y1^2*y2", "-w*y1*y2*y3", "-w*y1*y2", "w*y1*yb2", "w*yb1"),
    17: ("y1^2", "-w*y1*y2", "-w*y1", "-w*y1*yb3", "w*zB"),
    18: ("y1^2*y2", "-w*y1*y2*y3", "-w*y1*y2", "-w*y1", "w"),
}

NCV3_SHORTHANDS = {
    "yb1": "1-y1", "yb2": "1-y2", "yb3": "1-y3",
    "zA": "1-y1*y2",
    "zB": "1-y1*y3",
    "zC": "1-y2*y3",
    "zD": "1-y2+y2*y3",
    "zE": "1-y1+y1*y2*y3",
    "zF": "1-y1*y2+y1*y2*y3",
}

# common edge, entries divided by w: (jac, u1, u2, u3, xi3, xi2)
DUFFY_NCV2 = {
    1: ("y1^3*y2^2*y3", "y1*y2*y3*y4", "y1*y2*y3", "y1*y2", "y1*yb2", "UE"),
    2: ("y1^3*y2^2", "y1*y2*y4", "y1*y2", "y1*y2*y3", "y1*yb2", "UA"),
    3: ("y1^3*y2^2*y3", "y1*y2*y3*y4", "y1*y2*y3", "-y1*y2*yb3", "y1*UB", "UE"),
    4: ("y1^3*y2^2*y3", "y1*y2*y3", "y1*y2*y3*y4", "y1*y2*UG", "y1*yb2", "UE"),
    5: ("y1^3*y2^2*y3", "y1*y2", "y1*y2*y3", "y1*y2*y3*y4", "y1*yb2", "UA"),
    6: ("y1^3*y2^2*y3", "y1*y2*y3", "y1*y2*y3*y4", "-y1*y2*yb3", "y1*UB", "UE"),
    7: ("y1^3*y2^2*y3", "y1*y2*y3*y4", "-y1*y2*y3*yb4", "y1*y2*yb3", "y1*yb2", "UF"),
    8: ("y1^3*y2^2*y3", "y1*y2*yb3", "-y1*y2*y3", "-y1*y2*y3*y4", "y1*UH", "UI"),
    9: ("y1^3*y2^2*y3", "y1*y2*y3*yb4", "-y1*y2*y3*y4", "-y1*y2*UG", "y1*UJ", "UK"),
    10: ("y1^3*y2^2*y3", "-y1*y2*y3*y4", "y1*y2*y3*yb4", "y1*y2*UD", "y1*yb2", "UE"),
    11: ("y1^3*y2^2*y3", "-y1*y2*y3*y4", "y1*y2*UD", "y1*y2*y3*yb4", "y1*yb2", "UA"),
    12: ("y1^3*y2^2*y3", "-y1*y2*y3*y4", "y1*y2*y3*yb4", "-y1*y2*yb3", "y1*UB", "UE"),
    13: ("y1^3*y2^2*y3", "-y1*y2*y3", "-y1*y2*y3*y4", "y1*y2*yb3", "y1*yb2", "UK"),
    14: ("y1^3*y2^2*y3", "-y1*y2", "-y1*y2*y3", "-y1*y2*y3*y4", "y1*UH", "UI"),
    15: ("y1^3*y2^2*y3", "-y1*y2*y3", "-y1*y2*y3*y4", "-y1*y2*UG", "y1*UJ", "UK"),
    16: ("y1^3*y2^2*y3", "-y1*y2*y3*y4", "-y1*y2*y3", "y1*y2*yb3", "y1*yb2", "1"),
    17: ("y1^3*y2^2", "-y1*y2*y3", "-y1*y2", "-y1*y2*yb4", "y1*UC", "1"),
    18: ("y1^3*y2^2*y3", "-y1*y2*y3*y4", "-y1*y2*y3", "-y1*y2", "y1", "1"),
}

NCV2_SHORTHANDS = {
    "yb1": "1-y1", "yb2": "1-y2", "yb3": "1-y3", "yb4": "1-y4",
    "UA": "1-y1*y2",
    "UB": "1-y2*y3",
    "UC": "1-y2*y4",
    "UD": "1-y3*y4",
    "UE": "1-y1*y2*y3",
    "UF": "1-y1*y2*y3*y4",
    "UG": "1-y3+y3*y4",
    "UH": "1-y2+y2*y3*y4",
    "UI": "1-y1*y2+y1*y2*y3",
    "UJ": "1-y2*y3+y2*y3*y4",
    "UK": "1-y1*y2*y3+y1*y2*y3*y4",
}

_RAW = {
    4: (DUFFY_NCV4, {}, False),
    3: (DUFFY_NCV3, NCV3_SHORTHANDS, False),
    2: (DUFFY_NCV2, NCV2_SHORTHANDS, True),
}


def y_dim(n_cv: int) -> int:
    return 6 - n_cv


def xi_kept(n_cv: int) -> tuple[Var, ...]:
    """xi components the kernel still depends on, in table column order."""
    return {4: (), 3: (Var.XI3,), 2: (Var.XI3, Var.XI2)}[n_cv]


def xi_integrated(n_cv: int) -> tuple[Var, ...]:
    """xi components integrated analytically, innermost first."""
    return {4: (Var.XI1, Var.XI2, Var.XI3), 3: (Var.XI1, Var.XI2), 2: (Var.XI1,)}[n_cv]


@dataclass(frozen=True)
class ULimits:
    rows: dict[int, tuple[Polynomial, ...]]

    def bounds(self, d: int, i: int) -> tuple[Polynomial, Polynomial]:
        """(min, max) of u_{i+1} in subdomain d."""
        row = self.rows[d]
        return row[2 * i], row[2 * i + 1]


@dataclass(frozen=True)
class XiLimits:
    rows: dict[int, tuple[Polynomial, ...]]

    def bounds(self, d: int, v: Var) -> tuple[Polynomial, Polynomial]:
        """Absolute (lower, upper) bounds of ``v`` in subdomain d."""
        l3, u3, l2, u2, l1, u1 = self.rows[d]
        if v == Var.XI3:
            return l3, 1 + u3
        if v == Var.XI2:
            return Polynomial.var(Var.XI3) + l2, 1 + u2
        if v == Var.XI1:
            return Polynomial.var(Var.XI2) + l1, 1 + u1
        raise ValueError(v)


@dataclass(frozen=True)
class DuffyEntry:
    jac: Polynomial
    u: tuple[Polynomial, Polynomial, Polynomial]
    xi: dict[Var, Polynomial] = field(default_factory=dict)

    def mapping(self) -> dict[Var, Polynomial]:
        m = dict(zip(U, self.u))
        m.update(self.xi)
        return m


@dataclass(frozen=True)
class DuffyMap:
    n_cv: int
    entries: dict[int, DuffyEntry]

    @property
    def y_dim(self) -> int:
        return y_dim(self.n_cv)

    @property
    def y_vars(self) -> tuple[Var, ...]:
        return Y[: self.y_dim]

    def __getitem__(self, d: int) -> DuffyEntry:
        return self.entries[d]


@functools.lru_cache(maxsize=None)
def subdomain_limits() -> tuple[ULimits, XiLimits]:
    ul = {d: tuple(parse(s) for s in row) for d, row in U_LIMITS.items()}
    xl = {d: tuple(parse(s) for s in row) for d, row in XI_LIMITS.items()}
    return ULimits(ul), XiLimits(xl)


@functools.lru_cache(maxsize=None)
def duffy_map(n_cv: int) -> DuffyMap:
    if n_cv not in _RAW:
        raise UnsupportedNCV(f"no Duffy table for n_cv={n_cv}; supported: 2, 3, 4")
    rows, short, w_extracted = _RAW[n_cv]
    symbols = {name: parse(expr) for name, expr in short.items()}
    w = Polynomial.var(Var.W)
    kept = xi_kept(n_cv)
    entries = {}
    for d, row in rows.items():
        polys = [parse(s, symbols) for s in row]
        jac, comps = polys[0], polys[1:]
        if w_extracted:
            comps = [w * c for c in comps]
        entries[d] = DuffyEntry(jac, tuple(comps[:3]), dict(zip(kept, comps[3:])))
    return DuffyMap(n_cv, entries)


@contextlib.contextmanager
def tampered(table: str, d: int, column: int, expr: str):
    """Temporarily replace one table cell (mutation testing of the self-checks).

    ``table`` is one of ``"u"``, ``"xi"``, ``"ncv4"``, ``"ncv3"``, ``"ncv2"``.
    """
    target = {
        "u": U_LIMITS, "xi": XI_LIMITS,
        "ncv4": DUFFY_NCV4, "ncv3": DUFFY_NCV3, "ncv2": DUFFY_NCV2,
    }[table]
    original = target[d]
    row = list(original)
    row[column] = expr
    target[d] = tuple(row)
    _clear_caches()
    try:
        yield
    finally:
        target[d] = original
        _clear_caches()


def _clear_caches():
    subdomain_limits.cache_clear()
    duffy_map.cache_clear()


# -- self-checks -----------------------------------------------------------

def _eval(p: Polynomial, point: dict) -> np.ndarray:
    return np.real(p.eval(point))


def _uniform_t0(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform samples of T0 as an (n, 3) array with xi1 >= xi2 >= xi3."""
    return -np.sort(-rng.random((n, 3)), axis=1)


def _membership(d: int, u: np.ndarray, xi: np.ndarray, margin: float) -> np.ndarray:
    """Whether (u, xi) lies in subdomain d, shrunk inward by ``margin``.

    A negative margin gives the closed subdomain grown outward.
    """
    ulim, xlim = subdomain_limits()
    point = {**dict(zip(U, u.T)), **dict(zip(XI, xi.T))}
    inside = np.ones(u.shape[0], dtype=bool)
    for i in range(3):
        lo, hi = ulim.bounds(d, i)
        inside &= (u[:, i] > _eval(lo, point) + margin) & (u[:, i] < _eval(hi, point) - margin)
    for j, v in enumerate(XI):
        lo, hi = xlim.bounds(d, v)
        inside &= (xi[:, j] > _eval(lo, point) + margin) & (xi[:, j] < _eval(hi, point) - margin)
    return inside


@dataclass
class PartitionReport:
    samples: int
    exactly_one: int
    none: int
    multiple: int
    ties: int
    volume_estimate: float

    @property
    def fraction(self) -> float:
        counted = self.samples - self.ties
        return self.exactly_one / counted if counted else 0.0

    @property
    def ok(self) -> bool:
        return self.fraction >= 1 - 1e-3

    def __str__(self):
        return (
            f"partition: {self.samples} samples, exactly-one {self.fraction:.6f}, "
            f"gaps {self.none}, overlaps {self.multiple}, boundary ties {self.ties}, "
            f"total measure {self.volume_estimate:.6f} (expect {1 / 36:.6f})"
        )


def verify_partition(samples: int = 10**6, seed: int = 0, margin: float = BOUNDARY_MARGIN,
                     chunk: int = 200_000) -> PartitionReport:
    """Monte-Carlo check that the 18 subdomains tile T0 x T0 exactly once.

    The measure estimate draws xi uniformly from T0 and u uniformly from
    [-1, 1]^3 and counts hits in the union of subdomains.
    """
    rng = np.random.default_rng(seed)
    one = none = multiple = ties = 0
    hits = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        xi = _uniform_t0(rng, n)
        eta = _uniform_t0(rng, n)
        u = eta - xi
        strict = np.zeros(n, dtype=int)
        closed = np.zeros(n, dtype=int)
        for d in range(1, NSUB + 1):
            strict += _membership(d, u, xi, margin)
            closed += _membership(d, u, xi, -margin)
        tie = (strict == 0) & (closed >= 1)
        ties += int(tie.sum())
        one += int(((strict == 1) & (closed == 1)).sum())
        none += int((closed == 0).sum())
        multiple += int((strict >= 2).sum())

        box_xi = _uniform_t0(rng, n)
        box_u = 2 * rng.random((n, 3)) - 1
        for d in range(1, NSUB + 1):
            hits += int(_membership(d, box_u, box_xi, 0.0).sum())
        done += n
    return PartitionReport(samples, one, none, multiple, ties, 8.0 / 6.0 * hits / samples)


@dataclass
class DuffyReport:
    n_cv: int
    d: int
    probes: int
    max_jac_rel_err: float
    outside: int
    origin_ok: bool
    rtol: float = 1e-6

    @property
    def ok(self) -> bool:
        return self.max_jac_rel_err <= self.rtol and self.outside == 0 and self.origin_ok

    def __str__(self):
        return (
            f"duffy n_cv={self.n_cv} d={self.d}: jac rel err {self.max_jac_rel_err:.2e}, "
            f"{self.outside}/{self.probes} images outside, origin {'ok' if self.origin_ok else 'BAD'}"
        )


def _map_values(entry: DuffyEntry, order: tuple[Var, ...], wy: np.ndarray) -> np.ndarray:
    """Evaluate mapped coordinates ``order`` at rows of ``wy`` = (w, y1, ...)."""
    point = {Var.W: wy[:, 0], **{Y[i]: wy[:, i + 1] for i in range(wy.shape[1] - 1)}}
    m = entry.mapping()
    return np.stack([np.real(m[v].eval(point)) * np.ones(wy.shape[0]) for v in order], axis=1)


def mapped_order(n_cv: int) -> tuple[Var, ...]:
    return U + xi_kept(n_cv)


def region_contains(n_cv: int, d: int, coords: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Closed-region test for points ``coords`` in the mapped variables.

    For the xi components that are integrated analytically, the test
    requires that their nested ranges are non-empty.
    """
    ulim, xlim = subdomain_limits()
    order = mapped_order(n_cv)
    point = {v: coords[:, i] for i, v in enumerate(order)}
    n = coords.shape[0]
    ok = np.ones(n, dtype=bool)
    for i in range(3):
        lo, hi = ulim.bounds(d, i)
        ok &= (coords[:, i] >= _eval(lo, point) - tol) & (coords[:, i] <= _eval(hi, point) + tol)
    # walk xi3 -> xi2 -> xi1; a dropped variable is set to its lower bound,
    # which is the most permissive choice for the ranges nested inside it
    for v in (Var.XI3, Var.XI2, Var.XI1):
        lo, hi = xlim.bounds(d, v)
        lo_v = _eval(lo, point) * np.ones(n)
        hi_v = _eval(hi, point) * np.ones(n)
        if v in point:
            ok &= (point[v] >= lo_v - tol) & (point[v] <= hi_v + tol)
        else:
            ok &= lo_v <= hi_v + tol
            point[v] = lo_v
    return ok


def verify_duffy(n_cv: int, d: int, probes: int = 100, seed: int = 0,
                 step: float = 1e-6) -> DuffyReport:
    """Finite-difference Jacobian and range check of one Duffy map."""
    dm = duffy_map(n_cv)
    entry = dm[d]
    order = mapped_order(n_cv)
    dim = dm.y_dim + 1
    rng = np.random.default_rng(seed + 1000 * n_cv + d)
    wy = 0.05 + 0.9 * rng.random((probes, dim))

    jac_fd = np.empty((probes, dim, dim))
    for k in range(dim):
        plus, minus = wy.copy(), wy.copy()
        plus[:, k] += step
        minus[:, k] -= step
        jac_fd[:, :, k] = (_map_values(entry, order, plus) - _map_values(entry, order, minus)) / (2 * step)
    det_fd = np.abs(np.linalg.det(jac_fd))
    ypoint = {Y[i]: wy[:, i + 1] for i in range(dim - 1)}
    analytic = wy[:, 0] ** dm.y_dim * np.real(entry.jac.eval(ypoint))
    rel = np.abs(det_fd - analytic) / np.abs(analytic)

    inside = region_contains(n_cv, d, _map_values(entry, order, rng.random((probes, dim))))
    zero = np.column_stack([np.zeros(probes), rng.random((probes, dim - 1))])
    origin_ok = bool(np.all(_map_values(entry, order, zero) == 0.0))
    return DuffyReport(n_cv, d, probes, float(rel.max()), int((~inside).sum()), origin_ok)


def region_volume(n_cv: int, d: int) -> float:
    """Exact measure of subdomain d projected onto the mapped variables."""
    ulim, xlim = subdomain_limits()
    vol = Polynomial.const(1.0)
    for v in reversed(xi_kept(n_cv)):
        # innermost kept variable first: xi2 (if kept) sits inside xi3
        lo, hi = xlim.bounds(d, v)
        vol = integrate(vol, v, lo, hi)
    for i in (2, 1, 0):
        lo, hi = ulim.bounds(d, i)
        vol = integrate(vol, U[i], lo, hi)
    return vol.coefficient().real


def duffy_volume(n_cv: int, d: int) -> float:
    """Integral of w**Y * jac(y) over the unit cube."""
    dm = duffy_map(n_cv)
    p = dm[d].jac
    for v in dm.y_vars:
        p = integrate(p, v, 0, 1)
    return p.coefficient().real / (dm.y_dim + 1)


def exact_total_measure() -> float:
    """Sum over subdomains of the exact (u, xi) measure; equals 1/36."""
    ulim, xlim = subdomain_limits()
    total = 0.0
    for d in range(1, NSUB + 1):
        vol = Polynomial.const(1.0)
        for v in (Var.XI1, Var.XI2, Var.XI3):
            lo, hi = xlim.bounds(d, v)
            vol = integrate(vol, v, lo, hi)
        for i in (2, 1, 0):
            lo, hi = ulim.bounds(d, i)
            vol = integrate(vol, U[i], lo, hi)
        total += vol.coefficient().real
    return total
