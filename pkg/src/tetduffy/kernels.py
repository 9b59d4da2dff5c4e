"""Kernel families K(r) and their first integrals.

The first integral of a kernel is

    K_p(X) = int_0^1 w**p K(w X) dw,

which is finite for ``p >= q`` when K(r) ~ r**-q at the origin.  The
Helmholtz-type kernels reduce to the exponential moments

    I_m(a) = int_0^1 w**m exp(a w) dw,   a = i k X,

computed by upward recurrence where ``m <= |a|`` and by downward
recurrence from a high starting order elsewhere.  Both directions are
stable in their own regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import NonpositiveRadius, NonpositiveX, OrderTooLow

FOUR_PI = 4.0 * math.pi


class Family(str, enum.Enum):
    HELMHOLTZ = "helmholtz"
    MFIE = "mfie"
    POWER = "power"
    ONE = "one"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Kernel:
    family: Family
    k: complex = 0j
    power: int = 0
    scale: float = 1.0
    func: Callable | None = None
    order: int = 0  # singularity order for CUSTOM kernels

    @classmethod
    def helmholtz(cls, k: complex) -> "Kernel":
        """exp(ikr) / (4 pi r)."""
        return cls(Family.HELMHOLTZ, k=complex(k))

    @classmethod
    def mfie(cls, k: complex) -> "Kernel":
        """(ikr - 1) exp(ikr) / (4 pi r^3)."""
        return cls(Family.MFIE, k=complex(k))

    @classmethod
    def power_law(cls, s: int, scale: float = 1.0) -> "Kernel":
        """scale * r**s."""
        if s < -4:
            raise ValueError("power-law exponent must be >= -4")
        return cls(Family.POWER, power=int(s), scale=float(scale))

    @classmethod
    def one(cls) -> "Kernel":
        return cls(Family.ONE)

    @classmethod
    def custom(cls, func: Callable, order: int) -> "Kernel":
        """User kernel ``func(r)`` (vectorised) with singularity order ``order``.

        First integrals are computed by adaptive quadrature.
        """
        return cls(Family.CUSTOM, func=func, order=int(order))

    @property
    def singularity_order(self) -> int:
        return singularity_order(self)

    def __call__(self, r):
        return kernel_eval(self, r)

    def describe(self) -> str:
        if self.family in (Family.HELMHOLTZ, Family.MFIE):
            return f"{self.family.value}(k={self.k})"
        if self.family is Family.POWER:
            return f"power(s={self.power})"
        return self.family.value


def singularity_order(kern: Kernel) -> int:
    fam = kern.family
    if fam is Family.HELMHOLTZ:
        return 1
    if fam is Family.MFIE:
        return 3
    if fam is Family.POWER:
        return max(0, -kern.power)
    if fam is Family.ONE:
        return 0
    return kern.order


def kernel_eval(kern: Kernel, r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise NonpositiveRadius("kernel evaluated at r <= 0")
    fam = kern.family
    if fam is Family.HELMHOLTZ:
        out = np.exp(1j * kern.k * r_arr) / (FOUR_PI * r_arr)
    elif fam is Family.MFIE:
        ikr = 1j * kern.k * r_arr
        out = (ikr - 1) * np.exp(ikr) / (FOUR_PI * r_arr**3)
    elif fam is Family.POWER:
        out = kern.scale * r_arr ** float(kern.power) + 0j
    elif fam is Family.ONE:
        out = np.ones_like(r_arr) + 0j
    else:
        out = np.asarray(kern.func(r_arr), dtype=complex)
    return out if np.ndim(r) else complex(out)


# -- exponential moments ---------------------------------------------------

def _upward(a: np.ndarray, ea: np.ndarray, m_max: int, i0: np.ndarray) -> np.ndarray:
    inv = 1.0 / a
    out = np.empty((m_max + 1,) + a.shape, dtype=complex)
    cur = i0
    out[0] = cur
    for m in range(1, m_max + 1):
        cur = (ea - m * cur) * inv
        out[m] = cur
    return out


def moments_upward(a, m_max: int) -> np.ndarray:
    """I_0..I_m_max by upward recurrence; shape (m_max + 1, *a.shape).

    Accurate for m <= |a|; requires a != 0.
    """
    a = np.asarray(a, dtype=complex)
    return _upward(a, np.exp(a), m_max, np.expm1(a) / a)


def _start_order(m_max: int, amax: float) -> int:
    # damping of the start error is prod_{j > m} |a| / j; push it below 1e-20
    start = max(m_max, int(math.floor(amax))) + 1
    logdamp, j = 0.0, start
    while True:
        logdamp += math.log(max(amax, 1e-300) / j)
        if logdamp < -46.0 or j > start + 2000:
            return j
        j += 1


def _downward(a: np.ndarray, ea: np.ndarray, m_max: int) -> np.ndarray:
    amax = float(np.max(np.abs(a), initial=0.0))
    top = _start_order(m_max, amax)
    cur = ea / (top + 1)
    out = np.empty((m_max + 1,) + a.shape, dtype=complex)
    for m in range(top, 0, -1):
        cur = (ea - a * cur) * (1.0 / m)
        if m - 1 <= m_max:
            out[m - 1] = cur
    return out


def moments_downward(a, m_max: int) -> np.ndarray:
    """I_0..I_m_max by downward recurrence from a high order.

    Accurate for m >= |a| (and at every m when |a| < 1).
    """
    a = np.asarray(a, dtype=complex)
    return _downward(a, np.exp(a), m_max)


def exp_moments(a, m_max: int) -> np.ndarray:
    """I_m(a) for m = 0..m_max, choosing the stable direction per entry."""
    a = np.asarray(a, dtype=complex)
    flat = a.reshape(-1)
    ea = np.exp(flat)
    absa = np.abs(flat)
    use_up = absa >= 1.0
    if use_up.all():
        # no cancellation in exp(a) - 1 once |a| >= 1
        out = _upward(flat, ea, m_max, (ea - 1.0) / flat)
    else:
        out = np.empty((m_max + 1, flat.size), dtype=complex)
        if use_up.any():
            au = flat[use_up]
            eu = ea[use_up]
            out[:, use_up] = _upward(au, eu, m_max, (eu - 1.0) / au)
    need_down = (absa < m_max) | ~use_up
    if need_down.any():
        idx = np.flatnonzero(need_down)
        down = _downward(flat[idx], ea[idx], m_max)
        ms = np.arange(m_max + 1)[:, None]
        ad = absa[idx][None, :]
        pick = (ms > ad) | (ad < 1.0)
        block = out[:, idx]
        np.copyto(block, down, where=pick)
        out[:, idx] = block
    return out.reshape((m_max + 1,) + a.shape)


# -- first integrals -----------------------------------------------------

def first_integrals(kern: Kernel, ps: Iterable[int], X) -> dict[int, np.ndarray]:
    """K_p(X) for every p in ``ps``, sharing the moment computation."""
    ps = sorted(set(int(p) for p in ps))
    X = np.asarray(X, dtype=float)
    if np.any(X <= 0):
        raise NonpositiveX("first integral needs X > 0")
    q = singularity_order(kern)
    if ps and ps[0] < q:
        raise OrderTooLow(f"K_{ps[0]} diverges for {kern.describe()} (singularity order {q})")
    fam = kern.family
    if fam is Family.ONE:
        return {p: np.full(X.shape, 1.0 / (p + 1), dtype=complex) for p in ps}
    if fam is Family.POWER:
        s = kern.power
        xs = kern.scale * X ** float(s)
        return {p: xs / (p + s + 1) + 0j for p in ps}
    if fam is Family.HELMHOLTZ:
        a = 1j * kern.k * X
        mom = exp_moments(a, ps[-1] - 1)
        inv = 1.0 / (FOUR_PI * X)
        return {p: mom[p - 1] * inv for p in ps}
    if fam is Family.MFIE:
        a = 1j * kern.k * X
        mom = exp_moments(a, ps[-1] - 2)
        inv = 1.0 / (FOUR_PI * X**3)
        return {p: (a * mom[p - 2] - mom[p - 3]) * inv for p in ps}
    return {p: first_integral_numeric(kern, p, X) for p in ps}


def first_integral(kern: Kernel, p: int, X):
    """K_p(X) in closed form; ``X`` scalar or array."""
    out = first_integrals(kern, [p], X)[p]
    return out if np.ndim(X) else complex(out)


def first_integral_numeric(kern: Kernel, p: int, X, tol: float = 1e-13):
    """K_p(X) by adaptive Gauss-Legendre quadrature of the defining integral."""
    from .oracle import adaptive_quad

    def one(x):
        return adaptive_quad(lambda w: w**p * kernel_eval(kern, w * x), 0.0, 1.0, tol)

    if np.ndim(X):
        return np.array([one(x) for x in np.ravel(X)]).reshape(np.shape(X))
    return one(float(X))
