"""P polynomials and kernels for common volume-integral-equation formulations."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ZeroWavenumber
from .kernels import Kernel
from .polyalg import X, XP, Polynomial


class Kind(str, enum.Enum):
    AIM = "aim"
    VEFIE_SWG = "efie"
    VMFIE_SWG = "mfie"
    ONE = "one"
    POWER = "power"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FormulationSpec:
    kind: Kind
    k: complex = 0j
    q_a: tuple[float, float, float] = (0.0, 0.0, 0.0)
    q_b: tuple[float, float, float] = (0.0, 0.0, 0.0)
    power: int = 0


def _vec(symbols) -> list[Polynomial]:
    return [Polynomial.var(s) for s in symbols]


def _shift(v: list[Polynomial], q) -> list[Polynomial]:
    return [c - float(qc) for c, qc in zip(v, q)]


def _dot(a, b) -> Polynomial:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b) -> list[Polynomial]:
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]


def build_p_aim(k: complex = 0j) -> tuple[Polynomial, Kernel]:
    """Pulse basis functions: P = 1 with the Helmholtz kernel."""
    return Polynomial.const(1.0), Kernel.helmholtz(k)


def build_p_efie(spec: FormulationSpec) -> tuple[Polynomial, Kernel]:
    """P = (x - Q).(x' - Q') - 9/k^2 with the Helmholtz kernel."""
    if spec.k == 0:
        raise ZeroWavenumber("the EFIE polynomial needs k != 0")
    x = _shift(_vec(X), spec.q_a)
    xp = _shift(_vec(XP), spec.q_b)
    P = _dot(x, xp) - 9.0 / complex(spec.k) ** 2
    return P, Kernel.helmholtz(spec.k)


def build_p_mfie(spec: FormulationSpec) -> tuple[Polynomial, Kernel]:
    """P = (x - Q).[(x - x') x (x' - Q')] with the MFIE kernel.

    P vanishes identically on x = x', which buys the extra order of
    desingularization the 1/r^3 kernel needs in the common-tetrahedron case.
    """
    x, xp = _vec(X), _vec(XP)
    sep = [a - b for a, b in zip(x, xp)]
    P = _dot(_shift(x, spec.q_a), _cross(sep, _shift(xp, spec.q_b)))
    return P, Kernel.mfie(spec.k)


def build(spec: FormulationSpec) -> tuple[Polynomial, Kernel]:
    kind = Kind(spec.kind)
    if kind is Kind.AIM:
        return build_p_aim(spec.k)
    if kind is Kind.VEFIE_SWG:
        return build_p_efie(spec)
    if kind is Kind.VMFIE_SWG:
        return build_p_mfie(spec)
    if kind is Kind.ONE:
        return Polynomial.const(1.0), Kernel.one()
    if kind is Kind.POWER:
        return Polynomial.const(1.0), Kernel.power_law(spec.power)
    raise ValueError("custom formulations are built by the caller")


def p_efie_direct(x, xp, q_a, q_b, k) -> complex:
    """Pointwise EFIE polynomial, for cross-checking the expansion."""
    return complex(np.dot(np.subtract(x, q_a), np.subtract(xp, q_b)) - 9.0 / complex(k) ** 2)


def p_mfie_direct(x, xp, q_a, q_b) -> float:
    return float(np.dot(np.subtract(x, q_a), np.cross(np.subtract(x, xp), np.subtract(xp, q_b))))
