"""Sparse multivariate polynomials with complex coefficients.

A polynomial is a map from exponent vectors to complex coefficients over a
fixed alphabet of symbols (see :class:`Var`).  Exponent vectors are packed
into a single integer, six bits per symbol, so that multiplying two monomials
is an integer addition.

Everything here is immutable.  Arithmetic goes through the ordinary Python
operators, plus the module-level helpers :func:`substitute`,
:func:`integrate` and :func:`collect_w` that the reduction pipeline needs.
"""

from __future__ import annotations

import ast
import enum
from typing import Callable, Iterable, Iterator, Mapping, Union

import numpy as np

from .errors import (
    BoundContainsVariable,
    DegreeOverflow,
    UnassignedVariable,
    UnexpectedVariable,
)

MAX_DEGREE = 32
PRUNE = 1e-300

_BITS = 6
_MASK = (1 << _BITS) - 1


class Var(enum.IntEnum):
    XI1 = 0
    XI2 = 1
    XI3 = 2
    U1 = 3
    U2 = 4
    U3 = 5
    W = 6
    Y1 = 7
    Y2 = 8
    Y3 = 9
    Y4 = 10
    # cartesian source symbols, only used to build P(x, x')
    X1 = 11
    X2 = 12
    X3 = 13
    XP1 = 14
    XP2 = 15
    XP3 = 16

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Var.XI1: "xi1", Var.XI2: "xi2", Var.XI3: "xi3",
    Var.U1: "u1", Var.U2: "u2", Var.U3: "u3",
    Var.W: "w",
    Var.Y1: "y1", Var.Y2: "y2", Var.Y3: "y3", Var.Y4: "y4",
    Var.X1: "x1", Var.X2: "x2", Var.X3: "x3",
    Var.XP1: "xp1", Var.XP2: "xp2", Var.XP3: "xp3",
}
_BY_LABEL = {label: v for v, label in _LABELS.items()}

NVARS = len(Var)
XI = (Var.XI1, Var.XI2, Var.XI3)
U = (Var.U1, Var.U2, Var.U3)
Y = (Var.Y1, Var.Y2, Var.Y3, Var.Y4)
X = (Var.X1, Var.X2, Var.X3)
XP = (Var.XP1, Var.XP2, Var.XP3)


def pack(exponents: Mapping[Var, int]) -> int:
    key = 0
    for v, e in exponents.items():
        if e < 0 or e > _MASK:
            raise ValueError(f"exponent {e} of {Var(v).label} out of range")
        key |= e << (_BITS * int(v))
    return key


def unpack(key: int) -> tuple[int, ...]:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(NVARS))


def _exp_of(key: int, v: int) -> int:
    return (key >> (_BITS * v)) & _MASK


def _key_degree(key: int) -> int:
    d = 0
    while key:
        d += key & _MASK
        key >>= _BITS
    return d


def _sort_key(key: int):
    # graded lexicographic, first alphabet symbol most significant
    return (_key_degree(key), tuple(-e for e in unpack(key)))


Scalar = Union[int, float, complex]


class Polynomial:
    """Immutable sparse polynomial.

    Build from :meth:`const`, :meth:`var` and arithmetic, or parse a string
    with :func:`parse`.
    """

    __slots__ = ("_terms", "_degree")

    def __init__(self, terms: Mapping[int, complex] | None = None):
        clean = {}
        if terms:
            for k, c in terms.items():
                c = complex(c)
                if abs(c) >= PRUNE:
                    clean[k] = c
        self._terms = clean
        self._degree = max((_key_degree(k) for k in clean), default=0)
        if self._degree > MAX_DEGREE:
            raise DegreeOverflow(f"degree {self._degree} exceeds cap {MAX_DEGREE}")

    @classmethod
    def _raw(cls, terms: dict[int, complex], degree: int) -> "Polynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._degree = degree
        return obj

    @classmethod
    def const(cls, c: Scalar) -> "Polynomial":
        return cls({0: c})

    @classmethod
    def var(cls, v: Var) -> "Polynomial":
        return cls({1 << (_BITS * int(v)): 1.0})

    @classmethod
    def monomial(cls, coef: Scalar, exponents: Mapping[Var, int]) -> "Polynomial":
        return cls({pack(exponents): coef})

    # -- inspection ----------------------------------------------------
    @property
    def degree(self) -> int:
        return self._degree

    @property
    def nterms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> set[Var]:
        used = 0
        for k in self._terms:
            used |= k
        return {v for v in Var if _exp_of(used, v)}

    def terms(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        """Yield ``(exponent_vector, coefficient)`` in graded-lex order."""
        for k in sorted(self._terms, key=_sort_key):
            yield unpack(k), self._terms[k]

    def coefficient(self, exponents: Mapping[Var, int] | None = None) -> complex:
        return self._terms.get(pack(exponents or {}), 0j)

    def degree_in(self, v: Var) -> int:
        return max((_exp_of(k, v) for k in self._terms), default=0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other) -> "Polynomial":
        return add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({k: -c for k, c in self._terms.items()}, self._degree)

    def __sub__(self, other) -> "Polynomial":
        return add(self, -_lift(other))

    def __rsub__(self, other) -> "Polynomial":
        return add(_lift(other), -self)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, complex)):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __truediv__(self, other: Scalar) -> "Polynomial":
        return self.scale(1.0 / other)

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.const(1.0)
        base = self
        while n:
            if n & 1:
                result = mul(result, base)
            n >>= 1
            if n:
                base = mul(base, base)
        return result

    def scale(self, c: Scalar) -> "Polynomial":
        c = complex(c)
        if c == 0:
            return Polynomial()
        return Polynomial({k: v * c for k, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float, complex)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def allclose(self, other: "Polynomial", rtol: float = 1e-13, atol: float = 0.0) -> bool:
        """Coefficient-wise comparison relative to the larger coefficient scale."""
        diff = self - _lift(other)
        scale = max(self.max_abs_coefficient(), _lift(other).max_abs_coefficient())
        return diff.max_abs_coefficient() <= atol + rtol * scale

    def real(self) -> "Polynomial":
        return Polynomial({k: c.real for k, c in self._terms.items()})

    def eval(self, point: Mapping[Var, object]):
        return evaluate(self, point)

    def __call__(self, **kwargs):
        return evaluate(self, {_BY_LABEL[name]: val for name, val in kwargs.items()})

    def __repr__(self) -> str:
        return f"Polynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for exps, c in self.terms():
            mono = "*".join(
                Var(i).label + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e
            )
            cs = _fmt_coef(c)
            parts.append(f"{cs}*{mono}" if mono else cs)
        return " + ".join(parts)

    # -- numeric export --------------------------------------------------
    def to_arrays(self, variables: Iterable[Var]) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(exponents, coefficients)`` over ``variables``.

        Raises UnexpectedVariable if the polynomial uses a symbol outside
        ``variables``.
        """
        variables = list(variables)
        extra = self.variables() - set(variables)
        if extra:
            raise UnexpectedVariable(f"unexpected symbols {sorted(v.label for v in extra)}")
        keys = sorted(self._terms, key=_sort_key)
        exps = np.array(
            [[_exp_of(k, v) for v in variables] for k in keys], dtype=np.int64
        ).reshape(len(keys), len(variables))
        coefs = np.array([self._terms[k] for k in keys], dtype=complex)
        return exps, coefs

    def to_dense(self, variables: Iterable[Var]) -> np.ndarray:
        """Dense coefficient tensor ``C[a1, a2, ...]`` over ``variables``."""
        variables = list(variables)
        exps, coefs = self.to_arrays(variables)
        shape = tuple(int(exps[:, j].max(initial=0)) + 1 for j in range(len(variables)))
        dense = np.zeros(shape, dtype=complex)
        for row, c in zip(exps, coefs):
            dense[tuple(row)] += c
        return dense


def _fmt_coef(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:.16g}"
    return f"({c.real:.16g}{c.imag:+.16g}j)"


def _lift(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    return Polynomial.const(x)


ZERO = Polynomial()
ONE = Polynomial.const(1.0)


def add(a: Polynomial, b: Polynomial) -> Polynomial:
    terms = dict(a._terms)
    for k, c in b._terms.items():
        terms[k] = terms.get(k, 0j) + c
    return Polynomial(terms)


def mul(a: Polynomial, b: Polynomial) -> Polynomial:
    if not a._terms or not b._terms:
        return Polynomial()
    if a._degree + b._degree > MAX_DEGREE:
        raise DegreeOverflow(
            f"product degree {a._degree + b._degree} exceeds cap {MAX_DEGREE}"
        )
    terms: dict[int, complex] = {}
    get = terms.get
    for ka, ca in a._terms.items():
        for kb, cb in b._terms.items():
            k = ka + kb
            terms[k] = get(k, 0j) + ca * cb
    return Polynomial(terms)


def substitute(p: Polynomial, mapping: Mapping[Var, Polynomial]) -> Polynomial:
    """Compose ``p`` with ``mapping``; unmapped symbols pass through."""
    if not mapping:
        return p
    mapped = [(int(v), _lift(q)) for v, q in mapping.items()]
    keep_mask = 0
    for v, _ in mapped:
        keep_mask |= _MASK << (_BITS * v)
    keep_mask = ~keep_mask

    powers: dict[tuple[int, int], Polynomial] = {}

    def power(idx: int, e: int) -> Polynomial:
        key = (idx, e)
        if key not in powers:
            if e == 1:
                powers[key] = mapped[idx][1]
            else:
                powers[key] = mul(power(idx, e - 1), mapped[idx][1])
        return powers[key]

    # group terms by their exponents in the mapped symbols
    groups: dict[tuple[int, ...], dict[int, complex]] = {}
    for k, c in p._terms.items():
        sig = tuple(_exp_of(k, v) for v, _ in mapped)
        groups.setdefault(sig, {})[k & keep_mask] = c

    out: dict[int, complex] = {}
    for sig in sorted(groups):
        factor = ONE
        for idx, e in enumerate(sig):
            if e:
                factor = mul(factor, power(idx, e))
        rest = Polynomial(groups[sig])
        prod = mul(rest, factor)
        for k, c in prod._terms.items():
            out[k] = out.get(k, 0j) + c
    return Polynomial(out)


def integrate(p: Polynomial, v: Var, lower, upper) -> Polynomial:
    """Definite integral of ``p`` in ``v`` between polynomial bounds."""
    lower, upper = _lift(lower), _lift(upper)
    if v in lower.variables() or v in upper.variables():
        raise BoundContainsVariable(f"integration bound depends on {v.label}")
    shift = _BITS * int(v)
    anti = {}
    for k, c in p._terms.items():
        e = _exp_of(k, v)
        anti[k + (1 << shift)] = c / (e + 1)
    antiderivative = Polynomial(anti)
    return substitute(antiderivative, {v: upper}) - substitute(antiderivative, {v: lower})


def collect_w(p: Polynomial) -> dict[int, Polynomial]:
    """Split ``p(w, y)`` into ``{n: P_n(y)}`` with ``p = sum_n P_n(y) w**n``."""
    allowed = {Var.W, *Y}
    extra = p.variables() - allowed
    if extra:
        raise UnexpectedVariable(
            f"collect_w expects only w and y symbols, found {sorted(v.label for v in extra)}"
        )
    shift = _BITS * int(Var.W)
    strip = ~(_MASK << shift)
    out: dict[int, dict[int, complex]] = {}
    for k, c in p._terms.items():
        n = _exp_of(k, Var.W)
        out.setdefault(n, {})[k & strip] = c
    return {n: Polynomial(out[n]) for n in sorted(out)}


def evaluate(p: Polynomial, point: Mapping[Var, object]):
    """Evaluate ``p`` at ``point``; values may be scalars or numpy arrays."""
    needed = p.variables()
    missing = needed - set(point)
    if missing:
        raise UnassignedVariable(f"no value for {sorted(v.label for v in missing)}")
    total = 0j
    for exps, c in p.terms():
        term = c
        for i, e in enumerate(exps):
            if e:
                term = term * point[Var(i)] ** e
        total = total + term
    return total


def eval_arrays(exps: np.ndarray, coefs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at ``points`` of shape (M, nvars)."""
    points = np.asarray(points)
    out = np.zeros(points.shape[0], dtype=complex)
    for row, c in zip(exps, coefs):
        out += c * np.prod(points ** row, axis=1)
    return out


# -- parsing ---------------------------------------------------------------

def parse(text: str, symbols: Mapping[str, Polynomial] | None = None) -> Polynomial:
    """Parse an arithmetic expression over the alphabet labels.

    ``symbols`` supplies extra named sub-expressions (shorthands).
    """
    extra = dict(symbols or {})
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    return _walk(tree.body, extra)


_BINOPS: dict[type, Callable[[Polynomial, Polynomial], Polynomial]] = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
}


def _walk(node, extra) -> Polynomial:
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exponent = node.right
            if not (isinstance(exponent, ast.Constant) and isinstance(exponent.value, int)):
                raise ValueError("only integer constant powers are supported")
            return _walk(node.left, extra) ** exponent.value
        if isinstance(node.op, ast.Div):
            denom = node.right
            if not isinstance(denom, ast.Constant):
                raise ValueError("only division by constants is supported")
            return _walk(node.left, extra) / denom.value
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        return op(_walk(node.left, extra), _walk(node.right, extra))
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return -_walk(node.operand, extra)
        if isinstance(node.op, ast.UAdd):
            return _walk(node.operand, extra)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return Polynomial.const(node.value)
    if isinstance(node, ast.Name):
        if node.id in extra:
            return extra[node.id]
        if node.id in _BY_LABEL:
            return Polynomial.var(_BY_LABEL[node.id])
        raise ValueError(f"unknown symbol {node.id!r}")
    raise ValueError(f"cannot parse {ast.dump(node)}")
