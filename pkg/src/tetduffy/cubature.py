"""Clenshaw-Curtis rules and tensor-product cubature on the unit hypercube."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

MAX_POINTS = 129
CHUNK_POINTS = 1 << 17


@dataclass(frozen=True)
class CCRule:
    n_points: int
    nodes: np.ndarray
    weights: np.ndarray


def _node(r: Fraction) -> float:
    # (1 - cos(pi r)) / 2 written as sin^2 and mirrored, so that equal
    # fractions give bit-identical nodes and x(1-r) = 1 - x(r)
    if r == Fraction(1, 2):
        return 0.5
    if r > Fraction(1, 2):
        return 1.0 - _node(1 - r)
    return math.sin(math.pi * r.numerator / r.denominator / 2) ** 2


@lru_cache(maxsize=None)
def _cc(n: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    N = n - 1
    nodes = tuple(_node(Fraction(j, N)) for j in range(n))
    weights = []
    for j in range(n):
        theta = math.pi * j / N
        s = 0.0
        for k in range(1, N // 2 + 1):
            b = 1.0 if 2 * k == N else 2.0
            s += b * math.cos(2 * k * theta) / (4 * k * k - 1)
        c = 1.0 if j in (0, N) else 2.0
        weights.append(0.5 * c / N * (1.0 - s))
    # the rule is symmetric; enforce it exactly
    for j in range(n // 2):
        avg = 0.5 * (weights[j] + weights[N - j])
        weights[j] = weights[N - j] = avg
    return nodes, tuple(weights)


def cc_rule(n: int) -> CCRule:
    """n-point Clenshaw-Curtis rule on [0, 1] (Chebyshev extrema)."""
    if n < 2:
        raise ValueError("Clenshaw-Curtis rule needs n >= 2")
    if n > MAX_POINTS:
        raise ValueError(f"n capped at {MAX_POINTS}")
    nodes, weights = _cc(n)
    return CCRule(n, np.array(nodes), np.array(weights))


def default_threads() -> int:
    env = os.environ.get("TETDUFFY_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunks(n: int, dim: int) -> list[slice]:
    per_slice = n ** (dim - 1)
    width = max(1, CHUNK_POINTS // per_slice)
    return [slice(i, min(n, i + width)) for i in range(0, n, width)]


def tensor_integrate(ri, n: int, threads: int | None = None) -> complex:
    """Tensor-product Clenshaw-Curtis cubature of a reduced integrand.

    The grid is split along its first axis into chunks that depend only on
    ``n`` and the dimension; partial sums are combined in chunk order, so
    the result does not depend on ``threads``.
    """
    rule = cc_rule(n)
    dim = ri.y_dim
    chunks = _chunks(n, dim)

    def partial(sl: slice) -> complex:
        axes = [rule.nodes[sl]] + [rule.nodes] * (dim - 1)
        vals = ri.eval_grid(axes)
        for _ in range(dim - 1):
            vals = vals @ rule.weights
        return complex(vals @ rule.weights[sl])

    threads = default_threads() if threads is None else threads
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partial, chunks))
    else:
        parts = [partial(sl) for sl in chunks]
    total = 0j
    for p in parts:
        total += p
    return total


def integrate_function(f, dim: int, n: int) -> complex:
    """Tensor CC cubature of a vectorised ``f(points)`` with points (M, dim)."""
    rule = cc_rule(n)
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    wgrid = np.ones(1)
    for _ in range(dim):
        wgrid = np.multiply.outer(wgrid, rule.weights).reshape(-1)
    return complex(np.sum(wgrid * f(pts)))


@dataclass(frozen=True)
class SweepRow:
    n: int
    total_samples: int
    value: complex
    rel_delta: float


def converge_sweep(ri, n_list, threads: int | None = None) -> list[SweepRow]:
    """Cubature at each n, with relative deviation from the largest-n value."""
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    if sorted(n_list) != n_list:
        raise ValueError("n_list must be ascending")
    values = [tensor_integrate(ri, n, threads) for n in n_list]
    ref = values[-1]
    denom = abs(ref) if ref != 0 else 1.0
    return [
        SweepRow(n, n**ri.y_dim, v, abs(v - ref) / denom) for n, v in zip(n_list, values)
    ]
