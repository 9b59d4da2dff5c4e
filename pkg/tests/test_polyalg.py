import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tetduffy.errors import (
    BoundContainsVariable,
    DegreeOverflow,
    UnassignedVariable,
    UnexpectedVariable,
)
from tetduffy.polyalg import (
    MAX_DEGREE,
    U,
    XI,
    Y,
    Polynomial,
    Var,
    add,
    collect_w,
    integrate,
    mul,
    parse,
    substitute,
)

W = Polynomial.var(Var.W)
u1, u2 = Polynomial.var(Var.U1), Polynomial.var(Var.U2)
xi1, xi2, xi3 = (Polynomial.var(v) for v in XI)
y1, y2 = Polynomial.var(Var.Y1), Polynomial.var(Var.Y2)

SMALL_VARS = [Var.XI1, Var.XI2, Var.U1, Var.W, Var.Y1]


@st.composite
def polys(draw, max_terms=5, max_exp=2):
    n = draw(st.integers(0, max_terms))
    p = Polynomial()
    for _ in range(n):
        exps = {v: draw(st.integers(0, max_exp)) for v in SMALL_VARS}
        re = draw(st.floats(-3, 3, allow_nan=False))
        im = draw(st.floats(-3, 3, allow_nan=False))
        p = p + Polynomial.monomial(complex(re, im), exps)
    return p


def random_point(rng):
    return {v: rng.uniform(-1.2, 1.2) for v in SMALL_VARS}


def close(a, b, scale=1.0, tol=1e-13):
    return abs(a - b) <= tol * max(scale, abs(a), abs(b), 1.0)


# -- add / mul examples ------------------------------------------------------

def test_add_cancels_to_zero():
    assert (xi1 + (-xi1)).is_zero()
    assert add(xi1, -xi1) == Polynomial()


def test_add_like_terms():
    assert 2 * u1 * u2 + 3 * u1 * u2 == 5 * u1 * u2


def test_mul_difference_of_squares():
    assert mul(1 + W, 1 - W) == 1 - W**2


def test_mul_square():
    assert (u1 + u2) ** 2 == u1**2 + 2 * u1 * u2 + u2**2


def test_degree_cap():
    big = Polynomial.var(Var.Y1) ** 20
    with pytest.raises(DegreeOverflow):
        mul(big, big)
    assert (Polynomial.var(Var.Y1) ** MAX_DEGREE).degree == MAX_DEGREE


def test_division_by_constant_only():
    assert (xi1 / 4).coefficient({Var.XI1: 1}) == 0.25
    with pytest.raises(ValueError):
        parse("xi1/xi2")


# -- ring axioms by pointwise evaluation -------------------------------------

@settings(max_examples=25, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms_pointwise(a, b, c):
    rng = np.random.default_rng(0)
    for _ in range(100 // 10):
        pt = random_point(rng)
        va, vb, vc = a.eval(pt), b.eval(pt), c.eval(pt)
        s = max(abs(va), abs(vb), abs(vc), 1.0) ** 3
        assert close(add(a, b).eval(pt), va + vb, s)
        assert close(mul(a, b).eval(pt), va * vb, s)
        assert close((a * (b + c)).eval(pt), (a * b + a * c).eval(pt), s)
        assert close(((a * b) * c).eval(pt), (a * (b * c)).eval(pt), s)
        assert close((a * b).eval(pt), (b * a).eval(pt), s)
        assert close(((a + b) + c).eval(pt), (a + (b + c)).eval(pt), s)


@settings(max_examples=25, deadline=None)
@given(polys(), polys())
def test_commutativity_exact(a, b):
    assert a + b == b + a


# -- substitute -----------------------------------------------------------------

def test_substitute_table_entry():
    assert substitute(u2, {Var.U2: W * y1}) == W * y1


def test_substitute_ybar_shorthand():
    assert substitute(xi3, {Var.XI3: W * (1 - y1)}) == W - W * y1


def test_substitute_identity():
    p = parse("3*xi1^2*u2 - 2*w + 1")
    assert substitute(p, {}) == p
    assert substitute(p, {Var.XI1: xi1, Var.U2: u2}) == p


@settings(max_examples=30, deadline=None)
@given(polys(max_terms=4, max_exp=2), polys(max_terms=3, max_exp=2))
def test_substitute_commutes_with_eval(p, m):
    rng = np.random.default_rng(1)
    pt = random_point(rng)
    mapped = substitute(p, {Var.XI1: m})
    inner = dict(pt)
    inner[Var.XI1] = m.eval(pt)
    ref = p.eval(inner)
    assert close(mapped.eval(pt), ref, max(abs(ref), 1.0) * 10)


# -- integrate --------------------------------------------------------------------

def test_integrate_xi1():
    assert integrate(xi1, Var.XI1, 0, 1) == Polynomial.const(0.5)


def test_integrate_table_bounds():
    out = integrate(Polynomial.const(1), Var.XI1, xi2 + u2 - u1, 1 - u1)
    assert out.allclose(1 - xi2 - u2)


def test_integrate_symbolic_coefficient():
    a = Polynomial.var(Var.Y3)
    assert integrate(a * W**2, Var.W, 0, 1).allclose(a / 3)


def test_integrate_bound_may_not_contain_variable():
    with pytest.raises(BoundContainsVariable):
        integrate(xi1, Var.XI1, 0, xi1)


def test_integrate_then_differentiate(rng):
    p = parse("2*xi1^3*u1 - xi1*xi2 + 5*u1^2")
    lo, hi = u1, 1 + xi2
    F = integrate(p, Var.XI1, Polynomial(), Polynomial.var(Var.XI3))  # F(xi3) = int_0^xi3 p dxi1
    h = 1e-5
    for _ in range(10):
        pt = {Var.XI2: rng.random(), Var.U1: rng.random(), Var.XI3: rng.random()}
        fd = (F.eval({**pt, Var.XI3: pt[Var.XI3] + h}) - F.eval({**pt, Var.XI3: pt[Var.XI3] - h})) / (2 * h)
        exact = p.eval({**pt, Var.XI1: pt[Var.XI3]})
        assert abs(fd - exact) <= 1e-8 * max(1.0, abs(exact))
    # bounds that are themselves polynomials
    G = integrate(p, Var.XI1, lo, hi)
    assert Var.XI1 not in G.variables()


# -- collect_w ----------------------------------------------------------------------

def test_collect_w_example():
    out = collect_w(W**2 * y1 + W * y2)
    assert set(out) == {1, 2}
    assert out[1] == y2 and out[2] == y1


def test_collect_w_constant():
    assert collect_w(Polynomial.const(5)) == {0: Polynomial.const(5)}


def test_collect_w_rejects_other_symbols():
    with pytest.raises(UnexpectedVariable):
        collect_w(W * xi1)


def test_collect_w_reconstruction(rng):
    p = parse("w^3*y1*y2 - 2*w*y2^2 + 0.5*w^2 + y1 - 4*w^3")
    parts = collect_w(p)
    for _ in range(20):
        w, a, b = rng.random(3)
        pt = {Var.W: w, Var.Y1: a, Var.Y2: b}
        recon = sum(q.eval(pt) * w**n for n, q in parts.items())
        assert abs(recon - p.eval(pt)) <= 1e-14 * max(1.0, abs(recon))


# -- evaluation and export ------------------------------------------------------------

def test_eval_requires_all_symbols():
    with pytest.raises(UnassignedVariable):
        (xi1 * u1).eval({Var.XI1: 1.0})


def test_eval_keywords_and_arrays():
    p = parse("xi1*u1 + 2")
    assert p(xi1=3.0, u1=0.5) == 3.5
    vals = p.eval({Var.XI1: np.array([1.0, 2.0]), Var.U1: np.array([1.0, 1.0])})
    np.testing.assert_allclose(vals, [3.0, 4.0])


def test_to_arrays_rejects_unexpected():
    with pytest.raises(UnexpectedVariable):
        (y1 * xi1).to_arrays(Y)


def test_to_dense_matches_eval(rng):
    p = parse("y1^2*y2 - 3*y2 + 1.5")
    dense = p.to_dense(Y[:2])
    a, b = rng.random(2)
    val = sum(dense[i, j] * a**i * b**j for i in range(dense.shape[0]) for j in range(dense.shape[1]))
    assert abs(val - p(y1=a, y2=b)) < 1e-14


def test_parse_round_trip():
    p = parse("(1-y1)^2*w - u3 + xi2*x1*xp3")
    assert p == (1 - y1) ** 2 * W - Polynomial.var(Var.U3) + xi2 * Polynomial.var(Var.X1) * Polynomial.var(Var.XP3)
    assert parse(str(p)).allclose(p)


def test_terms_are_graded_lex_sorted():
    p = parse("u1 + xi1^2 + 3 + w*y1")
    degrees = [sum(e) for e, _ in p.terms()]
    assert degrees == sorted(degrees)


def test_alphabet_labels_unique():
    labels = [v.label for v in Var]
    assert len(set(labels)) == len(labels) == 17
    assert set(U) | set(XI) <= set(Var)
