import numpy as np
import pytest

from tetduffy import tables
from tetduffy.cubature import cc_rule, tensor_integrate
from tetduffy.errors import SingularityTooStrong
from tetduffy.formulations import FormulationSpec, Kind, build
from tetduffy.geometry import Tetrahedron, canonicalize_pair
from tetduffy.kernels import Kernel
from tetduffy.oracle import brute_6d, exact_tet_moment, moment_at
from tetduffy.polyalg import X, XP, Polynomial, Var, parse
from tetduffy.reduction import build_pbar, build_reduced, eval_reduced

from conftest import TA, TB, TC, TABLE_PAIRS, rel

ONE = Polynomial.const(1.0)


def efie(qa, qb, k=10):
    return build(FormulationSpec(Kind.VEFIE_SWG, k, tuple(qa), tuple(qb)))


def mfie(qa, qb, k=10):
    return build(FormulationSpec(Kind.VMFIE_SWG, k, tuple(qa), tuple(qb)))


def value(ta, tb, P, kern, n=25, **kw):
    return tensor_integrate(build_reduced(canonicalize_pair(ta, tb), P, kern, **kw), n)


# -- pbar ---------------------------------------------------------------------

def test_pbar_corner_simplex():
    out = build_pbar(ONE, 4, 18)
    assert out.allclose(parse("(1+u3)^3/6"))


def test_pbar_xi1_antiderivative():
    # subdomain 18 integrates xi1 over [xi2, 1]
    out = build_pbar(Polynomial.var(Var.XI1), 2, 18)
    assert out.allclose(parse("(1-xi2^2)/2"))


def test_pbar_xi1_free_polynomial():
    P = parse("u1*xi2 + 3*xi3^2")
    _, xlim = tables.subdomain_limits()
    for d in (1, 7, 12):
        lo, hi = xlim.bounds(d, Var.XI1)
        assert build_pbar(P, 2, d).allclose(P * (hi - lo))


# -- volume identity and the q-check --------------------------------------------

@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_volume_product_identity(n_cv):
    ta, tb = TABLE_PAIRS[n_cv]
    for n in (3, 5):
        assert rel(value(ta, tb, ONE, Kernel.one(), n), ta.volume * tb.volume) <= 1e-13


def test_volume_identity_common_tetrahedron_two_points():
    assert rel(value(TA, TA, ONE, Kernel.one(), 2), 1 / 36) <= 1e-13


def test_volume_identity_general_pair():
    ta = Tetrahedron([[0.1, 0.2, 0.0], [1.3, 0.1, 0.2], [0.2, 1.1, -0.1], [0.4, 0.3, 0.9]])
    tb = Tetrahedron([ta.vertices[0], ta.vertices[2], [-0.8, 0.6, 0.5], [-0.2, 1.4, 0.7]])
    assert rel(value(ta, tb, ONE, Kernel.one(), 5), ta.volume * tb.volume) <= 1e-13


def test_mfie_common_tetrahedron_is_desingularized():
    P, K = mfie(TA.vertices[3], TA.vertices[1])
    ri = build_reduced(canonicalize_pair(TA, TA), P, K)
    assert ri.n_min >= 1
    assert ri.n_min + ri.y_dim >= K.singularity_order


def test_constant_p_with_mfie_kernel_is_too_singular():
    with pytest.raises(SingularityTooStrong):
        build_reduced(canonicalize_pair(TA, TA), ONE, Kernel.mfie(10))


def test_aim_order_bookkeeping():
    ri = build_reduced(canonicalize_pair(TA, TA), ONE, Kernel.helmholtz(10))
    assert ri.n_min == 0 and ri.y_dim == 2 and ri.kernel.singularity_order == 1


def test_with_kernel_rechecks_order():
    ri = build_reduced(canonicalize_pair(TA, TB), ONE, Kernel.one())
    assert ri.with_kernel(Kernel.mfie(3)).kernel.singularity_order == 3
    ri4 = build_reduced(canonicalize_pair(TA, TA), ONE, Kernel.one())
    with pytest.raises(SingularityTooStrong):
        ri4.with_kernel(Kernel.mfie(3))


# -- pointwise behaviour ------------------------------------------------------------

@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_integrand_finite_everywhere(n_cv):
    ta, tb = TABLE_PAIRS[n_cv]
    rng = np.random.default_rng(n_cv)
    forms = [efie(ta.vertices[3], tb.vertices[3]), mfie(ta.vertices[3], tb.vertices[2]),
             (ONE, Kernel.helmholtz(10)), (ONE, Kernel.one())]
    for P, K in forms:
        ri = build_reduced(canonicalize_pair(ta, tb), P, K)
        vals = ri.eval(rng.random((10_000, ri.y_dim)))
        assert np.all(np.isfinite(vals))
        for term in ri.terms:
            pts = rng.random((200, ri.y_dim))
            xsq = np.real(term.xsq.eval({v: pts[:, i] for i, v in enumerate(ri.y_vars)}))
            assert np.all(xsq > 0)


def test_eval_shapes():
    ri = build_reduced(canonicalize_pair(TA, TC), ONE, Kernel.helmholtz(2))
    single = eval_reduced(ri, np.full(4, 0.3))
    batch = ri.eval(np.full((3, 4), 0.3))
    assert isinstance(single, complex)
    assert batch.shape == (3,) and np.allclose(batch, single)
    with pytest.raises(ValueError):
        ri.eval(np.zeros(3))


def test_grid_and_pointwise_evaluation_agree():
    P, K = efie(TA.vertices[3], TB.vertices[3])
    ri = build_reduced(canonicalize_pair(TA, TB), P, K)
    axes = [np.array([0.1, 0.6]), np.array([0.2, 0.9, 0.5]), np.array([0.7])]
    grid = ri.eval_grid(axes)
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(3, -1).T
    np.testing.assert_allclose(grid.reshape(-1), ri.eval(pts), rtol=1e-12)


# -- oracles --------------------------------------------------------------------

def _random_poly(rng, symbols, degree=2):
    # a dominant constant keeps the tetrahedron moments away from zero,
    # so the relative comparison is well conditioned
    p = Polynomial.const(rng.uniform(1.0, 2.0))
    for s in symbols:
        p = p + rng.uniform(-0.5, 0.5) * Polynomial.var(s)
    if degree >= 2:
        for i, a in enumerate(symbols):
            for b in symbols[i:]:
                p = p + rng.uniform(-0.5, 0.5) * Polynomial.var(a) * Polynomial.var(b)
    return p


@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_separable_oracle(n_cv):
    ta, tb = TABLE_PAIRS[n_cv]
    rng = np.random.default_rng(40 + n_cv)
    for _ in range(3):
        f, g = _random_poly(rng, X), _random_poly(rng, XP)
        got = value(ta, tb, f * g, Kernel.one(), 9)
        ref = exact_tet_moment(ta, f) * moment_at(tb, g, XP)
        assert rel(got, ref) <= 1e-12


def test_static_limit_against_brute_force():
    aim = value(TA, TA, ONE, Kernel.helmholtz(1e-8))
    static = value(TA, TA, ONE, Kernel.power_law(-1, 1 / (4 * np.pi)))
    assert abs(aim.real - static.real) <= 1e-13 * abs(static)
    brute = brute_6d((TA, TA), ONE, Kernel.helmholtz(1e-8), 20, order_b=17)
    assert rel(brute, aim) < 1e-3


def test_brute_force_edge_contact():
    P, K = efie(TA.vertices[3], TC.vertices[3])
    td = value(TA, TC, P, K, 25)
    assert rel(brute_6d((TA, TC), P, K, 16), td) <= 1e-2


# -- invariances ------------------------------------------------------------------

def _rotation(angles):
    a, b, c = angles
    rx = np.array([[1, 0, 0], [0, np.cos(a), -np.sin(a)], [0, np.sin(a), np.cos(a)]])
    ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    rz = np.array([[np.cos(c), -np.sin(c), 0], [np.sin(c), np.cos(c), 0], [0, 0, 1]])
    return rz @ ry @ rx


@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_rigid_motion(n_cv):
    ta, tb = TABLE_PAIRS[n_cv]
    R, t = _rotation((0.4, -1.2, 2.1)), np.array([1.5, -0.3, 2.0])
    qa, qb = ta.vertices[3], tb.vertices[2]
    ta2, tb2 = ta.transformed(R, t), tb.transformed(R, t)
    qa2, qb2 = R @ qa + t, R @ qb + t
    before = value(ta, tb, *efie(qa, qb))
    after = value(ta2, tb2, *efie(qa2, qb2))
    assert rel(after, before) <= 1e-12
    before = value(ta, tb, *mfie(qa, qb))
    after = value(ta2, tb2, *mfie(qa2, qb2))
    if n_cv == 4:
        # the common-tetrahedron MFIE integral vanishes identically
        assert abs(before) < 1e-16 and abs(after) < 1e-16
    else:
        assert rel(after, before) <= 1e-12
    aim = (ONE, Kernel.helmholtz(10))
    assert rel(value(ta2, tb2, *aim), value(ta, tb, *aim)) <= 1e-12


def test_relabeling_non_common_vertices():
    # T_A shares V1, V4 with T_C; its free vertices are V2, V3
    qa, qb = TA.vertices[3], TC.vertices[3]
    P, K = efie(qa, qb)
    n = 41  # converged to ~1e-13 for this pair
    base = value(TA, TC, P, K, n)
    swapped_b = Tetrahedron(TC.vertices[[0, 1, 3, 2]])
    swapped_a = Tetrahedron(TA.vertices[[0, 2, 1, 3]])
    assert not np.array_equal(canonicalize_pair(swapped_a, TC).tet_a.vertices,
                              canonicalize_pair(TA, TC).tet_a.vertices)
    assert rel(value(TA, swapped_b, P, K, n), base) <= 1e-12
    assert rel(value(swapped_a, TC, P, K, n), base) <= 1e-12


def test_relabeling_static_kernel_at_moderate_order():
    kern = Kernel.power_law(-1)
    base = value(TA, TC, ONE, kern, 33)
    swapped = value(TA, Tetrahedron(TC.vertices[[0, 1, 3, 2]]), ONE, kern, 33)
    assert rel(swapped, base) <= 1e-12


@pytest.mark.parametrize("s", [-2, -1, 1, 2])
def test_power_law_scaling(s):
    lam = 1.7
    for n_cv in (2, 3, 4):
        ta, tb = TABLE_PAIRS[n_cv]
        kern = Kernel.power_law(s)
        small = value(ta, tb, ONE, kern)
        big = value(ta.transformed(scale=lam), tb.transformed(scale=lam), ONE, kern)
        assert rel(big, lam ** (6 + s) * small) <= 1e-12


@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_exchange_symmetry(n_cv):
    ta, tb = TABLE_PAIRS[n_cv]
    qa, qb = ta.vertices[3], tb.vertices[2]
    forward = value(ta, tb, *efie(qa, qb))
    backward = value(tb, ta, *efie(qb, qa))
    assert rel(backward, forward) <= 1e-13


def test_mfie_self_term_vanishes():
    rule = cc_rule(25)
    for qa, qb in ((TA.vertices[3], TA.vertices[3]), (TA.vertices[3], TA.vertices[1]),
                   (TA.vertices[0], TA.vertices[2])):
        P, K = mfie(qa, qb)
        ri = build_reduced(canonicalize_pair(TA, TA), P, K)
        total = tensor_integrate(ri, 25)
        parts = ri.subdomain_contributions([(rule.nodes, rule.weights)] * ri.y_dim)
        assert abs(total) <= 1e-12 * max([abs(c) for c in parts] + [0.0])


def test_merge_identical_matches_full_sum():
    P, K = efie(TA.vertices[3], TA.vertices[1])
    pair = canonicalize_pair(TA, TA)
    full = build_reduced(pair, P, K)
    merged = build_reduced(pair, P, K, merge_identical=True)
    assert len(merged.terms) <= len(full.terms)
    assert rel(tensor_integrate(merged, 25), tensor_integrate(full, 25)) <= 1e-13
