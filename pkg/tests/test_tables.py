import numpy as np
import pytest

from tetduffy import tables
from tetduffy.errors import UnsupportedNCV
from tetduffy.polyalg import U, Polynomial, Var, parse

W = Polynomial.var(Var.W)


def test_y_dimensions():
    assert [tables.y_dim(n) for n in (4, 3, 2)] == [2, 3, 4]
    assert tables.duffy_map(2).y_vars == (Var.Y1, Var.Y2, Var.Y3, Var.Y4)


def test_unsupported_ncv():
    with pytest.raises(UnsupportedNCV):
        tables.duffy_map(1)


def test_ncv4_row2():
    e = tables.duffy_map(4)[2]
    assert e.jac == Polynomial.const(1)
    assert e.u[0] == parse("w*y1") and e.u[1] == W and e.u[2] == parse("w*y2")


def test_ncv3_row18():
    e = tables.duffy_map(3)[18]
    assert e.jac == parse("y1^2*y2")
    m = e.mapping()
    assert m[Var.U1] == parse("-w*y1*y2*y3")
    assert m[Var.U2] == parse("-w*y1*y2")
    assert m[Var.U3] == parse("-w*y1")
    assert m[Var.XI3] == W


def test_ncv2_row16_w_factor_restored():
    e = tables.duffy_map(2)[16]
    assert e.jac == parse("y1^3*y2^2*y3")
    assert e.mapping()[Var.XI2] == W


@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_every_component_linear_in_w(n_cv):
    dm = tables.duffy_map(n_cv)
    for d in range(1, tables.NSUB + 1):
        for v, comp in dm[d].mapping().items():
            if not comp.is_zero():
                assert comp.degree_in(Var.W) == 1
                assert all(e[int(Var.W)] == 1 for e, _ in comp.terms())


def test_u_limits_row1():
    ulim, _ = tables.subdomain_limits()
    u1, u2 = Polynomial.var(Var.U1), Polynomial.var(Var.U2)
    assert ulim.bounds(1, 0) == (Polynomial.const(0), Polynomial.const(1))
    assert ulim.bounds(1, 1) == (u1, Polynomial.const(1))
    assert ulim.bounds(1, 2) == (u2, Polynomial.const(1))


def test_xi_limits_row18():
    _, xlim = tables.subdomain_limits()
    assert xlim.bounds(18, Var.XI3) == (-Polynomial.var(Var.U3), Polynomial.const(1))
    assert xlim.bounds(18, Var.XI2) == (Polynomial.var(Var.XI3), Polynomial.const(1))
    assert xlim.bounds(18, Var.XI1) == (Polynomial.var(Var.XI2), Polynomial.const(1))


def test_partition_sampled():
    rep = tables.verify_partition(samples=200_000, seed=3)
    assert rep.ok and rep.fraction >= 1 - 1e-3
    assert rep.none == 0 and rep.multiple == 0


def test_total_measure_monte_carlo():
    rep = tables.verify_partition(samples=10**6, seed=0)
    assert abs(rep.volume_estimate - 1 / 36) < 5e-4


def test_total_measure_exact():
    assert tables.exact_total_measure() == pytest.approx(1 / 36, rel=1e-13)


def test_xi_equals_eta_is_a_boundary_tie():
    # u = 0 lies on subdomain boundaries; with the margin it is a tie, never a gap
    xi = np.array([[0.7, 0.4, 0.1]])
    u = np.zeros((1, 3))
    strict = sum(int(tables._membership(d, u, xi, 1e-12)[0]) for d in range(1, 19))
    closed = sum(int(tables._membership(d, u, xi, -1e-12)[0]) for d in range(1, 19))
    assert strict == 0 and closed >= 1


@pytest.mark.parametrize("n_cv,d", [(4, 1), (2, 7)])
def test_duffy_examples(n_cv, d):
    rep = tables.verify_duffy(n_cv, d, probes=100)
    assert rep.ok, str(rep)


@pytest.mark.parametrize("n_cv", [2, 3, 4])
def test_all_duffy_maps(n_cv):
    for d in range(1, tables.NSUB + 1):
        rep = tables.verify_duffy(n_cv, d, probes=100)
        assert rep.ok, str(rep)
        assert rep.origin_ok
        assert tables.duffy_volume(n_cv, d) == pytest.approx(tables.region_volume(n_cv, d), rel=1e-12)


def test_tampered_cell_is_caught():
    with tables.tampered("ncv3", 5, 0, "y1*y2"):
        reps = [tables.verify_duffy(3, d) for d in range(1, 19)]
        assert not all(r.ok for r in reps)
    assert all(tables.verify_duffy(3, d).ok for d in range(1, 19))


def test_tampered_limit_breaks_partition():
    with tables.tampered("u", 4, 1, "0.5"):
        rep = tables.verify_partition(samples=50_000, seed=1)
        assert not rep.ok
    assert tables.verify_partition(samples=50_000, seed=1).ok
