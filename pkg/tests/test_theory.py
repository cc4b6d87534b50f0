import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta, betainc

import corpus
from nonlocal_blowup.dynamics import ModelSpec, Variant
from nonlocal_blowup.grid import Field, SolutionState, line_grid, periodic_grid
from nonlocal_blowup.hilbert import hilbert
from nonlocal_blowup.integrator import StopSpec, run
from nonlocal_blowup.theory import (CLM_KIND, LINE_KIND, PERIODIC_KIND, blowup_certificate,
                                    check_global_regularity, i_infinity,
                                    incomplete_blowup_integral, regularity_lhs,
                                    verify_bound, verify_decay, weighted_mass)

# Gamma(1/3) Gamma(1/6) / (3 sqrt(pi)); confirmed by 30-digit mpmath quadrature
I_INF = 2.8043642106509085


def _oracle(x):
    # incomplete-beta form of the integral, via y^3 / (1 + y^3) = s; the
    # complementary form avoids cancellation in 1 - s for large x
    b = beta(1 / 3, 1 / 6) / 3
    if x <= 1:
        return b * betainc(1 / 3, 1 / 6, x ** 3 / (1 + x ** 3))
    return b * (1 - betainc(1 / 6, 1 / 3, 1 / (1 + x ** 3)))


def test_integral_endpoints():
    assert incomplete_blowup_integral(0.0) == 0.0
    assert incomplete_blowup_integral(math.inf) == pytest.approx(I_INF, abs=1e-12)
    assert i_infinity() == pytest.approx(I_INF, abs=1e-12)
    assert incomplete_blowup_integral(1.0) < incomplete_blowup_integral(2.0) < I_INF


def test_integral_rejects_negative():
    with pytest.raises(ValueError):
        incomplete_blowup_integral(-1e-9)
    with pytest.raises(ValueError):
        incomplete_blowup_integral(math.nan)


@given(st.floats(0.0, 1e8))
def test_integral_matches_beta_oracle(x):
    assert incomplete_blowup_integral(x) == pytest.approx(_oracle(x), abs=1e-10)


@given(st.floats(0.0, 1e6), st.floats(1e-6, 1e3))
def test_integral_monotone_bounded(x, dx):
    a, b = incomplete_blowup_integral(x), incomplete_blowup_integral(x + dx)
    assert a < b <= I_INF + 1e-14


@given(st.floats(1.0, 1e4), st.floats(0.01, 10.0))
def test_integral_concave(x, h):
    left = incomplete_blowup_integral(x - h / 2) if x > h / 2 else None
    if left is None:
        return
    mid = incomplete_blowup_integral(x)
    right = incomplete_blowup_integral(x + h / 2)
    assert mid >= 0.5 * (left + right) - 1e-12


def _bump_state(v_value=1.0, n=1024, kind="line"):
    if kind == "line":
        g = line_grid(n, (0.4, 0.6))
    else:
        g = periodic_grid(n, support=(0.4, 0.6))
    x = g.points
    u = corpus.bump(x, 0.4, 0.6)
    v = np.where(g.support_mask, v_value, 0.0)
    return SolutionState.from_arrays(g, u, v, compact=True)


def test_certificate_zero_v0_inapplicable():
    s = _bump_state(0.0)
    c = blowup_certificate(s.u, s.v)
    assert c.C_functional == 0.0 and not c.applicable and c.T_star == math.inf


def test_certificate_positive_v0():
    s = _bump_state(1.0)
    c = blowup_certificate(s.u, s.v)
    g = s.grid
    expected = 4 * g.integrate((g.points - 0.4) * s.u.values ** 2 * g.support_mask)
    assert c.C_functional == pytest.approx(expected, rel=1e-14)
    assert c.applicable and 0 < c.T_star < math.inf
    direct = (4 * c.C_functional / (3 * math.pi * 0.2 ** 2)) ** (-1 / 3) * I_INF
    assert c.T_star == pytest.approx(direct, rel=1e-13)


@given(st.floats(0.01, 100.0))
def test_certificate_homogeneity(s):
    base = _bump_state(1.0, n=256)
    scaled = SolutionState(base.u, Field(base.grid, s * base.v.values))
    c0 = blowup_certificate(base.u, base.v)
    c1 = blowup_certificate(scaled.u, scaled.v)
    assert c1.C_functional == pytest.approx(s * c0.C_functional, rel=1e-12)
    assert c1.T_star == pytest.approx(s ** (-1 / 3) * c0.T_star, rel=1e-12)


def test_periodic_versus_line_bound():
    line = _bump_state(1.0, n=1024, kind="line")
    per = _bump_state(1.0, n=1024, kind="periodic")
    cl = blowup_certificate(line.u, line.v, LINE_KIND)
    cp = blowup_certificate(per.u, per.v, PERIODIC_KIND)
    # width 0.2 on a unit period is 0.4 pi on the 2 pi circle
    factor = math.cos(0.2 * math.pi) ** (1 / 3)
    assert cl.C_functional == pytest.approx(cp.C_functional, rel=1e-12)
    assert cp.T_star == pytest.approx(cl.T_star / factor, rel=1e-12)
    assert cp.T_star >= cl.T_star


def test_periodic_support_too_wide():
    g = periodic_grid(256, support=(0.1, 0.7))
    x = g.points
    u = corpus.bump(x, 0.1, 0.7)
    with pytest.raises(ValueError):
        blowup_certificate(Field(g, u, compact=True), Field(g, np.ones(256)), PERIODIC_KIND)


def test_certificate_kind_checked():
    s = _bump_state()
    with pytest.raises(ValueError):
        blowup_certificate(s.u, s.v, "sphere")


def test_clm_certificate():
    s = _bump_state(0.0)
    c = blowup_certificate(s.u, s.v, CLM_KIND)
    g = s.grid
    mass = g.integrate((g.points - 0.4) * s.u.values * g.support_mask)
    assert c.applicable
    assert c.T_star == pytest.approx(2 * math.pi * 0.2 ** 2 / mass, rel=1e-13)
    neg = Field(g, -s.u.values, compact=True)
    assert not blowup_certificate(neg, s.v, CLM_KIND).applicable


@pytest.fixture(scope="module")
def bound_run():
    s = corpus.blowup_state(0, n=1024)
    cert = blowup_certificate(s.u, s.v)
    a, b = cert.support
    res = run(s, ModelSpec(alpha=2), stop=StopSpec(max_sup=300.0),
              observers={"weighted_mass": weighted_mass(a, b)})
    return s, cert, res


def test_verify_bound(bound_run):
    _, cert, res = bound_run
    rep = verify_bound(res, cert)
    assert rep.time_bound_ok and rep.inequality_ok
    assert rep.F_t[0] == pytest.approx(cert.C_functional, rel=1e-4)
    assert rep.F[0] == pytest.approx(cert.F0, rel=1e-14)


def test_verify_bound_rejects_mismatch(bound_run):
    s, cert, res = bound_run
    inapplicable = blowup_certificate(s.u, Field(s.grid, np.zeros(s.grid.n)))
    with pytest.raises(ValueError):
        verify_bound(res, inapplicable)
    wrong = run(s, ModelSpec(alpha=1), stop=StopSpec(max_time=0.01),
                observers={"weighted_mass": weighted_mass(*cert.support)})
    with pytest.raises(ValueError):
        verify_bound(wrong, cert)
    bare = run(s, ModelSpec(alpha=2), stop=StopSpec(max_time=0.01))
    with pytest.raises(ValueError):
        verify_bound(bare, cert)


def test_clm_bound_matches_exact_solution():
    s, c = corpus.clm_state(0, n=2048)
    g = s.grid
    cert = blowup_certificate(s.u, s.v, CLM_KIND)
    res = run(s, ModelSpec(variant=Variant.CLM), stop=StopSpec(max_sup=1e3),
              observers={"weighted_mass": weighted_mass(*g.support, power=1)})
    rep = verify_bound(res, cert)
    assert rep.ok
    # the closed-form solution blows up at the double zero when t H u0(c) = 2
    exact = 2 / np.interp(c, g.points, hilbert(s.u).values)
    assert rep.T_fit == pytest.approx(exact, rel=1e-2)


def test_regularity_lhs_by_hand():
    # sqrt(0.1) * (0.5 + sqrt(0.1) / 3), evaluated by hand
    assert regularity_lhs(0.1, 0.5, 1.0) == pytest.approx(0.19144722, abs=1e-8)
    assert regularity_lhs(0.1, 0.5, 1.0) < 0.25


def test_regularity_sign_condition():
    s = corpus.decay_state(1024)
    ok = check_global_regularity(s.u, s.v)
    assert ok.satisfied and ok.delta == pytest.approx(0.01)
    bad = check_global_regularity(s.u, Field(s.grid, np.full(1024, -2.0)))
    assert not bad.sign_ok and not bad.satisfied


def test_regularity_zero_u():
    s = corpus.decay_state(1024, amplitude=0.0)
    c = check_global_regularity(s.u, s.v)
    assert c.lhs == pytest.approx(math.sqrt(c.delta) * c.v0x_l2, rel=1e-14)
    assert c.u0x_l2 == 0.0


@pytest.fixture(scope="module")
def decay_run():
    s = corpus.decay_state(2048)
    return s, run(s, ModelSpec(alpha=2), stop=StopSpec(max_time=1.5))


def test_verify_decay(decay_run):
    s, res = decay_run
    cert = check_global_regularity(s.u, s.v)
    rep = verify_decay(res, cert)
    assert rep.rate_sup <= -2.9 and rep.rate_h1 <= -2.9
    assert rep.sup_bound_ok and rep.v_h1_max <= rep.v_h1_bound and rep.ok


def test_verify_decay_zero_u():
    s = corpus.decay_state(512, amplitude=0.0)
    res = run(s, ModelSpec(alpha=2), stop=StopSpec(max_time=0.2))
    assert np.all(res.final.u.values == 0)
    assert np.array_equal(res.final.v.values, s.v.values)
    rep = verify_decay(res, check_global_regularity(s.u, s.v))
    assert rep.rate_sup == -math.inf and rep.ok


def test_verify_decay_needs_certificate(decay_run):
    s, res = decay_run
    bad = check_global_regularity(s.u, Field(s.grid, np.full(s.grid.n, -2.0)))
    with pytest.raises(ValueError):
        verify_decay(res, bad)
