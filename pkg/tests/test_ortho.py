"""Base orthogonal systems, Bessel/Jacobi machinery, and ladder lifting."""

import math

import numpy as np
import pytest

sp = pytest.importorskip("scipy.special")

from zeta_ladder.errors import (ConsistencyError, DomainError,
                                SingularPointError)
from zeta_ladder.ladder import phi1_array, phi1_prime_array
from zeta_ladder.ortho import (BesselSystem, CustomSystem, FourierSystem,
                               JacobiSystem, base_eval, base_norm, bessel_j,
                               bessel_zero, jacobi_p, lift_system,
                               lifted_eval, lifted_weight, make_system,
                               validate_orthogonality)
from zeta_ladder.zeta import z_array

PI = math.pi


# ---------------------------------------------------------------------------
# Fourier base

def test_fourier_members_and_indexing():
    sys = FourierSystem(2.0)
    ts = np.linspace(0.0, 4.0, 9)
    assert np.array_equal(sys.member(0, ts), np.ones(9))
    assert np.allclose(sys.member(1, ts), np.cos(PI * ts / 2.0), atol=1e-15)
    assert np.allclose(sys.member(2, ts), np.sin(PI * ts / 2.0), atol=1e-15)
    assert np.allclose(sys.member(3, ts), np.cos(2 * PI * ts / 2.0), atol=1e-15)
    assert np.allclose(sys.member(4, ts), np.sin(2 * PI * ts / 2.0), atol=1e-15)
    assert base_eval(sys, 0, 1.234) == 1.0


def test_fourier_norms():
    sys = FourierSystem(PI)
    assert base_norm(sys, 0) == 2.0 * PI
    for n in range(1, 6):
        assert base_norm(sys, n) == PI
    assert FourierSystem(2.0).norm(0) == 4.0


def test_fourier_domain_guards():
    sys = FourierSystem(1.0)
    for bad_t in (-0.1, 2.1, float("nan")):
        with pytest.raises(DomainError):
            sys.member(1, bad_t)
    for bad_n in (-1, 0.5):
        with pytest.raises(DomainError):
            sys.member(bad_n, 1.0)
        with pytest.raises(DomainError):
            sys.norm(bad_n)
    with pytest.raises(DomainError):
        FourierSystem(0.0)
    with pytest.raises(DomainError):
        FourierSystem(-1.0)


# ---------------------------------------------------------------------------
# Jacobi base

def test_legendre_member_at_right_endpoint_is_one():
    # alpha = beta = 0 reduces to Legendre with unit weight; P_n(1) = 1.
    sys = JacobiSystem(0.0, 0.0)
    assert sys.member(2, 2.0) == 1.0
    assert sys.member(5, 2.0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("alpha,beta", [(0.0, 0.0), (0.4, -0.3), (1.2, 2.5)])
def test_jacobi_recurrence_matches_reference(alpha, beta):
    us = np.linspace(-1.0, 1.0, 41)
    for n in range(9):
        ref = sp.eval_jacobi(n, alpha, beta, us)
        got = jacobi_p(n, alpha, beta, us)
        assert np.all(np.abs(got - ref) <= 1e-12 * np.maximum(1.0, np.abs(ref)))


def test_jacobi_first_degree_explicit_form():
    a, b = 0.4, -0.3
    us = np.linspace(-1.0, 1.0, 21)
    explicit = (a + 1.0) + (a + b + 2.0) * (us - 1.0) / 2.0
    assert np.max(np.abs(jacobi_p(1, a, b, us) - explicit)) <= 1e-14
    assert np.array_equal(jacobi_p(0, a, b, us), np.ones(21))


def test_jacobi_norms():
    leg = JacobiSystem(0.0, 0.0)
    assert leg.norm(0) == 2.0
    for n in range(1, 7):
        expect = 2.0 / (2.0 * n + 1.0)
        assert abs(leg.norm(n) - expect) <= 1e-13 * expect
    a, b, n = 0.4, -0.3, 3
    expect = (2.0 ** (a + b + 1.0) / (2 * n + a + b + 1.0)
              * sp.gamma(n + a + 1.0) * sp.gamma(n + b + 1.0)
              / (sp.gamma(n + 1.0) * sp.gamma(n + a + b + 1.0)))
    assert abs(JacobiSystem(a, b).norm(n) - expect) <= 1e-12 * expect


def test_jacobi_singular_endpoints():
    with pytest.raises(SingularPointError):
        JacobiSystem(-0.5, 0.0).member(0, 2.0)
    with pytest.raises(SingularPointError):
        JacobiSystem(0.0, -0.5).member(0, 0.0)
    # Positive exponents evaluate to zero at the corresponding endpoint.
    assert JacobiSystem(0.5, 0.0).member(0, 2.0) == 0.0
    # The integration window opens only next to singular edges.
    assert JacobiSystem(0.0, 0.0).quad_domain() == (0.0, 2.0)
    lo, hi = JacobiSystem(-0.5, -0.5).quad_domain()
    assert 0.0 < lo < 1e-11 and 2.0 - 1e-11 < hi < 2.0


def test_jacobi_parameter_guards():
    for a, b in ((-1.0, 0.0), (0.0, -1.0), (-1.5, 0.0), (float("nan"), 0.0)):
        with pytest.raises(DomainError):
            JacobiSystem(a, b)


# ---------------------------------------------------------------------------
# Bessel base

def test_bessel_j_matches_reference_across_route_cut():
    xs = np.linspace(0.0, 30.0, 121)  # spans the series/recurrence switch
    for order in (0, 1, 2):
        ref = sp.jv(order, xs)
        got = bessel_j(order, xs)
        assert np.max(np.abs(got - ref)) <= 1e-10
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0


def test_bessel_j_domain_guards():
    with pytest.raises(DomainError):
        bessel_j(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_j(0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        bessel_j(0, float("inf"))


def test_bessel_zero_first_root():
    assert abs(bessel_zero(0, 1) - 2.404825557695773) <= 1e-9


def test_bessel_zeros_match_reference_and_interlace():
    for order in (0, 1, 2):
        ref = sp.jn_zeros(order, 8)
        for m in range(1, 9):
            mu = bessel_zero(order, m)
            assert abs(mu - ref[m - 1]) <= 1e-9
            assert abs(bessel_j(order, mu)) <= 1e-9
    for m in range(1, 6):
        assert bessel_zero(0, m) < bessel_zero(1, m) < bessel_zero(0, m + 1)


def test_bessel_zero_index_guards():
    with pytest.raises(DomainError):
        bessel_zero(0, 21)
    assert bessel_zero(0, 21, m_max=25) > bessel_zero(0, 20)
    for bad_m in (0, -1, 1.5):
        with pytest.raises(DomainError):
            bessel_zero(0, bad_m)
    with pytest.raises(DomainError):
        bessel_zero(-1, 1)


def test_bessel_member_and_norm():
    l = 0.5
    sys = BesselSystem(0, l)
    # Member n=0 uses the first root, so it vanishes at t = 2l.
    assert abs(sys.member(0, 2.0 * l)) <= 1e-8
    mu = bessel_zero(0, 1)
    expect = 2.0 * l * l * sp.j1(mu) ** 2
    assert abs(sys.norm(0) - expect) <= 1e-9 * expect
    with pytest.raises(DomainError):
        BesselSystem(0.5, l)
    with pytest.raises(DomainError):
        BesselSystem(0, 0.0)


# ---------------------------------------------------------------------------
# source orthogonality

@pytest.mark.parametrize("label,sys", [
    ("fourier l=1", FourierSystem(1.0)),
    ("fourier l=pi", FourierSystem(PI)),
    ("legendre", JacobiSystem(0.0, 0.0)),
    ("bessel", BesselSystem(0, 0.5)),
])
def test_source_orthogonality_nxn(label, sys):
    max_off, max_diag = validate_orthogonality(sys, 6)
    assert max_off <= 1e-8
    assert max_diag <= 1e-4


def test_source_orthogonality_singular_edge():
    # The opened window next to the integrable singularity hides a sliver of
    # mass ~ (2e-12)^(1+beta), which bounds the reachable accuracy here.
    max_off, max_diag = validate_orthogonality(JacobiSystem(0.4, -0.3), 6,
                                               tol=1e-7)
    assert max_off <= 3e-8
    assert max_diag <= 1e-3


def test_validate_orthogonality_rejects_bad_n():
    for bad in (0, -2, 1.5):
        with pytest.raises(DomainError):
            validate_orthogonality(FourierSystem(1.0), bad)


# ---------------------------------------------------------------------------
# custom systems and construction helpers

def _custom_fourier(l):
    members = [
        lambda t: np.ones_like(t),
        lambda t: np.cos(PI * t / l),
        lambda t: np.sin(PI * t / l),
    ]
    return members, [2.0 * l, l, l]


def test_custom_system_validates_and_lifts(small_cache):
    members, norms = _custom_fourier(0.5)
    sys = CustomSystem(members, norms, 0.5)
    assert sys.member(1, 0.25) == pytest.approx(math.cos(PI * 0.5), abs=1e-15)
    ls = lift_system(sys, 400.0, 1, small_cache)
    assert ls.base is sys


def test_custom_system_with_wrong_norms_fails_at_lift(small_cache):
    members, norms = _custom_fourier(0.5)
    norms[2] *= 2.5
    sys = CustomSystem(members, norms, 0.5)
    with pytest.raises(ConsistencyError):
        lift_system(sys, 400.0, 1, small_cache)


def test_custom_system_table_guards():
    members, norms = _custom_fourier(0.5)
    with pytest.raises(DomainError):
        CustomSystem(members, [], 0.5)
    with pytest.raises(DomainError):
        CustomSystem(members, [2.0, -1.0, 1.0], 0.5)
    sys = CustomSystem(members, norms, 0.5)
    with pytest.raises(DomainError):
        sys.member(3, 0.1)
    with pytest.raises(DomainError):
        sys.norm(3)


def test_make_system_dispatch():
    assert make_system("fourier", l=2.0).kind == "fourier"
    assert make_system("jacobi", alpha=0.0, beta=0.0).kind == "jacobi"
    assert make_system("bessel", order=0, l=0.5).kind == "bessel"
    with pytest.raises(DomainError):
        make_system("fourier")
    with pytest.raises(DomainError):
        make_system("jacobi", alpha=0.0)
    with pytest.raises(DomainError):
        make_system("jacobi", alpha=0.0, beta=0.0, l=2.0)
    with pytest.raises(DomainError):
        make_system("bessel", order=0)
    with pytest.raises(DomainError):
        make_system("hermite", l=1.0)


# ---------------------------------------------------------------------------
# lifted systems

@pytest.fixture(scope="module")
def lifted_pi(small_cache):
    return lift_system(FourierSystem(PI), 400.0, 1, small_cache)


def test_lift_requires_positive_depth(small_cache):
    for bad_k in (0, -1, 1.5):
        with pytest.raises(DomainError):
            lift_system(FourierSystem(1.0), 400.0, bad_k, small_cache)


def test_lifted_domain_is_deepest_segment(lifted_pi):
    lo, hi = lifted_pi.domain
    assert lo == lifted_pi.seq.lows[1]
    assert hi == lifted_pi.seq.highs[1]
    assert 400.0 < lo < hi


def test_lifted_constant_member_equals_weight(lifted_pi, small_cache):
    lo, hi = lifted_pi.domain
    ts = np.linspace(lo, hi, 25)
    vals = lifted_eval(lifted_pi, 0, ts, small_cache)
    w = lifted_weight(lifted_pi, ts, small_cache)
    assert np.array_equal(vals, w)
    # For depth 1 the weight is exactly sqrt(phi1_prime).
    expect = np.sqrt(phi1_prime_array(ts, small_cache))
    assert np.all(np.abs(w - expect) <= 1e-12 * np.maximum(expect, 1e-30))


def test_lifted_weight_forms_agree(lifted_pi, small_cache):
    rng = np.random.default_rng(31)
    lo, hi = lifted_pi.domain
    ts = rng.uniform(lo, hi, 20)
    w_ladder = lifted_weight(lifted_pi, ts, small_cache, form="ladder")
    w_zeta = lifted_weight(lifted_pi, ts, small_cache, form="zeta")
    assert np.all(np.abs(w_ladder - w_zeta)
                  <= 1e-12 * np.maximum(w_ladder, 1e-30))
    with pytest.raises(DomainError):
        lifted_weight(lifted_pi, ts[:2], small_cache, form="euler")


def test_lifted_member_vanishes_at_orbit_zero(lifted_pi, small_cache):
    lo, hi = lifted_pi.domain
    ts = np.linspace(lo, hi, 400)
    z = z_array(ts)
    i = int(np.flatnonzero(np.sign(z[:-1]) != np.sign(z[1:]))[0])
    a, b = ts[i], ts[i + 1]
    fa = float(z[i])
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm = float(z_array(np.array([mid]))[0])
        if (fa < 0) == (fm < 0):
            a, fa = mid, fm
        else:
            b = mid
    root = 0.5 * (a + b)
    assert abs(lifted_eval(lifted_pi, 1, root, small_cache)) <= 1e-10
    assert abs(lifted_eval(lifted_pi, 0, root, small_cache)) <= 1e-10


def test_lifted_eval_domain_guard(lifted_pi, small_cache):
    lo, hi = lifted_pi.domain
    for bad in (lo - 1.0, hi + 1.0, float("nan")):
        with pytest.raises(DomainError):
            lifted_eval(lifted_pi, 0, bad, small_cache)


def test_raw_argument_flag_changes_composition(small_cache):
    pulled = lift_system(FourierSystem(PI), 400.0, 1, small_cache)
    raw = lift_system(FourierSystem(PI), 400.0, 1, small_cache,
                      raw_polynomial_argument=True)
    lo, hi = pulled.domain
    ts = np.linspace(lo + 0.1, hi - 0.1, 15)
    w = lifted_weight(pulled, ts, small_cache)
    got_raw = lifted_eval(raw, 1, ts, small_cache)
    expect_raw = np.cos((ts - 400.0)) * w  # cos(pi x / l) with l = pi
    assert np.max(np.abs(got_raw - expect_raw)) <= 1e-12 * max(1.0, np.max(np.abs(w)))
    got_pulled = lifted_eval(pulled, 1, ts, small_cache)
    assert np.max(np.abs(got_pulled - got_raw)) > 1e-3


def test_orbit_membership(small_cache):
    ls = lift_system(FourierSystem(0.5), 400.0, 2, small_cache)
    rng = np.random.default_rng(41)
    lo, hi = ls.domain
    ts = rng.uniform(lo, hi, 100)
    level1 = phi1_array(ts, small_cache)
    level2 = phi1_array(level1, small_cache)
    seq = ls.seq
    assert np.all(level1 >= seq.lows[1] - 1e-6)
    assert np.all(level1 <= seq.highs[1] + 1e-6)
    assert np.all(level2 >= 400.0 - 1e-6)
    assert np.all(level2 <= 401.0 + 1e-6)
