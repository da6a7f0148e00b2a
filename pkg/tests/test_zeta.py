"""Phase function and Hardy Z: closed-form anchors, oracle and route checks."""

import math

import mpmath as mp
import numpy as np
import pytest

import oracles
from zeta_ladder import DomainError, hardy_z, theta, theta_array, z_array
from zeta_ladder.zeta import T_RS, T_SWITCH, _z_eta, _z_rs

mp.mp.dps = 30


def mp_theta(t):
    return float(mp.siegeltheta(t))


def test_theta_at_zero_is_exact():
    assert theta(0.0) == 0.0


def test_theta_first_root_matches_frozen_value():
    lo, hi = 17.0, 18.0
    flo = theta(lo)
    assert flo * theta(hi) < 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if flo * theta(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    assert abs(0.5 * (lo + hi) - oracles.THETA_ROOT) <= 1e-9


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0, 10.0, 14.134, 17.846,
                               29.9, 30.1, 50.0, 100.0, 1e3, 1e4, 1e5,
                               1e6, 1e7])
def test_theta_absolute_accuracy(t):
    # 1e-10 plus the representation granularity of the value itself, which
    # dominates once |theta| grows past ~1e6.
    ref = mp_theta(t)
    assert abs(theta(t) - ref) <= 1e-10 + 4.0 * np.spacing(abs(ref))


def test_theta_at_100_matches_gamma_oracle():
    ref = float(mp.im(mp.loggamma(mp.mpf(1) / 4 + 50j)) - 50 * mp.log(mp.pi))
    assert abs(theta(100.0) - ref) <= 1e-10


def test_theta_route_seam_is_continuous():
    below = theta(T_SWITCH - 1e-9)
    above = theta(T_SWITCH + 1e-9)
    assert abs(above - below) <= 1e-8


def test_theta_increasing_for_t_past_20():
    ts = np.linspace(20.0, 120.0, 201)
    vals = theta_array(ts)
    assert (np.diff(vals) > 0.0).all()


def test_theta_array_matches_scalar_and_keeps_shape():
    ts = np.array([[0.5, 10.0], [100.0, 2000.0]])
    vals = theta_array(ts)
    assert vals.shape == ts.shape
    for t, v in zip(ts.ravel(), vals.ravel()):
        assert v == theta(float(t))
    assert theta_array(np.float64(50.0)).shape == ()


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf")])
def test_theta_rejects_bad_input(bad):
    with pytest.raises(DomainError):
        theta(bad)
    with pytest.raises(DomainError):
        theta_array(np.array([1.0, bad]))


def test_hardy_z_at_zero_is_zeta_half():
    v = hardy_z(0.0)
    assert v.z == pytest.approx(oracles.ZETA_HALF, rel=1e-8)


def test_first_critical_zero_by_bisection():
    lo, hi = 14.0, 14.3
    flo = hardy_z(lo).z
    assert flo * hardy_z(hi).z < 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if flo * hardy_z(mid).z <= 0.0:
            hi = mid
        else:
            lo = mid
    assert abs(0.5 * (lo + hi) - oracles.Z_FIRST_ZERO) <= 1e-6


@pytest.mark.parametrize("t", [1.0, 10.0, 100.0, 1e3, 1e4])
def test_abs_zeta_sq_is_z_squared(t):
    v = hardy_z(t)
    assert v.abs_zeta_sq == v.z * v.z
    assert v.abs_zeta_sq >= 0.0


def test_hardy_z_at_50_matches_zeta_modulus():
    ref = float(abs(mp.zeta(mp.mpf("0.5") + 50j)) ** 2)
    assert hardy_z(50.0).abs_zeta_sq == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("t", [1.0, 14.5, 100.0, 777.7, 1499.0, 1501.0,
                               5000.0, 12345.6])
def test_z_matches_mpmath(t):
    ref = float(mp.siegelz(t))
    # Relative accuracy away from zeros, absolute near them.
    assert abs(hardy_z(t).z - ref) <= 1e-8 * max(abs(ref), 1.0)


def test_series_and_riemann_siegel_agree_on_overlap():
    rng = np.random.default_rng(20240817)
    ts = rng.uniform(1500.0, 3000.0, 30)
    ze = _z_eta(ts)
    zr = _z_rs(ts)
    # Relative agreement with the near-zero absolute floor of the Z contract.
    assert (np.abs(ze - zr) <= 1e-6 * np.maximum(np.abs(ze), 1e-3)).all()


def test_z_route_switch_matches_oracle_both_sides():
    for t in (T_RS - 0.5, T_RS + 0.5):
        ref = float(mp.siegelz(t))
        assert abs(hardy_z(t).z - ref) <= 1e-8 * max(abs(ref), 1.0)


def test_z_array_shapes():
    ts = np.array([[10.0, 100.0, 1600.0]])
    vals = z_array(ts)
    assert vals.shape == ts.shape
    assert z_array(np.float64(100.0)).shape == ()
    assert vals[0, 1] == hardy_z(100.0).z


@pytest.mark.parametrize("bad", [-2.0, float("nan")])
def test_hardy_z_rejects_bad_input(bad):
    with pytest.raises(DomainError):
        hardy_z(bad)
