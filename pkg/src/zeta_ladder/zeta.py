"""Critical-line evaluators: the phase function theta and the Hardy Z function.

Two evaluation routes back each public operation so they can be cross-checked
on an overlap window.  theta(t) switches from a shifted log-Gamma series to
the standard asymptotic expansion at T_SWITCH.  hardy_z(t) switches from an
accelerated alternating (eta) series to the Riemann-Siegel main sum with
correction terms C0..C2 at T_RS.  Everything evaluates in IEEE double; the
array entry points are the hot paths used by the cumulative cache and the
quadrature engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi
LN_2PI = math.log(TWO_PI)
EULER = 0.5772156649015328606

# Crossover between the log-Gamma series and the asymptotic expansion.
T_SWITCH = 30.0
# Crossover between the eta series and the Riemann-Siegel formula.  With the
# C0+C1+C2 correction terms the Riemann-Siegel error bound ~0.011*(t/2pi)^(-7/4)
# crosses 1e-6 near t ~ 1.3e3, so 1500 leaves margin on the overlap window.
T_RS = 1500.0


# ---------------------------------------------------------------------------
# theta

# Stirling tail coefficients B_{2j} / (2j (2j-1)) for j = 1..7.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

_GAMMA_SHIFT = 24


def _theta_series(t):
    """theta via Im log Gamma(1/4 + i t/2), shifted up so Stirling applies."""
    z = 0.25 + 0.5j * t
    w = z + _GAMMA_SHIFT
    acc = ((w - 0.5) * np.log(w) - w).imag
    winv = 1.0 / w
    w2 = winv * winv
    term = winv
    for c in _STIRLING:
        acc = acc + (c * term).imag
        term = term * w2
    for k in range(_GAMMA_SHIFT):
        acc = acc - np.angle(z + k)
    return acc - 0.5 * t * math.log(math.pi)


def _theta_asymptotic(t):
    half = 0.5 * t
    return (half * np.log(t / TWO_PI) - half - math.pi / 8.0
            + 1.0 / (48.0 * t) + 7.0 / (5760.0 * t ** 3))


def theta_array(t):
    """theta on a float array, route chosen per element."""
    shape = np.shape(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.size and (not np.isfinite(t).all() or (t < 0.0).any()):
        bad = t[~(np.isfinite(t) & (t >= 0.0))][0]
        raise DomainError(f"theta requires finite t >= 0, got {bad!r}")
    out = np.empty_like(t)
    low = t < T_SWITCH
    if low.any():
        out[low] = _theta_series(t[low])
    if (~low).any():
        out[~low] = _theta_asymptotic(t[~low])
    return out.reshape(shape)


def theta(t):
    """Riemann-Siegel phase theta(t) = -(t/2) ln pi + Im log Gamma(1/4 + it/2).

    Accepts a non-negative finite scalar; absolute error stays below 1e-10
    for t up to 1e7.
    """
    tf = float(t)
    if not math.isfinite(tf) or tf < 0.0:
        raise DomainError(f"theta requires finite t >= 0, got {t!r}")
    return float(theta_array(np.array([tf]))[0])


# ---------------------------------------------------------------------------
# eta route (t < T_RS)

_ETA_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _eta_bucket(tmax):
    """Term count for the accelerated eta series, rounded to reuse tables.

    The acceleration error grows like e^(pi t / 2) / (3 + sqrt 8)^n, so any
    slope above pi / (2 ln(3 + sqrt 8)) ~ 0.891 decays; 0.9 t + 60 leaves a
    wide margin across the whole eta range.
    """
    n = int(math.ceil((0.9 * tmax + 60.0) / 64.0)) * 64
    return n


def _eta_tables(n):
    """Signed, weighted term amplitudes and log arguments for n terms.

    The acceleration weights are built with exact integer arithmetic, then
    rounded once; float accumulation would lose the ~1e-16 absolute accuracy
    the weights need.
    """
    cached = _ETA_CACHE.get(n)
    if cached is not None:
        return cached
    term = 1  # n * (n+i-1)! 4^i / ((n-i)! (2i)!) at i = 0
    d = [0] * (n + 1)
    acc = 1
    d[0] = 1
    for i in range(n):
        term = term * (2 * (n + i) * (n - i))
        term, rem = divmod(term, (2 * i + 1) * (i + 1))
        if rem:
            raise AssertionError("eta weight recurrence lost exactness")
        acc += term
        d[i + 1] = acc
    dn = d[n]
    k = np.arange(1, n + 1, dtype=float)
    weights = np.array([float((dn - dk) / dn) for dk in d[:n]])
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    amp = sign * weights / np.sqrt(k)
    lnk = np.log(k)
    _ETA_CACHE[n] = (amp, lnk)
    return amp, lnk


def _zeta_eta(t):
    """zeta(1/2 + it) for an array of t below T_RS, via the eta series."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape, dtype=complex)
    buckets = np.array([_eta_bucket(x) for x in t])
    for n in np.unique(buckets):
        sel = buckets == n
        amp, lnk = _eta_tables(int(n))
        ts = t[sel]
        eta = np.empty(ts.shape, dtype=complex)
        # Chunk the phase matrix to keep memory flat.
        step = max(1, int(4e6 // (n + 1)))
        for i in range(0, ts.size, step):
            phase = np.outer(ts[i:i + step], lnk)
            eta[i:i + step] = (np.cos(phase) @ amp) - 1j * (np.sin(phase) @ amp)
        denom = 1.0 - math.sqrt(2.0) * np.exp(-1j * ts * math.log(2.0))
        out[sel] = eta / denom
    return out


def _z_eta(t):
    zeta = _zeta_eta(t)
    return (np.exp(1j * theta_array(t)) * zeta).real


# ---------------------------------------------------------------------------
# Riemann-Siegel route (t >= T_RS)

_PSI_COEF = math.pi / 8.0  # the -1/16 inside the cosine is pi/8 after 2*pi


def _psi(w):
    """Entire function cos(2 pi (w^2 - w - 1/16)) / cos(2 pi w), complex ok."""
    return np.cos(TWO_PI * (w * w - w - 0.0625)) / np.cos(TWO_PI * w)


_CHEB_NODES = 64
_CONTOUR_POINTS = 128
_CONTOUR_RADIUS = 0.37


def _psi_derivatives(p, orders):
    """psi^(k)(p) for each k in orders, by contour differentiation.

    One trapezoid rule on a circle serves every order; the half-offset angles
    keep all contour points away from the real-axis zeros of cos(2 pi w).
    """
    j = np.arange(_CONTOUR_POINTS)
    ang = 2.0 * math.pi * (j + 0.5) / _CONTOUR_POINTS
    ring = _CONTOUR_RADIUS * np.exp(1j * ang)
    vals = _psi(p + ring)
    out = []
    for k in orders:
        coef = (vals * np.exp(-1j * k * ang)).mean()
        out.append(math.factorial(k) * _CONTOUR_RADIUS ** (-k) * coef.real)
    return out


def _cheb_fit(fvals):
    """Chebyshev coefficients from values at the M first-kind nodes."""
    m = fvals.size
    i = np.arange(m)
    ang = math.pi * (i + 0.5) / m
    coef = np.array([(fvals * np.cos(k * ang)).sum() * 2.0 / m for k in range(m)])
    coef[0] *= 0.5
    return coef


def _cheb_eval(coef, x):
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    for c in coef[:0:-1]:
        b1, b2 = 2.0 * x * b1 - b2 + c, b1
    return x * b1 - b2 + coef[0]


_RS_TABLES: tuple[np.ndarray, ...] | None = None


def _rs_tables():
    """Chebyshev tables on p in [0,1] for the correction terms C0..C3."""
    global _RS_TABLES
    if _RS_TABLES is None:
        pi2 = math.pi ** 2
        pi4 = pi2 * pi2
        pi6 = pi4 * pi2
        i = np.arange(_CHEB_NODES)
        nodes = 0.5 * (1.0 + np.cos(math.pi * (i + 0.5) / _CHEB_NODES))
        c = np.empty((4, _CHEB_NODES))
        for idx, p in enumerate(nodes):
            psi0 = _psi(np.complex128(p)).real
            d1, d2, d3, d5, d6, d9 = _psi_derivatives(p, (1, 2, 3, 5, 6, 9))
            c[0, idx] = psi0
            c[1, idx] = -d3 / (96.0 * pi2)
            c[2, idx] = d2 / (64.0 * pi2) + d6 / (18432.0 * pi4)
            c[3, idx] = (-d1 / (64.0 * pi2) - d5 / (3840.0 * pi4)
                         - d9 / (5308416.0 * pi6))
        _RS_TABLES = tuple(_cheb_fit(row) for row in c)
    return _RS_TABLES


_LN_N = np.log(np.arange(1, 256, dtype=float))
_RSQRT_N = 1.0 / np.sqrt(np.arange(1, 256, dtype=float))


def _grow_term_tables(nmax):
    global _LN_N, _RSQRT_N
    if nmax > _LN_N.size:
        n = np.arange(1, 2 * nmax, dtype=float)
        _LN_N = np.log(n)
        _RSQRT_N = 1.0 / np.sqrt(n)


def _z_rs(t):
    """Z(t) by the Riemann-Siegel formula for an array of t >= T_RS."""
    t = np.asarray(t, dtype=float)
    th = theta_array(t)
    a = np.sqrt(t / TWO_PI)
    nterms = np.floor(a).astype(int)
    _grow_term_tables(int(nterms.max()) + 1)
    t0, t1, t2, t3 = _rs_tables()
    out = np.empty_like(t)
    for nv in np.unique(nterms):
        sel = nterms == nv
        ts = t[sel]
        phase = th[sel][:, None] - ts[:, None] * _LN_N[None, :nv]
        main = 2.0 * (np.cos(phase) @ _RSQRT_N[:nv])
        av = a[sel]
        p = av - nv
        x = 2.0 * p - 1.0
        ra = 1.0 / av
        corr = _cheb_eval(t0, x) + ra * (
            _cheb_eval(t1, x) + ra * (_cheb_eval(t2, x)
                                      + ra * _cheb_eval(t3, x)))
        sign = 1.0 if nv % 2 == 1 else -1.0
        out[sel] = main + sign * corr / np.sqrt(av)
    return out


# ---------------------------------------------------------------------------
# public surface

def z_noise_scale(t):
    """Absolute rounding floor of a Z evaluation at height t.

    The main-sum phases grow like t ln t, so their double-precision rounding
    puts an irreducible noise of this order on Z; quadrature tolerances
    tighter than this floor (times the window width) are unattainable.
    """
    t = max(float(t), 3.0)
    return np.finfo(float).eps * t * math.log(t)


def z_array(t):
    """Hardy Z on a float array, route chosen per element.  No domain checks."""
    shape = np.shape(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    low = t < T_RS
    if low.any():
        out[low] = _z_eta(t[low])
    if (~low).any():
        out[~low] = _z_rs(t[~low])
    return out.reshape(shape)


@dataclass(frozen=True)
class ZValue:
    """Signed Hardy Z value at t, with abs_zeta_sq = z**2 by construction."""

    t: float
    z: float
    abs_zeta_sq: float


def hardy_z(t):
    """Hardy Z(t) = e^(i theta(t)) zeta(1/2 + it), a real number.

    The returned abs_zeta_sq equals z**2 exactly, so downstream identities
    that mix |zeta|^2 with Z^2 cannot drift apart.
    """
    tf = float(t)
    if not math.isfinite(tf) or tf < 0.0:
        raise DomainError(f"hardy_z requires finite t >= 0, got {t!r}")
    z = float(z_array(np.array([tf]))[0])
    return ZValue(t=tf, z=z, abs_zeta_sq=z * z)
