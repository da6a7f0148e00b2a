"""Orthogonal bases on [0, 2l] and their ladder-lifted counterparts.

The base systems (Fourier, Jacobi, Bessel, or user-supplied) are ordinary
L2-orthogonal families with closed-form norms.  Lifting composes a member
with the k-fold forward ladder orbit and multiplies by the square root of
the orbit's derivative chain, so that products of two lifted members carry
the exact Jacobian of the change of variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (ConsistencyError, ConvergenceError, DomainError,
                     SingularPointError)
from .ladder import DEFAULT_CONFIG, IterSeq, reverse_iterate
from .zeta import LN_2PI, z_array

_OPEN_MARGIN = 1e-12  # relative interval opening next to singular edges


def _as_float_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


# ---------------------------------------------------------------------------
# Bessel J for integer orders: ascending series below x = 12, backward
# (Miller) recurrence with even-order normalization above.

_SERIES_CUT = 8.0


def _bessel_series(order, x):
    """Ascending series, vectorized; reliable for |x| <= ~12."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    out = np.zeros_like(x)
    nz = x != 0.0
    if order == 0:
        out[~nz] = 1.0
    if not nz.any():
        return out
    h = half[nz]
    term = np.exp(order * np.log(h) - math.lgamma(order + 1))
    acc = term.copy()
    hh = -h * h
    for k in range(1, 200):
        term = term * hh / (k * (order + k))
        acc += term
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(acc), 1e-300)):
            break
    out[nz] = acc
    return out


def _bessel_miller(order, x):
    """Backward recurrence at one abscissa x > 0; any integer order."""
    m = int(x + order + 30.0 + 11.0 * x ** (1.0 / 3.0))
    m += m % 2  # even start keeps the normalization sum aligned
    j = np.zeros(m + 2)
    j[m + 1] = 0.0
    j[m] = 1e-300
    for k in range(m, 0, -1):
        j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1]
        if abs(j[k - 1]) > 1e250:
            j[k - 1:] *= 1e-250
    s = j[0] + 2.0 * j[2::2].sum()
    return j[order] / s


def bessel_j(order, x):
    """J_order(x) for integer order >= 0; scalar or array x >= 0."""
    if order < 0 or int(order) != order:
        raise DomainError(f"Bessel order must be a non-negative int, got {order!r}")
    order = int(order)
    arr, scalar = _as_float_array(x)
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise DomainError("bessel_j requires finite x >= 0")
    flat = arr.ravel()
    out = np.empty_like(flat)
    small = flat <= _SERIES_CUT
    if small.any():
        out[small] = _bessel_series(order, flat[small])
    for idx in np.flatnonzero(~small):
        out[idx] = _bessel_miller(order, float(flat[idx]))
    out = out.reshape(arr.shape)
    return float(out) if scalar else out


def _bessel_j_prime(order, x):
    if order == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x))


@lru_cache(maxsize=None)
def bessel_zero(order, m, m_max=20):
    """The m-th positive root of J_order, to absolute accuracy 1e-10.

    Starts from McMahon's expansion, widens to a sign-change bracket, then
    bisection plus a Newton polish.
    """
    if order < 0 or int(order) != order:
        raise DomainError(f"Bessel order must be a non-negative int, got {order!r}")
    if m < 1 or int(m) != m:
        raise DomainError(f"root index m must be a positive int, got {m!r}")
    if m > m_max:
        raise DomainError(f"root index m={m!r} exceeds m_max={m_max!r}")
    order, m = int(order), int(m)
    mu = 4.0 * order * order
    beta = (m + 0.5 * order - 0.25) * math.pi
    guess = (beta - (mu - 1.0) / (8.0 * beta)
             - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * beta) ** 3))
    lo, hi = guess - 0.25, guess + 0.25
    lo = max(lo, 1e-3)
    flo, fhi = bessel_j(order, lo), bessel_j(order, hi)
    widen = 0
    while flo * fhi > 0.0:
        lo = max(lo - 0.25, 1e-3)
        hi += 0.25
        flo, fhi = bessel_j(order, lo), bessel_j(order, hi)
        widen += 1
        if widen > 40:
            raise ConvergenceError(
                f"could not bracket Bessel root order={order} m={m}",
                bracket=(lo, hi))
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        fm = bessel_j(order, mid)
        if flo * fm <= 0.0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-6:
            break
    x = 0.5 * (lo + hi)
    for _ in range(8):
        fx = bessel_j(order, x)
        dx = fx / _bessel_j_prime(order, x)
        x -= dx
        if abs(dx) < 1e-13 * x:
            break
    if abs(bessel_j(order, x)) > 1e-9:
        raise ConvergenceError(
            f"Bessel root refinement stalled at order={order} m={m}", last=x)
    return x


# ---------------------------------------------------------------------------
# Jacobi polynomials by the standard three-term recurrence.

def jacobi_p(n, alpha, beta, u):
    """P_n^{(alpha,beta)}(u), vectorized in u."""
    if n < 0 or int(n) != n:
        raise DomainError(f"Jacobi degree must be a non-negative int, got {n!r}")
    n = int(n)
    u, scalar = _as_float_array(u)
    p_prev = np.ones_like(u)
    if n == 0:
        return float(p_prev) if scalar else p_prev
    a, b = alpha, beta
    p = (a + 1.0) + (a + b + 2.0) * (u - 1.0) / 2.0
    for j in range(1, n):
        c1 = 2.0 * (j + 1.0) * (j + a + b + 1.0) * (2.0 * j + a + b)
        c2 = (2.0 * j + a + b + 1.0) * (a * a - b * b)
        c3 = (2.0 * j + a + b) * (2.0 * j + a + b + 1.0) * (2.0 * j + a + b + 2.0)
        c4 = 2.0 * (j + a) * (j + b) * (2.0 * j + a + b + 2.0)
        p, p_prev = ((c2 + c3 * u) * p - c4 * p_prev) / c1, p
    return float(p) if scalar else p


def _jacobi_norm(n, alpha, beta):
    a, b = alpha, beta
    if n == 0:
        return 2.0 ** (a + b + 1.0) * math.exp(
            math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0))
    return (2.0 ** (a + b + 1.0) / (2.0 * n + a + b + 1.0)) * math.exp(
        math.lgamma(n + a + 1.0) + math.lgamma(n + b + 1.0)
        - math.lgamma(n + 1.0) - math.lgamma(n + a + b + 1.0))


# ---------------------------------------------------------------------------
# Base systems.

class BaseSystem:
    """An L2-orthogonal family {f_n} on [0, 2l] with known norms."""

    kind = "abstract"
    l = None

    def member(self, n, t):
        raise NotImplementedError

    def norm(self, n):
        raise NotImplementedError

    def quad_domain(self):
        """Integration window; opened slightly next to singular edges."""
        return 0.0, 2.0 * self.l

    def _check_domain(self, t):
        arr, scalar = _as_float_array(t)
        if not np.isfinite(arr).all():
            raise DomainError("base system argument must be finite")
        if (arr < 0.0).any() or (arr > 2.0 * self.l).any():
            raise DomainError(
                f"argument outside [0, {2.0 * self.l!r}] for {self.kind} system")
        return arr, scalar

    def _check_index(self, n):
        if n < 0 or int(n) != n:
            raise DomainError(f"member index must be a non-negative int, got {n!r}")
        return int(n)


class FourierSystem(BaseSystem):
    """1, cos(pi t/l), sin(pi t/l), cos(2 pi t/l), ... on [0, 2l]."""

    kind = "fourier"

    def __init__(self, l):
        if not (np.isfinite(l) and l > 0.0):
            raise DomainError(f"l must be finite and > 0, got {l!r}")
        self.l = float(l)

    def member(self, n, t):
        n = self._check_index(n)
        arr, scalar = self._check_domain(t)
        if n == 0:
            out = np.ones_like(arr)
        elif n % 2 == 1:
            j = (n + 1) // 2
            out = np.cos(j * math.pi * arr / self.l)
        else:
            j = n // 2
            out = np.sin(j * math.pi * arr / self.l)
        return float(out) if scalar else out

    def norm(self, n):
        n = self._check_index(n)
        return 2.0 * self.l if n == 0 else self.l

    def raw_member(self, n, t):
        return self.member(n, np.mod(t, 2.0 * self.l))


class JacobiSystem(BaseSystem):
    """sqrt((1-u)^alpha (1+u)^beta) P_n^{(alpha,beta)}(u), u = t - 1, on [0, 2]."""

    kind = "jacobi"

    def __init__(self, alpha, beta):
        if not (np.isfinite(alpha) and alpha > -1.0):
            raise DomainError(f"alpha must be > -1, got {alpha!r}")
        if not (np.isfinite(beta) and beta > -1.0):
            raise DomainError(f"beta must be > -1, got {beta!r}")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.l = 1.0

    def member(self, n, t):
        n = self._check_index(n)
        arr, scalar = self._check_domain(t)
        u = arr - 1.0
        if self.alpha < 0.0 and (u >= 1.0).any():
            raise SingularPointError(
                f"member unbounded at t=2 for alpha={self.alpha!r} < 0")
        if self.beta < 0.0 and (u <= -1.0).any():
            raise SingularPointError(
                f"member unbounded at t=0 for beta={self.beta!r} < 0")
        w = (1.0 - u) ** self.alpha * (1.0 + u) ** self.beta
        out = np.sqrt(w) * jacobi_p(n, self.alpha, self.beta, u)
        return float(out) if scalar else out

    def norm(self, n):
        return _jacobi_norm(self._check_index(n), self.alpha, self.beta)

    def quad_domain(self):
        lo = 2.0 * _OPEN_MARGIN if self.beta < 0.0 else 0.0
        hi = 2.0 * (1.0 - _OPEN_MARGIN) if self.alpha < 0.0 else 2.0
        return lo, hi

    def raw_member(self, n, t):
        """Polynomial factor continued outside [0, 2]; weight where it is real."""
        arr, scalar = _as_float_array(t)
        u = arr - 1.0
        if (self.alpha != 0.0 and (u > 1.0).any()) or \
           (self.beta != 0.0 and (u < -1.0).any()):
            raise DomainError(
                "raw evaluation outside [0, 2] needs alpha = beta = 0")
        w = (1.0 - u) ** self.alpha * (1.0 + u) ** self.beta
        out = np.sqrt(w) * jacobi_p(self._check_index(n), self.alpha, self.beta, u)
        return float(out) if scalar else out


class BesselSystem(BaseSystem):
    """sqrt(t) J_order(mu_m t / 2l) on [0, 2l]; member n uses the (n+1)-th root."""

    kind = "bessel"

    def __init__(self, order, l):
        if order < 0 or int(order) != order:
            raise DomainError(f"order must be a non-negative int, got {order!r}")
        if not (np.isfinite(l) and l > 0.0):
            raise DomainError(f"l must be finite and > 0, got {l!r}")
        self.order = int(order)
        self.l = float(l)

    def member(self, n, t):
        n = self._check_index(n)
        arr, scalar = self._check_domain(t)
        mu = bessel_zero(self.order, n + 1)
        out = np.sqrt(arr) * bessel_j(self.order, mu * arr / (2.0 * self.l))
        return float(out) if scalar else out

    def norm(self, n):
        n = self._check_index(n)
        mu = bessel_zero(self.order, n + 1)
        jp = _bessel_j_prime(self.order, mu)
        return 2.0 * self.l * self.l * jp * jp


class CustomSystem(BaseSystem):
    """User-supplied members with a caller-provided norm table."""

    kind = "custom"

    def __init__(self, members, norms, l):
        if not (np.isfinite(l) and l > 0.0):
            raise DomainError(f"l must be finite and > 0, got {l!r}")
        norms = [float(a) for a in norms]
        if not norms or any(not (a > 0.0) for a in norms):
            raise DomainError("norm table must be non-empty with positive entries")
        self.l = float(l)
        self._members = members
        self.norms = norms
        self.size = len(norms)

    def member(self, n, t):
        n = self._check_index(n)
        if n >= self.size:
            raise DomainError(f"member index {n} outside table of {self.size}")
        arr, scalar = self._check_domain(t)
        fn = self._members[n] if isinstance(self._members, (list, tuple)) \
            else (lambda x, _n=n: self._members(_n, x))
        out = np.asarray(fn(arr), dtype=float)
        return float(out) if scalar else out

    def norm(self, n):
        n = self._check_index(n)
        if n >= self.size:
            raise DomainError(f"member index {n} outside table of {self.size}")
        return self.norms[n]


def make_system(kind, l=None, alpha=None, beta=None, order=None):
    """Build a base system from CLI-style parameters."""
    if kind == "fourier":
        if l is None:
            raise DomainError("fourier system needs l")
        return FourierSystem(l)
    if kind == "jacobi":
        if alpha is None or beta is None:
            raise DomainError("jacobi system needs alpha and beta")
        if l is not None and abs(l - 1.0) > 1e-15:
            raise DomainError("jacobi system fixes l = 1 (interval [0, 2])")
        return JacobiSystem(alpha, beta)
    if kind == "bessel":
        if order is None or l is None:
            raise DomainError("bessel system needs order and l")
        return BesselSystem(order, l)
    raise DomainError(f"unknown system kind {kind!r}")


def base_eval(sys, n, t):
    """Value of member n of a base system at t in [0, 2l]."""
    return sys.member(n, t)


def base_norm(sys, n):
    """Closed-form squared L2 norm of member n."""
    return sys.norm(n)


def validate_orthogonality(sys, N, tol=1e-8, quad_tol=1e-10):
    """Check the N x N base Gram against the norm table by quadrature.

    Returns (max_offdiag_rel, max_diag_rel); raises ConsistencyError when the
    off-diagonal mass exceeds tol relative to sqrt(A_m A_n) or a diagonal
    strays from its declared norm by more than sqrt(tol).
    """
    from .quadrature import integrate  # local import to avoid a cycle

    if N < 1 or int(N) != N:
        raise DomainError(f"N must be a positive int, got {N!r}")
    N = int(N)
    lo, hi = sys.quad_domain()

    def integrand(x):
        B = np.stack([sys.member(n, x) for n in range(N)])
        return np.einsum("mi,ni->imn", B, B)

    res = integrate(integrand, lo, hi, tol=quad_tol, vectorized=True)
    G = res.value
    A = np.array([sys.norm(n) for n in range(N)])
    scale = np.sqrt(np.outer(A, A))
    off = np.abs(G / scale)
    np.fill_diagonal(off, 0.0)
    max_off = float(off.max()) if N > 1 else 0.0
    max_diag = float(np.max(np.abs(np.diag(G) - A) / A))
    if max_off > tol or max_diag > math.sqrt(tol):
        raise ConsistencyError(
            f"{sys.kind} system fails orthogonality validation: "
            f"max offdiag {max_off:.3e} (tol {tol:.1e}), "
            f"max diag deviation {max_diag:.3e}")
    return max_off, max_diag


# ---------------------------------------------------------------------------
# Lifted systems.

@dataclass(frozen=True)
class LiftedSystem:
    """A base system composed with the k-fold ladder pull-back at scale T.

    Members live on [seq.lows[k], seq.highs[k]]; evaluating one walks the
    forward orbit back to [T, T + 2l] and multiplies by the square-rooted
    derivative chain.  raw_polynomial_argument switches the composed argument
    to the literal t - T (no orbit pull-back) for side-by-side comparison.
    """

    base: BaseSystem
    T: float
    k: int
    seq: IterSeq
    raw_polynomial_argument: bool = field(default=False)

    @property
    def domain(self):
        return float(self.seq.lows[self.k]), float(self.seq.highs[self.k])


def lift_system(base, T, k, cache, cfg=DEFAULT_CONFIG,
                raw_polynomial_argument=False, validate_N=None):
    """Reverse-iterate [T, T+2l] to depth k and wrap the base system.

    Custom systems are validated for orthogonality before lifting; pass
    validate_N to control how many members are checked (defaults to the
    full table).
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"lift depth k must be a positive int, got {k!r}")
    if isinstance(base, CustomSystem):
        validate_orthogonality(base, validate_N or base.size)
    seq = reverse_iterate(T, 2.0 * base.l, int(k), cache, cfg)
    return LiftedSystem(base=base, T=float(T), k=int(k), seq=seq,
                        raw_polynomial_argument=raw_polynomial_argument)


def _orbit_arrays(ts, k, cache, cfg):
    """Forward orbit levels and the exact derivative-chain weight squared.

    Returns (levels, w2): levels[r] is the r-th forward image of ts
    (levels[0] = ts), and w2 = prod_{r<k} phi1_prime(levels[r]).  The
    derivative uses omega(levels[r]) = ln(levels[r+1]) + 1 + c - ln 2pi,
    so no solve beyond the orbit itself is needed.
    """
    from .ladder import phi1_array

    ts = np.asarray(ts, dtype=float)
    levels = np.empty((k + 1,) + ts.shape)
    levels[0] = ts
    for r in range(k):
        levels[r + 1] = phi1_array(levels[r], cache, cfg)
    w2 = np.ones_like(ts)
    for r in range(k):
        z = z_array(levels[r])
        omega_r = np.log(levels[r + 1]) + 1.0 + cfg.c - LN_2PI
        w2 = w2 * (z * z / omega_r)
    return levels, w2


def _pulled_argument(ls, levels, drift_tol):
    """Map orbit tops into the base interval, absorbing solver drift."""
    x = levels[ls.k] - ls.T
    width = 2.0 * ls.base.l
    over = np.maximum(-x, x - width)
    worst = float(np.max(over)) if x.size else 0.0
    if worst > drift_tol:
        raise ConsistencyError(
            f"orbit endpoint drifted {worst:.3e} outside [0, {width!r}]; "
            f"the iterate sequence no longer matches the base interval")
    return np.clip(x, 0.0, width)


def lifted_eval(ls, n, t, cache, cfg=DEFAULT_CONFIG, drift_tol=1e-6):
    """Value of lifted member n at t in [seq.lows[k], seq.highs[k]]."""
    arr, scalar = _as_float_array(t)
    lo, hi = ls.domain
    if not np.isfinite(arr).all() or (arr < lo).any() or (arr > hi).any():
        raise DomainError(
            f"lifted argument outside [{lo!r}, {hi!r}]")
    levels, w2 = _orbit_arrays(arr, ls.k, cache, cfg)
    if ls.raw_polynomial_argument:
        vals = ls.base.raw_member(n, arr - ls.T)
    else:
        x = _pulled_argument(ls, levels, drift_tol)
        vals = ls.base.member(n, x)
    out = vals * np.sqrt(w2)
    return float(out) if scalar else out


def lifted_weight(ls, t, cache, cfg=DEFAULT_CONFIG, form="ladder"):
    """The orbit weight alone: prod_r sqrt(phi1_prime) ("ladder" form) or
    prod_r |Z| / sqrt(omega) ("zeta" form).  The two agree identically."""
    arr, scalar = _as_float_array(t)
    levels, w2 = _orbit_arrays(arr, ls.k, cache, cfg)
    if form == "ladder":
        out = np.sqrt(w2)
    elif form == "zeta":
        out = np.ones_like(arr)
        for r in range(ls.k):
            absz = np.abs(z_array(levels[r]))
            omega_r = np.sqrt(np.log(levels[r + 1]) + 1.0 + cfg.c - LN_2PI)
            out = out * absz / omega_r
    else:
        raise DomainError(f"unknown weight form {form!r}")
    return float(out) if scalar else out
