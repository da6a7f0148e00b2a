"""The ladder transform phi1 and its iterates.

phi1(T) is the unique V above the stationary point of

    g(V) = V ln V + (c - ln 2pi) V + c0

with g(V) equal to the cumulative integral of Z^2 over [0, T].  Because the
solver drives the residual to machine level, the chain

    omega(t)      = ln phi1(t) + 1 + c - ln 2pi
    phi1_prime(t) = Z(t)^2 / omega(t)

makes phi1_prime the exact derivative of the implemented phi1, so change of
variables along the reverse iterates T = T^0 < T^1 < ... is an identity the
verification suite can check at quadrature accuracy rather than an asymptotic
claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cache import hl_integral, hl_integral_array, _require_in_range
from .errors import (BelowThresholdError, CacheExhaustedError, ConsistencyError,
                     ConvergenceError, DomainError)
from .zeta import EULER, LN_2PI, z_array


@dataclass(frozen=True)
class LadderConfig:
    """Constants and solver knobs shared by the ladder operations."""

    c: float = EULER
    c0: float = 0.0
    t_lo: float = 100.0
    tol_root: float = 1e-9
    max_iter: int = 60

    def __post_init__(self):
        if not math.isfinite(self.c) or not (0.0 < self.c < 1.0):
            raise DomainError(f"c must lie in (0, 1), got {self.c!r}")
        if not math.isfinite(self.c0):
            raise DomainError(f"c0 must be finite, got {self.c0!r}")
        if not math.isfinite(self.t_lo) or self.t_lo < 100.0:
            raise DomainError(
                f"t_lo must be >= 100 (the configured working bound), "
                f"got {self.t_lo!r}")
        if not (self.tol_root > 0.0):
            raise DomainError(f"tol_root must be > 0, got {self.tol_root!r}")
        if self.max_iter < 8:
            raise DomainError(f"max_iter must be >= 8, got {self.max_iter!r}")


DEFAULT_CONFIG = LadderConfig()


@dataclass(frozen=True)
class LadderPoint:
    """One solved value of the ladder equation."""

    t: float
    value: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class IterSeq:
    """Reverse iterates of [T, T+H]: segment r is [lows[r], highs[r]]."""

    T: float
    H: float
    k: int
    lows: np.ndarray
    highs: np.ndarray
    defects_low: np.ndarray
    defects_high: np.ndarray


@dataclass(frozen=True)
class GapReport:
    """Geometry of an IterSeq: segment lengths, gaps, and normalized gaps."""

    T: float
    H: float
    k: int
    lengths: np.ndarray
    gaps: np.ndarray
    gap_ratios: np.ndarray
    ordered: bool
    disjoint: bool


def hl_asymptotic(V, cfg=DEFAULT_CONFIG):
    """g(V) = V ln V + (c - ln 2pi) V + c0, the ladder equation's left side."""
    V = np.asarray(V, dtype=float)
    if not np.isfinite(V).all() or (V <= 0).any():
        raise DomainError("hl_asymptotic requires finite V > 0")
    out = V * np.log(V) + (cfg.c - LN_2PI) * V + cfg.c0
    return float(out) if out.ndim == 0 else out


def hl_asymptotic_prime(V, cfg=DEFAULT_CONFIG):
    """d/dV of hl_asymptotic: ln V + 1 + c - ln 2pi."""
    V = np.asarray(V, dtype=float)
    if not np.isfinite(V).all() or (V <= 0).any():
        raise DomainError("hl_asymptotic_prime requires finite V > 0")
    out = np.log(V) + 1.0 + cfg.c - LN_2PI
    return float(out) if out.ndim == 0 else out


def _v_floor(cfg):
    """Stationary point of g; roots are only sought to its right."""
    return math.exp(LN_2PI - 1.0 - cfg.c)


def _solve_hl_equation(I, cfg):
    """Root of g(V) = I above the stationary point.

    Newton from the first-order initializer, clipped into a maintained
    bracket, with bisection whenever Newton leaves it.  Returns (V, residual,
    iterations); the residual is in the equation's own units.
    """
    vstar = _v_floor(cfg)
    gmin = -vstar + cfg.c0
    if not math.isfinite(I):
        raise DomainError(f"ladder equation needs finite data, got {I!r}")
    if I <= gmin + 1e-12 * max(1.0, abs(gmin)):
        raise BelowThresholdError(
            f"cumulative integral {I!r} is at or below the equation minimum "
            f"{gmin!r}; no admissible root exists")

    def g(v):
        return v * math.log(v) + (cfg.c - LN_2PI) * v + cfg.c0

    def gp(v):
        return math.log(v) + 1.0 + cfg.c - LN_2PI

    lo = vstar * (1.0 + 1e-12)
    hi = max(2.0 * vstar, 4.0)
    grows = 0
    while g(hi) < I:
        hi *= 2.0
        grows += 1
        if grows > 200:
            raise ConvergenceError("could not bracket the ladder root",
                                   bracket=(lo, hi))
    v = hi * (1.0 - (1.0 - cfg.c) / max(math.log(hi), 2.0))
    v = min(max(v, lo), hi)
    res_floor = 32.0 * np.finfo(float).eps * max(abs(I), 1.0)
    res = g(v) - I
    best_v, best_res = v, res
    for it in range(1, cfg.max_iter + 1):
        if res > 0:
            hi = min(hi, v)
        else:
            lo = max(lo, v)
        step = res / gp(v)
        nxt = v - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == v:
            break
        v = nxt
        res = g(v) - I
        if abs(res) < abs(best_res):
            best_v, best_res = v, res
        if abs(res) <= res_floor:
            break
    # tol_root cannot be met once it drops under the rounding floor of
    # g(V) - I itself, so the gate is the larger of the two.
    if abs(best_res) > max(cfg.tol_root, res_floor):
        raise ConvergenceError(
            f"ladder equation residual {best_res!r} above tol_root "
            f"{cfg.tol_root!r} after {cfg.max_iter} iterations",
            last=best_v, bracket=(lo, hi))
    return best_v, best_res, it


def _check_admissible(T, cache, cfg, what="T"):
    Tf = float(T)
    if not math.isfinite(Tf) or Tf < cfg.t_lo:
        raise DomainError(
            f"{what}={T!r} is below the working bound t_lo={cfg.t_lo!r}")
    _require_in_range(Tf, cache, what=what)
    return Tf


def phi1(T, cache, cfg=DEFAULT_CONFIG):
    """Solve the ladder equation at T; returns a LadderPoint."""
    Tf = _check_admissible(T, cache, cfg)
    I = hl_integral(Tf, cache)
    v, res, its = _solve_hl_equation(I, cfg)
    return LadderPoint(t=Tf, value=v, residual=res, iterations=its)


def phi1_array(T, cache, cfg=DEFAULT_CONFIG):
    """Vectorized phi1 values (no per-point diagnostics); the hot path."""
    shape = np.shape(T)
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if not np.isfinite(T).all() or (T < cfg.t_lo).any():
        raise DomainError(
            f"phi1_array requires finite T >= t_lo={cfg.t_lo!r}")
    I = hl_integral_array(T, cache)
    lnT = np.log(T)
    v = T * (1.0 - (1.0 - cfg.c) / lnT)
    vstar = _v_floor(cfg)
    a = cfg.c - LN_2PI
    res_floor = 32.0 * np.finfo(float).eps * np.maximum(np.abs(I), 1.0)
    for _ in range(20):
        res = v * np.log(v) + a * v + cfg.c0 - I
        if (np.abs(res) <= res_floor).all():
            break
        v = v - res / (np.log(v) + 1.0 + a)
        np.clip(v, vstar * (1.0 + 1e-12), None, out=v)
    res = v * np.log(v) + a * v + cfg.c0 - I
    rough = np.abs(res) > np.maximum(cfg.tol_root, res_floor)
    if rough.any():
        for j in np.flatnonzero(rough):
            v[j], _, _ = _solve_hl_equation(float(I[j]), cfg)
    return v.reshape(shape)


def omega(t, cache, cfg=DEFAULT_CONFIG):
    """omega(t) = ln phi1(t) + 1 + c - ln 2pi, the moment density scale."""
    return math.log(phi1(t, cache, cfg).value) + 1.0 + cfg.c - LN_2PI


def omega_array(t, cache, cfg=DEFAULT_CONFIG):
    return np.log(phi1_array(t, cache, cfg)) + 1.0 + cfg.c - LN_2PI


def phi1_prime(t, cache, cfg=DEFAULT_CONFIG):
    """Derivative of phi1: Z(t)^2 / omega(t), exactly zero at zeros of Z."""
    tf = _check_admissible(t, cache, cfg, what="t")
    z = float(z_array(np.array([tf]))[0])
    return z * z / omega(tf, cache, cfg)


def phi1_prime_array(t, cache, cfg=DEFAULT_CONFIG):
    z = z_array(np.asarray(t, dtype=float))
    return z * z / omega_array(t, cache, cfg)


def phi1_inverse(U, cache, cfg=DEFAULT_CONFIG):
    """The x > U with phi1(x) = U; returns (x, defect) with defect in t units.

    Newton uses phi1_prime, which vanishes at zeros of Z, so every step is
    clipped into a sign-change bracket that bisection keeps shrinking.
    """
    Uf = _check_admissible(U, cache, cfg, what="U")

    def F(x):
        return phi1(x, cache, cfg).value - Uf

    lnU = math.log(Uf)
    lo, flo = Uf, F(Uf)
    if flo >= 0.0:
        raise ConsistencyError(
            f"phi1({Uf!r}) >= {Uf!r}; inverse assumes a positive complement")
    span = (1.0 - cfg.c) * Uf / lnU
    hi = Uf + 1.2 * span
    grows = 0
    while True:
        if hi > cache.t_max:
            raise CacheExhaustedError(
                f"bracketing phi1_inverse({Uf!r}) needs t_max >= {hi!r}; "
                f"rebuild the cache at least that far", required_tmax=hi)
        fhi = F(hi)
        if fhi > 0.0:
            break
        lo, flo = hi, fhi
        hi += 0.4 * span
        grows += 1
        if grows > 200:
            raise ConvergenceError("could not bracket phi1_inverse",
                                   bracket=(lo, hi))
    x = 0.5 * (lo + hi)
    fx = F(x)
    eps = np.finfo(float).eps
    stop = 2.0 * eps * Uf
    best_x, best_f = x, fx
    for _ in range(cfg.max_iter):
        if abs(fx) <= stop:
            break
        if fx > 0.0:
            hi = x
        else:
            lo = x
        z = float(z_array(np.array([x]))[0])
        w = math.log(Uf + fx) + 1.0 + cfg.c - LN_2PI
        deriv = z * z / w
        nxt = x - fx / deriv if deriv > 0.0 else 0.5 * (lo + hi)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if nxt == x:
            break
        x = nxt
        fx = F(x)
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
    # Evaluation noise makes the defect erratic at the ulp scale, and with a
    # small slope the best representable preimage can sit tens of ulps from
    # where the iteration stopped; scan the neighborhood for the argmin.
    z = float(z_array(np.array([best_x]))[0])
    slope = max(z * z / (math.log(Uf) + 1.0 + cfg.c - LN_2PI), 1e-12)
    reach = abs(best_f) / slope / max(math.ulp(best_x), 1e-300)
    n = int(min(64.0, max(4.0, reach + 4.0)))
    up = dn = best_x
    for _ in range(n):
        up = math.nextafter(up, math.inf)
        dn = math.nextafter(dn, -math.inf)
        for cand in (up, dn):
            fc = F(cand)
            if abs(fc) < abs(best_f):
                best_x, best_f = cand, fc
    if abs(best_f) > max(cfg.tol_root, 32.0 * eps * Uf):
        raise ConvergenceError(
            f"phi1_inverse defect {best_f!r} above tol_root {cfg.tol_root!r}",
            last=best_x, bracket=(lo, hi))
    return best_x, best_f


def forward_iterate(t, r, cache, cfg=DEFAULT_CONFIG):
    """[t, phi1(t), ..., phi1^r(t)] as an array; fails if any step dips
    below t_lo."""
    if r < 0 or int(r) != r:
        raise DomainError(f"iteration count must be a non-negative int, got {r!r}")
    out = np.empty(int(r) + 1)
    out[0] = _check_admissible(t, cache, cfg, what="t")
    for j in range(1, int(r) + 1):
        if out[j - 1] < cfg.t_lo:
            raise DomainError(
                f"forward iterate {j - 1} of {t!r} fell to {out[j - 1]!r}, "
                f"below t_lo={cfg.t_lo!r}")
        out[j] = phi1(out[j - 1], cache, cfg).value
    return out


def reverse_iterate(T, H, k, cache, cfg=DEFAULT_CONFIG):
    """Reverse iterates of the segment [T, T+H] up to depth k."""
    Tf = _check_admissible(T, cache, cfg)
    if not (math.isfinite(H) and H > 0.0):
        raise DomainError(f"H must be finite and > 0, got {H!r}")
    if H > 0.1 * Tf:
        raise DomainError(
            f"window H={H!r} is too wide for the working scale at T={Tf!r}")
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a non-negative int, got {k!r}")
    k = int(k)
    lows = np.empty(k + 1)
    highs = np.empty(k + 1)
    dlow = np.zeros(k + 1)
    dhigh = np.zeros(k + 1)
    lows[0] = Tf
    highs[0] = Tf + H
    for r in range(1, k + 1):
        lows[r], dlow[r] = phi1_inverse(lows[r - 1], cache, cfg)
        highs[r], dhigh[r] = phi1_inverse(highs[r - 1], cache, cfg)
    seq = IterSeq(T=Tf, H=float(H), k=k, lows=lows, highs=highs,
                  defects_low=dlow, defects_high=dhigh)
    for r in range(k + 1):
        if not seq.lows[r] < seq.highs[r]:
            raise ConsistencyError(
                f"reverse iterate segment {r} collapsed: "
                f"[{seq.lows[r]!r}, {seq.highs[r]!r}]")
    for r in range(1, k + 1):
        if not seq.highs[r - 1] < seq.lows[r]:
            raise ConsistencyError(
                f"reverse iterate segments {r - 1} and {r} overlap; "
                f"the window H={H!r} is too wide at this scale")
    return seq


def gap_stats(seq, cfg=DEFAULT_CONFIG):
    """Lengths, gaps, and gaps normalized by (1 - c) T / ln T."""
    lengths = seq.highs - seq.lows
    gaps = seq.lows[1:] - seq.highs[:-1]
    unit = (1.0 - cfg.c) * seq.T / math.log(seq.T)
    ratios = gaps / unit
    ordered = bool(np.all(np.diff(seq.lows) > 0)
                   and np.all(np.diff(seq.highs) > 0))
    disjoint = bool(np.all(gaps > 0)) if seq.k >= 1 else True
    return GapReport(T=seq.T, H=seq.H, k=seq.k, lengths=lengths, gaps=gaps,
                     gap_ratios=ratios, ordered=ordered, disjoint=disjoint)
