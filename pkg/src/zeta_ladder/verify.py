"""Verification suite: change-of-variables, orthogonality, and moment checks.

Every check here integrates some combination of lifted members and orbit
weights over a reverse-iterated segment and compares against a closed form.
Because the orbit weight is the exact derivative chain of the implemented
ladder, the first three checks are identities up to quadrature and solver
noise; the moment scaling checks are asymptotic trends reported as ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .ladder import DEFAULT_CONFIG, reverse_iterate
from .ortho import LiftedSystem, _orbit_arrays, _pulled_argument
from .quadrature import QuadResult, integrate
from .zeta import LN_2PI, z_array

N_MAX_DEFAULT = 12


def _orbit_seeds(lo, hi, k, cache, cfg, scan_step=0.08):
    """Panel seeds at sign changes of Z along the first k orbit levels.

    The integrands built here are even in Z and stay smooth, but aligning
    panels with the zeros sharpens the error estimates near them.
    """
    n = max(16, int(math.ceil((hi - lo) / scan_step)))
    ts = np.linspace(lo, hi, n + 1)
    if k < 1:
        z = z_array(ts)[None, :]
    else:
        levels = np.empty((k, ts.size))
        levels[0] = ts
        from .ladder import phi1_array
        for r in range(k - 1):
            levels[r + 1] = phi1_array(levels[r], cache, cfg)
        z = z_array(levels.ravel()).reshape(k, ts.size)
    flips = (z[:, :-1] * z[:, 1:] < 0.0).any(axis=0)
    mids = 0.5 * (ts[:-1] + ts[1:])
    return list(mids[flips])


def _weight_integrand(k, cache, cfg, extra=None):
    """Integrand t -> prod_r phi1_prime(levels[r]) [* extra(levels)]."""

    def f(ts):
        levels, w2 = _orbit_arrays(ts, k, cache, cfg)
        return w2 * extra(levels) if extra is not None else w2

    return f


# ---------------------------------------------------------------------------
# Change of variables.

@dataclass(frozen=True)
class SubstitutionReport:
    """Both sides of the pull-back identity for one test function."""

    T: float
    H: float
    k: int
    f_label: str
    lhs: QuadResult
    rhs: QuadResult
    abs_diff: float
    rel_diff: float
    rtol: float
    atol: float
    passed: bool

    def to_dict(self):
        return {
            "kind": "substitution", "T": self.T, "H": self.H, "k": self.k,
            "f": self.f_label,
            "lhs": self.lhs.value, "lhs_error": self.lhs.error_estimate,
            "rhs": self.rhs.value, "rhs_error": self.rhs.error_estimate,
            "abs_diff": self.abs_diff, "rel_diff": self.rel_diff,
            "rtol": self.rtol, "atol": self.atol,
            "evaluations": self.lhs.evaluations + self.rhs.evaluations,
            "passed": self.passed,
        }


def verify_substitution(f, T, H, k, cache, cfg=DEFAULT_CONFIG, rtol=1e-5,
                        atol=None, quad_tol=1e-9, f_label="f"):
    """Compare the direct integral of f over [T, T+H] with its pull-back.

    The right side integrates f(levels[k]) times the derivative-chain weight
    over the k-th reverse segment; agreement is limited only by quadrature
    and root-solver noise.
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive int, got {k!r}")
    k = int(k)
    if atol is None:
        atol = 1e-8 * H
    seq = reverse_iterate(T, H, k, cache, cfg)

    lhs = integrate(lambda ts: np.asarray(f(ts), dtype=float),
                    T, T + H, tol=quad_tol, vectorized=True)

    lo, hi = float(seq.lows[k]), float(seq.highs[k])
    seeds = _orbit_seeds(lo, hi, k, cache, cfg)

    def rhs_integrand(ts):
        levels, w2 = _orbit_arrays(ts, k, cache, cfg)
        return np.asarray(f(levels[k]), dtype=float) * w2

    rhs = integrate(rhs_integrand, lo, hi, tol=quad_tol, seeds=seeds,
                    vectorized=True)

    abs_diff = abs(lhs.value - rhs.value)
    scale = max(abs(lhs.value), abs(rhs.value))
    rel_diff = abs_diff / scale if scale > 0.0 else 0.0
    passed = abs_diff <= max(rtol * scale, atol)
    return SubstitutionReport(T=float(T), H=float(H), k=k, f_label=f_label,
                              lhs=lhs, rhs=rhs, abs_diff=abs_diff,
                              rel_diff=rel_diff, rtol=rtol, atol=atol,
                              passed=passed)


# ---------------------------------------------------------------------------
# Gram matrices of lifted systems.

@dataclass(frozen=True)
class GramReport:
    """Lifted N x N Gram matrix against the base norm table."""

    system: str
    T: float
    k: int
    l: float
    N: int
    matrix: np.ndarray
    norms_expected: np.ndarray
    max_offdiag_rel: float
    max_diag_rel_err: float
    offdiag_tol: float
    diag_rtol: float
    quad: QuadResult
    passed: bool

    def to_dict(self):
        return {
            "kind": "gram", "system": self.system, "T": self.T, "k": self.k,
            "l": self.l, "N": self.N,
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "norms_expected": [float(a) for a in self.norms_expected],
            "max_offdiag_rel": self.max_offdiag_rel,
            "max_diag_rel_err": self.max_diag_rel_err,
            "offdiag_tol": self.offdiag_tol, "diag_rtol": self.diag_rtol,
            "evaluations": self.quad.evaluations, "panels": self.quad.panels,
            "error_estimate": self.quad.error_estimate,
            "passed": self.passed,
        }


def gram_matrix(ls, N, cache, cfg=DEFAULT_CONFIG, quad_tol=1e-8,
                offdiag_tol=1e-6, diag_rtol=1e-6, n_max=N_MAX_DEFAULT,
                drift_tol=1e-6):
    """All pairwise integrals of the first N lifted members.

    The integrand is assembled per abscissa from one shared orbit: the
    product of two members' weights is the exact derivative chain, so the
    matrix must reproduce diag(A_n) of the base system.
    """
    if N < 1 or int(N) != N:
        raise DomainError(f"N must be a positive int, got {N!r}")
    if N > n_max:
        raise DomainError(f"N={N!r} exceeds n_max={n_max!r}")
    N = int(N)
    base = ls.base
    lo, hi = ls.domain
    qlo, qhi = base.quad_domain()
    width = 2.0 * base.l
    # Singular base edges pull back to the segment ends; open them slightly.
    if qlo > 0.0:
        lo += 1e-12 * (hi - lo)
    if qhi < width:
        hi -= 1e-12 * (hi - lo)
    seeds = _orbit_seeds(lo, hi, ls.k, cache, cfg)

    def integrand(ts):
        levels, w2 = _orbit_arrays(ts, ls.k, cache, cfg)
        if ls.raw_polynomial_argument:
            B = np.stack([base.raw_member(n, ts - ls.T) for n in range(N)])
        else:
            x = _pulled_argument(ls, levels, drift_tol)
            B = np.stack([base.member(n, x) for n in range(N)])
        return np.einsum("mi,ni,i->imn", B, B, w2)

    quad = integrate(integrand, lo, hi, tol=quad_tol, seeds=seeds,
                     vectorized=True)
    G = quad.value
    A = np.array([base.norm(n) for n in range(N)])
    scale = np.sqrt(np.outer(A, A))
    off = np.abs(G) / scale
    np.fill_diagonal(off, 0.0)
    max_off = float(off.max()) if N > 1 else 0.0
    max_diag = float(np.max(np.abs(np.diag(G) - A) / A))
    passed = max_off <= offdiag_tol and max_diag <= diag_rtol
    return GramReport(system=base.kind, T=ls.T, k=ls.k, l=base.l, N=N,
                      matrix=G, norms_expected=A, max_offdiag_rel=max_off,
                      max_diag_rel_err=max_diag, offdiag_tol=offdiag_tol,
                      diag_rtol=diag_rtol, quad=quad, passed=passed)


# ---------------------------------------------------------------------------
# Moments.

@dataclass(frozen=True)
class MomentReport:
    """The bare-weight integral against its exact value 2l."""

    T: float
    k: int
    l: float
    value: float
    expected: float
    rel_err: float
    rtol: float
    quad: QuadResult
    passed: bool

    def to_dict(self):
        return {
            "kind": "moment_exact", "T": self.T, "k": self.k, "l": self.l,
            "value": self.value, "expected": self.expected,
            "rel_err": self.rel_err, "rtol": self.rtol,
            "evaluations": self.quad.evaluations, "panels": self.quad.panels,
            "error_estimate": self.quad.error_estimate,
            "passed": self.passed,
        }


def moment_exact(T, k, l, cache, cfg=DEFAULT_CONFIG, quad_tol=1e-8,
                 rtol=1e-6):
    """Integral of the derivative-chain weight alone: exactly 2l."""
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive int, got {k!r}")
    if not (np.isfinite(l) and l > 0.0):
        raise DomainError(f"l must be finite and > 0, got {l!r}")
    k = int(k)
    H = 2.0 * float(l)
    seq = reverse_iterate(T, H, k, cache, cfg)
    lo, hi = float(seq.lows[k]), float(seq.highs[k])
    seeds = _orbit_seeds(lo, hi, k, cache, cfg)
    quad = integrate(_weight_integrand(k, cache, cfg), lo, hi,
                     tol=quad_tol, seeds=seeds, vectorized=True)
    rel = abs(quad.value - H) / H
    return MomentReport(T=float(T), k=k, l=float(l), value=quad.value,
                        expected=H, rel_err=rel, rtol=rtol, quad=quad,
                        passed=rel <= rtol)


@dataclass(frozen=True)
class MomentZetaReport:
    """The unnormalized moment against its predicted growth 2l ln^k T."""

    T: float
    k: int
    l: float
    value: float
    expected_scale: float
    ratio: float
    band: tuple
    quad: QuadResult
    passed: bool

    def to_dict(self):
        return {
            "kind": "moment_zeta", "T": self.T, "k": self.k, "l": self.l,
            "value": self.value, "expected_scale": self.expected_scale,
            "ratio": self.ratio,
            "band": list(self.band) if self.band else None,
            "evaluations": self.quad.evaluations, "panels": self.quad.panels,
            "error_estimate": self.quad.error_estimate,
            "passed": self.passed,
        }


def _omega_product(levels, k, cfg):
    out = np.ones_like(levels[0])
    for r in range(k):
        out = out * (np.log(levels[r + 1]) + 1.0 + cfg.c - LN_2PI)
    return out


def moment_zeta(T, k, l, cache, cfg=DEFAULT_CONFIG, quad_tol=1e-7,
                band=None):
    """Integral of the k-fold product of Z^2 along the orbit.

    Equals the exact-weight integral times the orbit's omega product, so the
    ratio to 2l ln^k T tends to 1 from below as T grows.  k=0 degenerates to
    the plain integral of Z^2 over [T, T+2l].
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a non-negative int, got {k!r}")
    if not (np.isfinite(l) and l > 0.0):
        raise DomainError(f"l must be finite and > 0, got {l!r}")
    k = int(k)
    H = 2.0 * float(l)
    Tf = float(T)
    if k == 0:
        seeds = _orbit_seeds(Tf, Tf + H, 0, cache, cfg)
        quad = integrate(lambda ts: z_array(ts) ** 2, Tf, Tf + H,
                         tol=quad_tol, seeds=seeds, vectorized=True)
    else:
        seq = reverse_iterate(Tf, H, k, cache, cfg)
        lo, hi = float(seq.lows[k]), float(seq.highs[k])
        seeds = _orbit_seeds(lo, hi, k, cache, cfg)
        quad = integrate(
            _weight_integrand(k, cache, cfg,
                              extra=lambda lv: _omega_product(lv, k, cfg)),
            lo, hi, tol=quad_tol, seeds=seeds, vectorized=True)
    expected = H * math.log(Tf) ** k
    ratio = quad.value / expected
    passed = True if band is None else (band[0] <= ratio <= band[1])
    return MomentZetaReport(T=Tf, k=k, l=float(l), value=quad.value,
                            expected_scale=expected, ratio=ratio,
                            band=tuple(band) if band else None,
                            quad=quad, passed=passed)


@dataclass(frozen=True)
class PrescribedMomentReport:
    """Moment over a window sized so the predicted mass equals `mass`."""

    T: float
    k: int
    mass: float
    l: float
    value: float
    ratio: float
    band: tuple
    quad: QuadResult
    passed: bool

    def to_dict(self):
        return {
            "kind": "moment_prescribed", "T": self.T, "k": self.k,
            "mass": self.mass, "l": self.l, "value": self.value,
            "ratio": self.ratio,
            "band": list(self.band) if self.band else None,
            "evaluations": self.quad.evaluations, "panels": self.quad.panels,
            "error_estimate": self.quad.error_estimate,
            "passed": self.passed,
        }


def moment_prescribed(T, k, mass, cache, cfg=DEFAULT_CONFIG, quad_tol=1e-7,
                      band=None):
    """Verify that a window of length mass/ln^k T carries moment ~ mass.

    The window must stay asymptotically negligible: mass is capped at
    0.01 T ln^{k-1} T.
    """
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive int, got {k!r}")
    if not (np.isfinite(mass) and mass > 0.0):
        raise DomainError(f"mass must be finite and > 0, got {mass!r}")
    k = int(k)
    Tf = float(T)
    lnT = math.log(Tf)
    cap = 0.01 * Tf * lnT ** (k - 1)
    if mass > cap:
        raise DomainError(
            f"mass={mass!r} exceeds the smallness cap {cap!r} at T={Tf!r}")
    l = 0.5 * mass / lnT ** k
    rep = moment_zeta(Tf, k, l, cache, cfg, quad_tol=quad_tol)
    ratio = rep.value / mass
    passed = True if band is None else (band[0] <= ratio <= band[1])
    return PrescribedMomentReport(T=Tf, k=k, mass=float(mass), l=l,
                                  value=rep.value, ratio=ratio,
                                  band=tuple(band) if band else None,
                                  quad=rep.quad, passed=passed)
