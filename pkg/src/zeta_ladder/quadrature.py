"""Globally adaptive Gauss-Kronrod integration.

A 15-point Kronrod rule with its embedded 7-point Gauss rule supplies the
per-panel value and error estimate; the panel with the worst error is split
first.  Integrands may return a scalar per abscissa or an ndarray (the error
is then measured in the max norm), which lets a whole Gram matrix ride
through one integration pass.  All nodes are interior, so integrable endpoint
singularities refine cleanly without ever being evaluated.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, EvaluationError

# 15-point Kronrod abscissae (positive half); odd indices are the Gauss-7 nodes.
_XGK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
WG = np.zeros(15)
WG[1::2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])

DEFAULT_PANEL_BUDGET = 20000


@dataclass
class QuadResult:
    """Integral estimate with its error bound and work counters."""

    value: object
    error_estimate: float
    evaluations: int
    panels: int


def _eval_panel(f, a, b):
    """Kronrod and Gauss estimates of f over [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid + half * XGK
    vals = np.asarray(f(nodes), dtype=float)
    if vals.shape[:1] != nodes.shape:
        raise ValueError(
            f"vectorized integrand must return values with the abscissa axis "
            f"leading: got shape {vals.shape} for {nodes.shape[0]} abscissae")
    if not np.isfinite(vals).all():
        flat = vals.reshape(vals.shape[0], -1)
        bad = int(np.argwhere(~np.isfinite(flat).all(axis=1))[0][0])
        raise EvaluationError(
            f"integrand returned a non-finite value at t={nodes[bad]!r}",
            abscissa=float(nodes[bad]))
    k = half * np.tensordot(WGK, vals, axes=(0, 0))
    g = half * np.tensordot(WG, vals, axes=(0, 0))
    err = float(np.max(np.abs(k - g)))
    return k, err


def integrate(f, a, b, tol=1e-8, seeds=None, vectorized=False,
              max_panels=DEFAULT_PANEL_BUDGET):
    """Integrate f over [a, b] to error_estimate <= tol * max(1, |value|).

    f receives one abscissa at a time unless `vectorized`, in which case it
    receives a float ndarray and must return an array whose leading axis
    matches (trailing axes are allowed and integrate componentwise).  `seeds`
    places initial panel boundaries at integrand landmarks such as sign
    changes; out-of-range seeds are ignored.  Exhausting `max_panels` raises
    AccuracyError carrying the best estimate.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise DomainError(f"integrate requires finite a <= b, got [{a!r}, {b!r}]")
    if tol <= 0.0:
        raise DomainError(f"integrate requires tol > 0, got {tol!r}")
    if not vectorized:
        g = f
        f = lambda ts: np.array([g(float(t)) for t in ts])
    if a == b:
        probe = np.asarray(f(np.array([a])), dtype=float)
        zero = np.zeros(probe.shape[1:]) if probe.ndim > 1 else 0.0
        return QuadResult(value=zero, error_estimate=0.0, evaluations=1, panels=0)

    edges = [a, b]
    if seeds is not None:
        inner = sorted({float(s) for s in seeds if a < float(s) < b})
        edges = [a, *inner, b]

    width_floor = 64.0 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)
    heap = []  # (-err, tiebreak, a, b, value)
    counter = 0
    evals = 0
    panels = 0
    total_val = None
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _eval_panel(f, lo, hi)
        evals += 15
        panels += 1
        total_val = val if total_val is None else total_val + val
        total_err += err
        heapq.heappush(heap, (-err, counter, lo, hi, val))
        counter += 1
    stuck_err = 0.0  # panels at the width floor, no longer refinable

    def result():
        exact_err = stuck_err + sum(-item[0] for item in heap)
        value = float(total_val) if np.ndim(total_val) == 0 else total_val
        return QuadResult(value=value, error_estimate=exact_err,
                          evaluations=evals, panels=panels)

    while True:
        scale = max(1.0, float(np.max(np.abs(total_val))))
        if total_err <= tol * scale or not heap:
            return result()
        if panels >= max_panels:
            best = result()
            raise AccuracyError(
                f"panel budget {max_panels} exhausted with error estimate "
                f"{best.error_estimate:.3e} > {tol * scale:.3e}", best=best)
        neg_err, _, lo, hi, val = heapq.heappop(heap)
        if hi - lo <= width_floor:
            # Unsplittable in double precision; retire it with its error.
            stuck_err += -neg_err
            if stuck_err > tol * scale:
                best = result()
                raise AccuracyError(
                    f"error estimate {best.error_estimate:.3e} cannot reach "
                    f"{tol * scale:.3e}: panels at the double-precision width "
                    f"floor already carry {stuck_err:.3e}", best=best)
            continue
        total_val = total_val - val
        total_err -= -neg_err
        panels -= 1
        mid = 0.5 * (lo + hi)
        for child_lo, child_hi in ((lo, mid), (mid, hi)):
            cval, cerr = _eval_panel(f, child_lo, child_hi)
            evals += 15
            panels += 1
            total_val = total_val + cval
            total_err += cerr
            heapq.heappush(heap, (-cerr, counter, child_lo, child_hi, cval))
            counter += 1
