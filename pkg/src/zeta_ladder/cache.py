"""Cumulative integral of Z^2 on a uniform grid, persisted as versioned text.

The cache holds I(t_i) = integral of Z(u)^2 du over [0, t_i] at t_i = i*step.
build_cache integrates panel by panel with the Gauss-Kronrod pair, batching
panels through the array Z evaluator and refining only the panels whose
error estimate misses the tolerance.  hl_integral(T) is then a grid lookup
plus an adaptive tail over the partial panel, so the evaluated function is
smooth inside panels and continuous across them to near machine precision,
which is what the downstream change-of-variable identities lean on.

File format, one cache per file:
    # zeta-ladder-cache v1 step=<step> tmax=<tmax>
    # checksum=<crc32 of the data rows>
    <t>,<I>            (17 significant digits, one row per grid point)
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (AccuracyError, CacheExhaustedError, CacheFormatError,
                     DomainError, StorageError)
from .quadrature import WG, WGK, XGK, integrate
from .zeta import z_array, z_noise_scale

FORMAT_VERSION = 1
_HEADER_PREFIX = "# zeta-ladder-cache v"


@dataclass
class CumulativeCache:
    """Grid of cumulative Z^2 integrals; immutable once built."""

    step: float
    t_max: float
    values: np.ndarray
    version: int = FORMAT_VERSION
    checksum: int = 0

    def grid(self):
        return self.step * np.arange(self.values.size)


def _z_sq_panels(lo, hi):
    """Kronrod/Gauss estimates of integral Z^2 for batched panels."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (lo + hi)
    nodes = mid[:, None] + half[:, None] * XGK[None, :]
    vals = z_array(nodes.ravel()).reshape(nodes.shape) ** 2
    k = half * (vals @ WGK)
    g = half * (vals @ WG)
    return k, np.abs(k - g)


def _panel_integrals(lo, hi, tol, eval_budget):
    """Adaptive integral of Z^2 over each [lo_i, hi_i], refined in batches.

    Failing panels are bisected and both halves rejoin the work queue, so the
    whole refinement stays vectorized.  `eval_budget` bounds the total number
    of panel evaluations; an unreachable tolerance then fails loudly instead
    of looping.
    """
    total = np.zeros(lo.size)
    idx = np.arange(lo.size)
    cur_lo, cur_hi = lo.copy(), hi.copy()
    spent = 0
    while idx.size:
        spent += idx.size
        if spent > eval_budget:
            raise AccuracyError(
                f"cache build exceeded its refinement budget ({eval_budget} "
                f"panel evaluations); tol={tol:g} looks unreachable in double "
                f"precision")
        k, err = _z_sq_panels(cur_lo, cur_hi)
        ok = err <= tol * np.maximum(np.abs(k), 1e-3)
        np.add.at(total, idx[ok], k[ok])
        bad = ~ok
        if not bad.any():
            break
        blo, bhi, bidx = cur_lo[bad], cur_hi[bad], idx[bad]
        mid = 0.5 * (blo + bhi)
        cur_lo = np.concatenate([blo, mid])
        cur_hi = np.concatenate([mid, bhi])
        idx = np.concatenate([bidx, bidx])
    return total


def build_cache(t_max, step=0.25, tol=1e-8, threads=None, progress=None):
    """Build the cumulative cache up to at least t_max.

    Each grid panel is integrated to relative error <= tol.  `threads` caps
    the worker pool (default: machine parallelism); the panel partition and
    the ordered prefix sum make the result identical for any thread count.
    `progress` receives (panels_done, panels_total).
    """
    if not (math.isfinite(t_max) and t_max > 0):
        raise DomainError(f"build_cache requires t_max > 0, got {t_max!r}")
    if not (math.isfinite(step) and 0 < step <= t_max):
        raise DomainError(f"build_cache requires 0 < step <= t_max, got {step!r}")
    if tol <= 0:
        raise DomainError(f"build_cache requires tol > 0, got {tol!r}")
    npanels = int(math.ceil(t_max / step - 1e-9))
    edges = step * np.arange(npanels + 1)
    budget_per_panel = 64
    if threads is None:
        threads = os.cpu_count() or 1
    threads = max(1, int(threads))

    chunk = 512
    starts = list(range(0, npanels, chunk))
    panel_vals = np.empty(npanels)

    def work(s):
        e = min(s + chunk, npanels)
        return s, e, _panel_integrals(edges[s:e], edges[s + 1:e + 1], tol,
                                      budget_per_panel * (e - s))

    done = 0
    if threads == 1 or len(starts) == 1:
        for s in starts:
            s, e, vals = work(s)
            panel_vals[s:e] = vals
            done = e
            if progress is not None:
                progress(done, npanels)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for s, e, vals in pool.map(work, starts):
                panel_vals[s:e] = vals
                done = e
                if progress is not None:
                    progress(done, npanels)

    values = np.concatenate([[0.0], np.cumsum(panel_vals)])
    cache = CumulativeCache(step=float(step), t_max=float(edges[-1]),
                            values=values)
    cache.checksum = _checksum(cache)
    return cache


def _rows(cache):
    grid = cache.grid()
    return [f"{t:.17g},{v:.17g}" for t, v in zip(grid, cache.values)]


def _checksum(cache):
    payload = "\n".join(_rows(cache)).encode("ascii")
    return zlib.crc32(payload)


def save_cache(cache, path):
    """Write the cache to `path` in the versioned text format."""
    lines = [
        f"{_HEADER_PREFIX}{cache.version} step={cache.step:.17g} "
        f"tmax={cache.t_max:.17g}",
        f"# checksum={_checksum(cache)}",
        *_rows(cache),
    ]
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise StorageError(f"cannot write cache file {path}: {exc}") from exc


def load_cache(path):
    """Load and validate a cache file; any corruption fails loudly."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise StorageError(f"cannot read cache file {path}: {exc}") from exc
    if len(lines) < 3 or not lines[0].startswith(_HEADER_PREFIX):
        raise CacheFormatError(f"{path} is not a cache file (bad header)")
    header = lines[0][len(_HEADER_PREFIX):]
    try:
        vstr, rest = header.split(" ", 1)
        version = int(vstr)
        fields = dict(kv.split("=") for kv in rest.split())
        step = float(fields["step"])
        t_max = float(fields["tmax"])
    except (ValueError, KeyError) as exc:
        raise CacheFormatError(f"{path}: malformed header line") from exc
    if version != FORMAT_VERSION:
        raise CacheFormatError(
            f"{path}: unsupported cache version {version} "
            f"(supported: {FORMAT_VERSION})")
    if not lines[1].startswith("# checksum="):
        raise CacheFormatError(f"{path}: missing checksum line")
    stored_sum = int(lines[1].split("=", 1)[1])
    rows = lines[2:]
    payload = "\n".join(rows).encode("ascii")
    if zlib.crc32(payload) != stored_sum:
        raise CacheFormatError(f"{path}: checksum mismatch, file is corrupt")
    try:
        data = np.array([[float(x) for x in row.split(",")] for row in rows])
    except ValueError as exc:
        raise CacheFormatError(f"{path}: malformed data row") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise CacheFormatError(f"{path}: malformed data rows")
    grid = step * np.arange(data.shape[0])
    if not np.array_equal(grid, data[:, 0]):
        raise CacheFormatError(f"{path}: grid points do not match i*step")
    if abs(grid[-1] - t_max) > 1e-9 * max(1.0, t_max):
        raise CacheFormatError(f"{path}: tmax header disagrees with rows")
    cache = CumulativeCache(step=step, t_max=float(grid[-1]),
                            values=data[:, 1].copy(), version=version,
                            checksum=stored_sum)
    return cache


def _require_in_range(T, cache, what="t"):
    if not math.isfinite(T) or T < 0.0:
        raise DomainError(f"{what} must be finite and >= 0, got {T!r}")
    if T > cache.t_max * (1.0 + 1e-15):
        raise CacheExhaustedError(
            f"{what}={T!r} exceeds the cached range t_max={cache.t_max!r}; "
            f"rebuild the cache with t_max >= {T!r}", required_tmax=T)


def _tail_tol_floor(T, width, tail_tol):
    # Z carries rounding noise ~z_noise_scale(T), so a tail integral over a
    # window of this width cannot be resolved below noise * width; asking the
    # quadrature for less only exhausts its panel budget.
    return max(tail_tol, 3.0 * z_noise_scale(T) * width)


def hl_integral(T, cache, tail_tol=1e-12):
    """Cumulative integral of Z^2 over [0, T] from the cache plus a tail."""
    T = float(T)
    _require_in_range(T, cache, what="T")
    i = min(int(T / cache.step), cache.values.size - 1)
    t_i = i * cache.step
    if T <= t_i:
        return float(cache.values[i])
    tail = integrate(lambda ts: z_array(ts) ** 2, t_i, T,
                     tol=_tail_tol_floor(T, T - t_i, tail_tol),
                     vectorized=True)
    return float(cache.values[i] + tail.value)


def hl_integral_array(T, cache, tail_tol=1e-12):
    """Vectorized hl_integral; the hot path under the ladder solvers.

    All partial-panel tails are first estimated with one batched Kronrod
    pass; only tails whose error estimate misses tail_tol fall back to the
    scalar adaptive route (rare, since tails are under one panel wide).
    """
    shape = np.shape(T)
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if not np.isfinite(T).all() or (T < 0).any():
        raise DomainError("hl_integral_array requires finite T >= 0")
    bad = T > cache.t_max * (1.0 + 1e-15)
    if bad.any():
        worst = float(T[bad].max())
        raise CacheExhaustedError(
            f"T={worst!r} exceeds the cached range t_max={cache.t_max!r}; "
            f"rebuild the cache with t_max >= {worst!r}", required_tmax=worst)
    i = np.minimum((T / cache.step).astype(int), cache.values.size - 1)
    t_i = i * cache.step
    out = cache.values[i].copy()
    has_tail = T > t_i
    if has_tail.any():
        lo = t_i[has_tail]
        hi = T[has_tail]
        k, err = _z_sq_panels(lo, hi)
        tol_eff = np.array([_tail_tol_floor(h, h - a, tail_tol)
                            for a, h in zip(lo, hi)])
        rough = err > tol_eff * np.maximum(np.abs(k), 1.0)
        if rough.any():
            for j in np.flatnonzero(rough):
                k[j] = integrate(lambda ts: z_array(ts) ** 2, lo[j], hi[j],
                                 tol=tol_eff[j], vectorized=True).value
        out[has_tail] += k
    return out.reshape(shape)
