"""Command-line front end.

Subcommands: `cache build`, `ladder`, and `verify {substitution, gram,
moment-exact, moment-zeta, corollary46}`.  Data goes to stdout (or --out),
progress to stderr.  Exit codes are a contract: 0 pass, 1 verification
failure, 2 I/O, 3 numeric, 4 cache range, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .cache import build_cache, load_cache, save_cache
from .errors import (AccuracyError, BelowThresholdError, CacheExhaustedError,
                     ConsistencyError, ConvergenceError, DomainError,
                     EvaluationError, StorageError)
from .ladder import DEFAULT_CONFIG, phi1, phi1_inverse
from .ortho import make_system, lift_system
from .verify import (gram_matrix, moment_exact, moment_prescribed,
                     moment_zeta, verify_substitution)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
EXIT_CACHE_RANGE = 4
EXIT_USAGE = 64

_ZETA_BANDS = {1: (0.8, 1.2), 2: (0.7, 1.3)}
_WIDE_BAND = (0.6, 1.4)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 64."""

    def error(self, message):
        raise _UsageError(message)


def _fmt(x):
    return f"{x:.17g}"


def build_parser():
    p = _Parser(prog="zeta-ladder",
                description="Ladder transform of the cumulative Hardy Z^2 "
                            "integral: cache, evaluation, verification.")
    sub = p.add_subparsers(dest="command", required=True)

    cache_p = sub.add_parser("cache", help="cumulative-integral cache management")
    cache_sub = cache_p.add_subparsers(dest="cache_command", required=True)
    b = cache_sub.add_parser("build", help="build and persist the cache")
    b.add_argument("--T", type=float, required=True, dest="t_max",
                   help="upper end of the cached range")
    b.add_argument("--step", type=float, default=0.25, help="grid spacing")
    b.add_argument("--tol", type=float, default=1e-8,
                   help="relative tolerance per grid panel")
    b.add_argument("--cache", default=None, help="output path")
    b.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: machine parallelism)")
    b.add_argument("--force", action="store_true",
                   help="overwrite an existing cache file")

    lad = sub.add_parser("ladder", help="evaluate the ladder and its iterates")
    lad.add_argument("--T", type=float, nargs="+", required=True,
                     help="one or more evaluation points")
    lad.add_argument("--k", type=int, default=0,
                     help="number of reverse iterates per point")
    lad.add_argument("--cache", default=None)
    lad.add_argument("--out", default=None)
    lad.add_argument("--format", choices=("csv", "json"), default="csv")

    ver = sub.add_parser("verify", help="verification campaigns")
    ver_sub = ver.add_subparsers(dest="verify_command", required=True)

    def common(q, with_l=False, with_h=False, with_mass=False):
        q.add_argument("--T", type=float, required=True)
        q.add_argument("--k", type=int, required=True)
        if with_l:
            q.add_argument("--l", type=float, default=0.5,
                           help="half-length of the base interval")
        if with_h:
            q.add_argument("--H", type=float, default=1.0,
                           help="window length")
        if with_mass:
            q.add_argument("--omega", type=float, required=True,
                           help="prescribed moment mass for the window")
        q.add_argument("--tol", type=float, default=None,
                       help="quadrature tolerance override")
        q.add_argument("--cache", default=None)
        q.add_argument("--out", default=None)
        q.add_argument("--format", choices=("csv", "json"), default="json")

    s = ver_sub.add_parser("substitution",
                           help="pull-back identity for canned test functions")
    common(s, with_h=True)

    g = ver_sub.add_parser("gram", help="lifted Gram matrix vs base norms")
    common(g, with_l=True)
    g.add_argument("--system", choices=("fourier", "jacobi", "bessel"),
                   default="fourier")
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=0.0)
    g.add_argument("--order", type=int, default=0)
    g.add_argument("--N", type=int, default=5)

    m = ver_sub.add_parser("moment-exact",
                           help="bare-weight moment against its exact value")
    common(m, with_l=True)

    z = ver_sub.add_parser("moment-zeta",
                           help="unnormalized moment against 2l ln^k T")
    common(z, with_l=True)

    c = ver_sub.add_parser("corollary46",
                           help="moment over a window with prescribed mass")
    common(c, with_mass=True)

    return p


def _cache_path(arg):
    path = arg or os.environ.get("ZETA_LADDER_CACHE")
    if not path:
        raise _UsageError(
            "no cache path: pass --cache or set ZETA_LADDER_CACHE")
    return path


def _progress(stream):
    state = {"last": -1}

    def cb(done, total):
        pct = int(100.0 * done / total)
        if pct >= state["last"] + 5 or done == total:
            state["last"] = pct
            print(f"panels {done}/{total} ({pct}%)", file=stream)

    return cb


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table_text(columns, rows, fmt):
    if fmt == "json":
        payload = [dict(zip(columns, map(float, r))) for r in rows]
        return json.dumps({"columns": columns, "rows": payload}, indent=2) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _report_text(reports, fmt):
    payload = {"reports": [r.to_dict() for r in reports],
               "passed": all(r.passed for r in reports)}
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    keys = sorted({k for r in payload["reports"] for k in r
                   if not isinstance(r[k], (list, dict))})
    lines = [",".join(keys)]
    for r in payload["reports"]:
        lines.append(",".join(
            _fmt(r[k]) if isinstance(r.get(k), float) else str(r.get(k, ""))
            for k in keys))
    return "\n".join(lines) + "\n"


def cmd_cache_build(args):
    path = _cache_path(args.cache)
    if os.path.exists(path) and not args.force:
        print(f"refusing to overwrite {path} (pass --force)", file=sys.stderr)
        return EXIT_IO
    t0 = time.time()
    cache = build_cache(args.t_max, step=args.step, tol=args.tol,
                        threads=args.threads, progress=_progress(sys.stderr))
    save_cache(cache, path)
    wall = time.time() - t0
    print(f"cache {path}: {cache.values.size} grid values, "
          f"step {_fmt(cache.step)}, t_max {_fmt(cache.t_max)}, "
          f"I(t_max) {_fmt(float(cache.values[-1]))}, {wall:.1f}s")
    return EXIT_OK


def cmd_ladder(args):
    cache = load_cache(_cache_path(args.cache))
    cfg = DEFAULT_CONFIG
    k = args.k
    if k < 0:
        raise _UsageError("--k must be >= 0")
    columns = ["T", "phi1", "complement", "complement_ratio"]
    if k == 0:
        columns = columns[:3]
    else:
        columns += [f"T_{r}" for r in range(1, k + 1)]
        columns += [f"gap_{r}" for r in range(1, k + 1)]
        columns += [f"gap_ratio_{r}" for r in range(1, k + 1)]
    rows = []
    for T in args.T:
        point = phi1(T, cache, cfg)
        comp = T - point.value
        row = [T, point.value, comp]
        if k > 0:
            row.append(comp * math.log(T) / ((1.0 - cfg.c) * T))
            unit = (1.0 - cfg.c) * T / math.log(T)
            iters = [T]
            for _ in range(k):
                iters.append(phi1_inverse(iters[-1], cache, cfg)[0])
            gaps = [b - a for a, b in zip(iters[:-1], iters[1:])]
            row += iters[1:] + gaps + [g / unit for g in gaps]
        rows.append(row)
        print(f"ladder T={_fmt(T)} done", file=sys.stderr)
    _emit(_table_text(columns, rows, args.format), args.out)
    return EXIT_OK


def _quad_tol(args, default):
    return args.tol if args.tol is not None else default


def cmd_verify(args):
    cache = load_cache(_cache_path(args.cache))
    cfg = DEFAULT_CONFIG
    kind = args.verify_command
    if kind == "substitution":
        if args.k < 1:
            raise _UsageError("--k must be >= 1 for substitution")
        T, H = args.T, args.H
        fns = [
            (lambda t: np.ones_like(t), "1"),
            (lambda t: t - T, "t-T"),
            (lambda t: np.cos(2.0 * math.pi * (t - T) / H), "cos"),
        ]
        reports = [
            verify_substitution(f, T, H, args.k, cache, cfg,
                                quad_tol=_quad_tol(args, 1e-8), f_label=lab)
            for f, lab in fns
        ]
    elif kind == "gram":
        if args.k < 1:
            raise _UsageError("--k must be >= 1 for gram")
        if args.N < 1:
            raise _UsageError("--N must be >= 1")
        sys_l = None if args.system == "jacobi" else args.l
        base = make_system(args.system, l=sys_l, alpha=args.alpha,
                           beta=args.beta, order=args.order)
        ls = lift_system(base, args.T, args.k, cache, cfg)
        diag_rtol = 1e-6 if args.system == "fourier" else 1e-5
        reports = [gram_matrix(ls, args.N, cache, cfg,
                               quad_tol=_quad_tol(args, 1e-8),
                               diag_rtol=diag_rtol)]
    elif kind == "moment-exact":
        if args.k < 1:
            raise _UsageError("--k must be >= 1 for moment-exact")
        reports = [moment_exact(args.T, args.k, args.l, cache, cfg,
                                quad_tol=_quad_tol(args, 1e-8))]
    elif kind == "moment-zeta":
        if args.k < 0:
            raise _UsageError("--k must be >= 0 for moment-zeta")
        band = None if args.k == 0 else _ZETA_BANDS.get(args.k, _WIDE_BAND)
        reports = [moment_zeta(args.T, args.k, args.l, cache, cfg,
                               quad_tol=_quad_tol(args, 1e-7), band=band)]
    else:  # corollary46
        if args.k < 1:
            raise _UsageError("--k must be >= 1 for corollary46")
        band = _ZETA_BANDS.get(args.k, _WIDE_BAND)
        reports = [moment_prescribed(args.T, args.k, args.omega, cache, cfg,
                                     quad_tol=_quad_tol(args, 1e-7),
                                     band=band)]
    _emit(_report_text(reports, args.format), args.out)
    ok = all(r.passed for r in reports)
    print(f"verify {kind}: {'pass' if ok else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "cache":
            return cmd_cache_build(args)
        if args.command == "ladder":
            return cmd_ladder(args)
        return cmd_verify(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CacheExhaustedError as e:
        print(f"cache range error: {e}", file=sys.stderr)
        return EXIT_CACHE_RANGE
    except (StorageError, OSError) as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, AccuracyError, EvaluationError,
            BelowThresholdError, ConsistencyError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
