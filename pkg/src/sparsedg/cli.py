"""Experiment driver: interpolation error, operator sparsity, wave
evolution, and Laplacian benchmarks as CLI subcommands.

Every subcommand sweeps a parameter grid and writes one CSV with a fixed
column set, plus a sibling .json summary carrying fitted log-log slopes
and environment info.  Numeric outputs are deterministic given the seed;
wall times are not.  Oversized configurations never abort a sweep: they
produce marked rows and the process still exits 0.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import statistics
import sys
import time
from datetime import datetime, timezone
from itertools import product
from pathlib import Path

import numpy as np
import scipy

from .evolve import EvolveOptions, _sine_wave_vector, travelling_wave_solver
from .grid import V2D, space_dim
from .operators import D_matrix, derivative_1d_hier, grad_matrix, laplacian_matrix
from .project import DEFAULT_SEED, dg_function, mcerr

__all__ = ["main", "COLUMNS", "SCHEMA_VERSION"]

COLUMNS = ["experiment", "D", "k", "n", "scheme", "P", "nnz", "mcerr",
           "steps_accepted", "steps_rejected", "wall_ms", "mem_bytes",
           "status", "reason"]
SCHEMA_VERSION = 1
DEFAULT_BUDGET = 4 << 30


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("sparsedg")
    except Exception:
        return "0.0.0"


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _parse_range(text: str) -> list[int]:
    """'3' -> [3]; '2..5' -> [2, 3, 4, 5]."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _parse_wavevec(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"wave vector must be comma-separated integers, got {text!r}")


def _schemes(arg: str) -> list[str]:
    return ["full", "sparse"] if arg == "both" else [arg]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=3, metavar="D",
                   help="spatial dimension (default 3)")
    p.add_argument("--order", type=_parse_range, default=[3], metavar="K",
                   help="polynomial order k, single value or a..b (default 3)")
    p.add_argument("--levels", type=_parse_range, default=[3], metavar="N",
                   help="max level n, single value or a..b (default 3)")
    p.add_argument("--scheme", choices=["full", "sparse", "both"],
                   default="sparse")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--count", type=int, default=1000,
                   help="Monte Carlo sample count for error estimates")
    p.add_argument("--out", type=Path, required=True, metavar="PATH",
                   help="output CSV path; a sibling .json summary is written")
    p.add_argument("--budget-bytes", type=int, default=DEFAULT_BUDGET,
                   help="memory budget; oversized runs become marked rows")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="integrator error tolerance (abs and rel)")
    p.add_argument("--integrator", choices=["rk45", "rk78", "rk4"],
                   default="rk45")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsedg",
        description="Sparse-grid DG experiment sweeps (CSV + JSON output).")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interp", help="projection error of a plane wave")
    _add_common(p)
    p.add_argument("--wavevec", type=_parse_wavevec, default=[1, 2, -1],
                   metavar="M1,M2,...", help="integer wave numbers per axis")
    p.add_argument("--amplitude", type=float, default=1.3)
    p.add_argument("--phase", type=float, default=0.4)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("nnz", help="derivative operator sparsity sweep")
    _add_common(p)
    p.set_defaults(func=cmd_nnz)

    p = sub.add_parser("evolve", help="travelling wave evolution error")
    _add_common(p)
    p.add_argument("--wavevec", type=_parse_wavevec, default=[1, 2, -1],
                   metavar="M1,M2,...")
    p.add_argument("--amplitude", type=float, default=1.3)
    p.add_argument("--phase", type=float, default=0.4)
    p.add_argument("--t1", type=float, default=0.54, help="final time")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("bench", help="Laplacian mat-vec time and memory")
    _add_common(p)
    p.add_argument("--reps", type=int, default=5,
                   help="repetitions; the median time is reported")
    p.set_defaults(func=cmd_bench)
    return parser


# ---------------------------------------------------------------------------
# Row plumbing
# ---------------------------------------------------------------------------

def _row(experiment, D, k, n, scheme, **kw) -> dict:
    row = {c: "" for c in COLUMNS}
    row.update(experiment=experiment, D=D, k=k, n=n, scheme=scheme,
               status="ok", reason="")
    row.update(kw)
    return row


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in COLUMNS])


def _write_summary(out: Path, experiment: str, args: argparse.Namespace,
                   rows: list[dict], slopes: dict) -> None:
    echo = {key: (str(val) if isinstance(val, Path) else val)
            for key, val in vars(args).items()
            if key not in ("func", "command")}
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "parameters": echo,
        "rows": len(rows),
        "rows_ok": sum(r["status"] == "ok" for r in rows),
        "slopes": slopes,
        "environment": {
            "package_version": _version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
        "generated": datetime.now(timezone.utc).isoformat(),
    }
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")


def _fit_slopes(rows: list[dict], xcol: str, ycol: str) -> dict:
    """Least-squares log-log slope of ycol vs xcol per (k, scheme) series."""
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        x, y = row[xcol], row[ycol]
        if not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
            continue
        if x <= 0 or y <= 0:
            continue
        series.setdefault(f"k={row['k']} {row['scheme']}", []).append((x, y))
    slopes = {}
    for label, pts in series.items():
        if len(pts) < 2:
            slopes[label] = None
            continue
        lx = np.log([p[0] for p in pts])
        ly = np.log([p[1] for p in pts])
        slopes[label] = float(np.polyfit(lx, ly, 1)[0])
    return slopes


def _space_dim_or_skip(experiment, D, k, n, scheme):
    """Returns (P, None) or (None, skip-row) when the dimension overflows."""
    try:
        return space_dim(D, k, n, scheme), None
    except OverflowError as exc:
        return None, _row(experiment, D, k, n, scheme,
                          status="skipped", reason=str(exc))


def _csr_bytes(M) -> int:
    return M.data.nbytes + M.indices.nbytes + M.indptr.nbytes


def _nnz_1d(k: int, n: int) -> int:
    Dh = derivative_1d_hier(k, n)
    cut = 1e-12 * max(1.0, float(np.abs(Dh).max()))
    return int((np.abs(Dh) > cut).sum())


def _plane_wave(mvec, amplitude, phase):
    w = 2 * np.pi * np.asarray(mvec, dtype=float)

    def f(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return float(amplitude * np.cos(X @ w + phase))
        return amplitude * np.cos(X @ w + phase)
    return f


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_interp(args) -> int:
    D = args.dim
    if len(args.wavevec) != D:
        raise SystemExit(f"--wavevec needs {D} components")
    rows = []
    for scheme, k, n in product(_schemes(args.scheme), args.order, args.levels):
        P, skip = _space_dim_or_skip("interp", D, k, n, scheme)
        if skip is not None:
            rows.append(skip)
            continue
        # working set: coefficient vector, block dict, reconstruction buffers
        est = 10 * 8 * P
        if est > args.budget_bytes:
            rows.append(_row("interp", D, k, n, scheme, P=P, mem_bytes=est,
                             status="skipped",
                             reason=f"estimated {est} bytes exceeds budget "
                                    f"{args.budget_bytes}"))
            continue
        t0 = time.perf_counter()
        vec = _sine_wave_vector(D, k, n, args.wavevec, args.amplitude,
                                args.phase, scheme)
        approx = dg_function(V2D(vec, D, k, n, scheme))
        exact = _plane_wave(args.wavevec, args.amplitude, args.phase)
        err = mcerr(approx, exact, D, count=args.count, seed=args.seed)
        wall = (time.perf_counter() - t0) * 1e3
        rows.append(_row("interp", D, k, n, scheme, P=P, mcerr=err,
                         wall_ms=wall, mem_bytes=vec.nbytes))
    _write_csv(args.out, rows)
    _write_summary(args.out, "interp", args, rows,
                   {"mcerr_vs_P": _fit_slopes(rows, "P", "mcerr")})
    return 0


def cmd_nnz(args) -> int:
    D = args.dim
    rows = []
    for scheme, k, n in product(_schemes(args.scheme), args.order, args.levels):
        P, skip = _space_dim_or_skip("nnz", D, k, n, scheme)
        if skip is not None:
            rows.append(skip)
            continue
        est = 24 * max(1, _nnz_1d(k, n)) * (P // (k * 2 ** n) + 1)
        if est > args.budget_bytes:
            rows.append(_row("nnz", D, k, n, scheme, P=P, mem_bytes=est,
                             status="infeasible",
                             reason=f"estimated {est} bytes exceeds budget "
                                    f"{args.budget_bytes}"))
            continue
        t0 = time.perf_counter()
        M = D_matrix(D, 1, k, n, scheme)
        wall = (time.perf_counter() - t0) * 1e3
        rows.append(_row("nnz", D, k, n, scheme, P=P, nnz=int(M.nnz),
                         wall_ms=wall, mem_bytes=_csr_bytes(M)))
    _write_csv(args.out, rows)
    _write_summary(args.out, "nnz", args, rows,
                   {"nnz_vs_P": _fit_slopes(rows, "P", "nnz")})
    return 0


def cmd_evolve(args) -> int:
    D = args.dim
    if len(args.wavevec) != D:
        raise SystemExit(f"--wavevec needs {D} components")
    omega = 2 * np.pi * float(np.linalg.norm(args.wavevec))
    rows = []
    for scheme, k, n in product(_schemes(args.scheme), args.order, args.levels):
        P, skip = _space_dim_or_skip("evolve", D, k, n, scheme)
        if skip is not None:
            rows.append(skip)
            continue
        per_axis = 24 * max(1, _nnz_1d(k, n)) * (P // (k * 2 ** n) + 1)
        est = D * per_axis + 4 * 8 * P
        if est > args.budget_bytes:
            rows.append(_row("evolve", D, k, n, scheme, P=P, mem_bytes=est,
                             status="infeasible",
                             reason=f"estimated {est} bytes exceeds budget "
                                    f"{args.budget_bytes}"))
            continue
        t0 = time.perf_counter()
        try:
            grads = grad_matrix(D, k, n, scheme)
            L = None
            for g in grads:
                term = (g @ g).tocsr()
                L = term if L is None else L + term
            opts = EvolveOptions(integrator=args.integrator, abs_tol=args.tol,
                                 rel_tol=args.tol, operator=L)
            traj = travelling_wave_solver(D, k, n, args.wavevec, 0.0, args.t1,
                                          scheme, phase=args.phase,
                                          A=args.amplitude, opts=opts)
        except Exception as exc:
            rows.append(_row("evolve", D, k, n, scheme, P=P,
                             status="failed", reason=f"{type(exc).__name__}: {exc}"))
            continue
        final = traj.final_state()
        approx = dg_function(V2D(final.phi, D, k, n, scheme))
        exact = _plane_wave(args.wavevec, args.amplitude,
                            args.phase + omega * args.t1)
        err = mcerr(approx, exact, D, count=args.count, seed=args.seed)
        wall = (time.perf_counter() - t0) * 1e3
        mem = sum(_csr_bytes(g) for g in grads) + _csr_bytes(L) + 2 * 8 * P
        rows.append(_row("evolve", D, k, n, scheme, P=P, nnz=int(L.nnz),
                         mcerr=err, steps_accepted=traj.stats.accepted,
                         steps_rejected=traj.stats.rejected, wall_ms=wall,
                         mem_bytes=mem))
    _write_csv(args.out, rows)
    _write_summary(args.out, "evolve", args, rows,
                   {"mcerr_vs_P": _fit_slopes(rows, "P", "mcerr")})
    return 0


def cmd_bench(args) -> int:
    D = args.dim
    if args.reps < 1:
        raise SystemExit("--reps must be >= 1")
    rows = []
    for scheme, k, n in product(_schemes(args.scheme), args.order, args.levels):
        P, skip = _space_dim_or_skip("bench", D, k, n, scheme)
        if skip is not None:
            rows.append(skip)
            continue
        # Laplacian rows couple through two derivative applications, so the
        # nnz estimate squares the per-row 1D count.
        N = k * 2 ** n
        per_row_1d = max(1, _nnz_1d(k, n)) / N
        est_nnz = int(D * P * per_row_1d ** 2)
        est = 12 * est_nnz + D * 24 * int(P * per_row_1d) + 4 * 8 * P
        if est > args.budget_bytes:
            rows.append(_row("bench", D, k, n, scheme, P=P, mem_bytes=est,
                             status="infeasible",
                             reason=f"estimated {est} bytes exceeds budget "
                                    f"{args.budget_bytes}"))
            continue
        grads = grad_matrix(D, k, n, scheme)
        L = None
        for g in grads:
            term = (g @ g).tocsr()
            L = term if L is None else L + term
        L.sum_duplicates()
        rng = np.random.Generator(np.random.PCG64(args.seed))
        x = rng.standard_normal(P)
        timings = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            y = L @ x
            timings.append((time.perf_counter() - t0) * 1e3)
        mem = sum(_csr_bytes(g) for g in grads) + _csr_bytes(L) \
            + x.nbytes + y.nbytes
        rows.append(_row("bench", D, k, n, scheme, P=P, nnz=int(L.nnz),
                         wall_ms=statistics.median(timings), mem_bytes=mem))
    _write_csv(args.out, rows)
    _write_summary(args.out, "bench", args, rows,
                   {"wall_ms_vs_nnz": _fit_slopes(rows, "nnz", "wall_ms")})
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
