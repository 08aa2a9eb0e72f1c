"""Projection onto DG spaces, pointwise reconstruction, and error estimation.

Projection coefficients are Gauss-Legendre quadrature approximations of
<f, v> over each basis function's support, with `QUAD_MARGIN` extra points
beyond the polynomial order so that smooth integrands are resolved well
past the basis accuracy.  Reconstruction exploits that at any point only
one element per level contributes along each axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct

import numpy as np

from .basis1d import (
    PiecewisePoly,
    _legendre_all,
    _mother_wavelet_coeffs,
    _norm_factors,
    gauss_rule,
    hier_indices,
    hierarchical_function,
    segment_interval,
)
from .grid import CoeffDict, D2V, V2D, block_shape, cells, index_set

__all__ = [
    "QuadratureRule",
    "BudgetExceededError",
    "project_1d",
    "coeffs_DG",
    "reconstruct_DG",
    "dg_function",
    "tensor_construct",
    "mcerr",
]

# Gauss-Legendre points per finest segment and axis: exact for the
# polynomial factor of the integrand plus margin for smooth fields.
QUAD_MARGIN = 4

DEFAULT_EVAL_BUDGET = 100_000_000

DEFAULT_SEED = 0x5EED


class BudgetExceededError(RuntimeError):
    """A projection would exceed the configured evaluation budget."""


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights mapped onto an interval [a, b]."""

    points: np.ndarray
    weights: np.ndarray
    order: int

    @classmethod
    def on_interval(cls, q: int, a: float, b: float) -> "QuadratureRule":
        t, w = gauss_rule(q)
        return cls(points=a + (t + 1) * (b - a) / 2,
                   weights=w * (b - a) / 2, order=q)


def _eval_field(f, X: np.ndarray) -> np.ndarray:
    """Evaluate a scalar field on points X (npts, D); accepts callables that
    are batch-aware (take the full (npts, D) array) or pointwise."""
    try:
        vals = np.asarray(f(X), dtype=float)
        if vals.shape == (X.shape[0],):
            # guard against pointwise callables that happen to broadcast
            try:
                check = np.asarray(f(X[0]), dtype=float).item()
                ok = np.isclose(check, vals[0], rtol=1e-12, atol=1e-300) \
                    or not np.isfinite(check)
            except Exception:
                ok = True
            if ok:
                return vals
    except Exception:
        pass
    vals = np.array([np.asarray(f(x), dtype=float).item() for x in X])
    bad = ~np.isfinite(vals)
    if bad.any():
        raise ValueError(f"field returned non-finite value at {X[bad][0]}")
    return vals


def _check_finite(vals: np.ndarray, X: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(vals)
    if bad.any():
        raise ValueError(f"field returned non-finite value at {X[bad][0]}")
    return vals


@lru_cache(maxsize=64)
def _segment_quadrature(k: int, n: int):
    """Per 1D hierarchical basis function, the quadrature for <f, v>.

    Returns a list aligned with the hierarchical layout; each entry is a
    list of (points, weighted_values) pairs, one per level-n segment of the
    function's support.  Quadrature on the finest segmentation keeps the
    rule accurate for fields with structure down to the mesh scale (and
    exact for members of the scheme space).
    """
    q = k + QUAD_MARGIN
    t, w = gauss_rule(q)
    nf = _norm_factors(k)
    ref_vals = _legendre_all(k, t) * nf[:, None]  # (k, q) on [-1, 1]
    out = []
    for (level, i, m) in hier_indices(k, n):
        poly = hierarchical_function(k, n, level, i, m).refine(n)
        segs = []
        for (lv, cell), c in sorted(poly.segments.items()):
            a, b = segment_interval(lv, cell)
            x = a + (t + 1) * (b - a) / 2
            vals = (c @ ref_vals) * np.sqrt(2 / (b - a))
            segs.append((x, vals * w * (b - a) / 2))
        out.append(segs)
    return out


def project_1d(f, k: int, n: int) -> np.ndarray:
    """Coefficients <f, v_(l,i,m)> of a 1D field in the hierarchical layout."""
    quad = _segment_quadrature(k, n)
    coeffs = np.empty(k * 2 ** n)
    for pos, segs in enumerate(quad):
        acc = 0.0
        for x, wv in segs:
            fv = _check_finite(_eval_field(f, x[:, None]), x[:, None])
            acc += float(wv @ fv)
        coeffs[pos] = acc
    return coeffs


def _estimate_evals(D: int, k: int, n: int, scheme: str) -> int:
    q = k + QUAD_MARGIN
    total = 0
    for level in index_set(D, n, scheme):
        pts = 1
        for l in level:
            # level-n segments covering the support of a level-l function
            nseg = 2 ** n if l == 0 else 2 ** (n - l + 1)
            pts *= q * nseg
        total += pts * np.prod([cells(l) for l in level], dtype=np.int64)
    return int(total)


def coeffs_DG(D: int, k: int, n: int, f, scheme: str = "sparse",
              eval_budget: int = DEFAULT_EVAL_BUDGET) -> CoeffDict:
    """Project a D-dimensional field onto the scheme space by tensor
    Gauss-Legendre quadrature over each basis function's support."""
    est = _estimate_evals(D, k, n, scheme)
    if est > eval_budget:
        raise BudgetExceededError(
            f"projection needs ~{est} field evaluations "
            f"(budget {eval_budget}); use tensor_construct or a sparse scheme")
    if D == 1:
        return V2D(project_1d(f, k, n), 1, k, n, scheme)

    quad = _segment_quadrature(k, n)
    axis_layout = hier_indices(k, n)
    pos_of = {lim: p for p, lim in enumerate(axis_layout)}

    out = CoeffDict(D, k, n, scheme)
    for level in index_set(D, n, scheme):
        shape = block_shape(level, k)
        block = np.zeros(shape)
        elem_ranges = [range(1, cells(l) + 1) for l in level]
        for elems in iproduct(*elem_ranges):
            # per-axis quadrature for all k modes on this element's support
            axis_segs = []
            for d in range(D):
                segs = [quad[pos_of[(level[d], elems[d], m)]] for m in range(k)]
                # same segment points for all modes; stack values as (k, q)
                merged = []
                for s_idx in range(len(segs[0])):
                    x = segs[0][s_idx][0]
                    wv = np.stack([segs[m][s_idx][1] for m in range(k)])
                    merged.append((x, wv))
                axis_segs.append(merged)
            modes = np.zeros((k,) * D)
            for combo in iproduct(*axis_segs):
                grids = np.meshgrid(*[c[0] for c in combo], indexing="ij")
                X = np.stack([g.reshape(-1) for g in grids], axis=1)
                F = _check_finite(_eval_field(f, X), X)
                T = F.reshape([c[0].size for c in combo])
                for c in combo:
                    # contract the leading point axis; its mode axis lands last
                    T = np.tensordot(T, c[1], axes=([0], [1]))
                modes += T
            block[tuple(e - 1 for e in elems)] = modes
        out[level] = block
    return out


# ---------------------------------------------------------------------------
# Reconstruction
# ---------------------------------------------------------------------------

def _axis_values(k: int, n: int, x: np.ndarray):
    """1D hierarchical basis values at points x for every level.

    Returns (elems, modes): elems (npts, n+1) 0-based element index per
    level, modes (npts, n+1, k) values of the k modes of that element.
    Right-limit convention at dyadic points; left limit at x = 1.
    """
    x = np.asarray(x, dtype=float)
    npts = x.size
    elems = np.zeros((npts, n + 1), dtype=np.int64)
    modes = np.empty((npts, n + 1, k))
    nf = _norm_factors(k)
    # level 0: global Legendre on [0,1]
    t = 2 * x - 1
    modes[:, 0, :] = (_legendre_all(k, t) * nf[:, None]).T * np.sqrt(2.0)
    if n == 0:
        return elems, modes
    W = _mother_wavelet_coeffs(k)  # (k, 2, k)
    for level in range(1, n + 1):
        scale = 2 ** (level - 1)
        pos = x * scale
        e = np.minimum(pos.astype(np.int64), scale - 1)
        y = pos - e
        at_end = (x == 1.0)
        y[at_end] = 1.0
        half = (y >= 0.5).astype(np.int64)
        t = np.where(half == 0, 4 * y - 1, 4 * y - 3)
        ref = _legendre_all(k, t) * nf[:, None] * np.sqrt(4.0)  # seg length 1/4 -> 1/2 of [0,1]
        # mother wavelet segment basis: orthonormal Legendre on halves of [0,1]
        vals = np.einsum("mhc,cp,hp->pm", W, ref,
                         np.stack([half == 0, half == 1]).astype(float))
        modes[:, level, :] = vals * np.sqrt(scale)
        elems[:, level] = e
    return elems, modes


def _reconstruct_many(coeffs: CoeffDict, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    npts, D = X.shape
    if D != coeffs.D:
        raise ValueError(f"points have dimension {D}, coefficients {coeffs.D}")
    if np.any(X < 0.0) or np.any(X > 1.0):
        raise ValueError("point outside the unit cube")
    k, n = coeffs.k, coeffs.n
    per_axis = [_axis_values(k, n, X[:, d]) for d in range(D)]
    out = np.zeros(npts)
    for level, block in coeffs.blocks.items():
        idx = tuple(per_axis[d][0][:, level[d]] for d in range(D))
        sub = block[idx]  # (npts, k, ..., k)
        for d in range(D):
            sub = np.einsum("pk...,pk->p...", sub, per_axis[d][1][:, level[d], :])
        out += sub
    return out


def reconstruct_DG(coeffs: CoeffDict, x) -> float:
    """Evaluate the represented function at one point of [0,1]^D."""
    return float(_reconstruct_many(coeffs, np.asarray(x, dtype=float))[0])


class dg_function:
    """Callable view of a coefficient dictionary, batch-aware for mcerr."""

    def __init__(self, coeffs: CoeffDict):
        self.coeffs = coeffs

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            return _reconstruct_many(self.coeffs, x)
        return float(_reconstruct_many(self.coeffs, x)[0])


# ---------------------------------------------------------------------------
# Tensor products of 1D coefficient vectors
# ---------------------------------------------------------------------------

def tensor_construct(D: int, k: int, n: int, factors, scheme: str = "sparse") -> np.ndarray:
    """Coefficients of prod_d f_d(x_d) from the 1D coefficients of each f_d.

    Exact orthogonal projection of the product function onto the scheme
    space; returns the canonical flat vector.
    """
    size1d = k * 2 ** n
    factors = [np.asarray(f, dtype=float) for f in factors]
    if len(factors) != D:
        raise ValueError(f"expected {D} factors, got {len(factors)}")
    for f in factors:
        if f.shape != (size1d,):
            raise ValueError(f"factor has shape {f.shape}, expected ({size1d},)")
    # per-axis views: (level, element, mode) -> (cells, k) slices per level
    sliced = []
    for f in factors:
        per_level = []
        for level in range(n + 1):
            offset = 0 if level == 0 else k * 2 ** (level - 1)
            nc = cells(level)
            per_level.append(f[offset:offset + nc * k].reshape(nc, k))
        sliced.append(per_level)

    out = CoeffDict(D, k, n, scheme)
    letters = "abcdefgh"
    mletters = "stuvwxyz"
    for level in index_set(D, n, scheme):
        ins = ",".join(f"{letters[d]}{mletters[d]}" for d in range(D))
        subs = f"{ins}->{letters[:D]}{mletters[:D]}"
        out[level] = np.einsum(subs, *[sliced[d][level[d]] for d in range(D)])
    return D2V(out)


# ---------------------------------------------------------------------------
# Monte Carlo error estimate
# ---------------------------------------------------------------------------

def mcerr(f, g, D: int, count: int = 1000, seed: int = DEFAULT_SEED) -> float:
    """Root-mean-square difference of two fields over `count` uniform
    pseudo-random points in [0,1]^D (PCG64 stream, deterministic in seed)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.random((count, D))
    fv = _check_finite(_eval_field(f, X), X)
    gv = _check_finite(_eval_field(g, X), X)
    return float(np.sqrt(np.mean((fv - gv) ** 2)))
