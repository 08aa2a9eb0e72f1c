"""One-dimensional DG bases on [0,1].

Provides the orthonormal piecewise-Legendre nodal basis on dyadic elements,
the hierarchical multiwavelet basis (level 0 = global Legendre polynomials,
levels >= 1 = rescaled mother wavelets), and the orthogonal change-of-basis
matrix Q between the two.

All functions are represented as `PiecewisePoly`: per-dyadic-interval
coefficient rows in the L2-orthonormal Legendre basis of each interval.
Because every basis here is orthonormal, inner products reduce to dot
products of coefficient rows once two functions share a segmentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PiecewisePoly",
    "Basis1D",
    "legendre_eval",
    "nodal_function",
    "multiwavelets",
    "hierarchical_function",
    "build_basis",
]


# ---------------------------------------------------------------------------
# Legendre polynomials on the reference interval [-1, 1]
# ---------------------------------------------------------------------------

def _legendre_all(k: int, t):
    """Values of P_0..P_{k-1} at t (classical, unnormalized).

    Returns an array of shape (k,) + shape(t).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty((k,) + t.shape)
    out[0] = 1.0
    if k > 1:
        out[1] = t
    for m in range(2, k):
        out[m] = ((2 * m - 1) * t * out[m - 1] - (m - 1) * out[m - 2]) / m
    return out


def _legendre_all_deriv(k: int, t):
    """Values of P'_0..P'_{k-1} at t, via P'_m = P'_{m-2} + (2m-1) P_{m-1}."""
    t = np.asarray(t, dtype=float)
    p = _legendre_all(k, t)
    out = np.zeros((k,) + t.shape)
    if k > 1:
        out[1] = 1.0
    for m in range(2, k):
        out[m] = out[m - 2] + (2 * m - 1) * p[m - 1]
    return out


def _norm_factors(k: int) -> np.ndarray:
    """sqrt((2m+1)/2) for m < k: unit L2 norm on [-1,1]."""
    return np.sqrt(np.arange(k) + 0.5)


def legendre_eval(m: int, t: float) -> float:
    """Normalized Legendre polynomial sqrt((2m+1)/2) * P_m(t) on [-1,1]."""
    if m < 0:
        raise ValueError("mode index must be non-negative")
    t_arr = np.asarray(t, dtype=float).reshape(-1)
    if t_arr.size != 1:
        raise ValueError("t must be a single point")
    vals = _legendre_all(m + 1, t_arr)
    return float(vals[m, 0] * np.sqrt(m + 0.5))


@lru_cache(maxsize=64)
def gauss_rule(q: int) -> tuple[np.ndarray, np.ndarray]:
    """q-point Gauss-Legendre nodes/weights on [-1,1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# ---------------------------------------------------------------------------
# Piecewise polynomials over dyadic segmentations of [0,1]
# ---------------------------------------------------------------------------

def segment_interval(level: int, cell: int) -> tuple[float, float]:
    """The dyadic interval [cell * 2^-level, (cell+1) * 2^-level]."""
    h = 0.5 ** level
    return cell * h, (cell + 1) * h


@lru_cache(maxsize=32)
def _two_scale(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Refinement matrices (T_left, T_right) for order k.

    T_half[m_child, m_parent] is the coefficient of the child-interval
    orthonormal Legendre basis obtained when restricting the parent basis
    function to that half.  Scale invariant, so computed once on [0,1].
    """
    q = k + 1
    t, w = gauss_rule(q)
    nf = _norm_factors(k)
    mats = []
    for (a, b) in ((0.0, 0.5), (0.5, 1.0)):
        # child quadrature points mapped into parent coords on [0,1]
        xc = a + (t + 1) * (b - a) / 2
        wc = w * (b - a) / 2
        tp = 2 * xc - 1                      # parent reference coords
        parent = _legendre_all(k, tp) * nf[:, None] * np.sqrt(2 / 1.0)
        child = _legendre_all(k, t) * nf[:, None] * np.sqrt(2 / (b - a))
        mats.append(np.einsum("cq,pq,q->cp", child, parent, wc))
    tl, tr = mats
    tl.setflags(write=False)
    tr.setflags(write=False)
    return tl, tr


class PiecewisePoly:
    """A function on [0,1]: orthonormal Legendre coefficient rows on
    disjoint dyadic segments; identically zero outside all segments."""

    __slots__ = ("k", "segments")

    def __init__(self, k: int, segments: dict[tuple[int, int], np.ndarray]):
        self.k = k
        self.segments = {key: np.asarray(c, dtype=float)
                         for key, c in segments.items()}
        for key, c in self.segments.items():
            if c.shape != (k,):
                raise ValueError(f"segment {key}: expected {k} coefficients")
            if not np.all(np.isfinite(c)):
                raise ValueError(f"segment {key}: non-finite coefficients")

    def _segment_values(self, key, t):
        """Evaluate this poly's segment at reference coords t in [-1,1]."""
        level, cell = key
        c = self.segments[key]
        h = 0.5 ** level
        basis = _legendre_all(self.k, t) * _norm_factors(self.k)[:, None] \
            * np.sqrt(2 / h)
        return c @ basis

    def __call__(self, x: float, side: int = +1) -> float:
        """Pointwise value; `side=+1` takes the right limit at dyadic
        discontinuities (left limit at x=1), `side=-1` the left limit."""
        if x == 1.0 or (side < 0 and x > 0.0):
            locate = lambda lv: min(int(np.ceil(x * 2 ** lv)) - 1, 2 ** lv - 1)
        else:
            locate = lambda lv: int(np.floor(x * 2 ** lv))
        for (level, cell), _ in self.segments.items():
            if locate(level) == cell:
                a, b = segment_interval(level, cell)
                t = np.array([2 * (x - a) / (b - a) - 1.0])
                return float(self._segment_values((level, cell), t)[0])
        return 0.0

    def derivative(self, x: float, side: int = +1) -> float:
        """One-sided derivative value, same side convention as __call__."""
        if x == 1.0 or (side < 0 and x > 0.0):
            locate = lambda lv: min(int(np.ceil(x * 2 ** lv)) - 1, 2 ** lv - 1)
        else:
            locate = lambda lv: int(np.floor(x * 2 ** lv))
        for (level, cell), c in self.segments.items():
            if locate(level) == cell:
                a, b = segment_interval(level, cell)
                t = np.array([2 * (x - a) / (b - a) - 1.0])
                h = b - a
                basis = _legendre_all_deriv(self.k, t) \
                    * _norm_factors(self.k)[:, None] * np.sqrt(2 / h) * (2 / h)
                return float(c @ basis)
        return 0.0

    def refine(self, level: int) -> "PiecewisePoly":
        """Re-express on the uniform dyadic segmentation at `level` (exact)."""
        tl, tr = _two_scale(self.k)
        segs = dict(self.segments)
        while any(lv < level for (lv, _) in segs):
            nxt: dict[tuple[int, int], np.ndarray] = {}
            for (lv, cell), c in segs.items():
                if lv >= level:
                    nxt[(lv, cell)] = c
                else:
                    nxt[(lv + 1, 2 * cell)] = tl @ c
                    nxt[(lv + 1, 2 * cell + 1)] = tr @ c
            segs = nxt
        return PiecewisePoly(self.k, segs)

    def inner(self, other: "PiecewisePoly") -> float:
        """Exact L2 inner product on [0,1]."""
        if self.k != other.k:
            raise ValueError("mixed polynomial orders")
        lmax = max([lv for lv, _ in self.segments]
                   + [lv for lv, _ in other.segments])
        a = self.refine(lmax)
        b = other.refine(lmax)
        total = 0.0
        for key, ca in a.segments.items():
            cb = b.segments.get(key)
            if cb is not None:
                total += float(ca @ cb)
        return total

    def max_level(self) -> int:
        return max(lv for lv, _ in self.segments)


# ---------------------------------------------------------------------------
# Nodal basis
# ---------------------------------------------------------------------------

def nodal_function(k: int, n: int, i: int, m: int) -> PiecewisePoly:
    """Orthonormal Legendre mode m on element [(i-1) 2^-n, i 2^-n].

    A single-segment PiecewisePoly with unit L2 norm on [0,1]; the
    coefficient row is the m-th unit vector by construction.
    """
    if not (1 <= i <= 2 ** n):
        raise ValueError(f"element {i} out of range for level {n}")
    if not (0 <= m < k):
        raise ValueError(f"mode {m} out of range for order {k}")
    c = np.zeros(k)
    c[m] = 1.0
    return PiecewisePoly(k, {(n, i - 1): c})


# ---------------------------------------------------------------------------
# Multiwavelets
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _mother_wavelet_coeffs(k: int) -> np.ndarray:
    """Level-1 nodal coordinates of the k mother wavelets, shape (k, 2, k).

    Construction: start from the 2k monomials x^j restricted to either half
    of [0,1], remove their components along the k global Legendre
    polynomials, then run modified Gram-Schmidt (twice) over the k
    independent survivors.  Sign is fixed so that the limit value at
    x -> 1^- is positive, ties broken by the first nonzero one-sided
    derivative there.
    """
    if k < 1:
        raise ValueError("order must be >= 1")
    nf = _norm_factors(k)
    q = k + 1
    t, w = gauss_rule(q)

    # coordinates in R^{2k}: orthonormal Legendre coefficients on each half
    def half_coords(j: int, half: int) -> np.ndarray:
        a, b = (0.0, 0.5) if half == 0 else (0.5, 1.0)
        xq = a + (t + 1) * (b - a) / 2
        wq = w * (b - a) / 2
        basis = _legendre_all(k, t) * nf[:, None] * np.sqrt(2 / (b - a))
        coords = np.zeros(2 * k)
        coords[half * k:(half + 1) * k] = basis @ (wq * xq ** j)
        return coords

    tl, tr = _two_scale(k)
    # global Legendre polynomials, refined onto the two halves
    globals_ = np.zeros((k, 2 * k))
    for m in range(k):
        e = np.zeros(k)
        e[m] = 1.0
        globals_[m, :k] = tl @ e
        globals_[m, k:] = tr @ e

    candidates = [half_coords(j, half) for half in (0, 1) for j in range(k)]

    def mgs(vectors, keep):
        out = []
        for v in vectors:
            v = v.copy()
            for g in globals_:
                v -= (v @ g) * g
            for u in out:
                v -= (v @ u) * u
            nrm = np.linalg.norm(v)
            if nrm > 1e-10:
                out.append(v / nrm)
            if len(out) == keep:
                break
        return out

    survivors = mgs(candidates, k)
    if len(survivors) != k:
        raise RuntimeError("multiwavelet construction lost rank")
    survivors = mgs(survivors, k)  # second pass for stability

    coeffs = np.array([v.reshape(2, k) for v in survivors])
    for w_idx in range(k):
        poly = PiecewisePoly(k, {(1, 0): coeffs[w_idx, 0],
                                 (1, 1): coeffs[w_idx, 1]})
        val = poly(1.0)
        order = 1
        while abs(val) < 1e-9 and order < k:
            val = _endpoint_derivative(poly, order)
            order += 1
        if val < 0:
            coeffs[w_idx] = -coeffs[w_idx]
    coeffs.setflags(write=False)
    return coeffs


def _endpoint_derivative(poly: PiecewisePoly, order: int) -> float:
    """order-th one-sided derivative at x -> 1^- via polynomial refit."""
    key = max(poly.segments, key=lambda s: segment_interval(*s)[1])
    a, b = segment_interval(*key)
    k = poly.k
    t, _ = gauss_rule(k)
    xs = a + (t + 1) * (b - a) / 2
    vals = poly._segment_values(key, t)
    fit = np.polynomial.polynomial.Polynomial.fit(xs, vals, k - 1)
    return float(fit.deriv(order)(b))


def multiwavelets(k: int) -> list[PiecewisePoly]:
    """The k mother wavelets on [0,1].

    Each is piecewise polynomial of degree < k on [0,1/2] and [1/2,1],
    orthonormal, and orthogonal to every polynomial of degree < k.
    """
    coeffs = _mother_wavelet_coeffs(k)
    return [PiecewisePoly(k, {(1, 0): coeffs[m, 0], (1, 1): coeffs[m, 1]})
            for m in range(k)]


def hierarchical_function(k: int, n: int, level: int, i: int, m: int) -> PiecewisePoly:
    """Hierarchical basis function v_(level, i, m) for order k.

    Level 0 is the global Legendre mode m; level >= 1 is the m-th mother
    wavelet rescaled by 2^((level-1)/2) onto element i of 2^(level-1).
    Unit L2 norm in all cases.
    """
    if not (0 <= level <= n):
        raise ValueError(f"level {level} out of range 0..{n}")
    if not (0 <= m < k):
        raise ValueError(f"mode {m} out of range for order {k}")
    if level == 0:
        if i != 1:
            raise ValueError("level 0 has a single element")
        return nodal_function(k, 0, 1, m)
    ncells = 2 ** (level - 1)
    if not (1 <= i <= ncells):
        raise ValueError(f"element {i} out of range 1..{ncells}")
    coeffs = _mother_wavelet_coeffs(k)
    # Unitary dilation: orthonormal-Legendre coefficient rows carry over
    # unchanged, only the segment labels move to the finer level.
    return PiecewisePoly(k, {
        (level, 2 * (i - 1)): coeffs[m, 0],
        (level, 2 * (i - 1) + 1): coeffs[m, 1],
    })


# ---------------------------------------------------------------------------
# Assembled basis and the orthogonal transform Q
# ---------------------------------------------------------------------------

def hier_indices(k: int, n: int) -> list[tuple[int, int, int]]:
    """Canonical (level, element, mode) ordering of the hierarchical basis."""
    out = []
    for level in range(n + 1):
        ncells = 1 if level == 0 else 2 ** (level - 1)
        for i in range(1, ncells + 1):
            for m in range(k):
                out.append((level, i, m))
    return out


@dataclass(frozen=True)
class Basis1D:
    """The nodal and hierarchical bases for V_{n,k} and the orthogonal
    matrix Q with Q[row(l,i,m), col(i',m')] = <v_{l,i,m}, h_{n,i',m'}>."""

    k: int
    n: int
    nodal: list[PiecewisePoly]
    hier: list[PiecewisePoly]
    Q: np.ndarray

    @property
    def size(self) -> int:
        return self.k * 2 ** self.n


def build_basis(k: int, n: int) -> Basis1D:
    """Construct Basis1D for order k, max level n.

    Q rows are exact level-n nodal coordinates of the hierarchical
    functions (two-scale refinement, no quadrature error beyond rounding).
    """
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    size = k * 2 ** n
    if size > 1 << 20:
        raise MemoryError(f"basis of size {size} exceeds supported range")
    nodal = [nodal_function(k, n, i, m)
             for i in range(1, 2 ** n + 1) for m in range(k)]
    hier = [hierarchical_function(k, n, level, i, m)
            for (level, i, m) in hier_indices(k, n)]
    Q = np.zeros((size, size))
    for row, v in enumerate(hier):
        fine = v.refine(n)
        for (lv, cell), c in fine.segments.items():
            Q[row, cell * k:(cell + 1) * k] = c
    return Basis1D(k=k, n=n, nodal=nodal, hier=hier, Q=Q)
