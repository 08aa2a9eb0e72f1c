"""Central-flux weak derivative operators on full and sparse spaces.

The 1D operator on the nodal basis combines a per-element volume term with
interface terms that average the one-sided limits (central flux); with
periodic wrapping the result is skew-symmetric.  Conjugation by Q gives the
hierarchical form, which extends to D dimensions axis-by-axis.  The D-dim
operator is assembled directly in the scheme space: entries whose row or
column falls outside the space are discarded, never materialized.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .basis1d import _legendre_all, _legendre_all_deriv, _norm_factors, build_basis, gauss_rule
from .grid import Layout, cells, index_set

__all__ = [
    "derivative_1d_nodal",
    "derivative_1d_hier",
    "D_matrix",
    "grad_matrix",
    "laplacian_matrix",
    "operator_nnz",
    "save_matrix_market",
]

DROP_TOL = 1e-12


def _reference_blocks(k: int):
    """Volume matrix K[m',m] = int n_{m'} n'_m dt on [-1,1] and the
    endpoint values of the orthonormal reference modes."""
    q = k + 1
    t, w = gauss_rule(q)
    nf = _norm_factors(k)
    vals = _legendre_all(k, t) * nf[:, None]
    ders = _legendre_all_deriv(k, t) * nf[:, None]
    K = np.einsum("mq,nq,q->mn", vals, ders, w)
    left = _legendre_all(k, np.array([-1.0]))[:, 0] * nf
    right = _legendre_all(k, np.array([1.0]))[:, 0] * nf
    return K, left, right


def derivative_1d_nodal(k: int, n: int, periodic: bool = True) -> np.ndarray:
    """Weak derivative with central flux on the level-n nodal basis.

    Entry (i,m; i',m') = flux term - int_{I_i} h_{i',m'} (h_{i,m})' dx.
    With `periodic`, interfaces wrap 0 <-> 1; otherwise the domain boundary
    contributes only the one-sided half-value (untested against the
    periodic experiments).
    """
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    nel = 2 ** n
    size = k * nel
    K, left, right = _reference_blocks(k)
    # nodal functions carry 2^((n+1)/2) each; products of two give 2^(n+1)
    scale = 2.0 ** (n + 1)
    D = np.zeros((size, size))

    def blk(i, j):
        return np.s_[i * k:(i + 1) * k, j * k:(j + 1) * k]

    for i in range(nel):
        # volume term: -int_{I_i} h_{i,m'} (h_{i,m})' dx  (rows m, cols m')
        D[blk(i, i)] -= scale * K.T
        # right interface at x* = (i+1) h:
        #   + h_{i,m}(x*-) * (h_col(x*-) + h_col(x*+)) / 2
        D[blk(i, i)] += scale * 0.5 * np.outer(right, right)
        if i + 1 < nel or periodic:
            D[blk(i, (i + 1) % nel)] += scale * 0.5 * np.outer(right, left)
        # left interface at x* = i h:
        #   - h_{i,m}(x*+) * (h_col(x*-) + h_col(x*+)) / 2
        D[blk(i, i)] -= scale * 0.5 * np.outer(left, left)
        if i - 1 >= 0 or periodic:
            D[blk(i, (i - 1) % nel)] -= scale * 0.5 * np.outer(left, right)
    return D


@lru_cache(maxsize=64)
def _hier_matrix(k: int, n: int, periodic: bool = True) -> np.ndarray:
    basis = build_basis(k, n)
    D = derivative_1d_nodal(k, n, periodic)
    out = basis.Q @ D @ basis.Q.T
    out.setflags(write=False)
    return out


def derivative_1d_hier(k: int, n: int, periodic: bool = True) -> np.ndarray:
    """The 1D derivative conjugated into the hierarchical basis, Q D Q^T."""
    return np.array(_hier_matrix(k, n, periodic))


def _axis_tables(layout: Layout, a: int):
    """Group scheme-space positions by their off-axis 1D indices.

    Returns, for each 1D index v along axis a, the positions whose axis-a
    component is v, sorted by an integer key encoding all other axes.
    """
    H = layout.axis_indices()
    N = layout.k * 2 ** layout.n
    D = layout.D
    key = np.zeros(layout.P, dtype=np.int64)
    for d in range(D):
        if d != a:
            key = key * N + H[:, d]
    axis = H[:, a]
    order = np.lexsort((key, axis))
    axis_sorted = axis[order]
    key_sorted = key[order]
    pos_sorted = np.arange(layout.P, dtype=np.int64)[order]
    bounds = np.searchsorted(axis_sorted, np.arange(N + 1))
    tables = []
    for v in range(N):
        s, e = bounds[v], bounds[v + 1]
        tables.append((key_sorted[s:e], pos_sorted[s:e]))
    return tables


def D_matrix(D: int, a: int, k: int, n: int, scheme: str = "sparse",
             periodic: bool = True, drop_tol: float = DROP_TOL) -> sp.csr_matrix:
    """Partial derivative along axis a (1-based) on the scheme space.

    Matrix entries couple basis functions that share every off-axis
    (level, element, mode) and are coupled by the 1D hierarchical operator
    along axis a; couplings leading out of the space are discarded.
    `drop_tol` is relative to the largest 1D entry and removes conjugation
    rounding dust (the true entries sit many orders above it).
    """
    if not (1 <= a <= D):
        raise ValueError(f"axis {a} out of range 1..{D}")
    layout = Layout(D, k, n, scheme)
    Dh = _hier_matrix(k, n, periodic)
    if D == 1:
        M = Dh.copy()
        M[np.abs(M) <= drop_tol * max(1.0, float(np.abs(M).max()))] = 0.0
        return sp.csr_matrix(M)
    tables = _axis_tables(layout, a - 1)
    rows_acc, cols_acc, vals_acc = [], [], []
    N = layout.k * 2 ** layout.n
    cut = drop_tol * max(1.0, float(np.abs(Dh).max()))
    for r in range(N):
        key_r, pos_r = tables[r]
        if key_r.size == 0:
            continue
        for c in np.nonzero(np.abs(Dh[r]) > cut)[0]:
            key_c, pos_c = tables[c]
            if key_c.size == 0:
                continue
            _, ia, ib = np.intersect1d(key_r, key_c, assume_unique=True,
                                       return_indices=True)
            if ia.size:
                rows_acc.append(pos_r[ia])
                cols_acc.append(pos_c[ib])
                vals_acc.append(np.full(ia.size, Dh[r, c]))
    if rows_acc:
        rows = np.concatenate(rows_acc)
        cols = np.concatenate(cols_acc)
        vals = np.concatenate(vals_acc)
    else:
        rows = cols = np.empty(0, dtype=np.int64)
        vals = np.empty(0)
    M = sp.coo_matrix((vals, (rows, cols)), shape=(layout.P, layout.P))
    M = M.tocsr()
    M.sort_indices()
    return M


def grad_matrix(D: int, k: int, n: int, scheme: str = "sparse",
                periodic: bool = True) -> list[sp.csr_matrix]:
    """All D partial derivative operators."""
    return [D_matrix(D, a, k, n, scheme, periodic) for a in range(1, D + 1)]


def laplacian_matrix(D: int, k: int, n: int, scheme: str = "sparse",
                     periodic: bool = True,
                     mem_budget: int | None = None) -> sp.csr_matrix:
    """Sum over axes of D_a @ D_a as an explicit sparse matrix."""
    grads = grad_matrix(D, k, n, scheme, periodic)
    if mem_budget is not None:
        est = 16 * sum(int(g.nnz) for g in grads) * 8  # rough product growth
        if est > mem_budget:
            raise MemoryError(
                f"estimated Laplacian storage ~{est} bytes exceeds budget "
                f"{mem_budget}; use the mat-vec application path")
    L = None
    for g in grads:
        term = (g @ g).tocsr()
        L = term if L is None else L + term
    L.sum_duplicates()
    L.sort_indices()
    return L


def operator_nnz(M: sp.spmatrix) -> int:
    return int(M.nnz)


def save_matrix_market(path, M: sp.spmatrix) -> None:
    """Dump in Matrix Market coordinate format (1-based, real general)."""
    from scipy.io import mmwrite
    mmwrite(str(path), sp.coo_matrix(M))
