import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsedg.basis1d import (
    Basis1D,
    build_basis,
    hier_indices,
    hierarchical_function,
    legendre_eval,
    multiwavelets,
    nodal_function,
)

from conftest import composite_gauss, oracle_inner


# ---------------------------------------------------------------------------
# legendre_eval
# ---------------------------------------------------------------------------

def test_legendre_mode0():
    assert legendre_eval(0, 0.7) == pytest.approx(1 / np.sqrt(2), abs=1e-14)


def test_legendre_mode1_at_one():
    assert legendre_eval(1, 1.0) == pytest.approx(np.sqrt(1.5), abs=1e-14)


def test_legendre_mode2_at_zero():
    # P2(0) = -1/2, normalization sqrt(5/2)
    assert legendre_eval(2, 0.0) == pytest.approx(-np.sqrt(2.5) / 2, abs=1e-14)


def test_legendre_against_numpy():
    # oracle: numpy's Legendre module with the same normalization
    t = np.linspace(-1, 1, 23)
    for m in range(6):
        coef = np.zeros(m + 1)
        coef[m] = 1.0
        ref = np.sqrt((2 * m + 1) / 2) * np.polynomial.legendre.legval(t, coef)
        got = np.array([legendre_eval(m, ti) for ti in t])
        np.testing.assert_allclose(got, ref, atol=1e-13)


# ---------------------------------------------------------------------------
# nodal basis
# ---------------------------------------------------------------------------

def test_nodal_value_half_interval():
    f = nodal_function(1, 1, 1, 0)
    assert f(0.25) == pytest.approx(np.sqrt(2), abs=1e-13)


def test_nodal_level0_linear_at_right_edge():
    f = nodal_function(2, 0, 1, 1)
    assert f(1.0) == pytest.approx(np.sqrt(3), abs=1e-13)
    assert oracle_inner(f, f, 3) == pytest.approx(1.0, abs=1e-12)
    assert abs(oracle_inner(f, lambda x: 1.0, 3)) < 1e-12


def test_nodal_support():
    f = nodal_function(3, 2, 3, 1)
    # support is [1/2, 3/4); zero elsewhere
    assert f(0.49) == 0.0
    assert f(0.8) == 0.0
    assert f(0.6) != 0.0


def test_nodal_orthonormality():
    k, n = 3, 2
    funcs = [nodal_function(k, n, i, m)
             for i in range(1, 2 ** n + 1) for m in range(k)]
    G = np.array([[oracle_inner(f, g, n + 1) for g in funcs] for f in funcs])
    np.testing.assert_allclose(G, np.eye(len(funcs)), atol=1e-12)


def test_nodal_index_validation():
    with pytest.raises(ValueError):
        nodal_function(2, 1, 3, 0)
    with pytest.raises(ValueError):
        nodal_function(2, 1, 1, 2)


# ---------------------------------------------------------------------------
# multiwavelets
# ---------------------------------------------------------------------------

def test_haar_wavelet_sign():
    (w,) = multiwavelets(1)
    assert w(0.25) == pytest.approx(-1.0, abs=1e-13)
    assert w(0.75) == pytest.approx(1.0, abs=1e-13)


@given(k=st.integers(min_value=1, max_value=5))
@settings(max_examples=10, deadline=None)
def test_vanishing_moments(k):
    for m, w in enumerate(multiwavelets(k)):
        for j in range(k):
            mom = oracle_inner(w, lambda x, j=j: x ** j, 1, q=16)
            assert abs(mom) < 1e-12, (k, m, j)


def test_wavelet_gram_k3():
    ws = multiwavelets(3)
    G = np.array([[oracle_inner(a, b, 2) for b in ws] for a in ws])
    np.testing.assert_allclose(G, np.eye(3), atol=1e-12)


def test_wavelet_sign_convention():
    # limit at x -> 1- positive, or zero with positive first nonzero
    # derivative; checked numerically just inside the endpoint
    for k in range(1, 6):
        for w in multiwavelets(k):
            val = w(1.0)
            if abs(val) > 1e-9:
                assert val > 0
            else:
                eps = 1e-7
                assert w(1.0) - w(1.0 - eps) >= 0


# ---------------------------------------------------------------------------
# hierarchical functions
# ---------------------------------------------------------------------------

def test_hier_level1_is_mother_wavelet():
    (w,) = multiwavelets(1)
    v = hierarchical_function(1, 3, 1, 1, 0)
    for x in np.linspace(0.01, 0.99, 17):
        assert v(x) == pytest.approx(w(x), abs=1e-13)


def test_hier_level2_support():
    v = hierarchical_function(2, 3, 2, 2, 0)
    assert v(0.3) == 0.0
    assert v(0.6) != 0.0 or v(0.9) != 0.0
    assert abs(oracle_inner(v, v, 4) - 1.0) < 1e-12


def test_hier_orthonormality():
    k, n = 3, 3
    funcs = [hierarchical_function(k, n, l, i, m)
             for (l, i, m) in hier_indices(k, n)]
    G = np.array([[oracle_inner(a, b, n + 1) for b in funcs] for a in funcs])
    np.testing.assert_allclose(G, np.eye(len(funcs)), atol=1e-12)


def test_hier_index_validation():
    with pytest.raises(ValueError):
        hierarchical_function(2, 3, 0, 2, 0)   # level 0 has one element
    with pytest.raises(ValueError):
        hierarchical_function(2, 3, 2, 3, 0)   # level 2 has 2 elements


# ---------------------------------------------------------------------------
# build_basis / Q
# ---------------------------------------------------------------------------

def test_q_trivial():
    basis = build_basis(1, 0)
    np.testing.assert_allclose(basis.Q, [[1.0]], atol=1e-14)


def test_q_haar():
    basis = build_basis(1, 1)
    expect = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2)
    np.testing.assert_allclose(basis.Q, expect, atol=1e-13)


@pytest.mark.parametrize("k,n", [(k, n) for k in range(1, 6) for n in range(5)])
def test_q_orthogonal(k, n):
    Q = build_basis(k, n).Q
    np.testing.assert_allclose(Q @ Q.T, np.eye(Q.shape[0]), atol=1e-12)


def test_q_entries_are_inner_products():
    k, n = 2, 2
    basis = build_basis(k, n)
    for r, v in enumerate(basis.hier):
        for c, h in enumerate(basis.nodal):
            assert basis.Q[r, c] == pytest.approx(
                oracle_inner(v, h, n + 1), abs=1e-12)


def test_change_of_basis_roundtrip(rng):
    for k, n in [(1, 3), (3, 2), (5, 4)]:
        Q = build_basis(k, n).Q
        c = rng.standard_normal(k * 2 ** n)
        assert np.max(np.abs(Q.T @ (Q @ c) - c)) < 1e-12


@pytest.mark.parametrize("k", [2, 3, 5])
def test_polynomial_span(k, rng):
    # a degree-<k polynomial lies in the level-0 hierarchical span and in
    # the nodal span; reconstruct from projections onto either basis
    n = 2
    coef = rng.standard_normal(k)
    p = np.polynomial.Polynomial(coef)
    basis = build_basis(k, n)
    xs = np.linspace(0.013, 0.987, 50)
    for funcs in (basis.hier[:k], basis.nodal):
        c = [oracle_inner(p, f, n + 2) for f in funcs]
        recon = [sum(ci * f(x) for ci, f in zip(c, funcs)) for x in xs]
        np.testing.assert_allclose(recon, p(xs), atol=1e-10)


def test_hier_count_per_level():
    k, n = 3, 3
    counts = {}
    for (l, i, m) in hier_indices(k, n):
        counts[l] = counts.get(l, 0) + 1
    assert counts == {0: k, 1: k, 2: 2 * k, 3: 4 * k}
