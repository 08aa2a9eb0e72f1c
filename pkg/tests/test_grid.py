import json
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsedg.grid import (
    CoeffDict,
    Layout,
    MultiIndex,
    ShapeMismatchError,
    D2V,
    V2D,
    block_shape,
    cells,
    hier_index_1d,
    index_set,
    l2_norm,
    load_coeff_vector,
    save_coeff_vector,
    space_dim,
)


def enumerate_functions(D, k, n, scheme):
    """Brute-force list of every (l, i, m) triple admitted by the scheme."""
    out = []
    for l in product(range(n + 1), repeat=D):
        ok = max(l) <= n if scheme == "full" else sum(l) <= n
        if not ok:
            continue
        for i in product(*[range(1, cells(ld) + 1) for ld in l]):
            for m in product(range(k), repeat=D):
                out.append((l, i, m))
    return out


# ---------------------------------------------------------------------------
# cells / index sets / dimensions
# ---------------------------------------------------------------------------

def test_cells():
    assert cells(0) == 1
    assert cells(1) == 1
    assert cells(4) == 8
    with pytest.raises(ValueError):
        cells(-1)


def test_index_set_sparse_2d():
    assert index_set(2, 1, "sparse") == [(0, 0), (0, 1), (1, 0)]


def test_index_set_full_2d():
    assert index_set(2, 1, "full") == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_index_set_1d_schemes_agree():
    assert index_set(1, 3, "full") == index_set(1, 3, "sparse") \
        == [(0,), (1,), (2,), (3,)]


def test_index_set_sorted_by_norm_then_lex():
    levels = index_set(3, 3, "sparse")
    keys = [(sum(l), l) for l in levels]
    assert keys == sorted(keys)


def test_space_dim_examples():
    assert space_dim(1, 3, 2, "full") == 12
    assert space_dim(2, 1, 1, "sparse") == 3
    assert space_dim(2, 2, 2, "sparse") == 32


@pytest.mark.parametrize("D", [1, 2, 3, 4])
def test_full_dim_formula(D):
    for k in (1, 2, 3):
        for n in range(5):
            assert space_dim(D, k, n, "full") == (k * 2 ** n) ** D


def test_sparse_dim_matches_enumeration():
    for D, k, n in [(1, 2, 3), (2, 2, 2), (2, 3, 3), (3, 2, 2), (3, 1, 3)]:
        for scheme in ("sparse", "full"):
            assert space_dim(D, k, n, scheme) \
                == len(enumerate_functions(D, k, n, scheme))


def test_sparse_dim_monotone_and_bounded():
    for D in (2, 3):
        prev = 0
        for n in range(5):
            s = space_dim(D, 2, n, "sparse")
            assert s > prev
            assert s <= space_dim(D, 2, n, "full")
            prev = s


def test_sparse_subset_of_full():
    assert set(index_set(3, 3, "sparse")) <= set(index_set(3, 3, "full"))


def test_space_dim_overflow():
    with pytest.raises(OverflowError):
        space_dim(6, 5, 11, "full")


def test_bad_scheme():
    with pytest.raises(ValueError):
        index_set(2, 1, "dense")


# ---------------------------------------------------------------------------
# layout
# ---------------------------------------------------------------------------

def test_flat_position_by_hand():
    layout = Layout(2, 1, 1, "sparse")
    pos = layout.flat_index(MultiIndex((1, 0), (1, 1), (0, 0)))
    assert pos == 2


def test_hier_index_1d():
    # layout prefix: level 0 modes, then level 1, then level 2 elements
    k = 3
    assert hier_index_1d(k, 0, 1, 2) == 2
    assert hier_index_1d(k, 1, 1, 0) == 3
    assert hier_index_1d(k, 2, 2, 1) == 10


@pytest.mark.parametrize("D,k,n,scheme", [
    (2, 2, 3, "sparse"), (3, 2, 2, "full"), (3, 3, 2, "sparse"),
])
def test_layout_bijection_exhaustive(D, k, n, scheme):
    layout = Layout(D, k, n, scheme)
    seen = set()
    for pos in range(layout.P):
        mi = layout.multi_index(pos)
        assert layout.flat_index(mi) == pos
        seen.add((mi.l, mi.i, mi.m))
    assert len(seen) == layout.P


def test_layout_axis_indices_match_multi_index():
    layout = Layout(3, 2, 2, "sparse")
    H = layout.axis_indices()
    for pos in (0, 7, layout.P // 2, layout.P - 1):
        mi = layout.multi_index(pos)
        for d in range(3):
            assert H[pos, d] == hier_index_1d(2, mi.l[d], mi.i[d], mi.m[d])


def test_layout_truncation_is_prefix():
    # all positions of levels with |l|_1 <= n-1 come first
    layout = Layout(2, 2, 3, "sparse")
    inner = Layout(2, 2, 2, "sparse")
    for level in inner.levels:
        assert layout.offsets[level] < inner.P


# ---------------------------------------------------------------------------
# coefficient containers
# ---------------------------------------------------------------------------

def test_zero_dict_to_zero_vector():
    c = CoeffDict(2, 2, 2, "sparse")
    v = D2V(c)
    assert v.shape == (32,)
    assert not v.any()


@given(seed=st.integers(min_value=0, max_value=2 ** 31))
@settings(max_examples=15, deadline=None)
def test_roundtrip_random(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    D, k, n = 3, 2, 3
    c = CoeffDict(D, k, n, "sparse")
    for level in index_set(D, n, "sparse"):
        c[level] = rng.standard_normal(block_shape(level, k))
    assert V2D(D2V(c), D, k, n, "sparse") == c


def test_shape_mismatch_names_level():
    c = CoeffDict(2, 2, 2, "sparse")
    with pytest.raises(ShapeMismatchError, match=r"\(1, 1\)"):
        c[(1, 1)] = np.zeros((2, 2))


def test_level_outside_scheme_rejected():
    c = CoeffDict(2, 2, 2, "sparse")
    with pytest.raises(ShapeMismatchError):
        c[(2, 2)] = np.zeros(block_shape((2, 2), 2))


def test_nonfinite_rejected():
    c = CoeffDict(1, 1, 0, "sparse")
    with pytest.raises(ShapeMismatchError):
        c[(0,)] = np.array([np.nan])


def test_v2d_wrong_length():
    with pytest.raises(ShapeMismatchError):
        V2D(np.zeros(5), 2, 2, 2, "sparse")


def test_l2_norm():
    assert l2_norm(np.zeros(7)) == 0.0
    e = np.zeros(7)
    e[3] = 1.0
    assert l2_norm(e) == 1.0
    with pytest.raises(ValueError):
        l2_norm(np.array([1.0, np.inf]))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_coeff_vector_roundtrip(tmp_path, rng):
    vec = rng.standard_normal(32)
    path = tmp_path / "c.coeffs"
    save_coeff_vector(path, vec, 2, 2, 2, "sparse")
    back, header = load_coeff_vector(path)
    np.testing.assert_array_equal(back, vec)
    assert header == {"D": 2, "k": 2, "n": 2, "scheme": "sparse", "P": 32}


def test_coeff_vector_format(tmp_path):
    vec = np.arange(3, dtype=float)
    path = tmp_path / "c.coeffs"
    save_coeff_vector(path, vec, 1, 3, 0, "full")
    raw = path.read_bytes()
    head, payload = raw.split(b"\n", 1)
    assert json.loads(head) == {"D": 1, "k": 3, "n": 0, "scheme": "full", "P": 3}
    assert payload == vec.astype("<f8").tobytes()


def test_coeff_vector_truncated_payload(tmp_path):
    path = tmp_path / "c.coeffs"
    save_coeff_vector(path, np.zeros(4), 1, 2, 1, "full")
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_coeff_vector(path)
