"""Multi-dimensional index sets and coefficient containers.

The full space keeps every multi-level l with max(l) <= n; the sparse space
keeps sum(l) <= n.  Coefficients are stored either as a dictionary of dense
per-multi-level blocks (`CoeffDict`) or as a flat vector with a canonical
`Layout` mapping (level, element, mode) triples to positions.

Canonical ordering: multi-levels sorted by (1-norm, lexicographic); within a
block, row-major over elements then row-major over modes.  Truncating a
sparse vector by level is therefore a prefix operation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

__all__ = [
    "Scheme",
    "MultiIndex",
    "CoeffDict",
    "Layout",
    "ShapeMismatchError",
    "cells",
    "index_set",
    "space_dim",
    "block_shape",
    "D2V",
    "V2D",
    "l2_norm",
    "hier_index_1d",
    "save_coeff_vector",
    "load_coeff_vector",
]

# Guard against index arithmetic overflowing 64-bit offsets downstream.
_MAX_DIM = 1 << 62

SCHEMES = ("full", "sparse")


class ShapeMismatchError(ValueError):
    """A coefficient block has the wrong shape for its multi-level."""

    def __init__(self, level: tuple[int, ...], message: str):
        super().__init__(f"multi-level {level}: {message}")
        self.level = level


@dataclass(frozen=True)
class Scheme:
    """Level-selection rule: |l|_inf <= n (full) or |l|_1 <= n (sparse)."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}")
        if self.n < 0:
            raise ValueError("max level must be >= 0")

    def admits(self, level: tuple[int, ...]) -> bool:
        if self.kind == "full":
            return max(level) <= self.n
        return sum(level) <= self.n


@dataclass(frozen=True)
class MultiIndex:
    """(multi-level, multi-element, multi-mode) address of one basis function."""

    l: tuple[int, ...]
    i: tuple[int, ...]
    m: tuple[int, ...]


def cells(level: int) -> int:
    """Number of elements at a hierarchical level: 1, then 2^(level-1)."""
    if level < 0:
        raise ValueError("level must be >= 0")
    return 1 if level == 0 else 2 ** (level - 1)


def _check_scheme(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    return scheme


@lru_cache(maxsize=256)
def _index_set_cached(D: int, n: int, scheme: str) -> tuple[tuple[int, ...], ...]:
    pred = Scheme(scheme, n)
    levels = [l for l in product(range(n + 1), repeat=D) if pred.admits(l)]
    levels.sort(key=lambda l: (sum(l), l))
    return tuple(levels)


def index_set(D: int, n: int, scheme: str = "sparse") -> list[tuple[int, ...]]:
    """All admitted multi-levels, sorted by (1-norm, lexicographic)."""
    if D < 1:
        raise ValueError("dimension must be >= 1")
    return list(_index_set_cached(D, n, _check_scheme(scheme)))


def block_shape(level: tuple[int, ...], k: int) -> tuple[int, ...]:
    """Dense block shape for one multi-level: elements per axis, then modes."""
    return tuple(cells(l) for l in level) + (k,) * len(level)


def block_size(level: tuple[int, ...], k: int) -> int:
    size = 1
    for l in level:
        size *= cells(l) * k
    return size


def space_dim(D: int, k: int, n: int, scheme: str = "sparse") -> int:
    """Exact dimension of the scheme space; (k 2^n)^D in the full case."""
    total = 0
    for level in index_set(D, n, scheme):
        total += block_size(level, k)
        if total > _MAX_DIM:
            raise OverflowError(
                f"space dimension exceeds {_MAX_DIM} for D={D}, k={k}, n={n}")
    return total


def hier_index_1d(k: int, level: int, i: int, m: int) -> int:
    """Flat position of (level, element, mode) in the 1D hierarchical layout."""
    offset = 0 if level == 0 else k * 2 ** (level - 1)
    return offset + (i - 1) * k + m


class Layout:
    """Bijection between MultiIndex and flat positions [0, P)."""

    def __init__(self, D: int, k: int, n: int, scheme: str = "sparse"):
        self.D = D
        self.k = k
        self.n = n
        self.scheme = _check_scheme(scheme)
        self.levels = index_set(D, n, scheme)
        self.offsets: dict[tuple[int, ...], int] = {}
        pos = 0
        for level in self.levels:
            self.offsets[level] = pos
            pos += block_size(level, k)
        self.P = pos

    def flat_index(self, mi: MultiIndex) -> int:
        level = tuple(mi.l)
        base = self.offsets.get(level)
        if base is None:
            raise KeyError(f"multi-level {level} not in {self.scheme} space")
        pos = 0
        for l, i in zip(level, mi.i):
            nc = cells(l)
            if not (1 <= i <= nc):
                raise IndexError(f"element {i} out of range at level {l}")
            pos = pos * nc + (i - 1)
        for m in mi.m:
            if not (0 <= m < self.k):
                raise IndexError(f"mode {m} out of range for order {self.k}")
            pos = pos * self.k + m
        return base + pos

    def multi_index(self, pos: int) -> MultiIndex:
        if not (0 <= pos < self.P):
            raise IndexError(f"position {pos} out of range [0, {self.P})")
        for level in reversed(self.levels):
            base = self.offsets[level]
            if pos >= base:
                rem = pos - base
                m = []
                for _ in range(self.D):
                    m.append(rem % self.k)
                    rem //= self.k
                i = []
                for l in reversed(level):
                    nc = cells(l)
                    i.append(rem % nc + 1)
                    rem //= nc
                return MultiIndex(level, tuple(reversed(i)), tuple(reversed(m)))
        raise AssertionError("unreachable")

    def axis_indices(self) -> np.ndarray:
        """Per-axis 1D hierarchical indices for every position, shape (P, D)."""
        out = np.empty((self.P, self.D), dtype=np.int64)
        for level in self.levels:
            base = self.offsets[level]
            shape = block_shape(level, self.k)
            grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
            flat = [g.reshape(-1) for g in grids]
            for d, l in enumerate(level):
                offset = 0 if l == 0 else self.k * 2 ** (l - 1)
                idx1d = offset + flat[d] * self.k + flat[self.D + d]
                out[base:base + flat[0].size, d] = idx1d
        return out


class CoeffDict:
    """Hierarchical coefficient storage: one dense block per multi-level."""

    def __init__(self, D: int, k: int, n: int, scheme: str = "sparse",
                 blocks: dict[tuple[int, ...], np.ndarray] | None = None):
        self.D = D
        self.k = k
        self.n = n
        self.scheme = _check_scheme(scheme)
        self._admitted = set(index_set(D, n, scheme))
        self.blocks: dict[tuple[int, ...], np.ndarray] = {}
        if blocks:
            for level, arr in blocks.items():
                self[level] = arr

    def __getitem__(self, level: tuple[int, ...]) -> np.ndarray:
        return self.blocks[tuple(level)]

    def __setitem__(self, level: tuple[int, ...], arr) -> None:
        level = tuple(level)
        if level not in self._admitted:
            raise ShapeMismatchError(level, f"not in the {self.scheme} space")
        arr = np.asarray(arr, dtype=float)
        shape = block_shape(level, self.k)
        if arr.shape != shape:
            raise ShapeMismatchError(
                level, f"expected block shape {shape}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatchError(level, "non-finite coefficients")
        self.blocks[level] = arr

    def __contains__(self, level) -> bool:
        return tuple(level) in self.blocks

    def levels(self) -> list[tuple[int, ...]]:
        return list(self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffDict):
            return NotImplemented
        if (self.D, self.k, self.n, self.scheme) != (other.D, other.k, other.n, other.scheme):
            return False
        if set(self.blocks) != set(other.blocks):
            return False
        return all(np.array_equal(self.blocks[l], other.blocks[l])
                   for l in self.blocks)


def D2V(coeffs: CoeffDict) -> np.ndarray:
    """Flatten a CoeffDict into the canonical vector; missing blocks are 0."""
    layout = Layout(coeffs.D, coeffs.k, coeffs.n, coeffs.scheme)
    vec = np.zeros(layout.P)
    for level, arr in coeffs.blocks.items():
        base = layout.offsets[level]
        vec[base:base + arr.size] = arr.reshape(-1)
    return vec


def V2D(vec: np.ndarray, D: int, k: int, n: int, scheme: str = "sparse") -> CoeffDict:
    """Inverse of D2V: unpack a flat vector into per-level blocks."""
    layout = Layout(D, k, n, scheme)
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (layout.P,):
        raise ShapeMismatchError(
            layout.levels[0] if layout.levels else (),
            f"expected vector of length {layout.P}, got shape {vec.shape}")
    out = CoeffDict(D, k, n, scheme)
    for level in layout.levels:
        base = layout.offsets[level]
        shape = block_shape(level, k)
        out[level] = vec[base:base + block_size(level, k)].reshape(shape)
    return out


def l2_norm(vec: np.ndarray) -> float:
    """L2 norm of the represented function (the basis is orthonormal)."""
    vec = np.asarray(vec)
    if not np.all(np.isfinite(vec)):
        raise ValueError("non-finite coefficients")
    return float(np.linalg.norm(vec))


# ---------------------------------------------------------------------------
# Serialization: one JSON header line, then little-endian float64 payload
# ---------------------------------------------------------------------------

def save_coeff_vector(path, vec: np.ndarray, D: int, k: int, n: int,
                      scheme: str = "sparse") -> None:
    vec = np.asarray(vec, dtype="<f8")
    header = {"D": D, "k": k, "n": n, "scheme": scheme, "P": int(vec.size)}
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("ascii"))
        fh.write(vec.tobytes())


def load_coeff_vector(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        vec = np.frombuffer(fh.read(), dtype="<f8")
    if vec.size != header["P"]:
        raise ValueError(f"payload has {vec.size} values, header says {header['P']}")
    return vec.copy(), header
