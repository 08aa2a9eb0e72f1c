"""Shared quadrature oracles for the test suite.

The oracles integrate with composite Gauss-Legendre on a fine dyadic mesh
using only callable evaluation, so they are independent of how the package
represents or integrates its basis functions.
"""

import numpy as np
import pytest


def composite_gauss(level: int, q: int = 12):
    """Nodes/weights of a q-point Gauss rule on each of 2**level dyadic
    segments of [0,1], flattened."""
    t, w = np.polynomial.legendre.leggauss(q)
    h = 2.0 ** -level
    starts = np.arange(2 ** level) * h
    x = (starts[:, None] + (t[None, :] + 1) * h / 2).ravel()
    wts = np.tile(w * h / 2, 2 ** level)
    return x, wts


def oracle_inner(f, g, level: int, q: int = 12) -> float:
    """Integral of f*g over [0,1] on a mesh fine enough that both factors
    are smooth per segment."""
    x, w = composite_gauss(level, q)
    fv = np.array([f(xi) for xi in x])
    gv = np.array([g(xi) for xi in x])
    return float(np.sum(w * fv * gv))


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(1234))
