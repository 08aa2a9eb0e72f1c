"""Scalar wave evolution in coefficient space.

The wave equation is reduced to first order in time: phi' = psi,
psi' = L phi with L the scheme-space Laplacian.  Evolution happens
entirely on coefficient vectors; initial data enters either by direct
projection or, for travelling sine waves, by tensor construction from 1D
factors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import rk
from .grid import D2V, Layout, save_coeff_vector
from .operators import grad_matrix, laplacian_matrix
from .project import coeffs_DG, project_1d, tensor_construct

__all__ = [
    "WaveState",
    "EvolveOptions",
    "Trajectory",
    "wave_rhs",
    "wave_evolve",
    "travelling_wave_solver",
    "energy",
]


@dataclass
class WaveState:
    """Field and velocity coefficient vectors at one instant."""

    phi: np.ndarray
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        if self.phi.shape != self.psi.shape:
            raise ValueError("phi and psi must share a layout")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi))):
            raise ValueError("non-finite state")


@dataclass
class EvolveOptions:
    integrator: str = "rk45"
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_dt: float = np.inf
    cfl: float = 0.1
    snapshot_times: tuple = ()
    laplacian_mode: str = "matrix"   # "matrix" or "matvec"
    operator: object = None          # prebuilt Laplacian (matrix or callable)

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.cfl <= 1):
            raise ValueError("CFL factor must lie in (0, 1]")
        if self.laplacian_mode not in ("matrix", "matvec"):
            raise ValueError("laplacian_mode must be 'matrix' or 'matvec'")


@dataclass
class Trajectory:
    """Snapshot record of one evolution."""

    times: list
    phis: list
    psis: list
    stats: rk.StepStats
    D: int = 0
    k: int = 0
    n: int = 0
    scheme: str = "sparse"

    def __post_init__(self):
        if list(self.times) != sorted(set(self.times)):
            raise ValueError("snapshot times must be strictly increasing")

    def final_state(self) -> WaveState:
        return WaveState(self.phis[-1], self.psis[-1], self.times[-1])

    def save(self, directory, options: EvolveOptions | None = None) -> None:
        """Write snapshots (header + little-endian payload) and a manifest."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = []
        for idx, (t, phi, psi) in enumerate(zip(self.times, self.phis, self.psis)):
            pair = []
            for tag, vec in (("phi", phi), ("psi", psi)):
                name = f"snap{idx:04d}_{tag}.coeffs"
                save_coeff_vector(directory / name, vec, self.D, self.k,
                                  self.n, self.scheme)
                pair.append(name)
            names.append({"t": t, "phi": pair[0], "psi": pair[1]})
        manifest = {
            "D": self.D, "k": self.k, "n": self.n, "scheme": self.scheme,
            "times": list(map(float, self.times)),
            "snapshots": names,
            "steps_accepted": self.stats.accepted,
            "steps_rejected": self.stats.rejected,
        }
        if options is not None:
            manifest["options"] = {
                "integrator": options.integrator,
                "abs_tol": options.abs_tol,
                "rel_tol": options.rel_tol,
                "cfl": options.cfl,
                "laplacian_mode": options.laplacian_mode,
            }
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2))


def wave_rhs(state: WaveState, L) -> tuple[np.ndarray, np.ndarray]:
    """(phi', psi') = (psi, L phi) for a Laplacian matrix or callable."""
    apply_l = L if callable(L) and not sp.issparse(L) else (lambda v: L @ v)
    dphi = state.psi
    dpsi = apply_l(state.phi)
    if dpsi.shape != state.phi.shape:
        raise ValueError("Laplacian dimension does not match the state")
    return dphi, np.asarray(dpsi)


def _laplacian_apply(D, k, n, scheme, mode):
    if mode == "matrix":
        L = laplacian_matrix(D, k, n, scheme)
        return lambda v: L @ v
    grads = grad_matrix(D, k, n, scheme)
    def apply_l(v):
        out = None
        for g in grads:
            term = g @ (g @ v)
            out = term if out is None else out + term
        return out
    return apply_l


def _cfl_dt(k: int, n: int, cfl: float) -> float:
    return cfl * 2.0 ** (-n) / (2 * k - 1)


def _evolve_vectors(D, k, n, phi0, psi0, t0, t1, scheme, opts: EvolveOptions) -> Trajectory:
    if opts.operator is not None:
        L = opts.operator
        apply_l = L if callable(L) and not sp.issparse(L) else (lambda v: L @ v)
    else:
        apply_l = _laplacian_apply(D, k, n, scheme, opts.laplacian_mode)
    P = phi0.size

    def rhs(t, y):
        return np.concatenate([y[P:], apply_l(y[:P])])

    dt0 = _cfl_dt(k, n, opts.cfl if opts.integrator == "rk4" else 1.0)
    times, states, stats = rk.integrate(
        rhs, np.concatenate([phi0, psi0]), t0, t1,
        method=opts.integrator, atol=opts.abs_tol, rtol=opts.rel_tol,
        max_dt=opts.max_dt, dt0=dt0 if opts.integrator == "rk4"
        else min(dt0, t1 - t0), snapshots=opts.snapshot_times)
    return Trajectory(times=times, phis=[y[:P] for y in states],
                      psis=[y[P:] for y in states], stats=stats,
                      D=D, k=k, n=n, scheme=scheme)


def _project_initial(D, k, n, f, scheme) -> np.ndarray:
    if f is None or (np.isscalar(f) and float(f) == 0.0):
        return np.zeros(Layout(D, k, n, scheme).P)
    if np.isscalar(f):
        value = float(f)
        return value * D2V(coeffs_DG(D, k, n, lambda x: 1.0, scheme))
    return D2V(coeffs_DG(D, k, n, f, scheme))


def wave_evolve(D: int, k: int, n: int, f0, v0, t0: float, t1: float,
                scheme: str = "sparse", opts: EvolveOptions | None = None) -> Trajectory:
    """Evolve the wave equation with initial position f0 and velocity v0.

    f0/v0 are scalar fields on [0,1]^D (or the scalar 0); boundary
    conditions are periodic.
    """
    opts = opts or EvolveOptions()
    phi0 = _project_initial(D, k, n, f0, scheme)
    psi0 = _project_initial(D, k, n, v0, scheme)
    return _evolve_vectors(D, k, n, phi0, psi0, t0, t1, scheme, opts)


def _sine_wave_vector(D, k, n, mvec, amplitude, phase, scheme) -> np.ndarray:
    """Coefficients of amplitude * cos(2 pi m.x + phase) by expanding the
    product of per-axis complex exponentials into 2^D sin/cos products."""
    cos_f = []
    sin_f = []
    for m_d in mvec:
        w = 2 * np.pi * m_d
        cos_f.append(project_1d(lambda x, w=w: np.cos(w * x), k, n))
        sin_f.append(project_1d(lambda x, w=w: np.sin(w * x), k, n))
    total = None
    for bits in range(1 << D):
        factors = []
        nsin = 0
        for d in range(D):
            if bits >> d & 1:
                factors.append(sin_f[d])
                nsin += 1
            else:
                factors.append(cos_f[d])
        weight = amplitude * np.cos(phase + nsin * np.pi / 2)
        if abs(weight) < 1e-300:
            continue
        term = weight * tensor_construct(D, k, n, factors, scheme)
        total = term if total is None else total + term
    if total is None:
        total = np.zeros(Layout(D, k, n, scheme).P)
    return total


def travelling_wave_solver(D: int, k: int, n: int, mvec, t0: float, t1: float,
                           scheme: str = "sparse", phase: float = 0.0,
                           A: float = 1.0,
                           opts: EvolveOptions | None = None) -> Trajectory:
    """Evolve phi(x,0) = A cos(2 pi m.x + phase) with the matching
    travelling-wave velocity psi(x,0) = -omega A sin(2 pi m.x + phase),
    omega = 2 pi |m|.  Initial data is built by tensor construction."""
    mvec = [int(m) for m in mvec]
    if len(mvec) != D:
        raise ValueError(f"wave number tuple must have {D} entries")
    opts = opts or EvolveOptions()
    omega = 2 * np.pi * float(np.linalg.norm(mvec))
    phi0 = _sine_wave_vector(D, k, n, mvec, A, phase, scheme)
    psi0 = _sine_wave_vector(D, k, n, mvec, omega * A, phase + np.pi / 2, scheme)
    return _evolve_vectors(D, k, n, phi0, psi0, t0, t1, scheme, opts)


def energy(state: WaveState, grads) -> float:
    """Semi-discrete energy ||psi||^2 + sum_a ||D_a phi||^2."""
    total = float(state.psi @ state.psi)
    for g in grads:
        v = g @ state.phi
        total += float(v @ v)
    return total
