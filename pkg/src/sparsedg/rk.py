"""Embedded Runge-Kutta integrators with PI step control.

Pinned coefficient sets: Dormand-Prince 5(4) ("rk45"), Fehlberg 7(8)
("rk78"), and a classical fixed-step RK4 ("rk4").  Dense output between
accepted steps uses cubic Hermite interpolation on the stored endpoint
derivatives, which is enough for snapshot extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StepStats", "Tableau", "TABLEAUS", "integrate"]


@dataclass
class Tableau:
    name: str
    c: np.ndarray
    A: list[np.ndarray]
    b: np.ndarray        # propagated solution weights
    b_err: np.ndarray    # b - b_hat, applied to stage derivatives
    order: int           # order used in the step-size exponent


def _dp54() -> Tableau:
    c = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
    A = [
        np.array([]),
        np.array([1 / 5]),
        np.array([3 / 40, 9 / 40]),
        np.array([44 / 45, -56 / 15, 32 / 9]),
        np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
        np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
        np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
    ]
    b = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
    b_hat = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640,
                      -92097 / 339200, 187 / 2100, 1 / 40])
    return Tableau("rk45", c, A, b, b - b_hat, 5)


def _f78() -> Tableau:
    c = np.array([0, 2 / 27, 1 / 9, 1 / 6, 5 / 12, 1 / 2, 5 / 6, 1 / 6,
                  2 / 3, 1 / 3, 1.0, 0.0, 1.0])
    A = [
        np.array([]),
        np.array([2 / 27]),
        np.array([1 / 36, 1 / 12]),
        np.array([1 / 24, 0, 1 / 8]),
        np.array([5 / 12, 0, -25 / 16, 25 / 16]),
        np.array([1 / 20, 0, 0, 1 / 4, 1 / 5]),
        np.array([-25 / 108, 0, 0, 125 / 108, -65 / 27, 125 / 54]),
        np.array([31 / 300, 0, 0, 0, 61 / 225, -2 / 9, 13 / 900]),
        np.array([2, 0, 0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3]),
        np.array([-91 / 108, 0, 0, 23 / 108, -976 / 135, 311 / 54, -19 / 60,
                  17 / 6, -1 / 12]),
        np.array([2383 / 4100, 0, 0, -341 / 164, 4496 / 1025, -301 / 82,
                  2133 / 4100, 45 / 82, 45 / 164, 18 / 41]),
        np.array([3 / 205, 0, 0, 0, 0, -6 / 41, -3 / 205, -3 / 41, 3 / 41,
                  6 / 41, 0]),
        np.array([-1777 / 4100, 0, 0, -341 / 164, 4496 / 1025, -289 / 82,
                  2193 / 4100, 51 / 82, 33 / 164, 12 / 41, 0, 1]),
    ]
    b7 = np.array([41 / 840, 0, 0, 0, 0, 34 / 105, 9 / 35, 9 / 35, 9 / 280,
                   9 / 280, 41 / 840, 0, 0])
    b8 = np.array([0, 0, 0, 0, 0, 34 / 105, 9 / 35, 9 / 35, 9 / 280, 9 / 280,
                   0, 41 / 840, 41 / 840])
    return Tableau("rk78", c, A, b8, b8 - b7, 8)


TABLEAUS = {"rk45": _dp54(), "rk78": _f78()}


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0


class StepSizeUnderflow(RuntimeError):
    def __init__(self, t, dt):
        super().__init__(f"step size underflow at t={t} (dt={dt})")
        self.t = t
        self.dt = dt


def _hermite(t, t0, y0, f0, t1, y1, f1):
    """Cubic Hermite interpolant between two accepted step endpoints."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s ** 2 * (3 - 2 * s)
    h11 = s ** 2 * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate(rhs, y0: np.ndarray, t0: float, t1: float, *,
              method: str = "rk45", atol: float = 1e-8, rtol: float = 1e-8,
              max_dt: float = np.inf, dt0: float | None = None,
              snapshots=None):
    """Integrate y' = rhs(t, y) from t0 to t1.

    Returns (times, states, stats) with one entry per requested snapshot
    time; t0 and t1 are always included.  `method` is "rk45", "rk78", or
    "rk4" (fixed step of size min(dt0, max_dt)).
    """
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    span = t1 - t0
    want = sorted({float(t0), float(t1),
                   *(float(s) for s in (snapshots or []))})
    for t in want:
        if not (t0 <= t <= t1):
            raise ValueError(f"snapshot time {t} outside [{t0}, {t1}]")
    y = np.array(y0, dtype=float)
    stats = StepStats()
    out_t, out_y = [], []
    next_idx = 0
    if want[0] == t0:
        out_t.append(t0)
        out_y.append(y.copy())
        next_idx = 1

    if method == "rk4":
        dt = min(dt0 or span / 100, max_dt)
        nsteps = max(1, int(np.ceil(span / dt - 1e-12)))
        dt = span / nsteps
        t = t0
        for _ in range(nsteps):
            k1 = rhs(t, y)
            k2 = rhs(t + dt / 2, y + dt / 2 * k1)
            k3 = rhs(t + dt / 2, y + dt / 2 * k2)
            k4 = rhs(t + dt, y + dt * k3)
            ynew = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            tnew = t + dt
            while next_idx < len(want) and want[next_idx] <= tnew + 1e-12 * span:
                s = want[next_idx]
                out_t.append(s)
                out_y.append(_hermite(s, t, y, k1, tnew, ynew, rhs(tnew, ynew))
                             if s < tnew else ynew.copy())
                next_idx += 1
            y, t = ynew, tnew
            stats.accepted += 1
        return out_t, out_y, stats

    try:
        tab = TABLEAUS[method]
    except KeyError:
        raise ValueError(f"unknown integrator {method!r}") from None

    nstage = len(tab.c)
    t = t0
    f = rhs(t, y)
    dt = min(dt0 or span / 100, max_dt, span)
    err_prev = 1.0
    safety, min_fac, max_fac = 0.9, 0.2, 5.0
    k_p = 0.7 / tab.order
    k_i = 0.4 / tab.order
    while t < t1 - 1e-14 * span:
        dt = min(dt, t1 - t, max_dt)
        if dt < 1e-14 * span:
            raise StepSizeUnderflow(t, dt)
        ks = [f]
        for s in range(1, nstage):
            ys = y + dt * sum(a * k for a, k in zip(tab.A[s], ks) if a != 0.0)
            ks.append(rhs(t + tab.c[s] * dt, ys))
        ynew = y + dt * sum(b * k for b, k in zip(tab.b, ks) if b != 0.0)
        errv = dt * sum(e * k for e, k in zip(tab.b_err, ks) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.sqrt(np.mean((errv / scale) ** 2)))
        if not np.isfinite(err) or not np.all(np.isfinite(ynew)):
            raise RuntimeError(f"non-finite state at t={t} (dt={dt})")
        if err <= 1.0:
            tnew = t + dt
            fnew = rhs(tnew, ynew)
            while next_idx < len(want) and want[next_idx] <= tnew + 1e-12 * span:
                s = want[next_idx]
                out_t.append(min(s, tnew))
                out_y.append(_hermite(s, t, y, f, tnew, ynew, fnew)
                             if s < tnew else ynew.copy())
                next_idx += 1
            y, t, f = ynew, tnew, fnew
            stats.accepted += 1
            fac = safety * err ** (-k_p) * err_prev ** k_i if err > 0 else max_fac
            dt *= min(max_fac, max(min_fac, fac))
            err_prev = max(err, 1e-10)
        else:
            stats.rejected += 1
            dt *= max(min_fac, safety * err ** (-1.0 / tab.order))
    while next_idx < len(want):
        out_t.append(want[next_idx])
        out_y.append(y.copy())
        next_idx += 1
    return out_t, out_y, stats
