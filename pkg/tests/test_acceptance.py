"""End-to-end acceptance checks, one test per headline criterion.

Each test prints a single PASS/FAIL line (visible with -v through the test
outcome, and in captured output on failure) and pins the tolerance it
enforces.  These intentionally re-derive expectations with independent
oracles rather than reusing library internals where feasible.
"""

import csv
from itertools import product

import numpy as np

from sparsedg.basis1d import build_basis
from sparsedg.grid import Layout, V2D, cells, space_dim
from sparsedg.operators import D_matrix, derivative_1d_hier, operator_nnz
from sparsedg.project import dg_function, mcerr, project_1d
from sparsedg.evolve import (
    EvolveOptions,
    WaveState,
    _sine_wave_vector,
    energy,
    travelling_wave_solver,
    wave_evolve,
)
from sparsedg.cli import main as cli_main

from conftest import composite_gauss


def report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------

def test_acceptance_dimension_formulas():
    for D in range(1, 5):
        for k in (1, 2, 3):
            for n in range(5):
                assert space_dim(D, k, n, "full") == (k * 2 ** n) ** D
    # sparse dims against per-function enumeration
    for D, k, n in [(2, 2, 2), (3, 2, 3), (4, 1, 2)]:
        count = 0
        for l in product(range(n + 1), repeat=D):
            if sum(l) <= n:
                count += int(np.prod([k * cells(ld) for ld in l]))
        assert space_dim(D, k, n, "sparse") == count
    assert space_dim(2, 2, 2, "sparse") == 32
    report("dimension formulas", True, "full formula exact, sparse = oracle")


def test_acceptance_basis_correctness():
    worst_gram, worst_q = 0.0, 0.0
    for k in range(1, 6):
        for n in range(5):
            basis = build_basis(k, n)
            x, w = composite_gauss(n + 1, q=k + 2)
            for funcs in (basis.nodal, basis.hier):
                V = np.array([[f(xi) for xi in x] for f in funcs])
                G = (V * w) @ V.T
                worst_gram = max(worst_gram,
                                 np.abs(G - np.eye(len(funcs))).max())
            Q = basis.Q
            worst_q = max(worst_q, np.abs(Q @ Q.T - np.eye(Q.shape[0])).max())
    # degree-<k polynomial reproduction through projection
    worst_poly = 0.0
    rng = np.random.Generator(np.random.PCG64(7))
    for k in (2, 3, 5):
        coef = rng.standard_normal(k)
        p = np.polynomial.Polynomial(coef)
        c = project_1d(p, k, 2)
        g = dg_function(V2D(c, 1, k, 2, "sparse"))
        xs = rng.random(50)
        worst_poly = max(worst_poly,
                         max(abs(g(np.array([xi])) - p(xi)) for xi in xs))
    ok = worst_gram < 1e-12 and worst_q < 1e-12 and worst_poly < 1e-10
    report("basis correctness", ok,
           f"gram {worst_gram:.1e}, QQ^T {worst_q:.1e}, poly {worst_poly:.1e}")


def test_acceptance_derivative_structure():
    worst_skew = 0.0
    for k, n in product(range(1, 5), range(5)):
        M = derivative_1d_hier(k, n)
        worst_skew = max(worst_skew, np.abs(M + M.T).max())
    for D in (2, 3):
        for scheme in ("full", "sparse"):
            for k, n, a in [(2, 3, 1), (3, 2, 2), (4, 2, D)]:
                M = D_matrix(D, a, k, n, scheme)
                worst_skew = max(worst_skew, abs(M + M.T).max())

    # brute-force full operator oracle, D=2: dense Kronecker action
    exact = True
    for k in (1, 2):
        for n in (1, 2, 3):
            N = k * 2 ** n
            Dh = derivative_1d_hier(k, n)
            Dh = np.where(np.abs(Dh) > 1e-12 * np.abs(Dh).max(), Dh, 0.0)
            full_layout = Layout(2, k, n, "full")
            H = full_layout.axis_indices()
            F = np.zeros((full_layout.P, full_layout.P))
            for p in range(full_layout.P):
                for q in range(full_layout.P):
                    if H[p, 1] == H[q, 1]:
                        F[p, q] = Dh[H[p, 0], H[q, 0]]
            sparse_layout = Layout(2, k, n, "sparse")
            idx = [full_layout.flat_index(sparse_layout.multi_index(p))
                   for p in range(sparse_layout.P)]
            S = D_matrix(2, 1, k, n, "sparse").toarray()
            exact &= np.array_equal(S, F[np.ix_(idx, idx)])
    ok = worst_skew < 1e-10 and exact
    report("derivative structure", ok,
           f"max |M + M^T| = {worst_skew:.1e}, restriction exact = {exact}")


def test_acceptance_nnz_scaling():
    Ps, nnzs = [], []
    for n in range(2, 8):
        Ps.append(space_dim(3, 3, n, "sparse"))
        nnzs.append(operator_nnz(D_matrix(3, 1, 3, n, "sparse")))
    slope = float(np.polyfit(np.log(Ps), np.log(nnzs), 1)[0])
    pair_slopes = np.diff(np.log(nnzs)) / np.diff(np.log(Ps))
    ok = 1.0 <= slope <= 1.3
    report("nnz scaling slope in [1.0, 1.3]", ok,
           f"fit {slope:.3f} over n=2..7 "
           f"(consecutive slopes {np.round(pair_slopes, 2).tolist()}, "
           f"trending to 1 as the criterion's source predicts; the equal-"
           f"weight fit is dominated by the sparse n=2,3 points)")


def test_acceptance_table1_sparse_errors():
    A, phase = 1.3, 0.4
    mvec = [1, 0, -1, 2, 1]
    w = 2 * np.pi * np.asarray(mvec, dtype=float)
    exact = lambda X: A * np.cos(X @ w + phase)
    targets = {1: 1.1e-1, 2: 9.9e-3, 3: 8.0e-4, 4: 5.0e-5}
    ratios = {}
    for n, target in targets.items():
        v = _sine_wave_vector(5, 5, n, mvec, A, phase, "sparse")
        err = mcerr(dg_function(V2D(v, 5, 5, n, "sparse")), exact, 5)
        ratios[n] = err / target
    ok = all(1 / 5 <= r <= 5 for r in ratios.values())
    report("5D sparse interpolation vs reference column", ok,
           "err/target = " + ", ".join(f"n={n}: {r:.2f}"
                                       for n, r in ratios.items()))


def test_acceptance_interpolation_trend():
    A, phase = 1.3, 0.4
    mvec = [1, 2, -1]
    w = 2 * np.pi * np.asarray(mvec, dtype=float)
    exact = lambda X: A * np.cos(X @ w + phase)

    def err(k, n):
        v = _sine_wave_vector(3, k, n, mvec, A, phase, "sparse")
        return mcerr(dg_function(V2D(v, 3, k, n, "sparse")), exact, 3,
                     count=2000)

    e4 = {k: err(k, 4) for k in range(1, 6)}
    gain = e4[1] / e4[5]
    # per-level ratios at the resolved end of the range
    level_ok, ratios = True, {}
    for k in (3, 4, 5):
        r = np.log2(np.array([err(k, n) / err(k, n + 1) for n in (5, 6)]))
        ratios[k] = float(r.mean())
        level_ok &= k - 2.0 <= ratios[k] <= k + 1.0
    ok = gain >= 100 and level_ok
    report("interpolation convergence trend", ok,
           f"k=1 -> k=5 error gain {gain:.0f}x at n=4; "
           f"per-level log2 ratios {ratios} (target ~k)")


def test_acceptance_wave_evolution():
    # 1D standing wave
    t1 = 0.25
    traj = wave_evolve(1, 4, 5, lambda x: np.sin(2 * np.pi * x), 0, 0.0, t1)
    exact1 = lambda X: np.cos(2 * np.pi * t1) * np.sin(2 * np.pi * X[..., 0])
    e1 = mcerr(dg_function(V2D(traj.final_state().phi, 1, 4, 5, "sparse")),
               exact1, 1)

    # 3D travelling wave, n = 2..5
    A, phase, t1 = 1.3, 0.4, 0.54
    mvec = [1, 2, -1]
    w = 2 * np.pi * np.asarray(mvec, dtype=float)
    omega = 2 * np.pi * float(np.linalg.norm(mvec))
    exact3 = lambda X: A * np.cos(X @ w + phase + omega * t1)
    errs3 = []
    for n in (2, 3, 4, 5):
        traj = travelling_wave_solver(3, 5, n, mvec, 0.0, t1, phase=phase, A=A)
        errs3.append(mcerr(
            dg_function(V2D(traj.final_state().phi, 3, 5, n, "sparse")),
            exact3, 3))
    decreasing3 = all(a > b for a, b in zip(errs3, errs3[1:]))

    ok = e1 < 1e-3 and decreasing3 and errs3[-1] < 1e-3
    report("wave evolution (1D standing, 3D travelling)", ok,
           f"standing {e1:.2e}; travelling n=2..5 "
           + ", ".join(f"{e:.2e}" for e in errs3))


def test_acceptance_high_dimensional_waves():
    # 5D / 6D property checks at workstation-scale levels
    A, phase, t1 = 1.3, 0.4, 0.54
    results = {}
    for D, mvec, levels in [(5, [1, 0, -1, 2, 1], (1, 2, 3)),
                            (6, [1, 0, -1, 2, 1, -1], (1, 2))]:
        w = 2 * np.pi * np.asarray(mvec, dtype=float)
        omega = 2 * np.pi * float(np.linalg.norm(mvec))
        exact = lambda X: A * np.cos(X @ w + phase + omega * t1)
        opts = EvolveOptions(abs_tol=1e-6, rel_tol=1e-6,
                             laplacian_mode="matvec")
        errs = []
        for n in levels:
            traj = travelling_wave_solver(D, 5, n, mvec, 0.0, t1,
                                          phase=phase, A=A, opts=opts)
            errs.append(mcerr(
                dg_function(V2D(traj.final_state().phi, D, 5, n, "sparse")),
                exact, D))
        results[D] = errs
    ok = all(all(a > b for a, b in zip(e, e[1:])) and np.all(np.isfinite(e))
             for e in results.values())
    report("5D/6D travelling waves", ok,
           "; ".join(f"{D}D " + ", ".join(f"{x:.2e}" for x in e)
                     for D, e in results.items()))


def test_acceptance_energy_conservation():
    from sparsedg.operators import grad_matrix
    drifts = {}
    for D, k, n in [(1, 4, 4), (2, 3, 3)]:
        opts = EvolveOptions(integrator="rk78", abs_tol=1e-10, rel_tol=1e-10)
        traj = travelling_wave_solver(D, k, n, [1] * D, 0.0, 1.0, opts=opts)
        grads = grad_matrix(D, k, n)
        e0 = energy(WaveState(traj.phis[0], traj.psis[0]), grads)
        e1 = energy(traj.final_state(), grads)
        drifts[D] = abs(e1 / e0 - 1.0)
    ok = all(d < 1e-6 for d in drifts.values())
    report("energy conservation", ok,
           ", ".join(f"{D}D drift {d:.1e}" for D, d in drifts.items()))


def test_acceptance_determinism(tmp_path):
    args = ["interp", "--dim", "3", "--order", "2..3", "--levels", "2..3",
            "--scheme", "both", "--seed", "424242"]
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert cli_main(args + ["--out", str(path)]) == 0
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        # wall time is the one column the determinism contract excludes
        outs.append([{k: v for k, v in r.items() if k != "wall_ms"}
                     for r in rows])
    ok = outs[0] == outs[1]
    report("CSV determinism (numeric columns, fixed seed)", ok,
           f"{len(outs[0])} rows reproduced bit-for-bit")
