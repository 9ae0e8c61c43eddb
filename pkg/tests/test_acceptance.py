"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
pytest terminal summary.  Criteria 9 to 11 march full problems and take a
minute or two in total.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from rsfde import oracle
from rsfde.config import ExperimentConfig
from rsfde.experiments import (
    last_step_spectra,
    run_convergence_experiment,
    run_iterations_experiment,
    spectral_bounds,
)
from rsfde.fcd import ALPHA_STAR, fcd4_coefficients, fcd4_symbol
from rsfde.precond import apply_tau_inverse, build_tau
from rsfde.problem import GridSpec, discrete_l2_norm, example1
from rsfde.stepper import build_operator, stability_witness
from rsfde.structured_ops import KroneckerSumOperator, SymmetricToeplitz1D, apply_operator


def relerr(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_criterion_01_coefficients_vs_quadrature(criterion):
    worst = 0.0
    for alpha in (1.1, 1.5, 1.9):
        got = fcd4_coefficients(alpha, 8).values
        for k in range(9):
            val, _ = quad(lambda th: fcd4_symbol(alpha, th) * np.cos(k * th), 0, np.pi, epsabs=1e-14, limit=400)
            worst = max(worst, abs(got[k] - val / np.pi))
    criterion(1, "fcd4_coefficients(alpha, 8) vs Fourier quadrature", worst <= 1e-10, f"max abs err {worst:.2e}")


def test_criterion_02_coefficient_properties(criterion):
    rng = np.random.default_rng(20240601)
    failures = []
    for alpha in rng.uniform(1.0001, 1.9999, 200):
        table = fcd4_coefficients(alpha, 50)
        s = table.values
        sums = np.array([table.partial_sum(K) for K in range(2, 51)])
        checks = {
            "symmetric": all(table[k] == table[-k] for k in range(51)),
            "s0>0": s[0] > 0,
            "s1<0": s[1] < 0,
            "sk<=0": bool(np.all(s[3:] <= 0)),
            "s2 sign": (s[2] <= 0) if alpha < ALPHA_STAR - 1e-3 else (s[2] >= 0) if alpha > ALPHA_STAR + 1e-3 else True,
            "partial sums": bool(np.all(sums > 0) and np.all(np.diff(sums) <= 0)),
        }
        failures += [(alpha, name) for name, ok in checks.items() if not ok]
    criterion(2, "coefficient sign/symmetry/decay suite, 200 alphas, K=50", not failures,
              f"{len(failures)} failures" if failures else "all hold")


def test_criterion_03_fast_operator_vs_dense(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for shape in [(8,), (5,), (8, 8), (3, 7), (4, 4, 4), (8, 3, 5)]:
        blocks = [SymmetricToeplitz1D(fcd4_coefficients(rng.uniform(1.05, 1.95), n - 1).values) for n in shape]
        T = KroneckerSumOperator(blocks, rng.uniform(0.1, 100, len(shape)))
        A = oracle.assemble_T_dense(T)
        for _ in range(50):
            u = rng.standard_normal(shape)
            worst = max(worst, relerr(apply_operator(T, u).ravel(), A @ u.ravel()))
    criterion(3, "apply_operator vs dense Kronecker sum, d=1..3", worst <= 1e-12, f"max rel err {worst:.2e}")


def test_criterion_04_tau_inverse_vs_dense(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for shape in [(8, 8), (4, 4, 4)]:
        etas = rng.uniform(1, 100, len(shape))
        alphas = rng.uniform(1.05, 1.95, len(shape))
        rbar = 0.02
        P = build_tau(etas, alphas, shape, rbar)
        dense = oracle.assemble_tau_preconditioner_dense(etas, alphas, shape, rbar)
        for _ in range(10):
            v = rng.standard_normal(shape)
            worst = max(worst, relerr(apply_tau_inverse(P, v).ravel(), np.linalg.solve(dense, v.ravel())))
    criterion(4, "apply_tau_inverse vs dense solve, (8,8) and (4,4,4)", worst <= 1e-11, f"max rel err {worst:.2e}")


def test_criterion_05_one_dimensional_tau_bound(criterion):
    lo, hi = np.inf, -np.inf
    for n in (8, 16, 32):
        for alpha in (1.1, 1.5, 1.9):
            ev = oracle.generalized_spectrum(oracle.fcd4_toeplitz_dense(alpha, n), oracle.assemble_tau_dense(alpha, n))
            lo, hi = min(lo, ev[0]), max(hi, ev[-1])
    ok = lo >= 0.375 - 1e-10 and hi <= 2 + 1e-10
    criterion(5, "spectrum of P_alpha^-1 S_n in [3/8, 2]", ok, f"observed [{lo:.4f}, {hi:.4f}]")


def test_criterion_06_preconditioned_spectrum_bound(criterion):
    spec = example1()
    grid = GridSpec.create(spec, 16, 16)
    res = last_step_spectra(spec, grid)
    lo, hi = spectral_bounds(res["rmin"], res["rmax"])
    ev = res["P_tau"]
    ok = ev[0] >= lo - 1e-10 and ev[-1] <= hi + 1e-10
    criterion(6, "spectrum of P_tau^-1 A at the last step, n=(16,16)", ok,
              f"observed [{ev[0]:.4f}, {ev[-1]:.4f}] within [{lo:.4f}, {hi:.4f}]")


def test_criterion_07_stability(criterion):
    spec = example1()
    grid = GridSpec.create(spec, 8, 16)
    rhos = {m: stability_witness(spec, grid, m) for m in (0, grid.M // 2, grid.M - 1)}
    detail = ", ".join(f"m={m}: {r:.8f}" for m, r in rhos.items())
    criterion(7, "Crank-Nicolson spectral radius < 1, n=(8,8)", all(r < 1 for r in rhos.values()), detail)


def test_criterion_08_quadratic_form_and_lambda_min(criterion):
    spec = example1()
    grid = GridSpec.create(spec, 8, 16)
    T = build_operator(spec, grid)
    C = oracle.lemma_constant(spec.domain.lower, spec.domain.upper, spec.alphas)
    rng = np.random.default_rng(8)
    worst_ratio = np.inf
    for _ in range(50):
        u = rng.standard_normal(grid.shape)
        lhs = np.prod(grid.h) * np.vdot(u, apply_operator(T, u))
        worst_ratio = min(worst_ratio, lhs / (C * min(spec.diffusion) * grid.dt * discrete_l2_norm(u, grid) ** 2))
    lam_ok = True
    for n in range(1, 33):
        for alpha in (1.1, 1.5, 1.9):
            lam = np.linalg.eigvalsh(oracle.fcd4_toeplitz_dense(alpha, n))[0]
            lam_ok &= lam >= oracle.toeplitz_lambda_min_bound(alpha, n)
    criterion(8, "quadratic form lower bound and lambda_min(S_n) bound", worst_ratio >= 1 and lam_ok,
              f"min ratio u'Tu / bound = {worst_ratio:.3f}, lambda_min bound holds for n<=32: {lam_ok}")


def _convergence_rows(problem, n, M, kind, levels):
    cfg = ExperimentConfig.from_dict({
        "problem": problem,
        "grids": [{"n": n, "M": M}],
        "experiment": {"kind": kind, "levels": levels},
    })
    return run_convergence_experiment(cfg)


@pytest.mark.slow
def test_criterion_09_convergence_orders(criterion):
    start = time.perf_counter()
    results = {}
    # Example 1, h = 2^-6 fixed, dt = 1/2 .. 1/16
    rows = _convergence_rows({"name": "example1"}, 63, 2, "convergence-temporal", 4)
    results["ex1 temporal"] = ([r["order"] for r in rows[1:]], 1.8, 2.2)
    # Example 1, h = 2^-3 .. 2^-6 at dt = 1/2048
    rows = _convergence_rows({"name": "example1"}, 7, 2048, "convergence-spatial", 4)
    results["ex1 spatial"] = ([r["order"] for r in rows[1:]], 3.7, 4.3)
    # Example 2 spot check on coarser grids
    rows = _convergence_rows({"name": "example2"}, 31, 2, "convergence-temporal", 4)
    results["ex2 temporal"] = ([r["order"] for r in rows[1:]], 1.8, 2.2)
    rows = _convergence_rows({"name": "example2"}, 7, 256, "convergence-spatial", 3)
    results["ex2 spatial"] = ([rows[-1]["order"]], 3.7, 4.3)

    ok = all(lo <= o <= hi for orders, lo, hi in results.values() for o in orders)
    detail = "; ".join(f"{k}: {', '.join(f'{o:.2f}' for o in v[0])}" for k, v in results.items())
    criterion(9, "observed temporal (2) and spatial (4) orders", ok, f"{detail}; {time.perf_counter() - start:.0f}s")


@pytest.fixture(scope="module")
def iteration_sweep():
    sweep = {}
    for alphas in ((1.1, 1.2), (1.8, 1.9)):
        cfg = ExperimentConfig.from_dict({
            "problem": {"name": "example1", "alphas": list(alphas)},
            "grids": [{"n": 2**k - 1, "M": 2 ** (k - 1)} for k in (4, 5, 6)],
            "solvers": [
                {"method": "pcg", "preconditioner": "tau", "tol": 1e-9},
                {"method": "pcg", "preconditioner": "strang", "tol": 1e-9},
                {"method": "pcg", "preconditioner": "chan", "tol": 1e-9},
                {"method": "cg", "tol": 1e-9},
            ],
        })
        table = {}
        for row in run_iterations_experiment(cfg):
            assert row["converged"], row
            table.setdefault(row["method"], []).append(row["mean_iterations"])
        sweep[alphas] = table
    return sweep


def _fmt(values):
    return "/".join(f"{v:.1f}" for v in values)


@pytest.mark.slow
def test_criterion_10_mesh_independent_iterations(criterion, iteration_sweep):
    ok, parts = True, []
    for alphas, table in iteration_sweep.items():
        tau, plain = table["P_tau-CG"], table["CG"]
        ok &= max(tau) <= 12 and max(tau) - min(tau) <= 2
        ok &= all(a < b for a, b in zip(plain[:-1], plain[1:]))
        parts.append(f"alpha={alphas}: tau {_fmt(tau)}, CG {_fmt(plain)}")
    criterion(10, "P_tau-CG mean iterations <= 12 with spread <= 2, CG increasing", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_11_circulant_comparison(criterion, iteration_sweep):
    ok, parts = True, []
    for alphas, table in iteration_sweep.items():
        tau = table["P_tau-CG"]
        for label in ("P_S-CG", "P_T-CG"):
            its = table[label]
            ok &= all(c > t for c, t in zip(its, tau))
            ok &= all(a < b for a, b in zip(its[:-1], its[1:]))
            parts.append(f"alpha={alphas} {label}: {_fmt(its)}")
    criterion(11, "Strang and Chan PCG need more iterations than tau and grow with n", ok, "; ".join(parts))


def test_lemma_constant_closed_form():
    # guards the constant used in criterion 8 against an independent evaluation
    C = oracle.lemma_constant((0.0, 0.0), (1.0, 1.0), (1.5, 1.5))
    assert C == pytest.approx((1 - 1 / math.pi) * (2 / math.pi) ** 1.5, rel=1e-15)
