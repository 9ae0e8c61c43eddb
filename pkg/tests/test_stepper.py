from dataclasses import replace

import numpy as np
import pytest

from rsfde.oracle import assemble_T_dense
from rsfde.problem import (
    BUMP,
    Domain,
    GridSpec,
    SeparablePolynomialSolution,
    example1,
    manufactured_problem,
    sample_coefficient,
    sample_source,
)
from rsfde.stepper import (
    ConvergenceFailure,
    build_operator,
    convergence_study,
    march,
    observed_orders,
    refine,
    stability_witness,
)


def test_zero_problem_stays_zero():
    dom = Domain.unit(2)
    spec = manufactured_problem(dom, (1.5, 1.5), (1.0, 1.0), 1.0, lambda X, t: 1.0 + 0 * X[0],
                                SeparablePolynomialSolution(0.0, (BUMP, BUMP), dom))
    u, rep = march(spec, GridSpec.create(spec, 7, 4))
    assert np.all(u == 0.0)
    assert rep.error == 0.0 and rep.max_iterations == 0


def test_one_step_matches_dense_crank_nicolson():
    spec = example1((1.3, 1.7))
    grid = GridSpec.create(spec, 6, 1)
    u, rep = march(spec, grid, tol=1e-13)
    Td = assemble_T_dense(build_operator(spec, grid))
    D = np.diag(sample_coefficient(spec, grid, 0).ravel())
    u0 = spec.initial(grid.mesh()).ravel()
    rhs = (D - Td) @ u0 + grid.dt * sample_source(spec, grid, grid.dt / 2).ravel()
    want = np.linalg.solve(D + Td, rhs)
    assert np.linalg.norm(u.ravel() - want) / np.linalg.norm(want) <= 1e-11


def test_tau_iterations_bounded():
    spec = example1()
    _, rep = march(spec, GridSpec.create(spec, 31, 8))
    assert rep.converged and rep.max_iterations <= 12
    assert len(rep.steps) == 8


@pytest.mark.parametrize("kind", ["strang", "chan", "none", None])
def test_preconditioners_give_same_solution(kind):
    spec = example1((1.2, 1.8))
    grid = GridSpec.create(spec, 15, 4)
    ref, _ = march(spec, grid, "tau", tol=1e-11)
    u, rep = march(spec, grid, kind, tol=1e-11)
    assert rep.converged
    assert np.linalg.norm(u - ref) / np.linalg.norm(ref) <= 1e-8


def test_geometric_rule():
    spec = example1()
    _, rep = march(spec, GridSpec.create(spec, 15, 4), rbar_rule="geometric")
    assert rep.converged and rep.max_iterations <= 12


def test_strict_failure_and_lenient_report():
    spec = example1()
    grid = GridSpec.create(spec, 15, 2)
    with pytest.raises(ConvergenceFailure) as info:
        march(spec, grid, "none", maxit=1)
    assert info.value.step == 0
    _, rep = march(spec, grid, "none", maxit=1, strict=False)
    assert not rep.converged


def test_unknown_preconditioner():
    with pytest.raises(ValueError):
        march(example1(), GridSpec.create(example1(), 3, 1), "jacobi")


def test_one_dimensional_problem():
    dom = Domain.unit(1)
    spec = manufactured_problem(dom, (1.4,), (2.0,), 0.5, lambda X, t: 1.0 + X[0], SeparablePolynomialSolution(1.0, (BUMP,), dom))
    _, coarse = march(spec, GridSpec.create(spec, 63, 4))
    _, fine = march(spec, GridSpec.create(spec, 63, 8))
    assert fine.error < coarse.error


def test_refine_and_orders():
    grid = GridSpec.create(example1(), 7, 4)
    assert refine(grid, "temporal").M == 8 and refine(grid, "temporal").n == (7, 7)
    assert refine(grid, "spatial").n == (15, 15) and refine(grid, "spatial").M == 4
    assert observed_orders([1.0, 0.25, 0.0625]) == [None, 2.0, 2.0]
    with pytest.raises(ValueError):
        refine(grid, "diagonal")


def test_short_temporal_study():
    spec = example1()
    rows = convergence_study(spec, GridSpec.create(spec, 31, 2), "temporal", 3)
    assert [r.M for r in rows] == [2, 4, 8]
    assert rows[0].order is None
    assert all(1.8 <= r.order <= 2.2 for r in rows[1:])


@pytest.mark.parametrize("m", [0, 3])
def test_stability_witness_methods_agree(m):
    spec = example1((1.3, 1.9))
    grid = GridSpec.create(spec, 8, 4)
    rho_s = stability_witness(spec, grid, m, "symmetric")
    rho_d = stability_witness(spec, grid, m, "direct")
    assert rho_s < 1.0
    assert rho_s == pytest.approx(rho_d, abs=1e-12)


@pytest.mark.parametrize("scale", ["coefficient", "diffusion"])
def test_stability_under_extreme_scaling(scale):
    base = example1()
    if scale == "coefficient":
        spec = replace(base, coefficient=lambda X, t: 1e6 * base.coefficient(X, t))
    else:
        spec = replace(base, diffusion=(1e8, 1e8))
    rho = stability_witness(spec, GridSpec.create(spec, 8, 4), 2)
    assert rho < 1.0


def test_stability_method_validation():
    with pytest.raises(ValueError):
        stability_witness(example1(), GridSpec.create(example1(), 3, 2), 0, "power")


@pytest.mark.parametrize("alphas, target", [((1.1, 1.2), 10), ((1.8, 1.9), 7)])
def test_table_scale_iteration_examples(alphas, target):
    spec = example1(alphas)
    _, tau = march(spec, GridSpec.create(spec, 63, 8))
    assert abs(tau.mean_iterations - target) <= 2
    small = GridSpec.create(spec, 15, 8)
    _, plain = march(spec, small, "none")
    _, tau_small = march(spec, small)
    assert plain.mean_iterations > tau_small.mean_iterations
