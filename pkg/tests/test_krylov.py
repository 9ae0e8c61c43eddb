import numpy as np
import pytest

from rsfde.krylov import BreakdownError, cg, pcg
from rsfde.oracle import assemble_T_dense
from rsfde.precond import average_coefficient, build_tau
from rsfde.problem import GridSpec, example1, sample_coefficient
from rsfde.stepper import build_operator


@pytest.fixture(scope="module")
def example_system():
    spec = example1()
    grid = GridSpec.create(spec, 8, 8)
    T = build_operator(spec, grid)
    r = sample_coefficient(spec, grid, 0)
    A = assemble_T_dense(T) + np.diag(r.ravel())
    b = np.random.default_rng(0).standard_normal(grid.shape)
    return spec, grid, T, r, A, b


def dense_op(A, shape):
    return lambda v: (A @ v.ravel()).reshape(shape)


def test_identity_one_iteration():
    b = np.random.default_rng(1).standard_normal(10)
    x, stats = cg(lambda v: v, b)
    assert stats.converged and stats.iterations == 1
    np.testing.assert_allclose(x, b)


def test_zero_rhs():
    x, stats = cg(lambda v: 2 * v, np.zeros(5))
    assert stats.iterations == 0 and stats.converged
    assert np.all(x == 0)


def test_cg_matches_direct_solve(example_system):
    _, grid, _, _, A, b = example_system
    tol = 1e-9
    x, stats = cg(dense_op(A, grid.shape), b, tol=tol)
    want = np.linalg.solve(A, b.ravel())
    assert stats.converged
    assert np.linalg.norm(x.ravel() - want) / np.linalg.norm(want) <= tol * 10 * np.linalg.cond(A)
    assert np.linalg.norm(b.ravel() - A @ x.ravel()) / np.linalg.norm(b) <= tol


def test_exact_preconditioner_one_iteration(example_system):
    _, grid, _, _, A, b = example_system
    Ainv = np.linalg.inv(A)
    _, stats = pcg(dense_op(A, grid.shape), dense_op(Ainv, grid.shape), b)
    assert stats.iterations == 1


def test_identity_preconditioner_reproduces_cg(example_system):
    _, grid, _, _, A, b = example_system
    x1, s1 = cg(dense_op(A, grid.shape), b)
    x2, s2 = pcg(dense_op(A, grid.shape), lambda v: v.copy(), b)
    assert s1.iterations == s2.iterations
    np.testing.assert_allclose(s1.history, s2.history, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(x1, x2, rtol=1e-13)


def test_tau_pcg_first_step_example1():
    spec = example1()
    grid = GridSpec.create(spec, 31, 8)
    T = build_operator(spec, grid)
    r = sample_coefficient(spec, grid, 0)
    P = build_tau(T.etas, spec.alphas, grid.shape, average_coefficient(r)[0])
    b = np.random.default_rng(2).standard_normal(grid.shape)
    _, stats = pcg(lambda v: r * v + T(v), P, b, tol=1e-9)
    assert stats.converged and stats.iterations <= 12


def test_a_norm_error_monotone(example_system):
    _, grid, _, _, A, b = example_system
    xstar = np.linalg.solve(A, b.ravel())
    errs = []

    def record(x):
        e = x.ravel() - xstar
        errs.append(float(np.sqrt(e @ A @ e)))

    cg(dense_op(A, grid.shape), b, tol=1e-12, callback=record)
    assert len(errs) > 3
    assert np.all(np.diff(errs) <= 1e-12 * errs[0])


def test_final_residual_is_true_residual(example_system):
    _, grid, T, r, A, b = example_system
    for P in (None, build_tau(T.etas, (1.5, 1.5), grid.shape, average_coefficient(r)[0])):
        x, stats = pcg(lambda v: r * v + T(v), P, b, tol=1e-9)
        fresh = np.linalg.norm(b - (r * x + T(x))) / np.linalg.norm(b)
        assert abs(fresh - stats.final_residual) <= 1e-10 * stats.final_residual + 1e-16
        assert stats.history[-1] == stats.final_residual


def test_deterministic(example_system):
    _, grid, _, _, A, b = example_system
    h1 = cg(dense_op(A, grid.shape), b)[1].history
    h2 = cg(dense_op(A, grid.shape), b)[1].history
    assert h1 == h2


def test_maxit_reports_non_convergence(example_system):
    _, grid, _, _, A, b = example_system
    _, stats = cg(dense_op(A, grid.shape), b, maxit=2)
    assert not stats.converged and stats.iterations == 2
    assert stats.final_residual > 1e-9


def test_default_maxit_is_number_of_unknowns():
    A = np.diag(np.logspace(0, 12, 16))
    _, stats = cg(lambda v: A @ v, np.ones(16), tol=1e-300)
    assert stats.iterations == 16


def test_breakdown_on_indefinite_operator():
    with pytest.raises(BreakdownError):
        cg(lambda v: -v, np.ones(4))
    with pytest.raises(BreakdownError):
        pcg(lambda v: v, lambda v: -v, np.ones(4))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        cg(lambda v: v, np.ones(3), tol=0)
    with pytest.raises(ValueError):
        cg(lambda v: v, np.array([1.0, np.nan]))
