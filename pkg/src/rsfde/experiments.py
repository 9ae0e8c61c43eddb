"""Experiment drivers behind the command line.

Each ``run_*`` function takes an :class:`~rsfde.config.ExperimentConfig` and
returns a list of row dicts in deterministic config order; :func:`write_csv`
serializes them.  Columns whose name ends in ``wall_seconds`` are the only
non-reproducible values.
"""

from __future__ import annotations

import csv
import logging
import math
import os

import numpy as np

from . import oracle
from .config import ExperimentConfig
from .precond import average_coefficient, chan_column, strang_column
from .problem import sample_coefficient
from .stepper import Refinement, build_operator, convergence_study, march, stability_witness

__all__ = [
    "run_solve",
    "run_iterations_experiment",
    "run_convergence_experiment",
    "run_spectrum_experiment",
    "run_stability_experiment",
    "write_csv",
    "spectral_bounds",
]

logger = logging.getLogger(__name__)


def _format(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else f"{float(value):.17e}"
    if isinstance(value, (tuple, list)):
        return "x".join(str(v) for v in value)
    if value is None:
        return ""
    return str(value)


def write_csv(rows, path, columns=None) -> str:
    """Write ``rows`` with a header row; floats in full double precision."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row.get(c)) for c in columns])
    return path


def _grid_label(grid):
    return {"n": grid.n, "N": tuple(n + 1 for n in grid.n), "unknowns": grid.size, "M": grid.M}


def run_solve(config: ExperimentConfig):
    """One march per (grid, solver); returns ``(summary_rows, step_rows)``."""
    spec = config.problem.build()
    summary, steps = [], []
    for grid in config.grid_specs(spec):
        for solver in config.solvers:
            _, rep = march(spec, grid, solver.kind, tol=solver.tol, maxit=solver.maxit,
                           rbar_rule=solver.rbar_rule, strict=False)
            summary.append({
                "method": solver.label, **_grid_label(grid),
                "mean_iterations": rep.mean_iterations, "max_iterations": rep.max_iterations,
                "error": rep.error, "converged": rep.converged, "wall_seconds": rep.wall_time,
            })
            for m, s in enumerate(rep.steps):
                steps.append({
                    "method": solver.label, "n": grid.n, "M": grid.M, "step": m,
                    "iterations": s.iterations, "final_residual": s.final_residual, "converged": s.converged,
                })
    return summary, steps


def run_iterations_experiment(config: ExperimentConfig):
    """Per-step mean and max iteration counts for every (grid, solver) pair."""
    spec = config.problem.build()
    rows = []
    for grid in config.grid_specs(spec):
        for solver in config.solvers:
            _, rep = march(spec, grid, solver.kind, tol=solver.tol, maxit=solver.maxit,
                           rbar_rule=solver.rbar_rule, strict=False)
            rows.append({
                "method": solver.label, **_grid_label(grid),
                "mean_iterations": rep.mean_iterations, "max_iterations": rep.max_iterations,
                "converged": rep.converged, "wall_seconds": rep.wall_time,
            })
            logger.info("%s n=%s M=%d mean=%.2f", solver.label, grid.n, grid.M, rep.mean_iterations)
    return rows


def run_convergence_experiment(config: ExperimentConfig):
    """Errors and observed orders over ``experiment.levels`` refinements of the first grid."""
    kind = config.experiment.kind
    mode = Refinement.SPATIAL if kind == "convergence-spatial" else Refinement.TEMPORAL
    spec = config.problem.build()
    base = config.grid_specs(spec)[0]
    solver = config.solvers[0]
    rows = convergence_study(spec, base, mode, config.experiment.levels, solver.kind,
                             tol=solver.tol, rbar_rule=solver.rbar_rule)
    return [
        {
            "mode": mode.value, "n": r.n, "M": r.M, "h": r.h, "dt": r.dt, "error": r.error,
            "order": r.order, "coupling": r.dt**2 / r.h**4, "mean_iterations": r.mean_iterations,
        }
        for r in rows
    ]


def spectral_bounds(rmin: float, rmax: float) -> tuple:
    """Interval ``[min(rmin/rmax, 3/8), max(rmax/rmin, 2)]`` for the tau-preconditioned spectrum."""
    return min(rmin / rmax, 3.0 / 8.0), max(rmax / rmin, 2.0)


def last_step_spectra(spec, grid, rbar_rule="arithmetic") -> dict:
    """Dense spectra of ``A = D + T`` and its three preconditioned forms at the last step."""
    T = build_operator(spec, grid)
    Td = oracle.assemble_T_dense(T)
    r = sample_coefficient(spec, grid, grid.M - 1)
    A = Td + np.diag(r.ravel())
    rbar, rmin, rmax = average_coefficient(r, rbar_rule)
    eye = np.eye(grid.size)
    P_tau = oracle.assemble_tau_preconditioner_dense(T.etas, spec.alphas, grid.shape, rbar)
    circ = {}
    for name, rule in (("P_S", strang_column), ("P_T", chan_column)):
        mats = [oracle.assemble_circulant_dense(rule(b.column)) for b in T.blocks]
        circ[name] = oracle.kronecker_sum_dense(mats, T.etas) + rbar * eye
    return {
        "A": np.sort(np.linalg.eigvalsh(A)),
        "P_tau": oracle.generalized_spectrum(A, P_tau),
        "P_S": oracle.generalized_spectrum(A, circ["P_S"]),
        "P_T": oracle.generalized_spectrum(A, circ["P_T"]),
        "rmin": rmin,
        "rmax": rmax,
    }


def run_spectrum_experiment(config: ExperimentConfig):
    """Returns ``(spectrum_rows, summary_rows)``; spectra are sorted ascending."""
    spec = config.problem.build()
    rule = config.solvers[0].rbar_rule
    spectrum, summary = [], []
    for grid in config.grid_specs(spec):
        oracle._guard(grid.size)
        res = last_step_spectra(spec, grid, rule)
        lo, hi = spectral_bounds(res["rmin"], res["rmax"])
        for j in range(grid.size):
            spectrum.append({"n": grid.n, "M": grid.M, "index": j,
                             **{k: res[k][j] for k in ("A", "P_tau", "P_S", "P_T")}})
        for k in ("A", "P_tau", "P_S", "P_T"):
            ev = res[k]
            summary.append({
                "n": grid.n, "M": grid.M, "matrix": k, "min": ev[0], "max": ev[-1], "ratio": ev[-1] / ev[0],
                "bound_lower": lo if k == "P_tau" else None, "bound_upper": hi if k == "P_tau" else None,
            })
    return spectrum, summary


def run_stability_experiment(config: ExperimentConfig):
    spec = config.problem.build()
    rows = []
    for grid in config.grid_specs(spec):
        steps = config.experiment.steps
        if steps is None:
            steps = sorted({0, grid.M // 2, grid.M - 1})
        for m in steps:
            rho = stability_witness(spec, grid, m)
            rows.append({"n": grid.n, "M": grid.M, "step": m, "spectral_radius": rho, "stable": rho < 1.0})
    return rows
