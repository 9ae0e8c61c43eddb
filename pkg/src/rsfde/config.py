"""Experiment configuration: JSON schema, parsing and problem construction."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import jsonschema
import numpy as np
import sympy

from .problem import Domain, ProblemSpec, SeparablePolynomialSolution, builtin_problem, manufactured_problem

__all__ = [
    "CONFIG_SCHEMA",
    "EXPERIMENT_KINDS",
    "ConfigError",
    "ProblemConfig",
    "GridConfig",
    "SolverConfig",
    "ExperimentSettings",
    "ExperimentConfig",
    "load_config",
    "compile_coefficient",
]

EXPERIMENT_KINDS = ("solve", "convergence-temporal", "convergence-spatial", "iterations", "spectrum", "stability")

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
# optional problem fields may be null so that to_dict() output validates again
_optional_list = {"type": ["array", "null"], "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "rsfde experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["problem", "grids"],
    "properties": {
        "problem": {
            "type": "object",
            "additionalProperties": False,
            "description": "Either a builtin name (example1, example2) or an inline definition.",
            "properties": {
                "name": {"type": ["string", "null"], "description": "builtin problem name"},
                "alphas": {**_optional_list, "description": "fractional order per dimension, each in (1, 2)"},
                "lower": {**_optional_list, "description": "inline: lower domain bounds"},
                "upper": {**_optional_list, "description": "inline: upper domain bounds"},
                "diffusion": {**_optional_list, "description": "inline: K_i > 0 per dimension"},
                "final_time": {"type": "number", "exclusiveMinimum": 0},
                "amplitude": {"type": "number", "description": "inline: exact solution amplitude"},
                "factors": {
                    "type": ["array", "null"],
                    "items": _number_list,
                    "description": "inline: per-dimension polynomial coefficients (ascending powers, on [0, 1])",
                },
                "coefficient": {
                    "type": ["string", "null"],
                    "description": "inline: expression for r in x1..xd and t, e.g. '(x1**2 + exp(-t))/100'",
                },
            },
        },
        "grids": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["n", "M"],
                "properties": {
                    "n": {
                        "description": "interior points per dimension (integer or list)",
                        "oneOf": [
                            {"type": "integer", "minimum": 1},
                            {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                        ],
                    },
                    "M": {"type": "integer", "minimum": 1, "description": "number of time steps"},
                },
            },
        },
        "solvers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "method": {"enum": ["cg", "pcg"]},
                    "preconditioner": {
                        "enum": ["tau", "strang", "chan", "none", None],
                        "description": "default: tau for pcg, none for cg",
                    },
                    "tol": {"type": "number", "exclusiveMinimum": 0},
                    "maxit": {"type": ["integer", "null"], "minimum": 1},
                    "rbar_rule": {"enum": ["arithmetic", "geometric"]},
                },
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(EXPERIMENT_KINDS)},
                "levels": {"type": "integer", "minimum": 1, "description": "convergence: number of levels"},
                "steps": {
                    "type": ["array", "null"],
                    "items": {"type": "integer", "minimum": 0},
                    "description": "stability: step indices (default 0, M/2, M-1)",
                },
            },
        },
        "output_dir": {"type": "string"},
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class ProblemConfig:
    name: Optional[str] = "example1"
    alphas: Optional[list] = None
    lower: Optional[list] = None
    upper: Optional[list] = None
    diffusion: Optional[list] = None
    final_time: float = 1.0
    amplitude: float = 1.0
    factors: Optional[list] = None
    coefficient: Optional[str] = None

    def build(self) -> ProblemSpec:
        if self.name:
            return builtin_problem(self.name, self.alphas)
        missing = [k for k in ("alphas", "lower", "upper", "diffusion", "factors", "coefficient") if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"inline problem is missing {', '.join(missing)}")
        dom = Domain(tuple(self.lower), tuple(self.upper))
        exact = SeparablePolynomialSolution(self.amplitude, tuple(tuple(f) for f in self.factors), dom)
        r = compile_coefficient(self.coefficient, dom.dimension)
        return manufactured_problem(dom, self.alphas, self.diffusion, self.final_time, r, exact, name="inline")


@dataclass
class GridConfig:
    n: object
    M: int


@dataclass
class SolverConfig:
    method: str = "pcg"
    preconditioner: Optional[str] = None
    tol: float = 1e-9
    maxit: Optional[int] = None
    rbar_rule: str = "arithmetic"

    def __post_init__(self):
        if self.method == "cg" and self.preconditioner not in (None, "none"):
            raise ConfigError(f"method 'cg' takes no preconditioner, got {self.preconditioner!r}")

    @property
    def kind(self) -> str:
        if self.preconditioner is not None:
            return self.preconditioner
        return "none" if self.method == "cg" else "tau"

    @property
    def label(self) -> str:
        return {"none": "CG", "tau": "P_tau-CG", "strang": "P_S-CG", "chan": "P_T-CG"}[self.kind]


@dataclass
class ExperimentSettings:
    kind: str = "solve"
    levels: int = 4
    steps: Optional[list] = None


@dataclass
class ExperimentConfig:
    problem: ProblemConfig
    grids: list
    solvers: list = field(default_factory=lambda: [SolverConfig()])
    experiment: ExperimentSettings = field(default_factory=ExperimentSettings)
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {path}: {exc.message}") from None
        return cls(
            problem=ProblemConfig(**data["problem"]),
            grids=[GridConfig(**g) for g in data["grids"]],
            solvers=[SolverConfig(**s) for s in data.get("solvers", [{}])],
            experiment=ExperimentSettings(**data.get("experiment", {})),
            output_dir=data.get("output_dir", "out"),
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def grid_specs(self, spec: ProblemSpec):
        from .problem import GridSpec

        return [GridSpec.create(spec, g.n, g.M) for g in self.grids]


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return ExperimentConfig.from_dict(data)


def compile_coefficient(expression: str, d: int):
    """Turn an expression in ``x1..xd`` and ``t`` into a vectorized ``r(X, t)``."""
    xs = sympy.symbols(" ".join(f"x{i + 1}" for i in range(d)), seq=True)
    t = sympy.Symbol("t")
    allowed = {str(s): s for s in (*xs, t)}
    try:
        expr = sympy.sympify(expression, locals=allowed)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse coefficient expression {expression!r}: {exc}") from None
    unknown = {str(s) for s in expr.free_symbols} - set(allowed)
    if unknown:
        raise ConfigError(f"coefficient expression uses unknown symbols {sorted(unknown)}")
    fn = sympy.lambdify((*xs, t), expr, modules="numpy")

    def coefficient(X, tt):
        return np.asarray(fn(*X, tt), dtype=float)

    coefficient.expression = expression
    return coefficient
