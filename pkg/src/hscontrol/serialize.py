"""JSON input and output for spaces, operators, systems, costs, and vectors.

The on-disk format mirrors how problems are assembled in code: a file names
its spaces once, then gives each operator family either as a single stage
object (reused at every step) or as a list with one object per step.
Parsing is strict.  Unknown variants, missing keys, and shape mismatches
raise ParseError before any solver sees the data; the model assumptions
checked by the system constructors surface as AssumptionError with the
offending step in the message.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .operators import (
    DenseOperator,
    DiagonalOperator,
    FillingOperator,
    GaussianConvolutionOperator,
    HeatSemigroupOperator,
    IdentityOperator,
    Operator,
    RightShiftOperator,
    ScaledOperator,
    ZeroOperator,
)
from .spaces import (
    HVector,
    KIND_ELL2,
    KIND_EUCLIDEAN,
    KIND_L2_INTERVAL,
    KIND_L2_LINE,
    Space,
    ell2,
    euclidean,
    l2_interval,
    l2_line,
)
from .systems import ControlledSystem, CostSpec, DisturbedSystem, TwoInputSystem


def _require(obj, key: str, what: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise ParseError(f"{what}: missing key {key!r}")
    return obj[key]


def _number(obj, key: str, what: str, default=None) -> float:
    val = obj.get(key, default) if isinstance(obj, dict) else None
    if val is None:
        val = _require(obj, key, what)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ParseError(f"{what}: key {key!r} must be a number")
    return float(val)


def space_from_json(obj, what: str = "space") -> Space:
    kind = _require(obj, "kind", what)
    if kind == KIND_ELL2:
        return ell2(int(_number(obj, "dim", what, 64)))
    if kind == KIND_EUCLIDEAN:
        return euclidean(int(_number(obj, "dim", what)))
    if kind == KIND_L2_LINE:
        return l2_line(_number(obj, "half_width", what, 10.0), _number(obj, "spacing", what, 0.05))
    if kind == KIND_L2_INTERVAL:
        return l2_interval(_number(obj, "length", what, 1.0), int(_number(obj, "modes", what, 64)))
    raise ParseError(f"{what}: unknown space kind {kind!r}")


def space_to_json(space: Space) -> dict:
    if space.kind == KIND_L2_LINE:
        return {"kind": space.kind, "half_width": space.half_width, "spacing": space.spacing}
    if space.kind == KIND_L2_INTERVAL:
        return {"kind": space.kind, "length": space.length, "modes": space.dim}
    return {"kind": space.kind, "dim": space.dim}


def operator_from_json(obj, domain: Space, codomain: Space, what: str = "operator") -> Operator:
    variant = _require(obj, "variant", what)
    square = domain == codomain
    if variant == "zero":
        return ZeroOperator(domain, codomain)
    if variant in ("identity", "diagonal", "gaussian_convolution", "heat_semigroup"):
        if not square:
            raise ParseError(f"{what}: variant {variant!r} needs matching domain and codomain")
    if variant == "identity":
        return IdentityOperator(domain)
    if variant == "right_shift":
        if codomain.dim < domain.dim:
            raise ParseError(f"{what}: shift codomain cannot be smaller than its domain")
        return RightShiftOperator(domain, codomain)
    if variant == "diagonal":
        entries = _require(obj, "entries", what)
        if not isinstance(entries, list) or len(entries) != domain.dim:
            raise ParseError(f"{what}: diagonal needs {domain.dim} entries")
        return DiagonalOperator(np.asarray(entries, dtype=float), domain)
    if variant == "gaussian_convolution":
        return GaussianConvolutionOperator(domain, _number(obj, "kernel_width", what, 1.0))
    if variant == "heat_semigroup":
        return HeatSemigroupOperator(domain, _number(obj, "alpha", what), _number(obj, "tau", what))
    if variant == "filling":
        count = obj.get("count")
        if count is not None:
            count = int(count)
        return FillingOperator(domain, codomain, count)
    if variant == "scaled":
        inner = operator_from_json(_require(obj, "of", what), domain, codomain, what)
        return ScaledOperator(_number(obj, "factor", what), inner)
    if variant == "dense":
        matrix = _require(obj, "matrix", what)
        try:
            m = np.asarray(matrix, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{what}: matrix is not numeric") from exc
        if m.shape != (codomain.dim, domain.dim):
            raise ParseError(
                f"{what}: matrix shape {m.shape} does not match "
                f"({codomain.dim}, {domain.dim})"
            )
        return DenseOperator(m, domain, codomain)
    raise ParseError(f"{what}: unknown operator variant {variant!r}")


def operator_to_json(op: Operator) -> dict:
    if isinstance(op, ZeroOperator):
        return {"variant": "zero"}
    if isinstance(op, IdentityOperator):
        return {"variant": "identity"}
    if isinstance(op, RightShiftOperator):
        return {"variant": "right_shift"}
    if isinstance(op, DiagonalOperator):
        return {"variant": "diagonal", "entries": op.entries.tolist()}
    if isinstance(op, FillingOperator):
        return {"variant": "filling", "count": op.count}
    if isinstance(op, GaussianConvolutionOperator):
        return {"variant": "gaussian_convolution", "kernel_width": op.kernel_width}
    if isinstance(op, HeatSemigroupOperator):
        return {"variant": "heat_semigroup", "alpha": op.alpha, "tau": op.tau}
    if isinstance(op, ScaledOperator):
        return {"variant": "scaled", "factor": op.factor, "of": operator_to_json(op.inner_op)}
    # anything else (dense, sums, compositions) flattens to its matrix
    return {"variant": "dense", "matrix": op.matrix.tolist()}


def family_from_json(obj, steps: int, domain: Space, codomain: Space, what: str) -> list[Operator]:
    if isinstance(obj, list):
        if len(obj) != steps:
            raise ParseError(f"{what}: expected {steps} stage operators, got {len(obj)}")
        return [operator_from_json(o, domain, codomain, f"{what}[{k}]") for k, o in enumerate(obj)]
    op = operator_from_json(obj, domain, codomain, what)
    return [op] * steps


def family_to_json(family) -> dict | list:
    stages = [operator_to_json(family(k)) for k in range(family.steps)]
    if all(s == stages[0] for s in stages):
        return stages[0]
    return stages


def system_from_json(obj):
    kind = _require(obj, "type", "system")
    horizon = int(_number(obj, "horizon", "system"))
    steps = horizon + 1
    if kind == "controlled":
        hs = space_from_json(_require(obj, "state_space", "system"), "state_space")
        us = space_from_json(_require(obj, "control_space", "system"), "control_space")
        return ControlledSystem(
            hs,
            us,
            horizon,
            family_from_json(_require(obj, "a", "system"), steps, hs, hs, "a"),
            family_from_json(_require(obj, "b", "system"), steps, us, hs, "b"),
            family_from_json(_require(obj, "c", "system"), steps, hs, hs, "c"),
            family_from_json(_require(obj, "d", "system"), steps, us, hs, "d"),
        )
    if kind == "disturbed":
        hs = space_from_json(_require(obj, "state_space", "system"), "state_space")
        vs = space_from_json(_require(obj, "disturbance_space", "system"), "disturbance_space")
        zs = space_from_json(_require(obj, "output_space", "system"), "output_space")
        return DisturbedSystem(
            hs,
            vs,
            zs,
            horizon,
            family_from_json(_require(obj, "a", "system"), steps, hs, hs, "a"),
            family_from_json(_require(obj, "b1", "system"), steps, vs, hs, "b1"),
            family_from_json(_require(obj, "c", "system"), steps, hs, hs, "c"),
            family_from_json(_require(obj, "d1", "system"), steps, vs, hs, "d1"),
            family_from_json(_require(obj, "cbar", "system"), steps, hs, zs, "cbar"),
            family_from_json(_require(obj, "dbar", "system"), steps, vs, zs, "dbar"),
        )
    if kind == "two_input":
        hs = space_from_json(_require(obj, "state_space", "system"), "state_space")
        vs = space_from_json(_require(obj, "disturbance_space", "system"), "disturbance_space")
        us = space_from_json(_require(obj, "control_space", "system"), "control_space")
        zs = space_from_json(_require(obj, "output_space", "system"), "output_space")
        return TwoInputSystem(
            hs,
            vs,
            us,
            zs,
            horizon,
            family_from_json(_require(obj, "a", "system"), steps, hs, hs, "a"),
            family_from_json(_require(obj, "b1", "system"), steps, vs, hs, "b1"),
            family_from_json(_require(obj, "b2", "system"), steps, us, hs, "b2"),
            family_from_json(_require(obj, "c", "system"), steps, hs, hs, "c"),
            family_from_json(_require(obj, "d1", "system"), steps, vs, hs, "d1"),
            family_from_json(_require(obj, "d2", "system"), steps, us, hs, "d2"),
            family_from_json(_require(obj, "cbar", "system"), steps, hs, zs, "cbar"),
            family_from_json(_require(obj, "gbar", "system"), steps, us, zs, "gbar"),
        )
    raise ParseError(f"system: unknown type {kind!r}")


def system_to_json(system) -> dict:
    if isinstance(system, ControlledSystem):
        return {
            "type": "controlled",
            "state_space": space_to_json(system.state_space),
            "control_space": space_to_json(system.control_space),
            "horizon": system.horizon,
            "a": family_to_json(system.a),
            "b": family_to_json(system.b),
            "c": family_to_json(system.c),
            "d": family_to_json(system.d),
        }
    if isinstance(system, DisturbedSystem):
        return {
            "type": "disturbed",
            "state_space": space_to_json(system.state_space),
            "disturbance_space": space_to_json(system.disturbance_space),
            "output_space": space_to_json(system.output_space),
            "horizon": system.horizon,
            "a": family_to_json(system.a),
            "b1": family_to_json(system.b1),
            "c": family_to_json(system.c),
            "d1": family_to_json(system.d1),
            "cbar": family_to_json(system.cbar),
            "dbar": family_to_json(system.dbar),
        }
    if isinstance(system, TwoInputSystem):
        return {
            "type": "two_input",
            "state_space": space_to_json(system.state_space),
            "disturbance_space": space_to_json(system.disturbance_space),
            "control_space": space_to_json(system.control_space),
            "output_space": space_to_json(system.output_space),
            "horizon": system.horizon,
            "a": family_to_json(system.a),
            "b1": family_to_json(system.b1),
            "b2": family_to_json(system.b2),
            "c": family_to_json(system.c),
            "d1": family_to_json(system.d1),
            "d2": family_to_json(system.d2),
            "cbar": family_to_json(system.cbar),
            "gbar": family_to_json(system.gbar),
        }
    raise ParseError(f"cannot serialize {type(system).__name__}")


def cost_from_json(obj, system: ControlledSystem) -> CostSpec:
    hs, us = system.state_space, system.control_space
    steps = system.steps
    return CostSpec(
        system,
        family_from_json(_require(obj, "m", "cost"), steps, hs, hs, "m"),
        family_from_json(_require(obj, "l", "cost"), steps, hs, us, "l"),
        family_from_json(_require(obj, "r", "cost"), steps, us, us, "r"),
        operator_from_json(_require(obj, "terminal", "cost"), hs, hs, "terminal"),
    )


def cost_to_json(cost: CostSpec) -> dict:
    return {
        "m": family_to_json(cost.m),
        "l": family_to_json(cost.l),
        "r": family_to_json(cost.r),
        "terminal": operator_to_json(cost.terminal),
    }


def vector_from_json(obj, space: Space, what: str = "vector") -> HVector:
    coords = _require(obj, "coords", what)
    if not isinstance(coords, list):
        raise ParseError(f"{what}: coords must be a list")
    if len(coords) != space.dim:
        raise ParseError(f"{what}: expected {space.dim} coordinates, got {len(coords)}")
    try:
        c = np.asarray(coords, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: coords are not numeric") from exc
    return HVector(space, c)


def vector_to_json(x: HVector) -> dict:
    return {"coords": x.coords.tolist()}


def load_json(path):
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON ({exc})") from exc


def parse_system(path):
    """Read and validate a system file (any of the three system types)."""
    return system_from_json(load_json(path))


def parse_cost(path, system: ControlledSystem) -> CostSpec:
    return cost_from_json(load_json(path), system)


def parse_vector(path, space: Space) -> HVector:
    return vector_from_json(load_json(path), space)


def _jsonable(obj):
    # numpy scalars and arrays reduce to their plain Python equivalents
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Stable rendering used for every emitted JSON file."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_jsonable) + "\n"
