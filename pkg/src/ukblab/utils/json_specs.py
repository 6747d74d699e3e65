"""
JSON input specs and report serialization.

Complex numbers are written as ``[re, im]``; plain numbers are accepted on
input. Matrices are row-major nested lists.

Input shapes:

- algebra: ``{"ambient_dim": N, "generators": [matrix, ...]}``, or
  ``{"catalog": name}`` resolved by the caller
- state: ``{"values": [...]}``, ``{"ray": {"fiber": i, "vector": [...]}}``,
  ``{"density": matrix}`` or ``{"block_densities": {"i": matrix}}``
- sampled function: ``[{"state": state, "value": number}, ...]``, inline or
  as a ``.jsonl`` file with one record per line
"""

import dataclasses
import pathlib
from enum import Enum
from typing import Any, Iterable

import numpy as np
import orjson
import orjsonl
from intspan import intspan

from ukblab.algebra.core import FdCStarAlgebra, generate_algebra
from ukblab.errors import SpecError
from ukblab.linalg.kernel import DEFAULT_TOLERANCES, ToleranceConfig
from ukblab.states.state import (
    ProjectivePoint,
    State,
    make_state,
    state_from_block_densities,
    state_from_density,
    state_from_ray,
)


def loads(data: bytes | str) -> Any:
    """Parse JSON text, reporting syntax errors as :class:`SpecError`."""
    try:
        return orjson.loads(data)
    except orjson.JSONDecodeError as err:
        raise SpecError(f"Invalid JSON: {err}") from err


def load_file(path: pathlib.Path) -> Any:
    """Load a ``.json`` document, or every record of a ``.jsonl`` file as a
    list."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise SpecError(f"Input file {path} does not exist")
    if path.suffix == ".jsonl":
        try:
            return list(orjsonl.stream(path))
        except orjson.JSONDecodeError as err:
            raise SpecError(f"Invalid JSON lines in {path}: {err}") from err
    return loads(path.read_bytes())


def parse_complex(value: Any) -> complex:
    if isinstance(value, bool):
        raise SpecError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(part, (int, float)) and not isinstance(part, bool) for part in value)
    ):
        return complex(value[0], value[1])
    raise SpecError(f"Expected a number or [re, im], got {value!r}")


def parse_vector(data: Any) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise SpecError("Expected a non-empty list of numbers")
    return np.array([parse_complex(value) for value in data], dtype=complex)


def parse_matrix(data: Any) -> np.ndarray:
    """Row-major matrix; ragged rows are rejected."""
    if not isinstance(data, list) or not data or not all(isinstance(row, list) for row in data):
        raise SpecError("Expected a matrix as a non-empty list of rows")
    widths = {len(row) for row in data}
    if len(widths) != 1:
        raise SpecError(f"Matrix rows have different lengths: {sorted(widths)}")
    return np.array([[parse_complex(value) for value in row] for row in data], dtype=complex)


def _require_key(spec: Any, key: str, what: str) -> Any:
    if not isinstance(spec, dict) or key not in spec:
        raise SpecError(f"{what} spec needs a '{key}' entry")
    return spec[key]


def parse_algebra(spec: Any, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """Build the algebra generated by an ``{"ambient_dim", "generators"}``
    spec."""
    ambient_dim = _require_key(spec, "ambient_dim", "Algebra")
    if not isinstance(ambient_dim, int) or isinstance(ambient_dim, bool) or ambient_dim < 0:
        raise SpecError(f"ambient_dim must be a non-negative integer, got {ambient_dim!r}")
    generators = _require_key(spec, "generators", "Algebra")
    if not isinstance(generators, list):
        raise SpecError("generators must be a list of matrices")
    return generate_algebra(ambient_dim, [parse_matrix(g) for g in generators], tol)


def parse_state(algebra: FdCStarAlgebra, spec: Any) -> State:
    if not isinstance(spec, dict):
        raise SpecError(f"State spec must be an object, got {spec!r}")
    if "values" in spec:
        return make_state(algebra, parse_vector(spec["values"]))
    if "ray" in spec:
        ray = spec["ray"]
        fiber = _require_key(ray, "fiber", "Ray")
        if not isinstance(fiber, int) or isinstance(fiber, bool):
            raise SpecError(f"Ray fiber must be an integer label, got {fiber!r}")
        vector = parse_vector(_require_key(ray, "vector", "Ray"))
        if not np.linalg.norm(vector):
            raise SpecError("Ray vector is zero")
        return state_from_ray(algebra, ProjectivePoint.from_vector(fiber, vector, algebra.tol))
    if "density" in spec:
        return state_from_density(algebra, parse_matrix(spec["density"]))
    if "block_densities" in spec:
        densities = spec["block_densities"]
        if not isinstance(densities, dict):
            raise SpecError("block_densities must map block labels to matrices")
        parsed = {}
        for label, matrix in densities.items():
            try:
                key = int(label)
            except ValueError as err:
                raise SpecError(f"Block label {label!r} is not an integer") from err
            parsed[key] = parse_matrix(matrix)
        return state_from_block_densities(algebra, parsed)
    raise SpecError("State spec needs one of 'values', 'ray', 'density', 'block_densities'")


def parse_samples(algebra: FdCStarAlgebra, records: Iterable[Any]) -> list[tuple[State, complex]]:
    samples = []
    for record in records:
        state = parse_state(algebra, _require_key(record, "state", "Sample"))
        samples.append((state, parse_complex(_require_key(record, "value", "Sample"))))
    return samples


def _complex_pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def to_jsonable(obj: Any) -> Any:
    """Convert results to plain JSON types: complex numbers to [re, im],
    arrays to nested lists, spectrum subsets to range strings, enums to
    their values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _complex_pair(complex(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(item) for item in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if isinstance(obj, intspan):
        return str(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> bytes:
    """Deterministic JSON bytes with two-space indentation."""
    return orjson.dumps(to_jsonable(obj), option=orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE)
