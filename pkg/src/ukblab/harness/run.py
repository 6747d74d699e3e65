"""
Command-line access to the library, available as ``ukb-lab`` when this
package is installed with pip.

Each command reads a JSON document from ``--input``, runs one operation
and writes a JSON report with the result and the checks that certify it.
The exit status is 0 when every check passes, 1 when a check fails or an
internal consistency test breaks, and 2 for malformed input.

Input documents (see :mod:`ukblab.utils.json_specs` for state and matrix
formats; an algebra may also be ``{"catalog": "M2+M3"}``):

- ``decompose``, ``ideals``, ``verify-all``: ``{"algebra": ...}``
  (optional for ``verify-all``)
- ``gns``: ``{"algebra", "state"}``
- ``distance``: ``{"algebra", "first", "second"}``
- ``gelfand``: ``{"algebra", "element"}`` or ``{"algebra", "samples"}``,
  where samples are inline records or the path of a ``.jsonl`` file
- ``star``: ``{"algebra", "first", "second"}`` with elements
- ``norm``: ``{"algebra", "element"}``
- hereditary commands take ``{"algebra", "projection"}`` plus:
  ``hereditary-classify``: ``"state"`` or ``"states"``;
  ``theta``: ``"state"``, or ``"t"`` and ``"rho_prime"`` (a state of B)
  with an optional ``"direction"``; ``xi``: ``"state"`` (a state of B);
  ``sphere``: ``"mu"`` (a state of B) and ``"radius"``, with either
  ``"state"`` to decompose or an optional ``"direction"`` to construct;
  ``subbundle-check``: nothing more

States of B use B's own block labels.

Example usage:
```
ukb-lab decompose --input algebra.json
ukb-lab distance --input states.json --out distance.json
ukb-lab verify-all --input m2m3.json --samples 100 --no-progress
```
"""

import argparse
import math
import pathlib
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ukblab.algebra.core import FdCStarAlgebra
from ukblab.algebra.hereditary import is_ideal
from ukblab.algebra.ideals import enumerate_quotients
from ukblab.errors import InconsistentAlgebra, PurityMismatch, SpecError
from ukblab.gelfand.calculus import (
    TransformFunction,
    build_frame,
    cstar_norm,
    gelfand,
    invert,
    invert_samples,
    star,
)
from ukblab.geometry.bundle import ideal_bundle_correspondence, kahler_distance
from ukblab.geometry.hereditary import (
    STREAM_SUBBUNDLE,
    HereditaryContext,
    ball_cover_check,
    classify_state,
    distance_to_xi_image,
    hereditary_context,
    sphere_point,
    subbundle_check,
    theta,
    theta_preimage,
    upsilon,
    upsilon_inverse,
    xi_extend,
    xi_subbundle,
)
from ukblab.harness.catalog import catalog_algebra
from ukblab.harness.suite import DEFAULT_SAMPLES, verify_all
from ukblab.linalg.kernel import DEFAULT_TOLERANCES, ToleranceConfig, operator_norm
from ukblab.states.gns import commutant_dim, gns, is_pure_via_gns
from ukblab.states.state import State, canonical_ray, fiber_of
from ukblab.utils.json_specs import (
    dumps,
    load_file,
    parse_algebra,
    parse_matrix,
    parse_samples,
    parse_state,
    parse_vector,
)
from ukblab.utils.report import CheckResult, CheckSuite

#: exit status when every check passes
EXIT_PASS = 0
#: exit status for a failed check or a broken internal invariant
EXIT_VIOLATION = 1
#: exit status for malformed input
EXIT_INPUT_ERROR = 2

#: bound for round trips and formula comparisons in command checks
ROUNDTRIP_TOL = 1e-9
#: bound for exact reconstructions in command checks
EXACT_TOL = 1e-10


@dataclass
class RunConfig:
    command: str
    input_path: pathlib.Path | None = None
    seed: int = 42
    samples: int = DEFAULT_SAMPLES
    tol_eq: float = DEFAULT_TOLERANCES.tol_eq
    output: pathlib.Path | None = None
    progress: bool = True
    timing: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}")
        if self.samples < 1:
            raise ValueError(f"samples must be at least 1 (got {self.samples})")

    @property
    def tolerances(self) -> ToleranceConfig:
        return ToleranceConfig(tol_eq=self.tol_eq, rng_seed=self.seed)


@dataclass
class Report:
    command: str
    checks: list[CheckResult | CheckSuite] = field(default_factory=list)
    result: Any = None
    #: wall-clock milliseconds, only when timing was requested
    timing_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def as_dict(self) -> dict[str, Any]:
        report = {
            "command": self.command,
            "pass": self.passed,
            "checks": [check.as_dict() for check in self.checks],
            "result": self.result,
        }
        if self.timing_ms is not None:
            report["timing_ms"] = self.timing_ms
        return report


def _require(spec: Any, key: str) -> Any:
    if not isinstance(spec, dict) or key not in spec:
        raise SpecError(f"Input needs a '{key}' entry")
    return spec[key]


def _number(spec: Any, key: str) -> float:
    value = _require(spec, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"'{key}' must be a number, got {value!r}")
    return float(value)


def resolve_algebra(spec: Any, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FdCStarAlgebra:
    """An algebra spec: a catalog name or generators."""
    if isinstance(spec, dict) and "catalog" in spec:
        name = spec["catalog"]
        if not isinstance(name, str):
            raise SpecError(f"Catalog name must be a string, got {name!r}")
        return catalog_algebra(name, tol)
    return parse_algebra(spec, tol)


def _algebra(spec: Any, tol: ToleranceConfig) -> FdCStarAlgebra:
    return resolve_algebra(_require(spec, "algebra"), tol)


def _context(spec: Any, tol: ToleranceConfig) -> HereditaryContext:
    return hereditary_context(_algebra(spec, tol), parse_matrix(_require(spec, "projection")))


def _element(algebra: FdCStarAlgebra, data: Any) -> np.ndarray:
    return algebra.require(parse_matrix(data))


def _opaque(algebra: FdCStarAlgebra, x: np.ndarray) -> TransformFunction:
    """The transform of x as a bare function of states."""
    return TransformFunction(algebra, gelfand(algebra, x).evaluator)


def _relative(residual: float, scale: float) -> float:
    return residual / max(1.0, scale)


def _value_gap(first: State, second: State) -> float:
    return float(np.max(np.abs(first.values - second.values), initial=0.0))


def _summary(state: State) -> dict[str, Any]:
    summary: dict[str, Any] = {"values": state.values, "pure": state.is_pure}
    if state.is_pure:
        point = canonical_ray(state)
        summary.update(fiber=point.fiber, ray=point.ray)
    return summary


def _single(name: str, residual: float, threshold: float, witness: Any = None) -> CheckResult:
    return CheckResult.from_residuals(name, [(residual, witness or {})], threshold)


def decompose_command(spec, config, tol):
    a = _algebra(spec, tol)
    result = {
        "ambient_dim": a.ambient_dim,
        "dim": a.dim,
        "spectrum": a.spectrum,
        "blocks": [
            {"label": block.index, "n": block.n, "multiplicity": block.multiplicity}
            for block in a.blocks
        ],
        "unit": a.unit,
    }
    return [_single("block_reconstruction", a.reconstruction_residual(), tol.tol_eq)], result


def ideals_command(spec, config, tol):
    a = _algebra(spec, tol)
    entries = []
    kernels = []
    homomorphisms = []
    for ideal, q, h in enumerate_quotients(a):
        witness = {"ideal": ideal.block_set}
        entries.append(
            {
                "blocks": ideal.block_set,
                "dim": ideal.as_algebra.dim,
                "quotient_dim": q.dim,
                "quotient_blocks": [block.n for block in q.blocks],
            }
        )
        kernels.append((max(ideal.kernel_residual(), ideal.absorption_residual()), witness))
        homomorphisms.append((h.homomorphism_residual(), witness))
    checks = [
        CheckResult.from_residuals("ideal_is_kernel", kernels, EXACT_TOL),
        CheckResult.from_residuals("quotient_homomorphism", homomorphisms, tol.tol_eq),
        ideal_bundle_correspondence(a),
    ]
    return checks, {"ideals": entries}


def gns_command(spec, config, tol):
    a = _algebra(spec, tol)
    state = parse_state(a, _require(spec, "state"))
    triple = gns(state)
    residual = max(triple.reconstruction_residual(), triple.homomorphism_residual())
    checks = [
        _single("gns_reconstruction", residual, tol.tol_eq),
        _single("cyclic_vector", float(triple.cyclic_rank() != triple.hilbert_dim), 0.0),
    ]
    try:
        is_pure_via_gns(state, triple)
        checks.append(_single("purity_agreement", 0.0, 0.0))
    except PurityMismatch as err:
        checks.append(CheckResult("purity_agreement", False, 1.0, [str(err)]))
    result = {
        "hilbert_dim": triple.hilbert_dim,
        "commutant_dim": commutant_dim(triple),
        "cyclic_vector": triple.cyclic_vector,
        "state": _summary(state),
    }
    return checks, result


def distance_command(spec, config, tol):
    a = _algebra(spec, tol)
    first = parse_state(a, _require(spec, "first"))
    second = parse_state(a, _require(spec, "second"))
    distance = kahler_distance(first, second)
    checks = [_single("symmetry", abs(distance - kahler_distance(second, first)), tol.tol_eq)]
    return checks, {"distance": distance, "fibers": [fiber_of(first), fiber_of(second)]}


def gelfand_command(spec, config, tol):
    a = _algebra(spec, tol)
    if "samples" in spec:
        records = spec["samples"]
        if isinstance(records, str):
            path = pathlib.Path(records)
            if not path.is_absolute() and config.input_path is not None:
                path = config.input_path.parent / path
            records = load_file(path)
        if not isinstance(records, list):
            raise SpecError("'samples' must be a list of records or a file path")
        inversion = invert_samples(a, parse_samples(a, records))
        result = {
            "element": inversion.element,
            "coefficients": inversion.coefficients,
            "residual": inversion.residual,
        }
        return [_single("samples_fit", inversion.residual, tol.tol_eq)], result

    x = _element(a, _require(spec, "element"))
    frame = build_frame(a)
    f = _opaque(a, x)
    inversion = invert(frame, f)
    residual = _relative(operator_norm(inversion.element - x), operator_norm(x))
    result = {
        "frame_values": frame.samples(f),
        "condition": frame.condition,
        "element": inversion.element,
    }
    return [_single("invert_gelfand", residual, EXACT_TOL)], result


def star_command(spec, config, tol):
    a = _algebra(spec, tol)
    x = _element(a, _require(spec, "first"))
    y = _element(a, _require(spec, "second"))
    frame = build_frame(a)
    product = star(frame, _opaque(a, x), _opaque(a, y))
    expected = x @ y
    residual = _relative(operator_norm(product.element - expected), operator_norm(expected))
    result = {"product": product.element, "frame_values": frame.samples(product)}
    return [_single("star_product", residual, ROUNDTRIP_TOL)], result


def norm_command(spec, config, tol):
    a = _algebra(spec, tol)
    x = _element(a, _require(spec, "element"))
    recovery = cstar_norm(build_frame(a), _opaque(a, x), samples=config.samples)
    exact = operator_norm(x)
    checks = [
        _single("cstar_norm", abs(recovery.exact - exact) / max(exact, math.ulp(1.0)), ROUNDTRIP_TOL),
        _single(
            "sampled_norm_bound",
            _relative(max(recovery.sampled - recovery.exact, 0.0), recovery.exact),
            1e-12,
        ),
    ]
    result = {"exact": recovery.exact, "sampled": recovery.sampled, "samples": recovery.samples}
    return checks, result


def classify_command(spec, config, tol):
    ctx = _context(spec, tol)
    if "states" in spec:
        if not isinstance(spec["states"], list):
            raise SpecError("'states' must be a list")
        states = [parse_state(ctx.parent, item) for item in spec["states"]]
    else:
        states = [parse_state(ctx.parent, _require(spec, "state"))]
    entries = []
    formula = []
    for index, rho in enumerate(states):
        distance = distance_to_xi_image(ctx, rho)
        weight = ctx.weight(rho)
        entries.append(
            {
                "region": classify_state(ctx, rho),
                "weight": weight,
                "distance": distance,
                "fiber": fiber_of(rho),
            }
        )
        if fiber_of(rho) in ctx.spectrum_b and weight > tol.tol_eq:
            center = xi_extend(ctx, theta(ctx, rho).rho_prime)
            formula.append((abs(kahler_distance(rho, center) - distance), {"state": index}))
    checks = [CheckResult.from_residuals("distance_formula", formula, ROUNDTRIP_TOL)]
    return checks, {"spectrum_b": ctx.spectrum_b, "states": entries}


def theta_command(spec, config, tol):
    ctx = _context(spec, tol)
    if "t" in spec:
        t = _number(spec, "t")
        rho_prime = parse_state(ctx.sub, _require(spec, "rho_prime"))
        if t == 1.0:
            rho = xi_extend(ctx, rho_prime)
        else:
            direction = parse_vector(spec["direction"]) if "direction" in spec else None
            rho = theta_preimage(ctx, t, rho_prime, direction)
        decomposed = theta(ctx, rho)
        residual = max(abs(decomposed.t - t), _value_gap(decomposed.rho_prime, rho_prime))
        return [_single("theta_roundtrip", residual, ROUNDTRIP_TOL)], {"state": _summary(rho)}

    rho = parse_state(ctx.parent, _require(spec, "state"))
    decomposed = theta(ctx, rho)
    center = xi_extend(ctx, decomposed.rho_prime)
    residual = abs(kahler_distance(rho, center) - distance_to_xi_image(ctx, rho))
    result = {"t": decomposed.t, "rho_prime": _summary(decomposed.rho_prime)}
    return [_single("distance_formula", residual, ROUNDTRIP_TOL)], result


def xi_command(spec, config, tol):
    ctx = _context(spec, tol)
    tau = parse_state(ctx.sub, _require(spec, "state"))
    rho = xi_extend(ctx, tau)
    decomposed = theta(ctx, rho)
    residual = max(abs(decomposed.t - 1.0), _value_gap(decomposed.rho_prime, tau))
    return [_single("theta_after_xi", residual, ROUNDTRIP_TOL)], {"state": _summary(rho)}


def sphere_command(spec, config, tol):
    ctx = _context(spec, tol)
    mu = parse_state(ctx.sub, _require(spec, "mu"))
    radius = _number(spec, "radius")
    if "state" in spec:
        rho = parse_state(ctx.parent, spec["state"])
    else:
        direction = parse_vector(spec["direction"]) if "direction" in spec else None
        rho = sphere_point(ctx, mu, radius, direction)
    param = upsilon(ctx, mu, radius, rho)
    checks = [
        _single("on_sphere", abs(kahler_distance(rho, xi_extend(ctx, mu)) - radius), ROUNDTRIP_TOL),
        _single(
            "sphere_coordinates",
            _value_gap(upsilon_inverse(ctx, mu, radius, param), rho),
            EXACT_TOL,
        ),
    ]
    result = {
        "state": _summary(rho),
        "phase": param.phase,
        "orthogonal_point": {
            "fiber": param.orthogonal_point.fiber,
            "ray": param.orthogonal_point.ray,
        },
    }
    return checks, result


def subbundle_command(spec, config, tol):
    ctx = _context(spec, tol)
    checks = [
        subbundle_check(ctx, config.samples, tol.rng(STREAM_SUBBUNDLE)),
        ball_cover_check(ctx, config.samples, tol.rng(STREAM_SUBBUNDLE, 1)),
    ]
    result = {
        "spectrum_b": ctx.spectrum_b,
        "fiber_dims": xi_subbundle(ctx).fiber_dims,
        "is_ideal": is_ideal(ctx.parent, ctx.sub),
    }
    return checks, result


def verify_all_command(spec, config, tol):
    algebra = _algebra(spec, tol) if isinstance(spec, dict) and "algebra" in spec else None
    checks = verify_all(algebra, config.samples, tol, config.progress)
    return checks, {"seed": config.seed, "samples": config.samples}


#: command name → handler(spec, config, tol) returning (checks, result)
COMMANDS: dict[str, Callable] = {
    "decompose": decompose_command,
    "ideals": ideals_command,
    "gns": gns_command,
    "distance": distance_command,
    "gelfand": gelfand_command,
    "star": star_command,
    "norm": norm_command,
    "hereditary-classify": classify_command,
    "theta": theta_command,
    "xi": xi_command,
    "sphere": sphere_command,
    "subbundle-check": subbundle_command,
    "verify-all": verify_all_command,
}


def run(config: RunConfig) -> Report:
    """Run one command and build its report.

    :raises: SpecError and the other :class:`ValueError` subclasses of
        :mod:`ukblab.errors` for bad input; InconsistentAlgebra and
        PurityMismatch when an internal consistency test fails
    """
    tol = config.tolerances
    if config.input_path is not None:
        spec = load_file(config.input_path)
    elif config.command == "verify-all":
        spec = {}
    else:
        raise SpecError(f"{config.command} needs an --input file")
    start = time.perf_counter()
    checks, result = COMMANDS[config.command](spec, config, tol)
    timing = (time.perf_counter() - start) * 1000 if config.timing else None
    return Report(config.command, list(checks), result, timing)


def main():
    """Command-line access to the library. Available as `ukb-lab` when this
    package is installed with pip."""

    parser = argparse.ArgumentParser(
        description="Finite-dimensional C*-algebras as uniform Kähler bundles",
    )
    parser.add_argument("command", choices=list(COMMANDS), help="operation to run")
    parser.add_argument(
        "-i",
        "--input",
        help="JSON input document (optional for verify-all)",
        type=pathlib.Path,
    )
    parser.add_argument("--seed", help="random seed (default: 42)", type=int, default=42)
    parser.add_argument(
        "--samples",
        help=f"base sample count (default: {DEFAULT_SAMPLES})",
        type=int,
        default=DEFAULT_SAMPLES,
    )
    parser.add_argument(
        "--tol-eq",
        help=f"equality tolerance (default: {DEFAULT_TOLERANCES.tol_eq:g})",
        type=float,
        default=DEFAULT_TOLERANCES.tol_eq,
    )
    parser.add_argument(
        "--out",
        help="filename where the report should be saved (default: stdout)",
        type=pathlib.Path,
    )
    parser.add_argument(
        "--progress",
        help="Show progress",
        action=argparse.BooleanOptionalAction,
        default=True,
    )
    parser.add_argument(
        "--timing",
        help="Include wall-clock time in the report",
        action="store_true",
    )

    args = parser.parse_args()

    if args.out and args.out.is_file():
        print(
            f"Error: requested output file {args.out} already exists; not overwriting",
            file=sys.stderr,
        )
        sys.exit(EXIT_INPUT_ERROR)

    try:
        config = RunConfig(
            args.command,
            input_path=args.input,
            seed=args.seed,
            samples=args.samples,
            tol_eq=args.tol_eq,
            output=args.out,
            progress=args.progress,
            timing=args.timing,
        )
        report = run(config)
    except (InconsistentAlgebra, PurityMismatch) as err:
        print(f"{err.__class__.__name__}: {err}", file=sys.stderr)
        sys.exit(EXIT_VIOLATION)
    except (ValueError, OSError) as err:
        # every ukblab input error is a ValueError
        print(f"{err.__class__.__name__}: {err}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)

    data = dumps(report)
    if config.output is not None:
        config.output.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    sys.exit(EXIT_PASS if report.passed else EXIT_VIOLATION)


if __name__ == "__main__":
    main()
