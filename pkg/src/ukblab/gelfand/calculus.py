"""
The Gelfand transform a ↦ f_a, f_a(ω) = ω(a), on pure states.

A transform is recovered from its values on a tomography frame: the
polarization rays e_r, (e_r+e_s)/√2 and (e_r+i·e_s)/√2 of every block
give exactly dim A pure states whose evaluation map is invertible. The
star product f⋆g is the transform of the product of the inverted
elements, and the C*-norm is recovered as sup_ω (f̄⋆f)(ω).

Example usage:
```
import numpy as np
from ukblab.algebra.core import full_matrix_algebra
from ukblab.gelfand.calculus import build_frame, cstar_norm, gelfand, invert

m2 = full_matrix_algebra(2)
frame = build_frame(m2)
f = gelfand(m2, np.diag([1, 2]))
invert(frame, f).element      # diag(1, 2)
cstar_norm(frame, f).exact    # 2.0
```
"""

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from ukblab.algebra.core import FdCStarAlgebra
from ukblab.errors import (
    DimensionMismatch,
    IllConditionedFrame,
    InconsistentAlgebra,
    InconsistentSamples,
)
from ukblab.linalg.kernel import ComplexMatrix, operator_norm, random_unit_vector
from ukblab.states.state import State, random_pure_state, vector_state

#: largest accepted condition number of a frame's design matrix
FRAME_MAX_CONDITION = 100.0
#: extra random states used to validate an inversion
VALIDATION_STATES = 8
#: power-iteration steps applied to each sampled ray in the norm search
REFINE_STEPS = 20
#: random stream for validation states
STREAM_VALIDATION = 501
#: random stream for the sampled norm
STREAM_NORM = 502


def _evaluate(algebra: FdCStarAlgebra, element: ComplexMatrix, state: State) -> complex:
    if state.algebra is not algebra:
        raise DimensionMismatch("State belongs to a different algebra")
    return state(element)


@dataclass(frozen=True, eq=False)
class TransformFunction:
    """A function on pure states, with the element it transforms when known."""

    algebra: FdCStarAlgebra
    evaluator: Callable[[State], complex]
    element: ComplexMatrix | None = None

    def __call__(self, state: State) -> complex:
        return complex(self.evaluator(state))

    def conjugate(self) -> "TransformFunction":
        """f̄; the transform of a* when f = f_a."""
        element = None if self.element is None else self.element.conj().T
        return TransformFunction(
            self.algebra, lambda state: complex(self(state)).conjugate(), element
        )

    def __add__(self, other: "TransformFunction") -> "TransformFunction":
        element = None
        if self.element is not None and other.element is not None:
            element = self.element + other.element
        return TransformFunction(self.algebra, lambda state: self(state) + other(state), element)

    def __sub__(self, other: "TransformFunction") -> "TransformFunction":
        return self + other.scale(-1)

    def scale(self, factor: complex) -> "TransformFunction":
        element = None if self.element is None else factor * self.element
        return TransformFunction(self.algebra, lambda state: factor * self(state), element)


def gelfand(algebra: FdCStarAlgebra, a: ArrayLike) -> TransformFunction:
    """f_a(ω) = ω(a)

    :raises: ElementNotInAlgebra
    """
    a = algebra.require(a)
    return TransformFunction(algebra, functools.partial(_evaluate, algebra, a), a)


@dataclass(frozen=True, eq=False)
class TomographyFrame:
    algebra: FdCStarAlgebra
    states: tuple[State, ...]
    #: design[k, j] = ω_k(b_j)
    design: np.ndarray
    condition: float

    def samples(self, f: Callable[[State], complex]) -> np.ndarray:
        return np.array([f(state) for state in self.states], dtype=complex)


def polarization_rays(n: int) -> list[np.ndarray]:
    """e_r, then (e_r + e_s)/√2 and (e_r + i·e_s)/√2 for r < s: n² rays."""
    identity = np.eye(n, dtype=complex)
    rays = [identity[r] for r in range(n)]
    for r in range(n):
        for s in range(r + 1, n):
            rays.append((identity[r] + identity[s]) / math.sqrt(2))
            rays.append((identity[r] + 1j * identity[s]) / math.sqrt(2))
    return rays


def build_frame(
    algebra: FdCStarAlgebra, max_condition: float = FRAME_MAX_CONDITION
) -> TomographyFrame:
    """The polarization frame of ``algebra``.

    :raises: IllConditionedFrame when the design matrix's condition number
        exceeds ``max_condition``
    """
    states = tuple(
        vector_state(algebra, block.index, ray)
        for block in algebra.blocks
        for ray in polarization_rays(block.n)
    )
    if not states:
        return TomographyFrame(algebra, (), np.zeros((0, 0), dtype=complex), 1.0)
    design = np.array([state.values for state in states])
    condition = float(np.linalg.cond(design))
    if not condition <= max_condition:
        raise IllConditionedFrame(
            f"Frame design matrix has condition number {condition:.3g} > {max_condition:g}"
        )
    return TomographyFrame(algebra, states, design, condition)


@dataclass(frozen=True, eq=False)
class Inversion:
    element: ComplexMatrix
    #: basis coefficients of ``element``
    coefficients: np.ndarray
    #: largest mismatch between predicted and given values, over the frame
    #: and any validation states
    residual: float
    validated: bool = False


def _tolerance(tol_eq: float, values: np.ndarray) -> float:
    return tol_eq * max(1.0, float(np.max(np.abs(values), initial=0.0)))


def invert(
    frame: TomographyFrame,
    f: TransformFunction,
    validate: bool | None = None,
    rng: np.random.Generator | None = None,
) -> Inversion:
    """The unique a with ω_k(a) = f(ω_k) on the frame states.

    Validation evaluates the candidate on extra random pure states and
    fails when f is not a transform. It is on by default for functions
    without a known element.

    :raises: InconsistentSamples
    """
    algebra = frame.algebra
    tol = algebra.tol
    if validate is None:
        validate = f.element is None
    samples = frame.samples(f)
    if algebra.dim == 0:
        return Inversion(algebra.element(np.zeros(0)), np.zeros(0, dtype=complex), 0.0, validate)
    coefficients = np.linalg.solve(frame.design, samples)
    residual = float(np.max(np.abs(frame.design @ coefficients - samples)))
    threshold = _tolerance(tol.tol_eq, samples)
    if validate:
        rng = rng or tol.rng(STREAM_VALIDATION)
        for _ in range(VALIDATION_STATES):
            state = random_pure_state(algebra, rng)
            residual = max(residual, abs(state.values @ coefficients - f(state)))
    if residual > threshold:
        raise InconsistentSamples(
            f"Values are not the transform of an element: residual {residual:.3e}"
        )
    return Inversion(algebra.element(coefficients), coefficients, residual, validate)


def invert_samples(
    algebra: FdCStarAlgebra, samples: Sequence[tuple[State, complex]]
) -> Inversion:
    """Least-squares recovery of a from values at arbitrary pure states.

    :raises: InconsistentSamples when the states do not determine a or the
        values do not fit any element
    """
    tol = algebra.tol
    if algebra.dim == 0:
        return Inversion(algebra.element(np.zeros(0)), np.zeros(0, dtype=complex), 0.0, True)
    if not samples:
        raise InconsistentSamples("No samples given")
    design = np.array([state.values for state, _ in samples])
    values = np.array([value for _, value in samples], dtype=complex)
    coefficients, _, rank, _ = np.linalg.lstsq(design, values, rcond=tol.tol_rank)
    if rank < algebra.dim:
        raise InconsistentSamples(
            f"Sampled states determine only {rank} of {algebra.dim} coordinates"
        )
    residual = float(np.max(np.abs(design @ coefficients - values)))
    if residual > _tolerance(tol.tol_eq, values):
        raise InconsistentSamples(
            f"Values are not the transform of an element: residual {residual:.3e}"
        )
    return Inversion(algebra.element(coefficients), coefficients, residual, len(samples) > algebra.dim)


def _element_of(frame: TomographyFrame, f: TransformFunction) -> ComplexMatrix:
    if f.element is not None:
        return f.element
    return invert(frame, f).element


def star(frame: TomographyFrame, f: TransformFunction, g: TransformFunction) -> TransformFunction:
    """f⋆g, the transform of the product of the elements behind f and g.

    :raises: InconsistentSamples
    """
    return gelfand(frame.algebra, _element_of(frame, f) @ _element_of(frame, g))


@dataclass(frozen=True)
class NormRecovery:
    #: sqrt of the largest top eigenvalue of π_i(a*a)
    exact: float
    #: sqrt of the best ω(a*a) over sampled pure states
    sampled: float
    samples: int


def cstar_norm(
    frame: TomographyFrame,
    f: TransformFunction,
    samples: int = 0,
    rng: np.random.Generator | None = None,
    refine_steps: int = REFINE_STEPS,
) -> NormRecovery:
    """‖a‖ = sup over pure states of (f̄⋆f)(ω)^{1/2}.

    The exact value comes from the block spectra of a*a. With ``samples``
    random rays per block, each improved by ``refine_steps`` steps of power
    iteration, a sampled lower bound is also reported.

    :raises: InconsistentSamples, InconsistentAlgebra if the sampled value
        exceeds the exact one
    """
    algebra = frame.algebra
    a = _element_of(frame, f)
    rng = rng or algebra.tol.rng(STREAM_NORM)
    exact = 0.0
    sampled = 0.0
    for block in algebra.blocks:
        image = block.represent(a)
        positive = image.conj().T @ image
        exact = max(exact, operator_norm(image))
        for _ in range(samples):
            x = random_unit_vector(block.n, rng)
            for _ in range(refine_steps):
                y = positive @ x
                norm = np.linalg.norm(y)
                if norm == 0:
                    break
                x = y / norm
            sampled = max(sampled, float(np.linalg.norm(image @ x)))
    if sampled > exact * (1 + 1e-12) + 1e-15:
        raise InconsistentAlgebra(f"Sampled norm {sampled!r} exceeds exact norm {exact!r}")
    # converged samples can overshoot by rounding
    return NormRecovery(exact, min(sampled, exact), samples)
