"""
Results of verification checks.

A :class:`CheckResult` records one named check: whether it passed, the
largest residual seen and a few witnesses for failures. A
:class:`CheckSuite` groups the clauses of a compound check (an
isomorphism test, a subbundle test) and passes when all of them pass.
"""

from dataclasses import dataclass, field
from typing import Any, Iterable

#: failing witnesses kept per check
MAX_WITNESSES = 5


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float = 0.0
    witnesses: list[Any] = field(default_factory=list)

    @classmethod
    def from_residuals(
        cls, name: str, residuals: Iterable[tuple[float, Any]], threshold: float
    ) -> "CheckResult":
        """Build a result from (residual, witness) pairs; the check passes
        when every residual is at most ``threshold``."""
        worst = 0.0
        witnesses = []
        for residual, witness in residuals:
            worst = max(worst, float(residual))
            if not residual <= threshold and len(witnesses) < MAX_WITNESSES:
                witnesses.append(witness)
        return cls(name, not witnesses and worst <= threshold, worst, witnesses)

    def __bool__(self):
        return self.passed

    def as_dict(self) -> dict[str, Any]:
        return {
            "check": self.name,
            "pass": self.passed,
            "witnesses": list(self.witnesses),
            "max_residual": self.max_residual,
        }


@dataclass
class CheckSuite:
    name: str
    results: list[CheckResult] = field(default_factory=list)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    def extend(self, other: "CheckSuite") -> None:
        self.results.extend(other.results)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def max_residual(self) -> float:
        return max((result.max_residual for result in self.results), default=0.0)

    def failures(self) -> list[CheckResult]:
        return [result for result in self.results if not result.passed]

    def result(self, name: str) -> CheckResult:
        for result in self.results:
            if result.name == name:
                return result
        raise KeyError(name)

    def __bool__(self):
        return self.passed

    def as_dict(self) -> dict[str, Any]:
        return {
            "check": self.name,
            "pass": self.passed,
            "max_residual": self.max_residual,
            "clauses": [result.as_dict() for result in self.results],
        }
