"""Instance-level check of the composition argument for FL.

The outer protocol is FL with an aggregation oracle (the hybrid protocol).
Substituting a realization of the aggregation functionality for the oracle
must keep the outputs and, when the realization is private, keep the whole
protocol private.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .core import DEFAULT_BUDGET, PrivacyReport, check_private_computation
from .protocols import FLProtocol, simulator_for


@dataclass(frozen=True)
class OutputMismatch:
    inputs: tuple
    point: tuple
    expected: tuple
    got: tuple


@dataclass
class ReductionReport:
    rounds: int
    inner: str
    points_checked: int = 0
    mismatches: list[OutputMismatch] = field(default_factory=list)
    hybrid: PrivacyReport | None = None
    substituted: PrivacyReport | None = None

    @property
    def outputs_equal(self) -> bool:
        return not self.mismatches

    @property
    def identity_composition(self) -> bool:
        return self.rounds == 1

    @property
    def passed(self) -> bool:
        return self.outputs_equal and self.hybrid.passed and self.substituted.passed

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _server_models(protocol, views) -> tuple:
    return protocol.outputs(views)[-1]


def check_reduction(
    config,
    rounds: int,
    grid: Sequence[tuple],
    corruption_sets: Sequence,
    *,
    inner: str = "masked",
    initial_model=None,
    mode: str = "det",
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> ReductionReport:
    """(a) oracle-aided and substituted runs agree on every input and every coin;
    (b) the hybrid protocol and the substituted protocol both pass the privacy check.
    """
    hybrid = FLProtocol("oracle", config, rounds, initial_model)
    real = FLProtocol(inner, config, rounds, hybrid.initial_model)
    report = ReductionReport(rounds, inner)

    for x in grid:
        x = tuple(x)
        expected = _server_models(hybrid, hybrid.execute(x))
        for point in real.randomness_domain().points():
            got = _server_models(real, real.execute(x, point))
            report.points_checked += 1
            if got != expected:
                report.mismatches.append(OutputMismatch(x, point, expected, got))

    report.hybrid = check_private_computation(
        hybrid, simulator_for(hybrid), grid, corruption_sets, mode, budget=budget, workers=workers
    )
    report.substituted = check_private_computation(
        real, simulator_for(real), grid, corruption_sets, mode, budget=budget, workers=workers
    )
    return report
