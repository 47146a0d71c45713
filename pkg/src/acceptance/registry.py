import logging
import time

from acceptance.checks import (
    AccidentalLawCheck,
    BandwidthCheck,
    DeterminismCheck,
    HistogramGeometryCheck,
    PowerInsensitivityCheck,
    PowerSeriesCheck,
    ProjectionCheck,
    QuadraticFitCheck,
    RoundTripCheck,
    SidebandCheck,
    ZeroDispersionCheck,
)
from acceptance.interface import AcceptanceCheck, CheckResult
from workspace_config import WorkspaceConfig

logger = logging.getLogger("pairsource.acceptance")


class AcceptanceRegistry:
    def __init__(self):
        self._checks: list[AcceptanceCheck] = []

    @property
    def names(self) -> list[str]:
        return [check.name for check in self._checks]

    def register(self, check: AcceptanceCheck) -> None:
        logger.debug(f"Registered acceptance check: {check.name}")
        self._checks.append(check)

    def run_all(self, config: WorkspaceConfig) -> list[CheckResult]:
        """Run every check; an exception fails that check only."""
        results = []
        for check in self._checks:
            start = time.time()
            try:
                result = check.run(config)
            except Exception as e:
                logger.warning(f"Acceptance check {check.name} raised", exc_info=True)
                result = CheckResult(
                    name=check.name, passed=False, detail=f"{type(e).__name__}: {e}"
                )
            elapsed = time.time() - start
            status = "PASS" if result.passed else "FAIL"
            logger.info(f"[{status}] {check.name} ({elapsed:.1f}s): {result.detail}")
            results.append(result)
        return results


def build_registry() -> AcceptanceRegistry:
    registry = AcceptanceRegistry()
    for check in (
        ZeroDispersionCheck(),
        SidebandCheck(),
        BandwidthCheck(),
        PowerInsensitivityCheck(),
        PowerSeriesCheck(),
        QuadraticFitCheck(),
        ProjectionCheck(),
        RoundTripCheck(),
        AccidentalLawCheck(),
        HistogramGeometryCheck(),
        DeterminismCheck(),
    ):
        registry.register(check)
    return registry


def results_to_dict(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "checks": [
            {"name": r.name, "passed": r.passed, "detail": r.detail, "measured": r.measured}
            for r in results
        ],
    }
