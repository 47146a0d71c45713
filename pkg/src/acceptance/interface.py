from dataclasses import dataclass, field
from typing import Protocol

from workspace_config import WorkspaceConfig


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    measured: dict = field(default_factory=dict)


class AcceptanceCheck(Protocol):
    @property
    def name(self) -> str: ...
    def run(self, config: WorkspaceConfig) -> CheckResult: ...


def within(value: float, target: float, tolerance: float) -> bool:
    return abs(value - target) <= tolerance


def within_relative(value: float, target: float, fraction: float) -> bool:
    return abs(value - target) <= fraction * abs(target)
