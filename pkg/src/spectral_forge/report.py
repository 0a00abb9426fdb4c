"""Verification report shared by decomposition, measure, and pipeline checks."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class VerificationReport:
    """Named residuals, the thresholds they were held to, and pass flags.

    A report never raises; callers inspect ``all_passed`` or individual
    flags.  Keys are shared between ``residuals``, ``passed``, and
    ``tolerances`` so each claim can be audited against its bound.
    """

    residuals: dict[str, float] = field(default_factory=dict)
    passed: dict[str, bool] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def to_json_dict(self) -> dict:
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "pass": {k: bool(v) for k, v in self.passed.items()},
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "VerificationReport":
        return cls(
            residuals=dict(doc.get("residuals", {})),
            passed=dict(doc.get("pass", {})),
            tolerances=dict(doc.get("tolerances", {})),
        )
