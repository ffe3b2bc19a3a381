"""Exception hierarchy for cpcomb."""

from __future__ import annotations


class CpcombError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "CpcombError"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class SingularBasis(CpcombError):
    code = "SingularBasis"


class CapacityExceeded(CpcombError):
    code = "CapacityExceeded"


class InjectivityFailed(CpcombError):
    code = "InjectivityFailed"

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness

    def to_dict(self) -> dict:
        out = super().to_dict()
        if self.witness is not None:
            out["witness"] = [int(v) for v in self.witness]
        return out


class NotAdmissible(CpcombError):
    code = "NotAdmissible"


class NonSmoothWeight(CpcombError):
    code = "NonSmoothWeight"


class QuadratureNotConverged(CpcombError):
    code = "QuadratureNotConverged"


class NoCandidatesInRange(CpcombError):
    code = "NoCandidatesInRange"


class ConfigError(CpcombError):
    """Raised for malformed or invalid run configurations."""

    code = "ConfigError"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["field"] = self.field
        return out


class ParseError(ConfigError):
    code = "ParseError"


class ValidationError(ConfigError):
    code = "ValidationError"
