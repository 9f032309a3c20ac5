"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` and, where it makes
sense, the offending parameter, so the CLI can emit structured records.
"""

from __future__ import annotations


class ForelError(Exception):
    code = "error"

    def __init__(self, message: str, parameter: str | None = None, **context):
        super().__init__(message)
        self.message = message
        self.parameter = parameter
        self.context = context

    def to_record(self) -> dict:
        record = {"code": self.code, "message": self.message, "parameter": self.parameter}
        if self.context:
            record["context"] = {k: _plain(v) for k, v in self.context.items()}
        return record


def _plain(v):
    if isinstance(v, (int, float, str, bool)) or v is None:
        return v
    return repr(v)


class DomainError(ForelError, ValueError):
    code = "domain"


class ParameterError(ForelError, ValueError):
    code = "parameter"


class ConvergenceError(ForelError, ArithmeticError):
    code = "convergence"


class NormalizationError(ParameterError):
    code = "normalization"


class CertificationError(ForelError, ArithmeticError):
    code = "certification"


class InsufficientDataError(ForelError, ValueError):
    code = "insufficient_data"


class DegenerateOrbitError(ForelError, ArithmeticError):
    code = "degenerate_orbit"


class ResolutionError(ForelError, ArithmeticError):
    code = "resolution"


class SingularityError(ForelError, ArithmeticError):
    code = "singularity"


class ConfigError(ForelError, ValueError):
    code = "config"


class NotFoundError(ForelError, LookupError):
    code = "not_found"


class SeedCountError(ForelError, ValueError):
    code = "seed_count"


class UsageError(ForelError, ValueError):
    code = "usage"
