"""
Error taxonomy for the NP-LDA Workbench

Every failure raised by the library carries a machine-readable ``code`` so the
experiment runner can store it as a repetition status and the CLI can print it
as a single JSON line.
"""
from typing import Any, Dict, Optional


class NpLdaError(Exception):
    """Base class for all library errors"""

    code: str = "np_lda_error"

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI error line"""
        payload: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.context:
            payload["context"] = {k: _plain(v) for k, v in self.context.items()}
        return payload


class InvalidLevel(NpLdaError):
    """A probability level lies outside its admissible range"""

    code = "invalid_level"


class NotPositiveDefinite(NpLdaError):
    """Cholesky factorization hit a non-positive pivot"""

    code = "not_positive_definite"


class DimensionMismatch(NpLdaError):
    code = "dimension_mismatch"


class NonPositiveSignal(NpLdaError):
    """A quadratic form that must be positive is not"""

    code = "non_positive_signal"


class InsufficientSamples(NpLdaError):
    code = "insufficient_samples"


class RatioOutOfRange(NpLdaError):
    """Aspect ratio r outside (0, 1)"""

    code = "ratio_out_of_range"


class ConfigError(NpLdaError):
    """Invalid experiment or screening configuration"""

    code = "config_error"


class UnknownExample(ConfigError):
    code = "unknown_example"


class DataError(NpLdaError):
    """Malformed tabular input"""

    code = "data_error"


class OutputError(NpLdaError):
    """Writing a result file failed"""

    code = "output_error"


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def error_code(exc: Optional[BaseException]) -> str:
    """Status code for an exception; unknown exceptions map to ``internal_error``"""
    if isinstance(exc, NpLdaError):
        return exc.code
    return "internal_error"
