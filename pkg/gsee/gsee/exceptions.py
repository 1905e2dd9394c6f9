"""
Error hierarchy shared by every app.

Shaped like rest_framework.exceptions.APIException: each class carries a
default detail and a machine-readable code, so the management commands can
map them onto exit codes without string matching.
"""


class GseeError(Exception):
    """Base class for numeric and domain failures"""

    default_detail = 'A numeric error occurred.'
    default_code = 'error'

    def __init__(self, detail=None, code=None):
        self.detail = detail if detail is not None else self.default_detail
        self.code = code if code is not None else self.default_code
        super().__init__(self.detail)

    def __str__(self):
        return str(self.detail)


class DomainError(GseeError, ValueError):
    default_detail = 'Argument outside the domain of the function.'
    default_code = 'domain'


class SizeError(GseeError, ValueError):
    default_detail = 'System size outside the supported range.'
    default_code = 'size'


class ParameterError(GseeError, ValueError):
    default_detail = 'Inconsistent parameters.'
    default_code = 'parameter'


class DimensionMismatch(GseeError, ValueError):
    default_detail = 'Operands have different dimensions.'
    default_code = 'dimension_mismatch'


class InfeasibleError(GseeError, ValueError):
    default_detail = 'Requested overlaps cannot be realised.'
    default_code = 'infeasible'


class DegenerateSignalError(GseeError, ValueError):
    default_detail = 'Segment has zero length.'
    default_code = 'degenerate'


class SignalTooShortError(GseeError, ValueError):
    default_detail = 'Signal too short for the requested segmentation.'
    default_code = 'signal_too_short'


class EmptyWindowError(GseeError, ValueError):
    default_detail = 'No grid point inside the requested window.'
    default_code = 'empty_window'


class NotDetectedError(GseeError):
    default_detail = 'No jump was detected.'
    default_code = 'not_detected'


class ConfigError(Exception):
    """Unreadable or malformed experiment configuration file"""

    def __init__(self, path, detail):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")
