from typing import Optional


class AdqError(Exception):
    """Base error. exit_code is what the CLI returns when this escapes a command."""

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DegenerateInput(AdqError):
    pass


class UnboundedBody(AdqError):
    def __init__(self, message: str, witness: Optional[list[float]] = None):
        super().__init__(message)
        self.witness = witness


class OriginOutside(AdqError):
    pass


class OriginOnBoundary(AdqError):
    pass


class ZeroRadial(AdqError):
    pass


class BadDims(AdqError):
    pass


class NonPositiveSupport(AdqError):
    pass


class AsymmetricInput(AdqError):
    pass


class EmptyMeasure(AdqError):
    pass


class NotEven(AdqError):
    pass


class InadmissibleMeasure(AdqError):
    exit_code = 2

    def __init__(self, message: str, witness: Optional[list[float]] = None):
        super().__init__(message)
        self.witness = witness


class ConcentrationFail(AdqError):
    exit_code = 2

    def __init__(self, message: str, ratio: float, subspace: list[list[float]]):
        super().__init__(message)
        self.ratio = ratio
        self.subspace = subspace


class ExcludedExponent(AdqError):
    exit_code = 3


class ExponentBelowGuarantee(AdqError):
    exit_code = 3


class NoConvergence(AdqError):
    exit_code = 4

    def __init__(self, message: str, report=None):
        super().__init__(message)
        # best iterate, a SolveReport
        self.report = report


class SchemaError(AdqError):
    exit_code = 1

    def __init__(self, message: str, field: str):
        super().__init__(f"{field}: {message}")
        self.field = field
