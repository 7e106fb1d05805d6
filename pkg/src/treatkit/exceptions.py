class TreatError(ValueError):
    """Base class for treatkit errors."""


class CSVFormatError(TreatError):
    pass


class SchemaError(TreatError):
    """A column is missing or has the wrong kind for the requested operation."""


class SplitError(TreatError):
    pass


class DesignError(TreatError):
    pass


class PlanFormatError(TreatError):
    """A saved plan is truncated, corrupted or from an unsupported version."""
