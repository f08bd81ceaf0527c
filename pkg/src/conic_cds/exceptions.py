"""Exception hierarchy; the CLI maps these onto exit codes."""


class CalibrationError(Exception):
    """A pillar could not be calibrated.

    ``pillar`` is the 0-based index of the failing pillar and
    ``partial_result`` (if set) holds the pillars calibrated before it.
    """

    def __init__(self, message, pillar=None, partial_result=None):
        super().__init__(message)
        self.pillar = pillar
        self.partial_result = partial_result


class AssumptionViolation(CalibrationError):
    """Market data violates a hypothesis the calibration relies on.

    ``assumption`` is 1 (quotes outside the attainable range of risk-neutral
    values), 2 (quoted spread not attainable by any distortion level) or
    ``"monotonicity"`` (value not increasing in the hazard pillar).
    """

    def __init__(self, message, assumption, pillar=None, partial_result=None, **details):
        super().__init__(message, pillar, partial_result)
        self.assumption = assumption
        self.details = details


class SolverError(CalibrationError):
    """A bracketed root search failed to converge or a sign check failed."""


class QuoteFileError(ValueError):
    """Malformed market-data file."""
