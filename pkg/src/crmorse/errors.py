"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map it without a
lookup table: 2 for malformed input, 3 for math-domain failures, 4 for data
that is individually valid but mutually inconsistent.
"""


class CRMorseError(Exception):
    exit_code = 3


class InputError(CRMorseError):
    """Malformed input document; the message names the offending field."""

    exit_code = 2


# math-domain errors (exit 3)


class SingularLevi(CRMorseError):
    pass


class DegenerateLevi(CRMorseError):
    pass


class UnboundedSignatureSet(CRMorseError):
    """q equals n_minus or n_plus of the Levi form, so the set contains a ray."""


class QOutOfRange(CRMorseError):
    pass


class EtaOutsideSet(CRMorseError):
    pass


class NonDiagonalWeight(CRMorseError):
    pass


class NonNegativeExponent(CRMorseError):
    pass


class ZeroGradient(CRMorseError):
    pass


class NotPositiveDefinite(CRMorseError):
    pass


class YViolation(CRMorseError):
    def __init__(self, j, message=None):
        self.j = j
        super().__init__(message or f"condition Y({j}) fails")


# data-consistency errors (exit 4)


class InconsistentInput(CRMorseError):
    exit_code = 4


class MixedSignature(CRMorseError):
    exit_code = 4


class LengthMismatch(CRMorseError):
    exit_code = 4


class ZeroEntry(CRMorseError):
    exit_code = 4


class SignPatternViolation(CRMorseError):
    exit_code = 4
