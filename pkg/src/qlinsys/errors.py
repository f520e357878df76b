"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for bad input or violated preconditions, 3 for capacity limits and 4 for
numerical failures.
"""


class QLSError(Exception):
    exit_code = 1
    code = "error"


class InputError(QLSError, ValueError):
    exit_code = 2
    code = "input_error"


class FormatError(InputError):
    """A matrix or circuit file does not parse under its declared format."""

    code = "format_error"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotHermitianError(InputError):
    code = "not_hermitian"


class NormalizationError(InputError):
    code = "not_normalized"


class KappaMismatchError(InputError):
    code = "kappa_mismatch"


class BandViolationError(InputError):
    """An eigenvalue falls outside ``[-1, -1/kappa] U [1/kappa, 1]``."""

    code = "band_violation"


class RankError(InputError):
    code = "rank_deficient"


class CapacityError(QLSError):
    exit_code = 3
    code = "capacity_error"


class NumericalError(QLSError, ArithmeticError):
    exit_code = 4
    code = "numerical_error"


class SingularMatrixError(NumericalError):
    code = "singular_matrix"


class ConvergenceError(NumericalError):
    code = "no_convergence"


class ImpossibleOutcomeError(NumericalError):
    code = "impossible_outcome"


class DegeneratePostselectionError(NumericalError):
    code = "degenerate_postselection"


class DecodeFailureError(NumericalError):
    code = "decode_failure"
