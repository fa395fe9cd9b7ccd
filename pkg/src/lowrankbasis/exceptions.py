"""Exception types raised by the solver and its helpers."""


class LowRankBasisError(Exception):
    """Base class for all package errors."""


class NonFiniteError(LowRankBasisError, ValueError):
    pass


class RankDeficientError(LowRankBasisError, ValueError):
    """A set of vectors/matrices expected to be independent is not.

    ``numerical_rank`` carries the rank that was actually found.
    """

    def __init__(self, message, numerical_rank=None):
        super().__init__(message)
        self.numerical_rank = numerical_rank


class DegenerateIterateError(LowRankBasisError):
    """An iteration produced a matrix that cannot be normalized or thresholded.

    The partial trace collected so far is attached as ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SubspaceExhaustedError(LowRankBasisError):
    pass


class NonGenericError(LowRankBasisError):
    """Simultaneous diagonalization hit repeated or complex eigenvalues."""


class CPFailure(LowRankBasisError):
    pass


class MatrixFileError(LowRankBasisError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BlockRankDeficientError(RankDeficientError):
    """A least-squares block update has a rank-deficient design matrix.

    ``block`` names the factor being updated (``"A"``, ``"B"`` or ``"C"``).
    """

    def __init__(self, message, block, numerical_rank=None):
        super().__init__(f"block {block}: {message}", numerical_rank)
        self.block = block
