"""Exception types shared across the library and the CLI.

The CLI maps these onto process exit codes: config problems exit 2, data
problems exit 3, failed result checks exit 1.
"""


class GentuneError(Exception):
    """Base class for all library errors."""


class DomainError(GentuneError, ValueError):
    """An argument violates a documented precondition."""


class SingularSystemError(GentuneError):
    """Normal equations are rank-deficient and no ridge term rescues them."""


class DegenerateSmootherError(GentuneError):
    """tr(I - A) vanished; the smoother interpolates and GCV is undefined."""


class TrainingDivergedError(GentuneError):
    """Loss became non-finite during generator / network training."""

    def __init__(self, step, loss_tail):
        self.step = step
        self.loss_tail = list(loss_tail)
        super().__init__(
            f"training diverged at step {step}; last losses: {self.loss_tail}"
        )


class CriterionEvalError(GentuneError):
    """Outer-criterion evaluation failed for a specific Monte Carlo draw."""

    def __init__(self, draw_index, cause):
        self.draw_index = draw_index
        super().__init__(f"criterion evaluation failed at draw {draw_index}: {cause}")


class ConfigError(GentuneError):
    """Experiment configuration file is missing, malformed, or has unknown keys."""


class DataError(GentuneError):
    """Input data files are missing, corrupt, or fail checksum verification."""


class IdxBadMagicError(DataError):
    """IDX header magic bytes are not a recognized tensor tag."""


class IdxTruncatedError(DataError):
    """IDX payload length disagrees with the declared dimensions."""


class IdxDimensionOverflowError(DataError):
    """IDX declared dimensions imply an implausibly large payload."""


class CheckFailure(GentuneError):
    """An experiment's built-in result check did not hold."""
