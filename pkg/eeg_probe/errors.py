class ProbeError(Exception):
    """
    Base class of all errors raised on purpose by eeg_probe. The CLI maps `exit_code` to the
    process exit status.
    """
    exit_code: int = 1


class UsageError(ProbeError):
    exit_code = 2


class ConfigError(ProbeError, ValueError):
    exit_code = 2


class FormatError(ProbeError):
    exit_code = 3


class DataError(ProbeError):
    exit_code = 3


class MontageError(ProbeError, KeyError):
    exit_code = 3

    def __str__(self):
        # KeyError would quote the message
        return Exception.__str__(self)


class SplitError(ProbeError):
    exit_code = 3


class InterpolationError(ProbeError):
    exit_code = 3


class DimensionError(ProbeError, ValueError):
    exit_code = 4


class NumericError(ProbeError, ArithmeticError):
    exit_code = 4


class ContractError(ProbeError, ValueError):
    exit_code = 4


class TrainingError(ProbeError):
    exit_code = 4
