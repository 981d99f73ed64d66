"""Exception hierarchy mirroring the engine's error categories.

``DataError`` covers malformed inputs (files, shapes), ``ConfigError``
covers invalid configuration, ``NumericError`` covers non-finite values
surfacing during training.  The CLI maps these onto distinct exit codes.
"""


class TrainerError(Exception):
    pass


class ConfigError(TrainerError):
    pass


class DataError(TrainerError):
    pass


class NumericError(TrainerError):
    pass
