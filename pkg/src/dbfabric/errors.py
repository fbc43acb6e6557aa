"""Exception hierarchy.

ConfigurationError and its subclasses map to CLI exit code 2; everything
else derived from FabricError maps to exit code 1.
"""


class FabricError(Exception):
    pass


class ConfigurationError(FabricError, ValueError):
    pass


class InvalidDigitError(ConfigurationError):
    def __init__(self, digit, d):
        super().__init__(f"invalid digit {digit!r} for radix {d}")
        self.digit = digit
        self.d = d


class IncompatibleLabelsError(ConfigurationError):
    pass


class GenerationFailureError(FabricError):
    def __init__(self, msg, seed):
        super().__init__(f"{msg} (seed={seed})")
        self.seed = seed


class MisplacementError(ConfigurationError):
    pass


class UnknownDestinationError(FabricError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ForwardingLoopError(FabricError):
    pass


class MisdeliveryError(FabricError):
    pass


class NoPathError(FabricError):
    pass


class MalformedInputError(FabricError, ValueError):
    pass
