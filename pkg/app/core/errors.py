class PercolationError(ValueError):
    """Error base del toolkit; los manejadores HTTP lo traducen a 400"""


class InvalidParameterError(PercolationError):
    pass


class PreconditionError(PercolationError):
    pass


class InitializationError(PercolationError):
    pass


class TopologyError(PercolationError):
    pass


class ConfigError(PercolationError):
    pass


class UnknownLemmaError(PercolationError):
    pass
