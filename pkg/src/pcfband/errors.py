"""Exception types raised across the package."""


class PcfBandError(Exception):
    """Base class for all package errors."""


class DegenerateLattice(PcfBandError):
    pass


class EmptyPath(PcfBandError):
    pass


class AmbiguousGeometry(PcfBandError):
    pass


class InvalidPartition(PcfBandError):
    pass


class Undersampled(PcfBandError):
    pass


class TableTooSmall(PcfBandError):
    pass


class OutsideZone(PcfBandError):
    pass


class SolverDiverged(PcfBandError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroFrequency(PcfBandError):
    pass


class ParamMismatch(PcfBandError):
    pass


class FlatInterface(PcfBandError):
    pass


class NoInterface(PcfBandError):
    pass


class DegenerateExponent(PcfBandError):
    pass


class ConfigError(PcfBandError):
    """Any problem with a configuration file."""


class ConfigSyntaxError(ConfigError):
    pass


class ConfigSchemaError(ConfigError):
    pass


class ConfigInvariantError(ConfigError):
    pass
