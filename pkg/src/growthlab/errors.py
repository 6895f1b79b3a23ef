"""Exception hierarchy for growthlab."""


class GrowthlabError(Exception):
    """Base class for all library errors."""


class InvalidSpace(GrowthlabError):
    pass


class BadProbabilities(InvalidSpace):
    pass


class NonRefining(InvalidSpace):
    pass


class NonTrivialRoot(InvalidSpace):
    pass


class NotMeasurable(GrowthlabError):
    pass


class InvalidProcess(GrowthlabError):
    pass


class NegativeValue(InvalidProcess):
    pass


class AbsorptionViolation(InvalidProcess):
    pass


class NonPositiveScaler(GrowthlabError):
    pass


class HorizonError(GrowthlabError):
    """Requested horizon is outside the range a process or config supports."""


class WindowTooLarge(GrowthlabError):
    pass


class InversionFailure(GrowthlabError):
    """Numeric inversion of a utility could not bracket the target."""


class BadDistribution(GrowthlabError):
    pass


class ConfigError(GrowthlabError):
    """Malformed assessor/process/space/campaign configuration."""
