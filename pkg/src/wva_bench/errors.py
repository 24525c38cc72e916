"""Exception types shared across the package."""


class WvaBenchError(Exception):
    """Base class for all errors raised by this package."""


class NotNormalized(WvaBenchError):
    """State vector does not have unit norm."""


class BadParams(WvaBenchError):
    """Parameter values outside their admissible range."""


class DegenerateOverlap(WvaBenchError):
    """Post-selection overlap too close to zero for a stable weak value."""


class ComplexWeakValue(WvaBenchError):
    """Weak value has a non-negligible imaginary part."""


class NotPSD(WvaBenchError):
    """Matrix is not positive semidefinite within tolerance."""


class TooFewSamples(WvaBenchError):
    """Not enough samples for the requested estimate."""


class ZeroInformation(WvaBenchError):
    """Weak-value weights carry no information about the parameter."""


class NoPostselectedEvents(WvaBenchError):
    """No trial landed in the post-selected outcome."""


class BadVariance(WvaBenchError):
    """Variance must be strictly positive."""


class BadBins(WvaBenchError):
    """Categorical bin with observed counts but degenerate probability."""


class BadAlpha(WvaBenchError):
    """Significance level outside (0, 1)."""


class NegligibleProbability(WvaBenchError):
    """Outcome probability below the floor for a conditional quantity."""


class ConfigError(WvaBenchError):
    """Invalid or inconsistent run configuration."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class IoError(WvaBenchError):
    """Failed to read or write a results file."""
