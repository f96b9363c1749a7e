"""Exception types shared by the configuration, scheme and dynamics layers."""


class ConfigurationError(Exception):
    """Invalid or physically inconsistent experiment configuration."""


class InfeasibleSchemeError(ConfigurationError):
    """The level scheme / polarization combination cannot support EIT.

    Carries the feasibility report listing the orphaned ground sublevels.
    """

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class NumericalInstabilityError(RuntimeError):
    """The time-domain integration produced non-finite amplitudes."""


class UndefinedPolaritonBasisError(ValueError):
    """Dark-state direction is undefined (control and coupling both zero)."""
