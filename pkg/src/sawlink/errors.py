"""Exception taxonomy shared across the toolkit.

The CLI maps these onto process exit codes: validation problems exit
with 2, integration problems with 3, and I/O problems with 4.
"""


class SawlinkError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SawlinkError):
    """Inputs violate a documented precondition or invariant."""


class ConfigError(ValidationError):
    """A config file failed to parse or contains unknown/invalid keys."""


class RoleAmbiguityError(ValidationError):
    """Both candidate emitter couplings are active at the same instant."""


class IntegrationError(SawlinkError):
    """The ODE/DDE integrator failed to produce an acceptable solution."""


class DiagnosticsError(IntegrationError):
    """A produced trajectory violates a physical invariant beyond tolerance."""
