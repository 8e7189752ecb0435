"""Exception and warning types raised across the package."""


class IonCavityError(Exception):
    """Base class for all package errors."""


class SignatureError(IonCavityError, ValueError):
    """Operands live on incompatible tensor-product spaces."""


class ContractError(IonCavityError, ValueError):
    """An input violates a numerical contract (e.g. a non-Hermitian generator)."""


class TruncationError(IonCavityError, ValueError):
    """A truncated Fock space cannot hold the requested state."""


class RegimeError(IonCavityError, ValueError):
    """A physical precondition (parameter regime, tuning) is violated."""


class StepGuardError(IonCavityError, ValueError):
    """Time step too coarse for the stepped propagator."""


class ConfigError(IonCavityError, ValueError):
    """Invalid run configuration."""


class TruncationWarning(UserWarning):
    """Population reaches the top of a truncated Fock space."""


class RegimeWarning(UserWarning):
    """Parameters sit near the edge of an approximation's validity."""
