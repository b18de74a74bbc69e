"""Exception hierarchy shared by every slicing4meta module."""


class Slicing4MetaError(Exception):
    """Base class for all errors raised by this package."""


# catalog
class DuplicateId(Slicing4MetaError):
    pass


class UnknownChild(Slicing4MetaError):
    pass


class KindMismatch(Slicing4MetaError):
    pass


class CycleDetected(Slicing4MetaError):
    pass


class UnknownModel(Slicing4MetaError, KeyError):
    pass


# resources
class InsufficientResources(Slicing4MetaError):
    """Raised when a reservation would drive a pool dimension negative.

    Callers treat this as an admission rejection signal.
    """


class UnknownReservation(Slicing4MetaError, KeyError):
    pass


class DoubleRelease(Slicing4MetaError):
    pass


# qoe
class InvalidParams(Slicing4MetaError, ValueError):
    pass


class DomainError(Slicing4MetaError, ValueError):
    pass


class EmptyUserSet(Slicing4MetaError, ValueError):
    pass


class NonConvergence(Slicing4MetaError, RuntimeError):
    pass


# orchestrator
class UnknownServiceKind(Slicing4MetaError, ValueError):
    pass


class MissingBundle(Slicing4MetaError):
    pass


class InvalidTransition(Slicing4MetaError):
    pass


class ModelNotAttached(Slicing4MetaError):
    pass


# controllers
class EmptyHistory(Slicing4MetaError, ValueError):
    pass


# simkernel / cli
class ScenarioInvalid(Slicing4MetaError, ValueError):
    """Scenario failed schema or semantic validation.

    ``path`` holds the location of the offending field, e.g. ``"qoe.k"``.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ConfigInvalid(Slicing4MetaError, ValueError):
    pass
