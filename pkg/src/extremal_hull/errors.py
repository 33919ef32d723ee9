"""Exception hierarchy shared by every module of the package."""


class ExtremalHullError(Exception):
    pass


class InvalidSpecError(ExtremalHullError, ValueError):
    """A Lévy measure, drift or experiment specification is not admissible."""


class InvalidParameterError(ExtremalHullError, ValueError):
    pass


class SimulationError(ExtremalHullError, RuntimeError):
    """A simulation step produced a non-finite value.

    ``node`` holds the index of the offending grid node when known.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ContractViolation(ExtremalHullError, ValueError):
    """An operation was called with inputs outside its precondition."""


class DegenerateInputError(ExtremalHullError, ValueError):
    pass


class UndefinedDistanceError(ExtremalHullError, ValueError):
    pass
