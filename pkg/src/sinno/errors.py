"""Exception hierarchy shared by the library and the CLI."""


class SinnoError(ValueError):
    """Base class for all input/data errors raised by this package."""


class InputError(SinnoError):
    pass


class DomainError(SinnoError):
    """Evaluation point outside the operator's interval."""


class AlignmentError(InputError):
    """A grid node does not coincide with any sample time (exact sampling)."""

    def __init__(self, node_index: int, node_time: float):
        super().__init__(f"node k={node_index} (t={node_time!r}) is not on the sample grid")
        self.node_index = node_index
        self.node_time = node_time


class SchemaError(InputError):
    pass


class NotFoundError(InputError):
    pass


class FitError(InputError):
    pass
