"""Exception hierarchy shared by every gstower module."""


class GSTowerError(Exception):
    """Base class for all library errors."""


class DomainError(GSTowerError, ValueError):
    """An argument lies outside the region where the operation is defined."""


class PreconditionError(GSTowerError, ValueError):
    pass


class DepthError(GSTowerError, ValueError):
    pass


class ResourceError(GSTowerError):
    """A computation would exceed a configured size or iteration cap."""


class ConsistencyError(GSTowerError):
    """Two independent computations (or a computation and a stored value) disagree."""


class BranchError(GSTowerError, ValueError):
    pass


class FixtureError(GSTowerError):
    pass
