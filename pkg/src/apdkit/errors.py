"""Exception hierarchy shared by all engines.

Every class carries the process exit code the command-line tool uses for it.
"""


class ApdError(Exception):
    exit_code = 1


class InputError(ApdError, ValueError):
    """Malformed or invalid input (files, node references, taxon sets)."""

    exit_code = 2


class PreconditionError(ApdError):
    """A structural requirement of the chosen engine does not hold."""

    exit_code = 3


class NotReticulationVisibleError(PreconditionError):
    def __init__(self, nodes, message=None):
        self.nodes = tuple(nodes)
        super().__init__(message or f"invisible reticulations: {list(self.nodes)}")


class ResourceError(ApdError):
    """The requested computation exceeds a configured size cap."""

    exit_code = 4


class ContractError(ApdError, ValueError):
    """An API argument violates the documented contract of a function."""

    exit_code = 2
