"""Exception hierarchy shared by all xychain modules.

Each class carries a short ``category`` string; the command line maps it to
its exit status and machine-readable error line.
"""


class XYChainError(Exception):
    category = "error"
    exit_code = 1


class ParameterError(XYChainError, ValueError):
    """Inputs outside the physical or supported domain."""

    category = "parameter"
    exit_code = 2


class InvariantError(XYChainError):
    """A density matrix or correlator table violates a structural invariant."""

    category = "invariant"
    exit_code = 3


class ConvergenceError(XYChainError):
    """An iterative solver stopped before reaching its tolerance."""

    category = "convergence"
    exit_code = 4

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class NoOnsetError(XYChainError):
    """No entanglement onset was found on the scanned field interval."""

    category = "no-onset"
    exit_code = 5

    def __init__(self, message, scan_log=None):
        super().__init__(message)
        self.scan_log = list(scan_log or [])
