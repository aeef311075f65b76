"""Exception types shared across the package."""


class KshotError(Exception):
    """Base class for every error raised by this package."""


class InvalidChain(KshotError):
    pass


class InvalidLayering(KshotError):
    pass


class InvalidNode(KshotError):
    pass


class InvalidLabel(KshotError):
    pass


class InvalidLine(KshotError):
    pass


class InvalidPrime(KshotError):
    pass


class FormatError(KshotError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PolicyError(KshotError):
    """An adaptive policy misbehaved (e.g. returned different answers for identical inputs)."""


class NotEnoughShots(KshotError):
    pass


class NoOccurrence(KshotError):
    pass


class ProtocolIncomplete(KshotError):
    """A node is never scheduled again, so the schedule cannot finish broadcasting."""

    def __init__(self, node, message=""):
        super().__init__(message or f"node {node} never appears in a transmission set again")
        self.node = node


class NoPair(KshotError):
    pass


class TooLarge(KshotError):
    pass


class PolicyFinding(KshotError):
    """A policy failed a correctness obligation; carries a machine-checkable witness."""

    def __init__(self, kind, witness, message=""):
        super().__init__(message or f"{kind}: {witness}")
        self.kind = kind
        self.witness = witness
