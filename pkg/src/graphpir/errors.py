"""Exception hierarchy shared by every graphpir module."""


class PirError(Exception):
    """Base class for all graphpir errors."""


class DomainError(PirError, ValueError):
    """An argument lies outside the operation's domain."""


class UnsupportedStructureError(PirError):
    """The storage system does not have the structure an operation requires."""


class SpecFormatError(PirError, ValueError):
    """A spec file could not be parsed."""


class SpecValidationError(PirError, ValueError):
    """A storage system violates one of its structural rules."""


class AnswerabilityError(PirError):
    """A query asks a database about a message it does not store."""

    def __init__(self, database: int, message: int):
        super().__init__(f"database {database} does not store message {message}")
        self.database = database
        self.message = message


class DecodabilityError(PirError):
    """The desired message cannot be recovered from the collected answers."""


class OracleScaleError(PirError):
    """The brute-force oracle was asked to enumerate beyond its budget."""


class NoUniqueSolution(PirError):
    """A linear system has no solution or more than one.

    ``kind`` is ``"inconsistent"`` or ``"underdetermined"``.
    """

    def __init__(self, kind: str, rank: int, unknowns: int):
        super().__init__(f"{kind} system: rank {rank} for {unknowns} unknowns")
        self.kind = kind
        self.rank = rank
        self.unknowns = unknowns
