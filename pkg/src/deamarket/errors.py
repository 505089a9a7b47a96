"""Exception hierarchy shared by every layer of the marketplace."""


class DeaMarketError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(DeaMarketError, ValueError):
    """A document could not be parsed.

    ``line`` and ``column`` are 1-based when the location is known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class MalformedTrytesError(ParseError):
    """Tryte string has odd length or a symbol outside the alphabet."""


class TryteRangeError(ParseError):
    """A tryte pair decodes to a value above 255."""


class AuthenticationError(DeaMarketError):
    """Signature or Merkle path does not verify: wrong key or tampered data."""


class AccessRevoked(AuthenticationError):
    """A restricted channel stopped verifying under the subscriber's key."""


class NotFoundError(DeaMarketError, LookupError):
    """Requested address, content id, root or transaction does not exist."""


class IntegrityError(DeaMarketError):
    """Stored or transmitted data no longer matches its digest."""


class CapacityError(DeaMarketError, ValueError):
    """A single transaction payload exceeds the transaction capacity."""


class PreconditionError(DeaMarketError, ValueError):
    """Caller violated an operation's precondition."""


class RealizationError(DeaMarketError, ValueError):
    """A graph failed validation and cannot be realized into a DEA record."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"graph is invalid: {report}")
