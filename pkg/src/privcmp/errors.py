"""Exception types raised by the protocol engine."""


class ProtocolError(Exception):
    """Base class for all errors raised by privcmp."""


class ZeroLambda(ProtocolError, ValueError):
    """The blinding multiplier was zero."""


class EqualBlindedValues(ProtocolError, ValueError):
    """Trent was asked to order two identical blinded values."""


class EqualSecrets(ProtocolError, ValueError):
    """The millionaire comparison was started with a == b."""


class BadRoundCount(ProtocolError, ValueError):
    pass


class BadCounts(ProtocolError, ValueError):
    pass


class BadRange(ProtocolError, ValueError):
    pass


class KeyExhausted(ProtocolError):
    """Not enough unused key bits remain to encrypt a message."""


class Bb84Aborted(ProtocolError):
    """The estimated QBER exceeded the abort threshold.

    The measured ``qber`` and ``sifted_len`` are kept on the exception so
    callers can still report them.
    """

    def __init__(self, qber: float, threshold: float, sifted_len: int):
        super().__init__(f"QBER {qber:.4f} exceeds abort threshold {threshold:.4f}")
        self.qber = qber
        self.threshold = threshold
        self.sifted_len = sifted_len
