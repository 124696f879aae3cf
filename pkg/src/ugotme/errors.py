"""Shared exception types."""


class UGotMeError(Exception):
    """Base class for all pipeline errors."""


# --- wire protocol ---

class WireError(UGotMeError):
    pass


class BadMagic(WireError):
    pass


class UnknownVariant(WireError):
    pass


class MalformedPayload(WireError):
    pass


class OversizeMessage(WireError):
    pass


# --- ring buffer ---

class StaleFrame(UGotMeError):
    pass


class InvalidWindow(UGotMeError):
    pass


# --- transport ---

class TransportError(UGotMeError):
    def __init__(self, message, partial_log=None):
        super().__init__(message)
        self.partial_log = partial_log


# --- perception ---

class NoFaceFound(UGotMeError):
    pass


class DegenerateBox(UGotMeError):
    pass


class SizeMismatch(UGotMeError):
    pass


# --- context ---

class NoCurrentTurn(UGotMeError):
    pass


class NonContiguousTurn(UGotMeError):
    pass


# --- model ---

class ConfigError(UGotMeError):
    pass


class BadLabel(UGotMeError):
    pass


class NoTextInput(UGotMeError):
    pass


class ModelFormatError(UGotMeError):
    pass


class DivergenceError(UGotMeError):
    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


# --- evaluation ---

class EvalError(UGotMeError):
    pass
