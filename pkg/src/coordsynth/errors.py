"""Exception hierarchy shared by every coordsynth module."""


class CoordsynthError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CoordsynthError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class PreconditionError(CoordsynthError, ValueError):
    pass


class StateSpaceError(CoordsynthError):
    """The explored state space exceeded the configured cap."""

    def __init__(self, cap):
        self.cap = cap
        super().__init__(f"state-space cap of {cap} states exceeded")


class UnsupportedFragmentError(CoordsynthError):
    """A Büchi property lies outside the fragment a routine can handle."""


class SynthesisError(CoordsynthError):
    """No coordinator with the requested guarantees exists."""

    def __init__(self, message, counterexample=None):
        self.counterexample = counterexample
        super().__init__(message)


class ChannelMismatchError(CoordsynthError, ValueError):
    pass


class InconsistentEnhancementError(CoordsynthError):
    """The enhancement may break a previously enforced property."""

    def __init__(self, reports):
        self.reports = list(reports)
        names = ", ".join(r.property_name for r in self.reports if not getattr(r, "ok", False))
        super().__init__(f"enhancement possibly inconsistent with: {names}")
