"""Exception types raised by the toolkit."""


class XSqueezeError(Exception):
    """Base class for domain errors (bad inputs raise plain ``ValueError``)."""


class DegenerateDirectionError(XSqueezeError):
    """The mean spin vanishes, so no perpendicular plane is defined."""


class UnreachableContrastError(XSqueezeError):
    """No Omega/chi ratio inside the search bracket produces the requested contrast."""


class DivergentSensitivityError(XSqueezeError):
    """The Ramsey signal slope vanishes at the requested phase."""
