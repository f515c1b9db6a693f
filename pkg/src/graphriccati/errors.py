"""Exception hierarchy shared by all modules."""


class GraphRiccatiError(Exception):
    """Base class for every error raised by this package."""


class NonFinite(GraphRiccatiError, ValueError):
    pass


class NonHermitian(GraphRiccatiError, ValueError):
    pass


class AmbientMismatch(GraphRiccatiError, ValueError):
    pass


class ShapeMismatch(GraphRiccatiError, ValueError):
    pass


class DimensionMismatch(GraphRiccatiError):
    """A computed dimension disagrees with the one the theory forces.

    Almost always means an eigenvalue fell on the wrong side of a
    clustering window; loosen or tighten ``tol_eig``.
    """


class HypothesisViolated(GraphRiccatiError):
    """The block operator does not have ordered diagonal spectra at lambda."""


class NotAGraph(GraphRiccatiError):
    pass


class InconsistentSpec(GraphRiccatiError, ValueError):
    pass


class InconsistentVerdict(GraphRiccatiError):
    pass


class NoKernelCoupling(GraphRiccatiError):
    pass


class NegativeInput(GraphRiccatiError, ValueError):
    pass


class AssertionFailure(GraphRiccatiError):
    """A numerical post-condition failed.

    ``clause`` names the check that failed so callers can report it.
    """

    def __init__(self, clause, message=""):
        self.clause = clause
        super().__init__(f"{clause}: {message}" if message else clause)
