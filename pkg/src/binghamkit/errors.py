"""Exception and warning types shared across the package."""


class BinghamKitError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateInput(BinghamKitError):
    """An input vector is too close to zero to carry directional information."""


class InvalidParameter(BinghamKitError):
    """A parameter violates its documented constraints."""


class NumericalFailure(BinghamKitError):
    """An underlying numerical routine failed (e.g. eigendecomposition)."""


class DegenerateEigenvalues(BinghamKitError):
    """Eigenvalues too close together for an eigenvector-perturbation formula."""


class EnvelopeFailure(BinghamKitError):
    """Rejection-sampling envelope accepts essentially nothing; it is mis-tuned."""


class NumericalWarning(UserWarning):
    """A computed quantity is usable but its error indicator is larger than expected."""
