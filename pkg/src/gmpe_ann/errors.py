"""Exception types shared across the package."""


class GmpeAnnError(Exception):
    """Base class for all errors raised by this package."""


class InputDomainError(GmpeAnnError):
    """A numeric input is non-finite or outside its required range."""


class CatalogError(GmpeAnnError):
    """A catalog file violates the schema or strict-mode row validation."""


class ModelFormatError(GmpeAnnError):
    """A model file is malformed, inconsistent, or of an unsupported version."""


class TrainingError(GmpeAnnError):
    """Numerical failure inside the Levenberg-Marquardt training loop."""


class AnalysisError(GmpeAnnError):
    """Undefined analysis result (zero variance, degenerate weights, bad predictions)."""
