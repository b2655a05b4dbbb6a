"""Exception types raised by rentfs."""


class RentError(Exception):
    """Base class for all errors raised by this package."""


class DataError(RentError, ValueError):
    """Invalid input data: bad CSV cells, labels, shapes or split parameters."""


class SolverError(RentError, ValueError):
    """Invalid solver configuration or input to a GLM fit."""


class SelectionError(RentError):
    """Feature selection produced no usable result (e.g. an empty F*)."""


class SearchError(RentError):
    """A hyperparameter grid search had no admissible grid point."""
