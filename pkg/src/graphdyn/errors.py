"""Exception hierarchy shared across the package.

Every error raised deliberately by this package derives from GraphDynError,
so callers can catch one type at CLI boundaries while tests assert on the
specific subclasses.
"""


class GraphDynError(Exception):
    """Base class for all package errors."""


class SizeMismatchError(GraphDynError):
    """Two graphs or arrays that must share a dimension do not."""


class EmptyInputError(GraphDynError):
    """An operation that needs at least one element got none."""


class GridAlignmentError(GraphDynError):
    """A requested time does not lie on the series' uniform grid."""


class DataFormatError(GraphDynError):
    """A dataset file is malformed; message names the file (and line)."""


class SimulationBlowUpError(GraphDynError):
    """Simulator state became non-finite; message names the step."""


class ConfigurationError(GraphDynError):
    """A config value violates a documented constraint."""


class DegenerateDataError(GraphDynError):
    """Data too degenerate for an estimator (e.g. singular covariance)."""


class CollinearityError(GraphDynError):
    """A regression design matrix is rank deficient."""


class ExtrapolationError(GraphDynError):
    """A query time lies outside the observed span."""


class InsufficientDataError(GraphDynError):
    """Not enough points/neighbors to compute the requested statistic."""


class DivergenceError(GraphDynError):
    """Training produced a non-finite loss or parameter update."""
