"""Exception hierarchy shared across the package.

Every operation raises a named subclass of :class:`SpecinfoError` so callers
can distinguish validation failures without string matching. All of them are
``ValueError`` subclasses, so generic numeric code that only catches
``ValueError`` keeps working.
"""


class SpecinfoError(ValueError):
    """Base class for all errors raised by this package."""


class ZeroSpectrumError(SpecinfoError):
    """A spectrum is identically zero where a nonzero norm is required."""


class NonFiniteError(SpecinfoError):
    """An intensity vector contains NaN or infinite values."""


class WindowOutOfRangeError(SpecinfoError):
    """A ppm window extends beyond the grid it is applied to."""


class GridTooSmallError(SpecinfoError):
    """A grid has fewer than two channels."""


class GridMismatchError(SpecinfoError):
    """Two objects that must share a ppm grid do not."""


class EmptyLibraryError(SpecinfoError):
    """A library operation received a library with no entries."""


class NonPositiveThresholdError(SpecinfoError):
    """A clipping threshold must be strictly positive."""


class BinOutOfRangeError(SpecinfoError):
    """A bin index falls outside a histogram's bins."""


class LengthMismatchError(SpecinfoError):
    """Two vectors that must have equal length do not."""


class ZeroVarianceError(SpecinfoError):
    """A vector has zero variance where a correlation is required."""


class DimensionMismatchError(SpecinfoError):
    """Matrix or vector dimensions are incompatible."""


class EmptySamplesError(SpecinfoError):
    """A sample set that must be non-empty is empty."""


class DegenerateRangeError(SpecinfoError):
    """All samples are identical, so no histogram range exists."""


class TOutOfRangeError(SpecinfoError):
    """A curve parameter lies outside the unit interval."""


class NonOneHotTargetError(SpecinfoError):
    """A classification target vector is not one-hot."""


class FileFormatError(SpecinfoError):
    """A data file does not match the expected on-disk format."""
