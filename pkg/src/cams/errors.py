"""Exception types shared across the package.

File-system failures use the builtins (FileNotFoundError, OSError); everything
domain-specific derives from CamsError so callers can catch one base.
"""


class CamsError(Exception):
    """Base class for package-specific errors."""


class DecodeError(CamsError):
    """File exists but is not decodable as a supported image format."""


class InvalidKernel(CamsError):
    """Blur kernel size must be an odd positive integer."""


class InvalidSigma(CamsError):
    """Fall-off or blur standard deviation must be positive."""


class InvalidSize(CamsError):
    """Requested raster dimensions must be positive integers."""


class WeightsMismatch(CamsError):
    """Weights file or layer configuration does not match the backbone."""


class TooSmallInput(CamsError):
    """Image smaller than the backbone's minimum input size."""


class UnknownLayer(CamsError):
    """Requested layer name is not a tap of the extractor."""


class EmptyFeature(CamsError):
    """Feature tensor has no elements."""


class DimMismatch(CamsError):
    """Tensors that must share a shape do not."""


class LayerSetMismatch(CamsError):
    """Two tap collections cover different layer names."""


class KeySetMismatch(CamsError):
    """Two Gram collections cover different (layer, color) keys."""


class NonFiniteLoss(CamsError):
    """A loss value became NaN or infinite.

    When raised from an optimization run, ``partial`` holds the result built
    from the last finite state, if any.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PaletteError(CamsError):
    """No usable palette: both images are single-color with the same color."""


class InvalidAssociation(CamsError):
    """Association pairs reference missing, out-of-range or discarded colors."""
