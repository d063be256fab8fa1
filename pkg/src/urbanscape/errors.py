"""Exception hierarchy shared across the package.

Raster/domain errors are subclasses of :class:`UrbanscapeError` so callers can
catch one base type; backend-related failures additionally share the
:class:`BackendFailure` base because the pipeline treats any backend problem
the same way (abort the operation, leave the session untouched).
"""


class UrbanscapeError(Exception):
    """Base class for all errors raised by this package."""


# --- raster / segment-map errors -------------------------------------------

class EmptyImage(UrbanscapeError):
    """Raster has zero pixels."""


class DimensionMismatch(UrbanscapeError):
    """Two rasters that must share dimensions do not."""


class UnknownSegmentId(UrbanscapeError):
    """Segment id not present in a segment map (or its metadata)."""


class UnknownClassName(UrbanscapeError):
    """Fine class name missing from the taxonomy table."""


class IdOverflow(UrbanscapeError):
    """Segment id does not fit the 24-bit raster encoding."""


class OutOfBounds(UrbanscapeError):
    """Pixel coordinate outside the raster."""


# --- mask geometry errors ---------------------------------------------------

class MaskNotNested(UrbanscapeError):
    """The selected mask is not contained in the dilated mask."""


class EmptyBand(UrbanscapeError):
    """Colour-correction band contains no pixels."""


# --- backend errors ---------------------------------------------------------

class BackendFailure(UrbanscapeError):
    """A backend call failed; base class for transport/protocol problems."""


class TransportError(BackendFailure):
    """Endpoint unreachable, timed out, or connection dropped."""


class ProtocolViolation(BackendFailure):
    """Response did not conform to the wire protocol."""


class InvalidSegmentMap(BackendFailure):
    """Backend returned a segment map violating its invariants."""


# --- session errors ---------------------------------------------------------

class UnsupportedImage(UrbanscapeError):
    """Upload is not decodable as RGB8 or is below the size floor."""


class ImageTooLarge(UrbanscapeError):
    """Upload exceeds the maximum supported dimensions."""


class IllegalTransition(UrbanscapeError):
    """Operation not permitted in the session's current state."""


class EmptyPrompt(UrbanscapeError):
    """Reconstruction prompt is empty after trimming."""


class NothingToUndo(UrbanscapeError):
    """Undo requested on a session with empty history."""


class HistoryLimitReached(UrbanscapeError):
    """Session already holds the configured maximum number of results."""


class IoFailure(UrbanscapeError):
    """Filesystem error while exporting or persisting."""


# --- evaluation errors ------------------------------------------------------

class ZeroVector(UrbanscapeError):
    """Cosine similarity of a zero-norm vector is undefined."""
