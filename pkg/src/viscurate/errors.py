"""Exception hierarchy shared across the package.

Every domain error derives from :class:`PipelineError`, so callers (and the
CLI) can distinguish contract violations from programming bugs with a single
``except`` clause.  Class names double as stable error codes: the CLI prints
``<ClassName>: <message>`` and exits 1.
"""


class PipelineError(Exception):
    """Base class for all domain errors raised by this package."""


class DimensionMismatch(PipelineError):
    """Two masks (or mask lists) with incompatible shapes were combined."""


class CountSumMismatch(PipelineError):
    """RLE counts do not sum to width*height."""


class DomainError(PipelineError):
    """A scalar input lies outside its documented domain."""


class ParseError(PipelineError):
    """A dataset file could not be parsed into the expected structure."""


class InvariantViolation(PipelineError):
    """A structural invariant of the dataset model does not hold."""


class LengthMismatch(PipelineError):
    """Two sequences that must be index-aligned have different lengths."""


class TooFewSamples(PipelineError):
    """Not enough samples for the requested statistic."""


class MixedVideoError(PipelineError):
    """An operation restricted to one video received detections from several."""


class VideoMismatch(PipelineError):
    """Two detections that must share a video (and frame count) do not."""


class NoOverlap(PipelineError):
    """fuse_pair was called on a pair that fails the overlap predicate."""


class UnknownVideo(PipelineError):
    """A detection references a video with no known metadata."""


class NoDetections(PipelineError):
    """An operation requiring a non-empty detection set received none."""


class BothPoolsEmpty(PipelineError):
    """Source sampling was requested but both sampling pools are empty."""


class VideoSetMismatch(PipelineError):
    """Prediction and ground-truth datasets cover different video sets."""
