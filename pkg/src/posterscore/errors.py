"""Exception hierarchy shared by every posterscore module."""


class PosterScoreError(Exception):
    """Base class for all toolbox errors."""


class ScoreError(PosterScoreError, ValueError):
    pass


class OutOfRange(ScoreError):
    def __init__(self, raw):
        super().__init__(f"score {raw!r} outside [1.0, 5.0]")
        self.raw = raw


class NotFinite(ScoreError):
    def __init__(self, raw):
        super().__init__(f"score {raw!r} is not finite")
        self.raw = raw


class SchemaError(PosterScoreError, ValueError):
    """Malformed record, row or report block."""


class ConfigError(PosterScoreError, ValueError):
    pass


class MetricError(PosterScoreError, ValueError):
    pass


class DegenerateSeries(MetricError):
    """A series has zero variance (or all ranks tie), so correlation is undefined."""


class EmptySeries(MetricError):
    pass


class Undefined(MetricError):
    """Agreement coefficient cannot be computed (no pairable unit)."""


class NoPairableUnits(MetricError):
    pass


class LengthMismatch(PosterScoreError, ValueError):
    pass


class ZeroVector(MetricError):
    pass


class NoRecords(PosterScoreError, ValueError):
    pass


class EmptyOriginal(PosterScoreError, ValueError):
    pass


class MissingPrediction(PosterScoreError, KeyError):
    def __init__(self, id_):
        super().__init__(id_)
        self.id = id_

    def __str__(self):
        return f"no prediction for id {self.id!r}"


class MissingGroundTruth(PosterScoreError, KeyError):
    def __init__(self, id_):
        super().__init__(id_)
        self.id = id_

    def __str__(self):
        return f"no ground truth for id {self.id!r}"


class EmptyPopulation(PosterScoreError, ValueError):
    pass


class QuotaExceedsPopulation(PosterScoreError, AssertionError):
    pass


class GeneratorError(PosterScoreError, RuntimeError):
    """Raised when the text generator fails; ``attempts`` counts calls made, including the failing one."""

    def __init__(self, attempts, cause):
        super().__init__(f"generator failed on attempt {attempts}: {cause!r}")
        self.attempts = attempts
        self.cause = cause
