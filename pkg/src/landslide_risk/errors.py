"""Exception hierarchy shared across the package."""


class LandslideRiskError(Exception):
    """Base class for all package errors."""


class CatalogFormatError(LandslideRiskError, ValueError):
    """Unknown catalog format."""


class SchemaError(LandslideRiskError, ValueError):
    """A mandatory catalog column is missing."""

    def __init__(self, column):
        super().__init__(f"missing mandatory column: {column}")
        self.column = column


class GraphConstructionError(LandslideRiskError, ValueError):
    pass


class NodeLookupError(LandslideRiskError, KeyError):
    pass


class ShapeError(LandslideRiskError, ValueError):
    pass


class TrainingError(LandslideRiskError, RuntimeError):
    def __init__(self, epoch, message):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class RetrievalError(LandslideRiskError, RuntimeError):
    pass


class PipelineError(LandslideRiskError, RuntimeError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
