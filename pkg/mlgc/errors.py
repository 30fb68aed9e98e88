class MLGCError(Exception):
    """
    Base error for every failure the pipeline reports on purpose.
    `exit_code` plays the part of an HTTP status: 1 = bad input, 2 = internal.
    """

    exit_code = 1

    def __init__(self, detail: str, image_id: str | None = None):
        self.detail = detail
        self.image_id = image_id
        super().__init__(str(self))

    def __str__(self):
        if self.image_id is not None:
            return f"[{self.image_id}] {self.detail}"
        return self.detail


# ------------------------
# INPUT ERRORS (exit 1)
# ------------------------

class ParseError(MLGCError):
    def __init__(self, detail: str, line: int | None = None, image_id: str | None = None):
        self.line = line
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail, image_id=image_id)


class SchemaError(MLGCError):
    pass


class DimensionError(MLGCError):
    pass


class ModelFeatureError(DimensionError):
    pass


class ParameterError(MLGCError):
    pass


class TrainingError(MLGCError):
    pass


class TrainingDataError(MLGCError):
    pass


class UndefinedMetricError(MLGCError):
    pass


class InputError(MLGCError):
    pass


class CorpusError(MLGCError):
    """Raised after a whole corpus ran; `results` holds the images that succeeded."""

    def __init__(self, failures: list[tuple[str, str]], results: list):
        self.failures = failures
        self.results = results
        ids = ", ".join(image_id for image_id, _ in failures)
        super().__init__(f"{len(failures)} image(s) failed: {ids}")


# ------------------------
# INTERNAL ERRORS (exit 2)
# ------------------------

class InvariantViolation(MLGCError):
    exit_code = 2


class NumericError(MLGCError):
    exit_code = 2
