"""Exception hierarchy. Every domain failure raises a PoseforgeError subclass."""


class PoseforgeError(Exception):
    """Base class for all categorized errors raised by this package."""


# -- pose canonicalization ------------------------------------------------

class WrongLength(PoseforgeError):
    """Flat keypoint sequence does not have exactly 51 values."""


class NonFiniteValue(PoseforgeError):
    """Coordinate or measurement is NaN or infinite."""


class InvalidVisibilityFlag(PoseforgeError):
    """Visibility value outside {0, 1, 2}."""


# -- manifests -------------------------------------------------------------

class MissingSplit(PoseforgeError):
    """A dataset is missing its train or val manifest."""


# -- annotation ingest -----------------------------------------------------

class AnnotationSyntaxError(PoseforgeError):
    """Byte stream is not well-formed; carries the offending position."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class SchemaViolation(PoseforgeError):
    """Document parses but a field is missing or has the wrong shape."""

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(message)
        self.field_path = field_path


class DanglingImageReference(PoseforgeError):
    """Annotation references an image id that is not in the document."""

    def __init__(self, annotation_id):
        super().__init__(f"annotation {annotation_id!r} references a missing image")
        self.annotation_id = annotation_id


class DuplicateId(PoseforgeError):
    """Image or annotation id occurs more than once."""

    def __init__(self, kind: str, identifier):
        super().__init__(f"duplicate {kind} id {identifier!r}")
        self.identifier = identifier


class UnknownCharacter(PoseforgeError):
    """Character name outside the closed label vocabulary."""

    def __init__(self, name: str):
        super().__init__(f"unknown character {name!r}")
        self.name = name


class UnknownScene(PoseforgeError):
    """Scene name outside the closed label vocabulary."""

    def __init__(self, name: str):
        super().__init__(f"unknown scene {name!r}")
        self.name = name


class DuplicatePersonId(PoseforgeError):
    """Person id occurs more than once where uniqueness is required."""

    def __init__(self, person_id):
        super().__init__(f"duplicate person id {person_id!r}")
        self.person_id = person_id


class UnknownPersonId(PoseforgeError):
    """Lookup of a person id that does not exist in the collection."""

    def __init__(self, person_id):
        super().__init__(f"unknown person id {person_id!r}")
        self.person_id = person_id


# -- similarity ------------------------------------------------------------

class NoLabeledKeypoints(PoseforgeError):
    """Keypoint comparison requested against a pose with no labeled joints."""


class NonPositiveArea(PoseforgeError):
    """Scale normalization needs a strictly positive reference area."""


# -- evaluation ------------------------------------------------------------

class MissingScore(PoseforgeError):
    """A prediction instance has no confidence score."""


class EmptyGroundTruth(PoseforgeError):
    """Evaluation requested with no ground-truth instances anywhere."""


# -- feature tensors -------------------------------------------------------

class ChannelMismatch(PoseforgeError):
    """Content and style tensors have different channel counts."""


class ShapeMismatch(PoseforgeError):
    """Operands must share an identical shape."""


class AlphaOutOfRange(PoseforgeError):
    """Blend coefficient outside [0, 1]."""


# -- losses ----------------------------------------------------------------

class LengthMismatch(PoseforgeError):
    """Feature lists have different lengths."""


class NegativeComponent(PoseforgeError):
    """Loss component must be non-negative."""


class NegativeInput(PoseforgeError):
    """Loss combination inputs must be non-negative."""


# -- retrieval -------------------------------------------------------------

class UnlabeledPose(PoseforgeError):
    """Index entry pose has no labeled keypoints."""


class EmptyIndex(PoseforgeError):
    """Operation requires a non-empty retrieval index."""


class UnlabeledQuery(PoseforgeError):
    """Query pose has no labeled keypoints."""


class TooFewResults(PoseforgeError):
    """Ranking is shorter than the requested cutoff."""


# -- service ---------------------------------------------------------------

class BindError(PoseforgeError):
    """Service could not bind its listen address."""


class CorruptIndex(PoseforgeError):
    """Persisted index file failed integrity checks."""


class CorruptTensorFile(PoseforgeError):
    """Persisted feature tensor failed integrity checks."""
