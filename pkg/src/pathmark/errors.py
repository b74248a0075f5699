"""Exception hierarchy shared across the package."""


class PathmarkError(Exception):
    """Base class for all pathmark errors."""


class ModelParseError(PathmarkError):
    """Input bytes could not be parsed into a model.

    ``offset`` is the byte offset of the first problem when known, -1 otherwise.
    """

    def __init__(self, message: str, offset: int = -1):
        super().__init__(message)
        self.offset = offset


class ModelValidationError(PathmarkError):
    """A parsed model violates structural invariants (duplicate ids, dangling refs, ...)."""

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = list(errors or [])


class UnsupportedFeatureError(ModelParseError):
    """The input uses a construct outside the supported XMI subset."""


class EncodingError(PathmarkError):
    """A path or key could not be encoded/decoded."""


class StorageError(PathmarkError):
    """The ordered key-value store failed or is in an unusable state."""


class DuplicateModelError(PathmarkError):
    """The model id is already present in the index."""


class UnknownModelError(PathmarkError):
    """The model id is not present in the index."""


class UnclassifiableError(PathmarkError):
    """Classification found no scoreable neighbor."""


class ModelTooSmallError(PathmarkError):
    """The model does not meet the minimum size for query mutation."""


class MutantDiscardedError(PathmarkError):
    """The mutated query failed the post-mutation size invariants."""
