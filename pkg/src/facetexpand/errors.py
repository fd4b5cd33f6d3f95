"""Exception hierarchy shared across the package."""


class FacetExpandError(Exception):
    """Base class for all package errors."""


class EmptyCorpusError(FacetExpandError):
    """The input corpus contained no usable documents."""


class CorpusReadError(FacetExpandError):
    """A corpus line could not be read or decoded."""

    def __init__(self, path, line_no, reason):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {reason}")


class UnknownEntityError(FacetExpandError):
    """The requested entity is not in the index vocabulary."""

    def __init__(self, entity):
        self.entity = entity
        super().__init__(f"unknown entity: {entity!r}")


class IncompatibleIndexError(FacetExpandError):
    """The index file has the wrong magic bytes or format version."""


class IndexChecksumError(FacetExpandError):
    """The index file payload does not match its stored checksum."""


class FormatError(FacetExpandError):
    """A text input file is malformed."""

    def __init__(self, path, line_no, reason):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {reason}")


class DimensionError(FacetExpandError):
    """Embedding dimension does not match what the caller expected."""


class DegenerateVectorError(FacetExpandError):
    """A zero-norm vector was fed to a cosine similarity computation."""


class NoEmbeddableContextError(FacetExpandError):
    """Every skip-gram of a seed dropped out of embedding."""

    def __init__(self, seed):
        self.seed = seed
        super().__init__(f"no embeddable skip-gram context for seed {seed!r}")


class NoCoherentFacetError(FacetExpandError):
    """Fusion eliminated every candidate facet.

    Carries per-pair correlation tables so the failure can be debugged.
    """

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("no coherent facet survives fusion across all seeds")


class EmptyExpansionError(FacetExpandError):
    """No candidate entity scored above zero for a facet."""


class ScorerUnavailableError(FacetExpandError):
    """The external scoring sidecar cannot be reached."""


class ProtocolError(FacetExpandError):
    """The scoring sidecar sent a reply that violates the wire protocol."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"{message}: {line!r}"
        super().__init__(message)


class ConfigError(FacetExpandError):
    """A run configuration value is missing, unknown, or out of range."""
