"""Exception types shared across the toolkit."""


class HologlintError(Exception):
    """Base class for all toolkit errors."""


class DegenerateGeometryError(HologlintError):
    """A geometric configuration collapsed (antiparallel axis, coincident foci, ...)."""


class SingularConfigurationError(HologlintError):
    """A residual was evaluated at a point coincident with the light or the eye."""


class HostEvaluationError(HologlintError):
    """A host surface query failed or returned unusable data."""


class SightlineMissError(HologlintError):
    """A sightline does not intersect the host surface."""


class DomainError(HologlintError):
    """Surface parameter outside its valid range (wrong sheet, pole, empty zero set)."""


class UnsupportedConfigurationError(HologlintError):
    """Valid input, but a configuration this toolkit deliberately does not solve."""


class RootFindError(HologlintError):
    """Bracketing or refinement failed to locate a surface intersection."""


class ShellTooThinError(HologlintError):
    """A foliation member cannot fit inside the conforming shell.

    Carries the half-thickness that would be required.
    """

    def __init__(self, required_delta: float, message: str | None = None):
        self.required_delta = required_delta
        super().__init__(
            message or f"shell too thin: requires half-thickness >= {required_delta:.6g} mm"
        )


class ResolutionError(HologlintError):
    """Mesh resolution too coarse to capture a ridge."""


class UnmachinableProfileError(HologlintError):
    """The required tangent-angle range cannot be ground into a single bit."""


class EnvelopeError(HologlintError):
    """A toolpath leaves the configured machine envelope."""


class SceneParseError(HologlintError):
    """Scene document error, with location information."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
