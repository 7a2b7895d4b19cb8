"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid physical input. ``field`` names the offending quantity when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class GeometryError(ValidationError):
    """Zero or singular separation, or a non-unit axis."""


class SpeciesFileError(ValidationError):
    """Species data file could not be parsed or violates the schema."""


class IndistinguishableSpeciesError(ValidationError):
    """Detuning between the two atoms is below the weak-coupling floor."""
