"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Geometrically invalid data: degenerate configuration, wrong matrix class, etc."""


class ValidationError(GeometryError):
    """Structurally invalid input: bad gluing table, wrong vector length, etc."""
