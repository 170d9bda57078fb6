class GeometryError(ValueError):
    """Invalid geometric input: bad shape, dimension mismatch, or a body that
    violates its construction invariants."""


class SceneError(ValueError):
    """A scene file could not be parsed or fails validation."""


class ConvergenceError(RuntimeError):
    """An inner iterative routine hit its iteration cap."""
