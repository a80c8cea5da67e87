"""Exception hierarchy shared across the package."""


class FerrofracError(Exception):
    """Base class for all package errors."""


class ParseError(FerrofracError):
    """Malformed input file (mesh or config syntax)."""


class TagError(FerrofracError):
    """Reference to an unknown subdomain / boundary / physical-group tag."""


class GeometryError(FerrofracError):
    """Degenerate or inconsistent geometry (zero-area cell, overlapping features)."""


class SchemaError(FerrofracError):
    """Configuration key or structure not in the documented schema."""


class UnitError(FerrofracError):
    """Physically inadmissible parameter value (e.g. negative modulus)."""


class DomainError(FerrofracError):
    """Function argument outside its admissible domain."""


class UnsupportedOrder(FerrofracError):
    """Quadrature or element order not provided."""


class KernelError(FerrofracError):
    """Element kernel failed during assembly."""

    def __init__(self, cell, message):
        super().__init__(f"cell {cell}: {message}")
        self.cell = cell


class SingularMatrix(FerrofracError):
    """Linear system singular after Dirichlet elimination."""


class NoConvergence(FerrofracError):
    """Iterative linear solver failed to reach its tolerance."""

    def __init__(self, iterations, message="iterative solver did not converge"):
        super().__init__(f"{message} (iterations={iterations})")
        self.iterations = iterations


class EnergyOverflow(FerrofracError):
    """Exponential constitutive coefficient out of its guarded range."""


class NewtonDiverged(FerrofracError):
    """Newton iteration on the equilibrium residual failed."""

    def __init__(self, iterations, residuals):
        super().__init__(
            f"Newton diverged after {iterations} iterations "
            f"(last residual {residuals[-1]:.3e})"
        )
        self.iterations = iterations
        self.residuals = list(residuals)


class StaggerDiverged(FerrofracError):
    """Staggered fixed-point loop exceeded its iteration budget."""

    def __init__(self, iterations, history):
        super().__init__(
            f"staggered loop exceeded {iterations} iterations "
            f"(last residual {history[-1]:.3e})"
        )
        self.iterations = iterations
        self.history = list(history)


class IoError(FerrofracError):
    """Output file could not be written."""
