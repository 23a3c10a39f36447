"""Exception types raised by the simulator.

Numerical errors signal bad inputs or too-coarse discretizations; the
physics-level errors (NullOverlap, NotAPermutation, DegeneracyEncountered)
carry meaning of their own and are routinely caught by callers.
"""


class GeomphaseError(Exception):
    """Base class for all package errors."""


class NonRealRoots(GeomphaseError):
    """Cubic discriminant indicates complex roots; the input cannot be the
    characteristic polynomial of a Hermitian matrix."""


class ConvergenceFailure(GeomphaseError):
    """Eigensolver residual target not reached."""


class NonFiniteState(GeomphaseError):
    """An integrated amplitude became inf/nan, usually a too-large step."""


class DegenerateDenominator(GeomphaseError):
    """Closed-form eigenvector expression is singular for this root; the
    caller must fall back to the numeric eigensolver."""


class ZeroDenominator(GeomphaseError):
    """Drive amplitude and detuning both vanish; the adiabaticity ratio is
    undefined at this instant."""


class NullOverlap(GeomphaseError):
    """Overlap modulus below the null tolerance: the corresponding phase
    factor is undefined (this is physics, not a numerical defect)."""


class GridTooCoarse(GeomphaseError):
    """Successive eigenvectors overlap too weakly for continuity tracking."""


class DegeneracyEncountered(GeomphaseError):
    """Two eigenvalues are numerically degenerate and overlap tracking is
    ambiguous."""


class NotAPermutation(GeomphaseError):
    """Final states do not realize a bijection onto the reference basis at
    the requested fidelity (non-adiabatic evolution)."""

    def __init__(self, message, fidelities=None):
        super().__init__(message)
        self.fidelities = fidelities


class SchemaMismatch(GeomphaseError):
    """A data file does not match its documented column schema."""


class ConfigError(GeomphaseError):
    """Invalid or inconsistent scenario/sweep configuration."""
