"""Exception types shared across the package."""


class NnlsGbdtError(Exception):
    """Base class for package-specific errors."""


class NonSquare(NnlsGbdtError):
    """A square matrix was required."""


class Overflow(NnlsGbdtError):
    """Operand norm exceeds the documented operating range."""


class SpectralClash(NnlsGbdtError):
    """Spectra of A and -B are not numerically disjoint; the linear map is near-singular."""


class NoConvergence(NnlsGbdtError):
    """Iterative eigenvalue computation failed to converge."""


class InvalidRange(NnlsGbdtError):
    """Integration bounds or step count are unusable."""


class DimensionMismatch(NnlsGbdtError):
    """Matrix shapes are inconsistent with each other."""


class DegenerateS(NnlsGbdtError):
    """The completed S(0,0) is singular; the data does not define a solution."""


class UnsupportedSeed(NnlsGbdtError):
    """Only the trivial (zero) seed solution is supported."""


class SpectralPole(NnlsGbdtError):
    """The spectral parameter z collides with an eigenvalue of A."""


class SingularPoint(NnlsGbdtError):
    """Evaluation requested at a point where det S vanishes."""

    def __init__(self, x, t, det_abs, message=None):
        self.x = x
        self.t = t
        self.det_abs = det_abs
        if message is None:
            message = f"S(x, t) is singular at x={x!r}, t={t!r} (|det S| = {det_abs:.3e})"
        super().__init__(message)


class AsymmetricGrid(NnlsGbdtError):
    """The x-grid is not symmetric about 0, so mirror evaluation is impossible."""


class GridTooSmall(NnlsGbdtError):
    """Too few grid points for the finite-difference stencil."""


class BadTau(NnlsGbdtError):
    """The modular parameter must have positive imaginary part."""


class RangeExceeded(NnlsGbdtError):
    """Theta argument outside the range where double precision can represent the sum."""


class ThetaZero(NnlsGbdtError):
    """A theta denominator vanishes at the requested point."""


class DegenerateCurve(NnlsGbdtError):
    """Branch points coincide; the curve is not smooth of genus 1."""


class QuadratureFailure(NnlsGbdtError):
    """Adaptive quadrature did not reach the requested accuracy."""


class InvalidParams(NnlsGbdtError):
    """Parameter values violate a documented precondition."""


class SchemaError(NnlsGbdtError):
    """Scenario file does not conform to the documented schema."""
