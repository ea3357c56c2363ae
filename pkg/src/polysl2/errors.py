"""Exception taxonomy for the polysl2 package.

Every failure mode that callers are expected to catch gets its own class so
that sweep drivers can flag individual sectors without pattern-matching on
messages.
"""


class PolySL2Error(Exception):
    """Base class for all package errors."""


class NegativeLadderNorm(PolySL2Error):
    """Squared ladder norm evaluated negative beyond tolerance; the
    sector/label combination is inconsistent."""


class NonzeroRemainder(PolySL2Error):
    """Polynomial division left a nonvanishing remainder; the (l0, J) pair
    does not belong to the structure polynomial."""


class LabelMismatch(PolySL2Error):
    """Sector labels violate the invariants of the model family."""


class UnsupportedClosedForm(PolySL2Error):
    """No catalog closed form covers this family / label combination."""


class ConvergenceFailure(PolySL2Error):
    """The tridiagonal eigensolver did not converge."""


class NoConvergence(PolySL2Error):
    """Adaptive truncation hit its ceiling without the spectrum settling;
    typically an unbounded-below su(1,1) block."""


class DegenerateLeadingCoefficient(PolySL2Error):
    """Leading amplitude of an eigenvector polynomial is numerically zero,
    so its degree drops and the boundary check is skipped."""


class ImaginaryFrequency(PolySL2Error):
    """a^2 - 4|g|^2 < 0 in a noncompact linear block: the su(1,1) model is
    unstable and has no discrete equidistant ladder."""


class NoRealRoot(PolySL2Error):
    """A stationarity equation has no real root in the admissible range."""


class NegativePhiArgument(PolySL2Error):
    """The reduced polynomial evaluated negative at a mean-field point: the
    trial state left the physical shell."""


class CutoffTooSmall(PolySL2Error):
    """Noncompact displacement-matrix columns lost norm; raise the cutoff."""


class NegativePhi(PolySL2Error):
    """The reduced polynomial went negative along a quasiclassical flow."""


class ChartSingularity(PolySL2Error):
    """The canonical (p, q) chart degenerates at |p| -> J; switch charts."""


class StepFailure(PolySL2Error):
    """ODE step size underflowed; the returned trajectory is partial."""


class DimensionMismatch(PolySL2Error):
    """Operands have incompatible dimensions."""


class DegenerateDenominator(PolySL2Error):
    """A trace-normalized error functional has a vanishing denominator."""


class ParseError(PolySL2Error):
    """Configuration text could not be parsed."""


class ValidationError(PolySL2Error):
    """Configuration parsed but violates an invariant."""


class IoError(PolySL2Error):
    """Result serialization failed at the I/O layer."""
