"""Structure polynomials, sector bookkeeping and the nonlinear ladder
reduction.

A deformed sl(2) triple (V0, V+, V-) is fixed by one real polynomial: the
squared ladder norm is its value, ``V+ V- = psi(V0)``, and every irreducible
sector is labeled by a lowest weight ``l0`` with ``psi(l0) = 0``.  The
reduction to an ordinary su(2)/su(1,1) ladder of effective spin J divides two
boundary factors out of psi and leaves the reduced polynomial phi that every
variational and dynamical formula in this package consumes.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import _poly
from .errors import NegativeLadderNorm, NonzeroRemainder

#: absolute tolerance for "this polynomial value is zero" tests
ZERO_TOL = 1e-10

#: relative tolerance for identity checks between evaluation routes
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class StructurePolynomial:
    """Polynomial of the deformed commutator, ascending real coefficients.

    ``coeffs[k]`` multiplies V0**k; the leading coefficient must be nonzero
    and the degree at least 1.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise ValueError("structure polynomial must have degree >= 1")
        if coeffs[-1] == 0.0:
            raise ValueError("leading coefficient must be nonzero")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x: float) -> float:
        return _poly.peval(self.coeffs, float(x))

    __call__ = eval


@dataclass(frozen=True)
class PhiPolynomial:
    """Reduced coupling polynomial in the ladder variable, ascending
    coefficients; degree 0 (a constant) is allowed."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            coeffs = (0.0,)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval(self, x: float) -> float:
        return _poly.peval(self.coeffs, float(x))

    def deriv(self, x: float) -> float:
        return _poly.peval(_poly.pderiv(self.coeffs), float(x))

    __call__ = eval


@dataclass(frozen=True)
class Sector:
    """One irreducible subspace of the model Hilbert space.

    Parameters
    ----------
    labels : mapping str -> Fraction
        Raw model labels plus the conserved eigenvalues ``l0, l1, ...``.
    lowest_weight : Fraction
        Root of the structure polynomial that seeds the ladder.
    J : Fraction
        Effective spin of the reduced ladder (half-integer).
    compact : bool
        True for a finite su(2) ladder, False for an infinite su(1,1) one.
    dim : int
        2J + 1 when compact; a truncation size otherwise.
    a, g_mod, g_phase, c_shift : float
        Reduced Hamiltonian data: the V0 coefficient, |g|, arg g, and the
        sector energy offset (the value of the commuting part).
    """

    labels: Mapping[str, Fraction]
    lowest_weight: Fraction
    J: Fraction
    compact: bool
    dim: int
    a: float
    g_mod: float
    g_phase: float
    c_shift: float

    def __post_init__(self):
        object.__setattr__(self, "labels", dict(self.labels))
        if self.g_mod < 0:
            raise ValueError("g_mod must be nonnegative")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.compact and self.dim != int(2 * self.J) + 1:
            raise ValueError("compact sector must have dim = 2J + 1")

    @property
    def ref(self) -> str:
        """Stable identifier used in blocks, tables and error messages."""
        parts = ";".join(f"{k}={v}" for k, v in sorted(self.labels.items()))
        return f"sector({parts})"

    def with_dim(self, dim: int) -> "Sector":
        """Copy with a different truncation size (noncompact only)."""
        if self.compact:
            raise ValueError("cannot re-truncate a compact sector")
        return Sector(self.labels, self.lowest_weight, self.J, False, dim,
                      self.a, self.g_mod, self.g_phase, self.c_shift)


def eval_psi(psi: StructurePolynomial, x: float) -> float:
    """Value of the structure polynomial at x (Horner evaluation)."""
    return psi.eval(x)


def ladder_norm(psi: StructurePolynomial, l0, v: int, tol: float = ZERO_TOL) -> float:
    """Matrix element of the raising generator from level v to v+1.

    Equals sqrt(psi(l0 + v + 1)); values in [-tol, 0) are clamped to zero,
    anything more negative raises :class:`NegativeLadderNorm`.
    """
    if v < 0:
        raise ValueError("ladder level must be nonnegative")
    val = psi.eval(float(l0) + v + 1)
    if val < -tol:
        raise NegativeLadderNorm(
            f"psi({float(l0) + v + 1!r}) = {val!r} < -{tol!r}")
    return math.sqrt(max(val, 0.0))


def phi_from_psi(psi: StructurePolynomial, sector: Sector,
                 tol: float = ZERO_TOL) -> PhiPolynomial:
    """Reduce the structure polynomial to the ladder-variable polynomial.

    Compact sectors divide psi(y + l0 + J + 1) by (J - y)(J + 1 + y);
    noncompact ones divide psi(y + l0 - J + 1) by (J + y)(-J + 1 + y).  The
    division is exact coefficient arithmetic (two synthetic divisions); a
    remainder above ``tol * max|psi coeff|`` means the (l0, J) pair is
    inconsistent and raises :class:`NonzeroRemainder`.
    """
    if psi.degree < 2:
        raise ValueError("phi is defined only for structure degree >= 2")
    l0 = float(sector.lowest_weight)
    J = float(sector.J)
    scale = max(abs(c) for c in psi.coeffs)
    if sector.compact:
        shifted = _poly.pshift(psi.coeffs, l0 + J + 1.0)
        # (J - y)(J + 1 + y) = -(y - J)(y + J + 1)
        q1, r1 = _poly.pdiv_linear(shifted, -(J + 1.0))
        q2, r2 = _poly.pdiv_linear(q1, J)
        quot = tuple(-c for c in q2)
    else:
        shifted = _poly.pshift(psi.coeffs, l0 - J + 1.0)
        # (J + y)(-J + 1 + y) = (y + J)(y - (J - 1))
        q1, r1 = _poly.pdiv_linear(shifted, -J)
        q2, r2 = _poly.pdiv_linear(q1, J - 1.0)
        quot = tuple(q2)
    bound = tol * max(scale, 1.0)
    if abs(r1) > bound or abs(r2) > bound:
        raise NonzeroRemainder(
            f"{sector.ref}: division remainders ({r1!r}, {r2!r}) exceed {bound!r}")
    return PhiPolynomial(quot)


def gauge_normalize(a: float, g: complex) -> tuple[float, float, float]:
    """Polar-decompose the coupling: returns (a, |g|, arg g).

    The spectrum depends on |g| only; the phase is kept so eigenvectors and
    dynamics can be rotated back to the original frame.  arg 0 = 0 by
    convention.
    """
    g = complex(g)
    if g == 0:
        return float(a), 0.0, 0.0
    return float(a), abs(g), cmath.phase(g)


def validate_sector(sector: Sector, psi: StructurePolynomial,
                    tol: float = ZERO_TOL) -> None:
    """Check the lowest-weight condition and ladder positivity.

    Raises ``ValueError`` if psi(l0) != 0 within tol, and
    :class:`NegativeLadderNorm` if any squared norm along the ladder is
    negative beyond tol.
    """
    scale = max(max(abs(c) for c in psi.coeffs), 1.0)
    root = psi.eval(float(sector.lowest_weight))
    if abs(root) > tol * scale:
        raise ValueError(f"{sector.ref}: psi(l0) = {root!r} is not zero")
    for v in range(sector.dim - 1):
        ladder_norm(psi, sector.lowest_weight, v, tol=tol * scale)
