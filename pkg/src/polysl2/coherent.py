"""Group coherent-state machinery and the two cluster variational spectra.

The trial states are displaced ladder states built from the su(2)/su(1,1)
displacement operator.  Two approximations come out of them:

* ``cq``  -- the full coherent-state expectation of the nonlinear
  Hamiltonian (a hypergeometric series per level),
* ``cmf`` -- its mean-field contraction, where the operator argument of the
  coupling polynomial is replaced by the coherent-state mean.

Both use a single displacement radius per sector, fixed by a stationarity
condition; closed-form resonance radii exist for the catalog families and
are cross-checked against the numeric root finder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import PhiPolynomial, Sector
from .catalog import ModelSpec, SectorLabels, reduce_coefficients, _check_labels
from .errors import (CutoffTooSmall, DegenerateDenominator, DimensionMismatch,
                     ImaginaryFrequency, NegativePhiArgument, NoRealRoot,
                     UnsupportedClosedForm)
from .exact import TridiagonalBlock, equidistant_reference

#: ladder length above which the terminating hypergeometric sum runs in
#: exact integer arithmetic; the alternating float sum loses roughly
#: binom(2J, J) * eps of absolute accuracy and already misses 1e-10 near
#: the r -> pi/2 wall for short ladders, so this stays at 0 (always exact
#: for compact sectors).  The cost is negligible at catalog sizes.
EXACT_SUM_THRESHOLD = 0


def trig_kernels(r: float, compact: bool) -> tuple[float, float, float, float, float]:
    """Displacement kernels (t, c, s, c2, s2).

    Circular (tan, cos, sin) for compact sectors, hyperbolic for
    noncompact ones; c2 and s2 are the same kernels at 2r.
    """
    if compact:
        return math.tan(r), math.cos(r), math.sin(r), math.cos(2 * r), math.sin(2 * r)
    return math.tanh(r), math.cosh(r), math.sinh(r), math.cosh(2 * r), math.sinh(2 * r)


@dataclass(frozen=True)
class GCSParameter:
    """Displacement magnitude and phase of one trial family."""

    r: float
    theta: float = 0.0
    compact: bool = True

    def __post_init__(self):
        if self.r < 0 or not math.isfinite(self.r):
            raise ValueError("displacement magnitude must be finite and >= 0")
        if self.compact and self.r >= math.pi / 2:
            raise ValueError("compact displacement requires r < pi/2")


@dataclass(frozen=True)
class DisplacementMatrix:
    """Real displaced-basis overlap matrix in the gauge-normalized frame.

    ``entries[f, v]`` is the component of trial state v on ladder state f.
    Compact matrices are square (2J+1) and orthogonal; noncompact ones are
    cutoff x k isometries.  The coupling phase enters only through a
    diagonal phase conjugation and is therefore not stored here.
    """

    entries: np.ndarray
    J: Fraction
    r: float
    compact: bool

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def _ln_norm(twoJ: float, v: int, compact: bool) -> float:
    """log of the monomial-basis normalization constant N(J, v)."""
    if compact:
        return -0.5 * (math.lgamma(v + 1) + math.lgamma(twoJ + 1)
                       - math.lgamma(twoJ - v + 1))
    return -0.5 * (math.lgamma(v + 1) + math.lgamma(twoJ + v) - math.lgamma(twoJ))


def _hyp_series_float(a: float, b: float, c: float, x: float,
                      terms: int | None) -> float:
    """Forward term recurrence for 2F1(a, b; c; x).

    ``terms`` fixes the count for terminating series; otherwise the sum
    stops once five consecutive terms fall below 1e-16 relative.
    """
    total = 1.0
    term = 1.0
    k = 0
    quiet = 0
    limit = terms if terms is not None else 100000
    while k < limit:
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        k += 1
        if terms is None:
            if abs(term) <= 1e-16 * max(abs(total), 1e-300):
                quiet += 1
                if quiet >= 5:
                    break
            else:
                quiet = 0
    return total


def _hyp_terminating_exact(v: int, b: int, c: int, x: float) -> float:
    """Exact integer evaluation of 2F1(-v, b; c; x) for integer b, c > 0.

    The float x is treated as the exact binary rational it is, every term
    is accumulated over a common integer denominator, and only the final
    big-integer quotient is rounded.  This removes the catastrophic
    cancellation of the alternating sum on long ladders.
    """
    p, q = x.as_integer_ratio()
    bs = [1]
    for k in range(1, v + 1):
        bs.append(bs[-1] * (c + k - 1) * k)
    bk = bs[-1]
    qpow = [1]
    for _ in range(v):
        qpow.append(qpow[-1] * q)
    num = 0
    a_run = 1
    p_run = 1
    for k in range(v + 1):
        if k > 0:
            a_run *= (-v + k - 1) * (b + k - 1)
            p_run *= p
        num += a_run * p_run * (bk // bs[k]) * qpow[v - k]
    den = bk * qpow[v]
    return num / den


def displacement_matrix(J, param: GCSParameter, cutoff: int,
                        cols: int | None = None) -> DisplacementMatrix:
    """Displaced-basis matrix at effective spin J and radius param.r.

    Compact: ``cutoff`` must equal 2J + 1 and the result is orthogonal.
    Noncompact: ``cutoff`` rows are kept for ``cols`` trial columns, and a
    column losing more than 1e-8 of norm raises :class:`CutoffTooSmall`.
    Entries are hypergeometric term recurrences throughout; large compact
    ladders switch the terminating sum to exact integer arithmetic.
    """
    J = Fraction(J)
    compact = param.compact
    twoJ_f = float(2 * J)
    if compact:
        d = int(2 * J) + 1
        if cutoff != d:
            raise DimensionMismatch(f"compact cutoff must be 2J+1 = {d}")
        cols = d
    else:
        if cols is None:
            cols = cutoff
        if cols > cutoff:
            raise DimensionMismatch("more columns than rows requested")
    r = param.r
    if r == 0.0:
        entries = np.eye(cutoff, cols)
        return DisplacementMatrix(entries, J, r, compact)

    t, c, s, _, _ = trig_kernels(r, compact)
    x = s * s if compact else -s * s
    ln_c = math.log(c)
    ln_t = math.log(t)
    sign_J = 1.0 if compact else -1.0

    lnN = [_ln_norm(twoJ_f, v, compact) for v in range(max(cutoff, cols))]
    exact = compact and (2 * J >= EXACT_SUM_THRESHOLD)
    twoJ_i = int(2 * J) if compact else 0

    entries = np.empty((cutoff, cols))
    for v in range(cols):
        for f in range(cutoff):
            lo, hi = min(f, v), max(f, v)
            k = hi - lo
            lnmag = (2.0 * (sign_J * float(J) - lo) * ln_c + k * ln_t
                     + lnN[lo] - lnN[hi] - math.lgamma(k + 1))
            if exact:
                hyp = _hyp_terminating_exact(lo, -lo + twoJ_i + 1, k + 1, x)
            else:
                b = -lo + sign_J * twoJ_f + 1.0
                hyp = _hyp_series_float(-lo, b, k + 1, x, terms=lo)
            sign = (-1.0) ** k if f >= v else 1.0
            entries[f, v] = sign * math.exp(lnmag) * hyp
    if not compact:
        norms = np.sqrt(np.sum(entries ** 2, axis=0))
        worst = float(np.max(np.abs(norms - 1.0)))
        if worst > 1e-8:
            raise CutoffTooSmall(
                f"column norm deviates from 1 by {worst:.3e}; "
                f"raise the cutoff (currently {cutoff})")
    return DisplacementMatrix(entries, J, r, compact)


# ---------------------------------------------------------------------------
# cluster (cq) spectrum


def _sqrt_psi_ladder(sector: Sector, phi: PhiPolynomial, count: int) -> np.ndarray:
    """sqrt(psi(l0 + 1 + f)) for f = 0..count-1 via the phi factorization."""
    J = float(sector.J)
    twoJ = 2.0 * J
    out = np.empty(count)
    for f in range(count):
        if sector.compact:
            val = phi.eval(-J + f) * (twoJ - f) * (f + 1)
        else:
            val = phi.eval(J + f) * (twoJ + f) * (f + 1)
        out[f] = math.sqrt(max(val, 0.0))
    return out


def c_tilde(sector: Sector) -> float:
    """Sector offset including the lowest-weight shift of the V0 term."""
    sign = 1.0 if sector.compact else -1.0
    return sector.c_shift + sector.a * (float(sector.lowest_weight)
                                        + sign * float(sector.J))


def energy_cq(sector: Sector, phi: PhiPolynomial, S: DisplacementMatrix,
              v: int) -> float:
    """Coherent-state expectation of the sector Hamiltonian on level v.

    The V0 part contracts to (v -+ J) c(2r); the coupling part is the
    nearest-neighbour overlap sum weighted by the ladder norms, taken with
    its natural signs so that the linear (phi = const) case collapses to
    the exact equidistant ladder for every v.
    """
    if v < 0 or v >= S.cols:
        raise DimensionMismatch(f"level {v} outside the {S.cols} trial columns")
    _, _, _, c2, _ = trig_kernels(S.r, sector.compact)
    J = float(sector.J)
    lvl = (v - J) if sector.compact else (v + J)
    col = S.entries[:, v]
    weights = _sqrt_psi_ladder(sector, phi, S.rows - 1)
    coupling = float(np.dot(col[:-1] * col[1:], weights))
    return c_tilde(sector) + sector.a * lvl * c2 + 2.0 * sector.g_mod * coupling


def _cq_weights(sector: Sector, phi: PhiPolynomial, count: int) -> np.ndarray:
    """Series weights sqrt(phi) / (f! (f+1)! N^2(J, f+1)) for the ground
    level formulas and the stationarity equation."""
    twoJ = 2.0 * float(sector.J)
    out = np.empty(count)
    for f in range(count):
        if sector.compact:
            val = phi.eval(-float(sector.J) + f)
            ln = math.lgamma(twoJ + 1) - math.lgamma(f + 1) - math.lgamma(twoJ - f)
        else:
            val = phi.eval(float(sector.J) + f)
            ln = math.lgamma(twoJ + f + 1) - math.lgamma(f + 1) - math.lgamma(twoJ)
        out[f] = math.sqrt(max(val, 0.0)) * math.exp(ln)
    return out


def energy_cq_ground_series(sector: Sector, phi: PhiPolynomial, r: float,
                            max_terms: int = 20000) -> float:
    """Closed series for the v = 0 coherent-state energy at radius r."""
    t, c, _, c2, _ = trig_kernels(r, sector.compact)
    J = float(sector.J)
    g = sector.g_mod
    if sector.compact:
        count = int(2 * J)
        weights = _cq_weights(sector, phi, count)
        acc = sum(weights[f] * t ** (2 * f + 1) for f in range(count))
        return (c_tilde(sector) - sector.a * J * c2
                - 2.0 * g * c ** (4.0 * J) * acc)
    acc = 0.0
    quiet = 0
    for f in range(max_terms):
        term = _cq_weights_single(sector, phi, f) * t ** (2 * f + 1)
        acc += term
        if abs(term) <= 1e-16 * max(abs(acc), 1e-300):
            quiet += 1
            if quiet >= 5:
                break
        else:
            quiet = 0
    return (c_tilde(sector) + sector.a * J * c2
            - 2.0 * g * c ** (-4.0 * J) * acc)


def _cq_weights_single(sector: Sector, phi: PhiPolynomial, f: int) -> float:
    twoJ = 2.0 * float(sector.J)
    val = phi.eval(float(sector.J) + f)
    ln = math.lgamma(twoJ + f + 1) - math.lgamma(f + 1) - math.lgamma(twoJ)
    return math.sqrt(max(val, 0.0)) * math.exp(ln)


def _cq_root_function(sector: Sector, phi: PhiPolynomial):
    """Scaled stationarity function G(alpha) for the cq radius.

    alpha is tan r (compact) or tanh r (noncompact); the equation is the
    radius derivative of the ground-level series, rescaled by the largest
    power of (1 +- alpha^2) so it stays bounded over the whole scan range.
    Returns (G, scale) callables.
    """
    J = float(sector.J)
    a_over_g = sector.a / sector.g_mod
    if sector.compact:
        count = int(2 * J)
        weights = _cq_weights(sector, phi, count)

        def g_fun(alpha: float) -> tuple[float, float]:
            beta = 1.0 / (1.0 + alpha * alpha)
            u = alpha * alpha * beta
            lhs = 2.0 * a_over_g * J * alpha * beta
            rhs = 0.0
            mag = abs(lhs)
            for f in range(count):
                base = weights[f] * u ** f * beta ** (2 * J - 1 - f)
                rhs += base * ((2 * f + 1) - 4.0 * J * u)
                mag = max(mag, abs(base) * (2 * f + 1 + 4.0 * J))
            return lhs - rhs, max(mag, 1e-300)

        return g_fun

    def g_fun(alpha: float) -> tuple[float, float]:
        one = 1.0 - alpha * alpha
        lhs = 2.0 * a_over_g * J * alpha
        rhs = 0.0
        mag = abs(lhs)
        f = 0
        quiet = 0
        while f < 100000:
            base = (_cq_weights_single(sector, phi, f)
                    * alpha ** (2 * f) * one ** (2 * J + 1))
            term = base * (one * (2 * f + 1) - 4.0 * J * alpha * alpha)
            rhs += term
            mag = max(mag, abs(base) * (2 * f + 1 + 4.0 * J))
            if abs(term) <= 1e-16 * max(abs(rhs), 1e-300):
                quiet += 1
                if quiet >= 5:
                    break
            else:
                quiet = 0
            f += 1
        return lhs - rhs, max(mag, 1e-300)

    return g_fun


def _bracket_and_bisect(fun, grid, rel_tol: float = 1e-15,
                        max_iter: int = 200) -> list[float]:
    """Roots of fun over a monotone grid by sign change + bisection."""
    roots = []
    values = []
    for x in grid:
        fx, _ = fun(x)
        values.append(fx)
        if fx == 0.0:
            roots.append(x)
    for i in range(len(grid) - 1):
        if values[i] * values[i + 1] < 0.0:
            lo, hi, flo = grid[i], grid[i + 1], values[i]
            for _ in range(max_iter):
                mid = 0.5 * (lo + hi)
                fm, _ = fun(mid)
                if fm == 0.0:
                    lo = hi = mid
                    break
                if flo * fm < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
                if hi - lo <= rel_tol * max(abs(lo), abs(hi), 1e-12):
                    break
            roots.append(0.5 * (lo + hi))
    return roots


def solve_stationarity_cq(sector: Sector, phi: PhiPolynomial,
                          residual_tol: float = 1e-9) -> list[float]:
    """All radii making the ground-level cq energy stationary.

    The scan runs over a logarithmic alpha grid (alpha = tan r or tanh r),
    each sign change is bisected down, and every candidate is audited by
    substituting back into the scaled equation.  Raises
    :class:`NoRealRoot` when the scan finds nothing.
    """
    if sector.g_mod <= 0.0:
        raise NoRealRoot(f"{sector.ref}: stationarity needs |g| > 0")
    if sector.J == 0:
        raise NoRealRoot(f"{sector.ref}: one-dimensional sector has no "
                         "displacement to vary")
    g_fun = _cq_root_function(sector, phi)
    if sector.compact:
        grid = np.concatenate(([0.0], np.logspace(-8, 8, 650)))
        to_r = math.atan
    else:
        grid = np.concatenate(([0.0], np.logspace(-8, -0.3, 300),
                               np.linspace(0.51, 1.0 - 1e-12, 300)))
        to_r = math.atanh
    alphas = _bracket_and_bisect(g_fun, grid)
    roots = []
    for alpha in alphas:
        val, scale = g_fun(alpha)
        if abs(val) <= residual_tol * scale:
            r = to_r(alpha)
            if not roots or min(abs(r - q) for q in roots) > 1e-12:
                roots.append(r)
    if not roots:
        raise NoRealRoot(f"{sector.ref}: no real cq stationarity radius")
    return sorted(roots)


# ---------------------------------------------------------------------------
# cluster mean-field (cmf) spectrum


def energy_cmf(sector: Sector, phi: PhiPolynomial, r: float, v: int,
               tol: float = 1e-10) -> float:
    """Mean-field energy of level v at displacement radius r.

    The coupling polynomial is evaluated at the coherent-state mean of the
    ladder variable; a value below -tol there means the trial state left
    the physical shell and raises :class:`NegativePhiArgument`.
    """
    _, _, _, c2, s2 = trig_kernels(r, sector.compact)
    J = float(sector.J)
    lvl = (v - J) if sector.compact else (v + J)
    amp = (J - v) if sector.compact else (J + v)
    val = phi.eval(lvl * c2)
    if val < -tol:
        raise NegativePhiArgument(
            f"{sector.ref}: phi({lvl * c2!r}) = {val!r} at level {v}")
    val = max(val, 0.0)
    return (c_tilde(sector) + sector.a * lvl * c2
            - 2.0 * sector.g_mod * amp * s2 * math.sqrt(val))


def _cmf_root_function(sector: Sector, phi: PhiPolynomial):
    """Stationarity of the v = 0 mean-field energy, multiplied through by
    sqrt(phi) so the function is smooth wherever phi >= 0."""
    J = float(sector.J)
    a_over_g = sector.a / sector.g_mod
    sign = -1.0 if sector.compact else 1.0

    def g_fun(r: float) -> tuple[float, float]:
        _, _, _, c2, s2 = trig_kernels(r, sector.compact)
        x = sign * J * c2
        val = phi.eval(x)
        if val < 0.0:
            return math.nan, 1.0
        root = math.sqrt(val)
        dval = phi.deriv(x)
        expr = a_over_g * s2 * root - 2.0 * c2 * val - J * s2 * s2 * dval
        scale = max(abs(a_over_g * s2) * max(root, 1.0), 2.0 * abs(c2) * max(val, 1.0),
                    J * s2 * s2 * max(abs(dval), 1.0), 1e-300)
        return expr, scale

    return g_fun


def solve_stationarity_cmf(sector: Sector, phi: PhiPolynomial,
                           residual_tol: float = 1e-9,
                           r_max: float | None = None) -> list[float]:
    """All radii making the ground-level cmf energy stationary."""
    if sector.g_mod <= 0.0:
        raise NoRealRoot(f"{sector.ref}: stationarity needs |g| > 0")
    if sector.J == 0:
        raise NoRealRoot(f"{sector.ref}: one-dimensional sector has no "
                         "displacement to vary")
    g_fun = _cmf_root_function(sector, phi)
    if sector.compact:
        hi = math.pi / 2 - 1e-9
    else:
        hi = r_max if r_max is not None else 15.0
    grid = np.linspace(1e-9, hi, 4001)
    J = float(sector.J)
    sign = -1.0 if sector.compact else 1.0

    def masked(r: float) -> tuple[float, float]:
        val, scale = g_fun(r)
        return (val if not math.isnan(val) else math.inf), scale

    # restrict to the subintervals where phi stays nonnegative
    roots = []
    seg: list[float] = []
    for r in grid:
        _, _, _, c2, _ = trig_kernels(r, sector.compact)
        if phi.eval(sign * J * c2) >= 0.0:
            seg.append(r)
        else:
            if len(seg) > 1:
                roots.extend(_bracket_and_bisect(masked, seg))
            seg = []
    if len(seg) > 1:
        roots.extend(_bracket_and_bisect(masked, seg))
    out = []
    for r in roots:
        val, scale = g_fun(r)
        if not math.isnan(val) and abs(val) <= residual_tol * scale:
            if not out or min(abs(r - q) for q in out) > 1e-12:
                out.append(r)
    if not out:
        raise NoRealRoot(f"{sector.ref}: no real cmf stationarity radius")
    return sorted(out)


def linear_radius(sector: Sector, phi: PhiPolynomial | None = None) -> float:
    """Radius diagonalizing the degree-2 (linear) case exactly.

    Compact: tan 2r = 2|g| / a.  Noncompact: tanh 2r = 2|g| / a, which
    requires a > 2|g| and otherwise raises :class:`ImaginaryFrequency`.
    A constant reduced polynomial rescales the coupling by its square
    root (non-monic quadratic structure polynomials).
    """
    a, g = sector.a, sector.g_mod
    if phi is not None and phi.degree == 0:
        g = g * math.sqrt(max(phi.coeffs[0], 0.0))
    if sector.compact:
        return 0.5 * math.atan2(2.0 * g, a)
    if a <= 2.0 * g:
        raise ImaginaryFrequency(
            f"{sector.ref}: tanh 2r = 2|g|/a needs a > 2|g|")
    return 0.5 * math.atanh(2.0 * g / a)


# ---------------------------------------------------------------------------
# closed-form resonance radii and ladders


def closed_form_resonance(model: ModelSpec, labels: SectorLabels,
                          g_mod: float | None = None) -> tuple[float, np.ndarray]:
    """Resonant mean-field radius and energy ladder in closed form.

    Covered: two_mode m=2 n=1 at w2 = 2 w1, multimode m=2 n=1 at
    w0 = w1 + w2, and dicke n=1 at epsilon = w1.  Anything else (or an
    off-resonance frequency set) raises :class:`UnsupportedClosedForm`.
    Returns (cos 2r, energies) with the full sector offset included.
    """
    if model.family == "custom":
        raise UnsupportedClosedForm("custom models have no closed form")
    _check_labels(model, labels)
    a, c_shift = reduce_coefficients(model, labels)
    if a != 0.0:
        raise UnsupportedClosedForm(
            f"closed form needs exact resonance, got a = {a!r}")
    if g_mod is None:
        g_mod = abs(model.g)

    if model.family == "two_mode":
        if (model.m, model.n) != (2, 1):
            raise UnsupportedClosedForm("two_mode closed form needs m=2, n=1")
        kappa, s = labels.kappa, labels.s
        if s < 1:
            raise UnsupportedClosedForm("closed form needs s >= 1")
        q = (2 * kappa + 1) / (2 * s)
        cos2r = ((2 * kappa + 1) / s + 1 - 2 * math.sqrt(1 + q * (q + 1))) / 3.0
        dim = s + 1
        energies = np.empty(dim)
        sin2r = math.sqrt(max(1 - cos2r * cos2r, 0.0))
        for v in range(dim):
            arg = 2.0 * ((-s + 2 * v) * cos2r + s + 2 * kappa + 1)
            energies[v] = (c_shift - g_mod * (s - 2 * v) * sin2r
                           * math.sqrt(max(arg, 0.0)))
        return cos2r, energies

    if model.family == "multimode":
        if (model.m, model.n) != (2, 1):
            raise UnsupportedClosedForm("multimode closed form needs m=2, n=1")
        kappa = max(labels.kappas)
        s = labels.s
        if s < 1:
            raise UnsupportedClosedForm("closed form needs s >= 1")
        q = (kappa + 1) / s
        cos2r = ((2 * kappa + 2) / s + 1 - 2 * math.sqrt(1 + q * (q + 1))) / 3.0
        dim = s + 1
        energies = np.empty(dim)
        sin2r = math.sqrt(max(1 - cos2r * cos2r, 0.0))
        for v in range(dim):
            arg = (-s / 2 + v) * cos2r + s / 2 + kappa + 1
            energies[v] = (c_shift - g_mod * (s - 2 * v) * sin2r
                           * math.sqrt(max(arg, 0.0)))
        return cos2r, energies

    # dicke
    if model.n != 1:
        raise UnsupportedClosedForm("dicke closed form needs n = 1")
    kappa, j = labels.kappa, labels.j
    lo = min(Fraction(kappa), 2 * j)
    if lo < 1:
        raise UnsupportedClosedForm("closed form needs min(kappa, 2j) >= 1")
    mu = float(max(Fraction(kappa), 2 * j) / lo)
    cos2r = (1 - 2 * mu + 2 * math.sqrt(1 - mu + mu * mu)) / 3.0
    J = float(min(j, Fraction(kappa, 2)))
    big = float(max(Fraction(kappa), 2 * j))
    dim = int(lo) + 1
    energies = np.empty(dim)
    sin2r = math.sqrt(max(1 - cos2r * cos2r, 0.0))
    for v in range(dim):
        arg = big - J - (-J + v) * cos2r
        energies[v] = (c_shift - g_mod * 2.0 * (J - v) * sin2r
                       * math.sqrt(max(arg, 0.0)))
    return cos2r, energies


# ---------------------------------------------------------------------------
# approximate Hamiltonians, error functionals and spectrum assembly


@dataclass(frozen=True)
class VariationalSpectrum:
    """One approximate ladder: method tag, energies, the radius used and
    every stationarity radius found (for audit)."""

    method: str
    energies: np.ndarray
    r_used: float
    roots_found: tuple[float, ...]
    sector_ref: str


@dataclass(frozen=True)
class ApproxErrorReport:
    """Trace-normalized proximity of an approximation to the exact block."""

    delta1: float
    delta2: float
    method: str


def approx_hamiltonian(sector: Sector, spec: VariationalSpectrum,
                       S: DisplacementMatrix) -> np.ndarray:
    """Matrix of the approximate Hamiltonian in the ladder basis:
    the trial columns carry the approximate energies."""
    if S.cols != len(spec.energies):
        raise DimensionMismatch(
            f"{S.cols} trial columns vs {len(spec.energies)} energies")
    return (S.entries * np.asarray(spec.energies)) @ S.entries.T


def error_functionals(exact_block: TridiagonalBlock, approx: np.ndarray,
                      p: int) -> float:
    """Trace-normalized energy error |Tr (H - H')^p| / |Tr H^p|, p in {1, 2}."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    h = exact_block.dense()
    if approx.shape != h.shape:
        raise DimensionMismatch(f"approximation shape {approx.shape} vs {h.shape}")
    diff = h - approx
    if p == 1:
        den = abs(np.trace(h))
        num = abs(np.trace(diff))
    else:
        den = abs(np.sum(h * h))
        num = abs(np.sum(diff * diff))
    if den <= 1e-14:
        raise DegenerateDenominator(
            f"{exact_block.sector_ref}: |Tr H^{p}| = {den!r} is below guard")
    return float(num / den)


def approx_error_report(exact_block: TridiagonalBlock, approx: np.ndarray,
                        method: str) -> ApproxErrorReport:
    """Both trace errors in one report; undefined entries become NaN."""
    out = []
    for p in (1, 2):
        try:
            out.append(error_functionals(exact_block, approx, p))
        except DegenerateDenominator:
            out.append(math.nan)
    return ApproxErrorReport(out[0], out[1], method)


def displacement_for(sector: Sector, r: float,
                     rows: int | None = None) -> DisplacementMatrix:
    """Displacement matrix sized for one sector at radius r."""
    param = GCSParameter(r, sector.g_phase, sector.compact)
    if sector.compact:
        return displacement_matrix(sector.J, param, sector.dim)
    rows = rows if rows is not None else max(4 * sector.dim, 32)
    return displacement_matrix(sector.J, param, rows, cols=sector.dim)


def variational_spectrum(sector: Sector, psi, phi: PhiPolynomial, method: str,
                         root_policy: str = "min-delta2") -> VariationalSpectrum:
    """Full approximate ladder of one sector with root selection.

    ``method`` is ``cq``, ``cmf`` or ``linear``; ``root_policy`` picks
    among multiple stationarity radii either by the smallest quadratic
    trace error against the exact block (``min-delta2``) or by the lowest
    ground energy (``min-ground``).  Levels where the mean-field
    polynomial turns negative are reported as NaN rather than aborting
    the ladder.
    """
    from .exact import assemble_block

    if method == "linear":
        r = linear_radius(sector, phi)
        return VariationalSpectrum("linear",
                                   equidistant_reference(sector, phi),
                                   r, (r,), sector.ref)
    if method == "cq":
        roots = solve_stationarity_cq(sector, phi)
    elif method == "cmf":
        roots = solve_stationarity_cmf(sector, phi)
    else:
        raise ValueError(f"unknown method {method!r}")

    n_levels = sector.dim
    candidates = []
    for r in roots:
        energies = np.empty(n_levels)
        if method == "cq":
            S = displacement_for(sector, r)
            for v in range(n_levels):
                energies[v] = energy_cq(sector, phi, S, v)
        else:
            S = None
            for v in range(n_levels):
                try:
                    energies[v] = energy_cmf(sector, phi, r, v)
                except NegativePhiArgument:
                    energies[v] = math.nan
        candidates.append((r, energies, S))

    if len(candidates) == 1 or root_policy == "min-ground":
        best = min(candidates, key=lambda c: (math.inf if math.isnan(c[1][0])
                                              else c[1][0]))
    elif root_policy == "min-delta2":
        block = assemble_block(sector, psi)
        scored = []
        for r, energies, S in candidates:
            if np.any(np.isnan(energies)):
                scored.append((math.inf, r, energies, S))
                continue
            Sm = S if S is not None else displacement_for(sector, r)
            approx = approx_hamiltonian(
                sector, VariationalSpectrum(method, energies, r, (), sector.ref), Sm)
            try:
                d2 = error_functionals(block, approx, 2)
            except DegenerateDenominator:
                d2 = math.inf
            scored.append((d2, r, energies, S))
        scored.sort(key=lambda s: s[0])
        best = scored[0][1:]
    else:
        raise ValueError(f"unknown root policy {root_policy!r}")

    r, energies, _ = best
    return VariationalSpectrum(method, energies, r,
                               tuple(c[0] for c in candidates), sector.ref)
