"""Quasiclassical Bloch-type flows and quantum propagators.

The quasiclassical state is a point on the sphere (compact) or upper
hyperboloid sheet (noncompact) carved out by the conserved quadratic
y1^2 + y2^2 +- y0^2 = +-J^2.  Every flow here is a cross product of the
energy gradient with the shell gradient, so the shell and the energy are
conserved by construction and their drift measures integrator quality.

On the quantum side, spectral propagators are built either from the exact
eigensolution (the oracle) or from a variational ladder plus its trial
basis, and observable time series are traces against either one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import PhiPolynomial, Sector
from .catalog import ModelSpec
from .coherent import DisplacementMatrix, VariationalSpectrum, c_tilde
from .errors import (ChartSingularity, DimensionMismatch, NegativePhi,
                     StepFailure)
from .exact import EigenSolution

_SHELL_TOL = 1e-6


@dataclass(frozen=True)
class BlochState:
    """Point (y1, y2, y0) on the quasiclassical shell of one sector."""

    y: tuple[float, float, float]
    J: float
    compact: bool

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(float(c) for c in self.y))

    @property
    def casimir(self) -> float:
        y1, y2, y0 = self.y
        sign = 1.0 if self.compact else -1.0
        return y1 * y1 + y2 * y2 + sign * y0 * y0

    def on_shell(self, tol: float = _SHELL_TOL) -> bool:
        sign = 1.0 if self.compact else -1.0
        return abs(self.casimir - sign * self.J ** 2) <= tol * max(self.J ** 2, 1.0)


@dataclass(frozen=True)
class Trajectory:
    """Sampled flow with its conservation audit.

    ``casimir_drift`` and ``energy_drift`` are max absolute deviations of
    the shell constant and of the flow's energy functional over the run.
    ``flag`` is None for a clean run, or names the event that cut it short
    (``negative-phi``, ``step-failure``).
    """

    times: np.ndarray
    states: tuple[BlochState, ...]
    casimir_drift: float
    energy_drift: float
    flag: str | None = None

    @property
    def y(self) -> np.ndarray:
        """States as an (n, 3) array."""
        return np.array([s.y for s in self.states])


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitude vector in one sector's ladder basis."""

    amps: np.ndarray
    sector_ref: str

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        object.__setattr__(self, "amps", amps)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm!r} is not 1 within 1e-10")


@dataclass(frozen=True)
class ObservableSeries:
    """Expectation time series of one Hermitian observable."""

    times: np.ndarray
    values: np.ndarray
    observable_tag: str
    max_imag: float = 0.0


def _cross(u, w):
    """Cross product in the (1, 2, 0) component ordering used throughout."""
    return np.array([u[1] * w[2] - u[2] * w[1],
                     u[2] * w[0] - u[0] * w[2],
                     u[0] * w[1] - u[1] * w[0]])


def _coupling_kernel(sector: Sector, phi: PhiPolynomial, variant: str):
    """Scalar kernel K(y0) multiplying the transverse coupling, and its
    derivative: 1 for the linear flow, sqrt(phi) for the mean-field one,
    and the ladder-averaged square root for the full cluster flow."""
    J = float(sector.J)
    if variant == "linear":
        return (lambda y0: 1.0), (lambda y0: 0.0)
    if variant == "cmf":
        def kern(y0: float) -> float:
            val = phi.eval(y0)
            if val < -1e-10:
                raise NegativePhi(f"{sector.ref}: phi({y0!r}) = {val!r}")
            return math.sqrt(max(val, 0.0))

        def dkern(y0: float) -> float:
            val = phi.eval(y0)
            if val < -1e-10:
                raise NegativePhi(f"{sector.ref}: phi({y0!r}) = {val!r}")
            if val <= 1e-14:
                raise NegativePhi(
                    f"{sector.ref}: phi vanished at y0 = {y0!r} (shell edge)")
            return phi.deriv(y0) / (2.0 * math.sqrt(val))

        return kern, dkern
    if variant == "cq":
        return _theta_kernel(sector, phi)
    raise ValueError(f"unknown flow variant {variant!r}")


def _theta_kernel(sector: Sector, phi: PhiPolynomial):
    """Ladder average of sqrt(phi) entering the cluster flow.

    Compact sectors give a Bernstein-weighted average over the finite
    ladder (a polynomial of degree 2J - 1 in y0, evaluated stably from
    the positive basis); noncompact sectors give the analogous
    negative-binomial series in (y0 - J)/(y0 + J).
    """
    J = float(sector.J)
    if sector.compact:
        m = int(round(2 * J)) - 1
        if m < 0:
            return (lambda y0: 0.0), (lambda y0: 0.0)
        b = np.array([math.sqrt(max(phi.eval(-J + f), 0.0)) for f in range(m + 1)])
        binom = np.array([math.comb(m, f) for f in range(m + 1)], dtype=float)
        diffs = (b[1:] - b[:-1]) if m >= 1 else np.zeros(0)
        binom1 = np.array([math.comb(m - 1, f) for f in range(max(m, 1))],
                          dtype=float) if m >= 1 else np.zeros(0)

        def bern(coeff, weights, tau, order):
            total = 0.0
            for f in range(order + 1):
                total += coeff[f] * weights[f] * tau ** f * (1 - tau) ** (order - f)
            return total

        def kern(y0: float) -> float:
            tau = (J + y0) / (2 * J)
            return bern(b, binom, tau, m)

        def dkern(y0: float) -> float:
            if m == 0:
                return 0.0
            tau = (J + y0) / (2 * J)
            return m / (2 * J) * bern(diffs, binom1, tau, m - 1)

        return kern, dkern

    twoJ = 2.0 * J
    lgam0 = math.lgamma(twoJ + 1)

    def series(y0: float) -> tuple[float, float]:
        w = (y0 - J) / (y0 + J)
        one = 1.0 - w
        total = 0.0
        dtotal = 0.0
        cw = 1.0
        quiet = 0
        f = 0
        while f < 100000:
            coeff = math.exp(math.lgamma(twoJ + 1 + f) - lgam0
                             - math.lgamma(f + 1))
            sq = math.sqrt(max(phi.eval(J + f), 0.0))
            term = coeff * sq * cw
            total += term
            if f >= 1:
                dtotal += coeff * sq * f * cw / w if w != 0.0 else 0.0
            if abs(term) <= 1e-16 * max(abs(total), 1e-300):
                quiet += 1
                if quiet >= 5:
                    break
            else:
                quiet = 0
            cw *= w
            f += 1
        theta = one ** (twoJ + 1) * total
        dtheta_dw = (-(twoJ + 1) * one ** twoJ * total + one ** (twoJ + 1) * dtotal)
        return theta, dtheta_dw

    def kern(y0: float) -> float:
        return series(y0)[0]

    def dkern(y0: float) -> float:
        w_prime = 2 * J / (y0 + J) ** 2
        return series(y0)[1] * w_prime

    return kern, dkern


def _grad_energy(state: BlochState, sector: Sector, kern, dkern) -> np.ndarray:
    y1, y2, y0 = state.y
    g = sector.g_mod * complex(math.cos(sector.g_phase), math.sin(sector.g_phase))
    k = kern(y0)
    dk = dkern(y0)
    return np.array([2.0 * g.real * k,
                     -2.0 * g.imag * k,
                     sector.a + 2.0 * (g.real * y1 - g.imag * y2) * dk])


def bloch_rhs(state: BlochState, sector: Sector, phi: PhiPolynomial,
              variant: str) -> np.ndarray:
    """Time derivative of (y1, y2, y0) for one flow variant.

    The flow is half the cross product of the energy gradient with the
    shell gradient 2 (y1, y2, +-y0); both quadratic invariants are exactly
    conserved by this structure.
    """
    kern, dkern = _coupling_kernel(sector, phi, variant)
    grad_h = _grad_energy(state, sector, kern, dkern)
    sign = 1.0 if sector.compact else -1.0
    y1, y2, y0 = state.y
    return _cross(grad_h, np.array([y1, y2, sign * y0]))


def bloch_energy(state: BlochState, sector: Sector, phi: PhiPolynomial,
                 variant: str) -> float:
    """Energy functional conserved by the matching flow variant."""
    kern, _ = _coupling_kernel(sector, phi, variant)
    y1, y2, y0 = state.y
    g = sector.g_mod * complex(math.cos(sector.g_phase), math.sin(sector.g_phase))
    return (c_tilde(sector) + sector.a * y0
            + 2.0 * (g.real * y1 - g.imag * y2) * kern(y0))


def hamilton_rhs(p: float, q: float, sector: Sector,
                 phi: PhiPolynomial) -> tuple[float, float]:
    """Mean-field flow in the canonical chart (p = y0, q the azimuth).

    This is the chain-rule image of the mean-field Bloch flow under
    y1 = -R cos q, y2 = R sin q with R^2 = +-(J^2 - p^2); integrating it
    reproduces the Bloch trajectory away from the chart poles, where
    :class:`ChartSingularity` is raised instead.
    """
    J = float(sector.J)
    if sector.compact:
        if abs(p) >= J - 1e-12:
            raise ChartSingularity(f"|p| = {abs(p)!r} at the compact pole J = {J!r}")
        r2 = J * J - p * p
        w_prime_geom = -2.0 * p
    else:
        if p <= J + 1e-12:
            raise ChartSingularity(f"p = {p!r} at the hyperboloid edge J = {J!r}")
        r2 = p * p - J * J
        w_prime_geom = 2.0 * p
    val = phi.eval(p)
    if val < -1e-10:
        raise NegativePhi(f"{sector.ref}: phi({p!r}) = {val!r}")
    val = max(val, 0.0)
    w = r2 * val
    if w <= 0.0:
        raise NegativePhi(f"{sector.ref}: vanishing shell factor at p = {p!r}")
    dw = w_prime_geom * val + r2 * phi.deriv(p)
    g = sector.g_mod * complex(math.cos(sector.g_phase), math.sin(sector.g_phase))
    u = g.real * math.cos(q) + g.imag * math.sin(q)
    sqrt_w = math.sqrt(w)
    dq = -sector.a + u * dw / sqrt_w
    dp = 2.0 * sqrt_w * (g.real * math.sin(q) - g.imag * math.cos(q))
    return dq, dp


def integrate(rhs: Callable[[BlochState], np.ndarray], y0: BlochState,
              t_span: tuple[float, float], tol: float = 1e-10,
              n_samples: int = 200,
              energy: Callable[[BlochState], float] | None = None) -> Trajectory:
    """Adaptive high-order integration of a shell flow.

    Uses an embedded Runge-Kutta pair with absolute and relative
    tolerance ``tol`` and samples the dense output on a uniform grid.
    Flow exceptions (negative phi) and step-size underflow terminate the
    run early and return the partial trajectory flagged.
    """
    if not y0.on_shell():
        raise ValueError("initial state is off the shell beyond 1e-6")
    failure: list[str] = []

    def f(t, y):
        state = BlochState(tuple(y), y0.J, y0.compact)
        try:
            return rhs(state)
        except NegativePhi:
            failure.append("negative-phi")
            return np.full(3, np.nan)

    t_eval = np.linspace(t_span[0], t_span[1], n_samples)
    sol = solve_ivp(f, t_span, np.array(y0.y), method="DOP853",
                    rtol=tol, atol=tol, t_eval=t_eval, dense_output=False)
    flag = None
    if failure:
        flag = "negative-phi"
    elif sol.status != 0:
        flag = "step-failure"
    times = sol.t
    states = tuple(BlochState(tuple(sol.y[:, i]), y0.J, y0.compact)
                   for i in range(sol.y.shape[1]))
    if len(states) == 0 or (len(states) < 2 and flag == "step-failure"):
        reached = float(times[-1]) if len(times) else t_span[0]
        raise StepFailure(f"step size underflow at t = {reached!r}")
    cas0 = states[0].casimir
    cas_drift = max(abs(s.casimir - cas0) for s in states)
    if energy is not None:
        try:
            e0 = energy(states[0])
            e_drift = max(abs(energy(s) - e0) for s in states)
        except NegativePhi:
            e_drift = math.nan
    else:
        e_drift = math.nan
    return Trajectory(times, states, float(cas_drift), float(e_drift), flag)


def bloch_flow(sector: Sector, phi: PhiPolynomial, variant: str):
    """(rhs, energy) pair for :func:`integrate`."""
    def rhs(state: BlochState) -> np.ndarray:
        return bloch_rhs(state, sector, phi, variant)

    def energy(state: BlochState) -> float:
        return bloch_energy(state, sector, phi, variant)

    return rhs, energy


# ---------------------------------------------------------------------------
# quantum propagators and observables


def exact_propagator(sol: EigenSolution, t: float) -> np.ndarray:
    """Spectral propagator exp(-i H t) from the exact eigensolution."""
    phases = np.exp(-1j * t * sol.energies)
    return (sol.amplitudes * phases) @ sol.amplitudes.T


def qa_propagator(sector: Sector, spec: VariationalSpectrum,
                  S: DisplacementMatrix, t: float) -> np.ndarray:
    """Propagator built from a variational ladder and its trial basis."""
    if S.cols != len(spec.energies):
        raise DimensionMismatch(
            f"{S.cols} trial columns vs {len(spec.energies)} energies")
    phases = np.exp(-1j * t * np.asarray(spec.energies))
    return (S.entries * phases) @ S.entries.T


def displaced_state(S: DisplacementMatrix, v: int, sector_ref: str) -> QuantumState:
    """Trial state v as a quantum state in the ladder basis."""
    if v < 0 or v >= S.cols:
        raise DimensionMismatch(f"column {v} outside {S.cols} trial states")
    return QuantumState(S.entries[:, v].astype(complex), sector_ref)


def basis_state(dim: int, f: int, sector_ref: str) -> QuantumState:
    amps = np.zeros(dim, dtype=complex)
    amps[f] = 1.0
    return QuantumState(amps, sector_ref)


def observable_series(rho, F: np.ndarray, times: Sequence[float],
                      propagator: Callable[[float], np.ndarray],
                      tag: str = "observable") -> ObservableSeries:
    """Expectation series <F(t)> for a pure state or a weighted mixture.

    ``rho`` is a :class:`QuantumState` or a sequence of (weight, state)
    pairs; ``propagator`` maps a time to the evolution matrix.  The
    imaginary residue of the trace is tracked and must stay below 1e-10
    for a Hermitian observable.
    """
    F = np.asarray(F)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise DimensionMismatch("observable must be a square matrix")
    if isinstance(rho, QuantumState):
        parts = [(1.0, rho)]
    else:
        parts = [(float(w), s) for w, s in rho]
    dim = F.shape[0]
    for _, state in parts:
        if state.amps.shape[0] != dim:
            raise DimensionMismatch(
                f"state dimension {state.amps.shape[0]} vs observable {dim}")
    times = np.asarray(times, dtype=float)
    values = np.empty(times.shape[0])
    max_imag = 0.0
    for i, t in enumerate(times):
        u = propagator(float(t))
        if u.shape != F.shape:
            raise DimensionMismatch(f"propagator shape {u.shape} vs {F.shape}")
        total = 0.0 + 0.0j
        for w, state in parts:
            evolved = u @ state.amps
            total += w * np.vdot(evolved, F @ evolved)
        max_imag = max(max_imag, abs(total.imag))
        values[i] = total.real
    return ObservableSeries(times, values, tag, float(max_imag))


def observable_v0(sector: Sector) -> np.ndarray:
    """Diagonal matrix of the cluster weight V0 = l0 + f."""
    l0 = float(sector.lowest_weight)
    return np.diag(l0 + np.arange(sector.dim, dtype=float))


def observable_projector(sector: Sector, f: int) -> np.ndarray:
    out = np.zeros((sector.dim, sector.dim))
    out[f, f] = 1.0
    return out


def model_observable(model: ModelSpec, sector: Sector, tag: str) -> np.ndarray:
    """Physical observables mapped back through the number-operator
    relations: ``photon`` counts quanta of the first mode (two_mode), the
    pump mode (multimode) or the cavity (dicke); ``inversion`` is the
    Dicke population difference."""
    v0 = observable_v0(sector)
    lab = sector.labels
    if tag == "v0":
        return v0
    if tag == "inversion":
        if model.family != "dicke":
            raise DimensionMismatch("inversion is a dicke observable")
        return 2.0 * v0
    if tag == "photon":
        if model.family == "two_mode":
            return model.m * v0 + float(lab["l1"]) * np.eye(sector.dim)
        if model.family == "multimode":
            lm = float(lab[f"l{model.m}"])
            return lm * np.eye(sector.dim) - model.n * v0
        if model.family == "dicke":
            return float(lab["l1"]) * np.eye(sector.dim) - model.n * v0
    raise DimensionMismatch(f"unknown observable tag {tag!r}")
