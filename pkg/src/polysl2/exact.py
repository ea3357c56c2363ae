"""Exact sector spectra: tridiagonal assembly, diagonalization and the
Bethe-polynomial consistency check.

Within one sector the Hamiltonian a*V0 + g V+ + g* V- + C is a real
symmetric tridiagonal matrix once the coupling phase has been gauged away,
so the exact spectrum is a dense-free eigensolve.  These spectra are the
oracle against which every variational approximation in the package is
measured.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .algebra import Sector, StructurePolynomial, ladder_norm
from .errors import ConvergenceFailure, ImaginaryFrequency, NoConvergence

#: eigenvalues closer than this (times the spectral radius) are reported as
#: one degenerate cluster
DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class TridiagonalBlock:
    """Gauge-normalized sector Hamiltonian.

    ``diag[v] = c_shift + a (l0 + v)`` and
    ``offdiag[v] = |g| sqrt(psi(l0 + v + 1))``.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    sector_ref: str

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "offdiag", np.asarray(self.offdiag, dtype=float))
        if self.offdiag.shape != (max(self.diag.shape[0] - 1, 0),):
            raise ValueError("offdiag must be one entry shorter than diag")
        if np.any(self.offdiag < 0):
            raise ValueError("offdiag entries must be nonnegative")

    @property
    def dim(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        h = np.diag(self.diag)
        idx = np.arange(self.dim - 1)
        h[idx, idx + 1] = self.offdiag
        h[idx + 1, idx] = self.offdiag
        return h


@dataclass(frozen=True)
class EigenSolution:
    """Ascending energies and orthonormal amplitude columns of one block.

    Column v of ``amplitudes`` holds the components of eigenvector v in the
    ladder basis, sign-fixed so the first nonzero component is positive.
    ``truncation`` records the matrix size used for noncompact sectors.
    """

    energies: np.ndarray
    amplitudes: np.ndarray
    residual: float
    truncation: int | None = None

    @property
    def degenerate_clusters(self) -> list[tuple[int, ...]]:
        """Groups of indices whose eigenvalues coincide numerically."""
        radius = max(np.max(np.abs(self.energies)), 1e-300)
        out, current = [], [0]
        for i in range(1, len(self.energies)):
            if self.energies[i] - self.energies[i - 1] <= DEGENERACY_RTOL * radius:
                current.append(i)
            else:
                if len(current) > 1:
                    out.append(tuple(current))
                current = [i]
        if len(current) > 1:
            out.append(tuple(current))
        return out


@dataclass(frozen=True)
class BethePolynomial:
    """Root data of one eigenvector's amplitude polynomial."""

    roots: np.ndarray
    leading: float
    energy_residual: float
    boundary_residual: float


@dataclass(frozen=True)
class BetheReport:
    """Per-eigenvector Bethe data plus the indices skipped for a
    degenerate leading coefficient."""

    items: dict[int, BethePolynomial]
    skipped: tuple[int, ...]

    @property
    def max_energy_residual(self) -> float:
        return max((b.energy_residual for b in self.items.values()), default=0.0)

    @property
    def max_boundary_residual(self) -> float:
        return max((b.boundary_residual for b in self.items.values()), default=0.0)


def assemble_block(sector: Sector, psi: StructurePolynomial) -> TridiagonalBlock:
    """Tridiagonal matrix of one sector in the ladder basis."""
    l0 = float(sector.lowest_weight)
    diag = sector.c_shift + sector.a * (l0 + np.arange(sector.dim))
    off = np.array([sector.g_mod * ladder_norm(psi, sector.lowest_weight, v)
                    for v in range(sector.dim - 1)])
    return TridiagonalBlock(diag, off, sector.ref)


def _sign_fix(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for col in range(out.shape[1]):
        v = out[:, col]
        nz = np.nonzero(np.abs(v) > 1e-300)[0]
        if nz.size and v[nz[0]] < 0:
            out[:, col] = -v
    return out


def _tridiag_apply(diag: np.ndarray, off: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    out = diag[:, None] * vecs
    if off.size:
        out[:-1] += off[:, None] * vecs[1:]
        out[1:] += off[:, None] * vecs[:-1]
    return out


def diagonalize(block: TridiagonalBlock) -> EigenSolution:
    """Full eigensolve of one block (energies ascending)."""
    if block.dim == 1:
        return EigenSolution(block.diag.copy(), np.ones((1, 1)), 0.0)
    try:
        energies, vectors = scipy.linalg.eigh_tridiagonal(block.diag, block.offdiag)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological scales
        raise ConvergenceFailure(f"{block.sector_ref}: {exc}") from exc
    vectors = _sign_fix(vectors)
    residual = float(np.max(np.abs(
        _tridiag_apply(block.diag, block.offdiag, vectors) - vectors * energies)))
    return EigenSolution(energies, vectors, residual)


def truncated_spectrum(sector: Sector, psi: StructurePolynomial, k: int,
                       tol: float = 1e-10, ceiling: int = 2 ** 16) -> EigenSolution:
    """Lowest k eigenpairs of a noncompact sector.

    Starts at matrix size 4k and doubles until the k-th eigenvalue moves by
    less than ``tol`` between rounds.  Raises :class:`NoConvergence` once
    the size would exceed ``ceiling`` (the typical cause is a spectrum
    unbounded below, e.g. a parametric model pumped past threshold).
    """
    if sector.compact:
        raise ValueError("truncated_spectrum is for noncompact sectors")
    if k < 1:
        raise ValueError("k must be >= 1")
    dim = max(4 * k, k + 1)
    last = None
    while dim <= ceiling:
        block = assemble_block(sector.with_dim(dim), psi)
        try:
            energies, vectors = scipy.linalg.eigh_tridiagonal(
                block.diag, block.offdiag, select="i", select_range=(0, k - 1))
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise ConvergenceFailure(f"{sector.ref}: {exc}") from exc
        if last is not None and abs(energies[k - 1] - last[k - 1]) < tol:
            vectors = _sign_fix(vectors)
            residual = float(np.max(np.abs(
                _tridiag_apply(block.diag, block.offdiag, vectors)
                - vectors * energies)))
            return EigenSolution(energies, vectors, residual, truncation=dim)
        last = energies
        dim *= 2
    raise NoConvergence(
        f"{sector.ref}: spectrum did not settle below truncation {ceiling}")


def equidistant_reference(sector: Sector, phi=None) -> np.ndarray:
    """Energy ladder of the degree-2 (linear su(2)/su(1,1)) case.

    Exact when the structure polynomial is quadratic, in which case the
    reduced polynomial is the constant that rescales the coupling (pass it
    as ``phi``); otherwise this is the quasi-equidistant approximation
    that the variational spectra improve on.  Raises
    :class:`ImaginaryFrequency` when a noncompact sector sits past the
    instability threshold.
    """
    a, g = sector.a, sector.g_mod
    if phi is not None and phi.degree == 0:
        g = g * math.sqrt(max(phi.coeffs[0], 0.0))
    if sector.compact:
        gap = math.sqrt(a * a + 4 * g * g)
        base = sector.c_shift + a * float(sector.lowest_weight + sector.J)
        signs = np.arange(sector.dim) - float(sector.J)
    else:
        disc = a * a - 4 * g * g
        if disc < 0:
            raise ImaginaryFrequency(
                f"{sector.ref}: a^2 - 4|g|^2 = {disc!r} < 0")
        gap = math.sqrt(disc)
        base = sector.c_shift + a * float(sector.lowest_weight - sector.J)
        signs = np.arange(sector.dim) + float(sector.J)
    return base + signs * gap


def _monomial_log_norms(sector: Sector, psi: StructurePolynomial) -> np.ndarray:
    """log of the norms of the raw monomial states V+^f |lowest>.

    The squared norm is the running product of psi along the ladder, so
    dividing an orthonormal amplitude by it yields the coefficient on the
    raw monomial basis that the root representation lives in.
    """
    l0 = float(sector.lowest_weight)
    out = np.zeros(sector.dim)
    acc = 0.0
    for f in range(1, sector.dim):
        acc += math.log(max(psi.eval(l0 + f), 1e-300))
        out[f] = 0.5 * acc
    return out


def bethe_check(sol: EigenSolution, sector: Sector,
                psi: StructurePolynomial) -> BetheReport:
    """Validate exact eigenvectors against their root representation.

    Each eigenvector, rewritten on the raw monomial ladder basis, is a
    degree-2J polynomial whose roots reproduce the eigenvalue through
    ``E = c_shift + (l0 + J) a + J a - g * sum(roots)`` and satisfy the
    top-level boundary relation.  Eigenvectors whose leading amplitude
    vanishes within 1e-12 (degree drop, e.g. the decoupled g = 0 limit)
    are skipped and reported.
    """
    if not sector.compact:
        raise ValueError("the root representation applies to compact sectors")
    twoJ = sector.dim - 1
    lognorm = _monomial_log_norms(sector, psi)
    g = sector.g_mod
    a = sector.a
    c_tilde = sector.c_shift + float(sector.lowest_weight + sector.J) * a
    items: dict[int, BethePolynomial] = {}
    skipped: list[int] = []
    for v in range(sector.dim):
        amps = sol.amplitudes[:, v]
        mono = amps * np.exp(-lognorm)     # coefficients Q_f, ascending in f
        scale = np.max(np.abs(mono))
        if abs(mono[-1]) <= 1e-12 * scale:
            skipped.append(v)
            continue
        roots = np.roots(mono[::-1])       # companion-matrix eigensolve
        energy = c_tilde + float(sector.J) * a - g * np.sum(roots)
        e_res = float(abs(sol.energies[v] - energy))
        boundary = ((float(sector.lowest_weight) + twoJ) * a
                    - sol.energies[v] + sector.c_shift) * mono[-1]
        if twoJ >= 1:
            boundary += g * mono[-2]
        b_res = abs(boundary) / max(scale, 1e-300)
        items[v] = BethePolynomial(roots, float(mono[-1]), e_res, float(b_res))
    return BetheReport(items, tuple(skipped))
