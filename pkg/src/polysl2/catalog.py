"""Catalog of concrete coupled-system models reduced to sector data.

Three families are covered:

* ``two_mode``   -- two boson modes exchanging m photons of mode 1 against
  n of mode 2 (frequency conversion / multiphoton scattering),
* ``multimode``  -- m signal modes created together against n quanta of a
  pump mode,
* ``dicke``      -- N two-level atoms exchanging n photons with one cavity
  mode (multiphoton Dicke / Jaynes-Cummings).

For each family the number operators are linear in the cluster variables
(V0, R_i), which fixes the structure polynomial, the sector labels, the V0
coefficient ``a`` and the energy offset.  All label arithmetic is exact
(``Fraction``), so resonances come out as ``a == 0.0`` exactly and the
polynomial divisions never see spurious remainders.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import _poly
from .algebra import PhiPolynomial, Sector, StructurePolynomial, gauge_normalize
from .errors import LabelMismatch, UnsupportedClosedForm

FAMILIES = ("two_mode", "multimode", "dicke", "custom")

#: default truncation attached to noncompact sectors; the exact solver
#: re-truncates adaptively.
DEFAULT_TRUNCATION = 32


def _frac(x) -> Fraction:
    """Exact conversion: ints, Fractions, strings and binary floats."""
    if isinstance(x, (Fraction, int, float)):
        return Fraction(x)
    return Fraction(str(x))


@dataclass(frozen=True)
class ModelSpec:
    """Family, exchange orders and physical constants of one model.

    ``omegas`` holds the mode frequencies: (w1, w2) for two_mode,
    (w1..wm, w0) for multimode with the pump last, (w1,) for dicke.
    ``epsilon`` is the two-level splitting (dicke only).  ``custom`` models
    carry an explicit (psi, l0, J, a, g, compact, c_shift) bundle instead.
    """

    family: str
    m: int = 1
    n: int = 1
    n_atoms: int = 1
    omegas: tuple[Fraction, ...] = (Fraction(1),)
    epsilon: Fraction = Fraction(0)
    g: complex = 0.0 + 0.0j
    custom: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise LabelMismatch(f"unknown family {self.family!r}")
        object.__setattr__(self, "omegas", tuple(_frac(w) for w in self.omegas))
        object.__setattr__(self, "epsilon", _frac(self.epsilon))
        object.__setattr__(self, "g", complex(self.g))
        if self.family == "custom":
            if self.custom is None:
                raise LabelMismatch("custom family needs an explicit bundle")
            return
        if self.m < 1:
            raise LabelMismatch("m must be >= 1")
        if self.n < 0:
            raise LabelMismatch("n must be >= 0")
        if self.family in ("two_mode", "multimode") and self.n > self.m:
            raise LabelMismatch("families require n <= m")
        if self.family == "two_mode" and len(self.omegas) != 2:
            raise LabelMismatch("two_mode needs omegas = (w1, w2)")
        if self.family == "multimode" and len(self.omegas) != self.m + 1:
            raise LabelMismatch("multimode needs omegas = (w1..wm, w0)")
        if self.family == "dicke":
            if self.n_atoms < 1:
                raise LabelMismatch("dicke needs at least one atom")
            if len(self.omegas) != 1:
                raise LabelMismatch("dicke needs omegas = (w1,)")


@dataclass(frozen=True)
class SectorLabels:
    """Family-dependent sector labels.

    two_mode: ``kappa`` in 0..m-1 and ``s`` >= 0.
    multimode: ``kappas`` (length m, at least one zero) and ``s`` >= 0.
    dicke: photon number ``kappa`` >= 0 and total spin ``j``.
    """

    kappa: int | None = None
    s: int | None = None
    kappas: tuple[int, ...] | None = None
    j: Fraction | None = None

    def __post_init__(self):
        if self.j is not None:
            object.__setattr__(self, "j", _frac(self.j))
        if self.kappas is not None:
            object.__setattr__(self, "kappas", tuple(int(k) for k in self.kappas))


def _check_labels(model: ModelSpec, labels: SectorLabels) -> None:
    fam = model.family
    if fam == "two_mode":
        if labels.kappa is None or labels.s is None:
            raise LabelMismatch("two_mode labels need kappa and s")
        if not 0 <= labels.kappa <= model.m - 1:
            raise LabelMismatch(f"kappa must lie in 0..{model.m - 1}")
        if labels.s < 0:
            raise LabelMismatch("s must be nonnegative")
    elif fam == "multimode":
        if labels.kappas is None or labels.s is None:
            raise LabelMismatch("multimode labels need kappas and s")
        if len(labels.kappas) != model.m:
            raise LabelMismatch(f"kappas must have length m = {model.m}")
        if any(k < 0 for k in labels.kappas) or labels.s < 0:
            raise LabelMismatch("occupation labels must be nonnegative")
        if all(k != 0 for k in labels.kappas):
            raise LabelMismatch("at least one kappa_i must vanish")
    elif fam == "dicke":
        if labels.kappa is None or labels.j is None:
            raise LabelMismatch("dicke labels need kappa and j")
        if labels.kappa < 0:
            raise LabelMismatch("kappa must be nonnegative")
        j2 = labels.j * 2
        if j2.denominator != 1:
            raise LabelMismatch("2j must be an integer")
        if (j2.numerator - model.n_atoms) % 2 != 0:
            raise LabelMismatch("2j must have the parity of the atom number")
        if not 0 <= labels.j <= Fraction(model.n_atoms, 2):
            raise LabelMismatch("j must lie in 0..N/2")
    else:
        raise LabelMismatch(f"family {fam!r} takes no catalog labels")


def _momenta(model: ModelSpec, labels: SectorLabels) -> dict[str, Fraction]:
    """Conserved eigenvalues l0, l1, ... of one sector."""
    m, n = model.m, model.n
    if model.family == "two_mode":
        k, s = Fraction(labels.kappa), Fraction(labels.s)
        return {"l0": (k - s) / (m + n), "l1": (n * k + m * s) / (m + n)}
    if model.family == "multimode":
        ks = [Fraction(k) for k in labels.kappas]
        s = Fraction(labels.s)
        out = {"l0": (sum(ks) - s) / (m + n)}
        for i in range(m - 1):
            out[f"l{i + 1}"] = (ks[i] - ks[i + 1]) / (m + n)
        out[f"l{m}"] = (n * sum(ks) + m * s) / (m + n)
        return out
    if model.family == "dicke":
        j, k = labels.j, Fraction(labels.kappa)
        return {"l0": -j, "l1": k - n * j}
    raise LabelMismatch(f"no momenta for family {model.family!r}")


def _ladder_factors(model: ModelSpec, labels: SectorLabels):
    """Linear factors of psi as polynomials in V0, exact coefficients.

    Each factor is returned ascending, (const, slope).  The product over
    these factors is the sector's structure polynomial.
    """
    m, n = model.m, model.n
    mom = _momenta(model, labels)
    l0 = mom["l0"]
    factors = []
    if model.family == "two_mode":
        k = Fraction(labels.kappa)
        # occupation of mode 1 along the ladder: kappa + m (V0 - l0) - i
        for i in range(m):
            factors.append((k - m * l0 - i, Fraction(m)))
        s = Fraction(labels.s)
        for kk in range(1, n + 1):
            factors.append((s + n * l0 + kk, Fraction(-n)))
    elif model.family == "multimode":
        for ki in labels.kappas:
            factors.append((Fraction(ki) - l0, Fraction(1)))
        s = Fraction(labels.s)
        for kk in range(1, n + 1):
            factors.append((s + n * l0 + kk, Fraction(-n)))
    elif model.family == "dicke":
        j = labels.j
        # j(j+1) - V0(V0-1) = (j + V0)(j + 1 - V0)
        factors.append((j, Fraction(1)))
        factors.append((j + 1, Fraction(-1)))
        l1 = mom["l1"]
        for kk in range(1, n + 1):
            factors.append((l1 + kk, Fraction(-n)))
    else:
        raise LabelMismatch(f"no structure polynomial for {model.family!r}")
    return factors


def _roots_in_v(model: ModelSpec, labels: SectorLabels) -> list[Fraction]:
    """Roots of psi expressed in the ladder coordinate v = V0 - l0."""
    mom = _momenta(model, labels)
    l0 = mom["l0"]
    roots = []
    for const, slope in _ladder_factors(model, labels):
        roots.append(-const / slope - l0)
    return roots


def build_psi(model: ModelSpec, labels: SectorLabels) -> StructurePolynomial:
    """Expanded structure polynomial of one sector (exact, then floats)."""
    if model.family == "custom":
        return model.custom[0]
    _check_labels(model, labels)
    coeffs = (Fraction(1),)
    for const, slope in _ladder_factors(model, labels):
        coeffs = _poly.pmul(coeffs, (const, slope))
    return StructurePolynomial(tuple(float(c) for c in coeffs))


def reduce_coefficients(model: ModelSpec, labels: SectorLabels) -> tuple[float, float]:
    """V0 coefficient ``a`` and energy offset of one sector.

    Both come from the free part of the Hamiltonian written in cluster
    variables; the offset is evaluated at the sector's lowest vector, so
    resonant frequency choices return a == 0.0 exactly.
    """
    if model.family == "custom":
        return float(model.custom[3]), float(model.custom[6])
    _check_labels(model, labels)
    m, n = model.m, model.n
    mom = _momenta(model, labels)
    l0 = mom["l0"]
    if model.family == "two_mode":
        w1, w2 = model.omegas
        a = m * w1 - n * w2
        lowest_energy = w1 * labels.kappa + w2 * labels.s
    elif model.family == "multimode":
        ws, w0 = model.omegas[:-1], model.omegas[-1]
        a = sum(ws) - n * w0
        lowest_energy = sum(w * k for w, k in zip(ws, labels.kappas)) + w0 * labels.s
    else:  # dicke
        (w1,) = model.omegas
        a = model.epsilon - n * w1
        lowest_energy = w1 * labels.kappa - model.epsilon * labels.j
    c = lowest_energy - a * l0
    return float(a), float(c)


def _dicke_multiplicity(n_atoms: int, j: Fraction) -> int:
    """Number of symmetric-group copies of the spin-j representation."""
    half = Fraction(n_atoms, 2)
    k = half - j
    if k.denominator != 1:
        return 0
    k = k.numerator
    total = math.comb(n_atoms, k) - (math.comb(n_atoms, k - 1) if k >= 1 else 0)
    return total


def _make_sector(model: ModelSpec, labels: SectorLabels,
                 truncation: int = DEFAULT_TRUNCATION) -> list[Sector]:
    """All sectors for one label tuple (two J branches when noncompact)."""
    _check_labels(model, labels)
    mom = _momenta(model, labels)
    l0 = mom["l0"]
    a, c = reduce_coefficients(model, labels)
    _, g_mod, g_phase = gauge_normalize(a, model.g)
    lab: dict[str, Fraction] = dict(mom)
    if model.family == "two_mode":
        lab["kappa"] = Fraction(labels.kappa)
        lab["s"] = Fraction(labels.s)
    elif model.family == "multimode":
        for i, k in enumerate(labels.kappas):
            lab[f"kappa{i + 1}"] = Fraction(k)
        lab["s"] = Fraction(labels.s)
    else:
        lab["kappa"] = Fraction(labels.kappa)
        lab["j"] = labels.j
        lab["j_mult"] = Fraction(_dicke_multiplicity(model.n_atoms, labels.j))

    compact = model.family == "dicke" or model.n >= 1
    roots = _roots_in_v(model, labels)
    if compact:
        positive = [r for r in roots if r.denominator == 1 and r > 0]
        if not positive:
            raise LabelMismatch(f"no ladder termination for labels {labels!r}")
        dim = int(min(positive))
        J = Fraction(dim - 1, 2)
        return [Sector(lab, l0, J, True, dim, a, g_mod, g_phase, c)]
    # Noncompact: each root other than one copy of v = 0 proposes an
    # effective spin via 2J = 1 - v_root; both admissible values are emitted.
    rest = list(roots)
    rest.remove(Fraction(0))
    js = sorted({Fraction(1 - r, 2) for r in rest if Fraction(1 - r, 2) > 0},
                reverse=True)
    out = []
    for idx, J in enumerate(js):
        branch_lab = dict(lab)
        branch_lab["J_branch"] = Fraction(idx)
        out.append(Sector(branch_lab, l0, J, False, truncation,
                          a, g_mod, g_phase, c))
    return out


def enumerate_sectors(model: ModelSpec, bounds: Mapping[str, tuple[int, int]],
                      truncation: int = DEFAULT_TRUNCATION) -> list[Sector]:
    """Sectors for every admissible label tuple inside the bounds.

    ``bounds`` maps label names to inclusive (lo, hi) ranges: ``kappa`` and
    ``s`` for the boson families, ``kappa`` (and optionally ``j``) for
    dicke, where j defaults to every admissible value for N atoms.  Empty
    bounds yield an empty list.
    """
    if model.family == "custom":
        psi, l0, J, a, g, compact, c = model.custom
        _, g_mod, g_phase = gauge_normalize(a, g)
        dim = int(2 * _frac(J)) + 1 if compact else truncation
        return [Sector({"l0": _frac(l0)}, _frac(l0), _frac(J), compact, dim,
                       float(a), g_mod, g_phase, float(c))]

    out: list[Sector] = []
    if model.family == "two_mode":
        klo, khi = bounds.get("kappa", (0, model.m - 1))
        slo, shi = bounds.get("s", (0, -1))
        for k in range(max(klo, 0), min(khi, model.m - 1) + 1):
            for s in range(max(slo, 0), shi + 1):
                out.extend(_make_sector(model, SectorLabels(kappa=k, s=s),
                                        truncation))
    elif model.family == "multimode":
        klo, khi = bounds.get("kappa", (0, -1))
        slo, shi = bounds.get("s", (0, -1))
        rng = range(max(klo, 0), khi + 1)
        for ks in itertools.product(rng, repeat=model.m):
            if all(k != 0 for k in ks):
                continue
            for s in range(max(slo, 0), shi + 1):
                out.extend(_make_sector(model, SectorLabels(kappas=ks, s=s),
                                        truncation))
    elif model.family == "dicke":
        klo, khi = bounds.get("kappa", (0, -1))
        half = Fraction(model.n_atoms, 2)
        js = []
        j = half
        while j >= 0:
            js.append(j)
            j -= 1
        if "j" in bounds:
            jlo, jhi = bounds["j"]
            js = [j for j in js if _frac(jlo) <= j <= _frac(jhi)]
        for k in range(max(klo, 0), khi + 1):
            for j in js:
                out.extend(_make_sector(model, SectorLabels(kappa=k, j=j),
                                        truncation))
    return out


def labels_from_momenta(model: ModelSpec, momenta: Mapping[str, Fraction]) -> SectorLabels:
    """Invert the label -> (l0, l_i) map on the enumerated range."""
    m, n = model.m, model.n
    l0 = momenta["l0"]
    if model.family == "two_mode":
        l1 = momenta["l1"]
        return SectorLabels(kappa=int(m * l0 + l1), s=int(l1 - n * l0))
    if model.family == "multimode":
        lm = momenta[f"l{m}"]
        s = lm - n * l0
        total = m * l0 + lm  # sum of kappa_i
        diffs = [(m + n) * momenta[f"l{i}"] for i in range(1, m)]
        # kappa_m from the telescoped differences, then walk back up
        km = (total - sum(i * d for i, d in enumerate(diffs, start=1))) / m
        ks = [km]
        for d in reversed(diffs):
            ks.append(ks[-1] + d)
        return SectorLabels(kappas=tuple(int(k) for k in reversed(ks)), s=int(s))
    if model.family == "dicke":
        j = -l0
        return SectorLabels(kappa=int(momenta["l1"] + n * j), j=j)
    raise LabelMismatch(f"no inverse map for family {model.family!r}")


def build_phi_catalog(model: ModelSpec, labels: SectorLabels,
                      branch: str = "J_plus") -> PhiPolynomial:
    """Closed-form reduced polynomial where the catalog provides one.

    Covered: any family at n = 1, and the parametric n = 0, m = 3 boson
    families (where ``branch`` picks one of the two admissible effective
    spins).  Everything else raises :class:`UnsupportedClosedForm`; callers
    fall back to :func:`polysl2.algebra.phi_from_psi`.
    """
    if model.family == "custom":
        raise UnsupportedClosedForm("custom models have no catalog form")
    _check_labels(model, labels)
    m, n = model.m, model.n

    if n == 1:
        if model.family == "dicke":
            j, k = labels.j, Fraction(labels.kappa)
            if min(2 * j, k) < 0:
                raise UnsupportedClosedForm("empty sector")
            J = min(j, k / 2)
            big = max(k, 2 * j)
            return PhiPolynomial((float(big - J), -1.0))
        if model.family == "two_mode":
            k, s = labels.kappa, Fraction(labels.s)
            J = s / 2
            # the i = kappa factor is m (Y0 + J + 1); dividing out the
            # boundary factor leaves the scalar m
            coeffs = (Fraction(m),)
            for i in range(m):
                if i == k:
                    continue
                coeffs = _poly.pmul(coeffs, (m * J + m + k - i, Fraction(m)))
            return PhiPolynomial(tuple(float(c) for c in coeffs))
        # multimode: product over nonzero kappas, one zero factor dropped
        s = Fraction(labels.s)
        J = s / 2
        coeffs = (Fraction(1),)
        dropped = False
        for ki in labels.kappas:
            if ki == 0 and not dropped:
                dropped = True
                continue
            coeffs = _poly.pmul(coeffs, (J + ki + 1, Fraction(1)))
        return PhiPolynomial(tuple(float(c) for c in coeffs))

    if n == 0 and m == 3 and model.family in ("two_mode", "multimode"):
        roots = _roots_in_v(model, labels)
        rest = list(roots)
        rest.remove(Fraction(0))
        js = sorted({Fraction(1 - r, 2) for r in rest if Fraction(1 - r, 2) > 0},
                    reverse=True)
        order = {"J_plus": 0, "J_minus": 1}
        if branch not in order or order[branch] >= len(js):
            raise UnsupportedClosedForm(f"no branch {branch!r} for {labels!r}")
        J = js[order[branch]]
        v_used = 1 - 2 * J
        third = list(rest)
        third.remove(v_used)
        (v3,) = third
        lam = 1 - J - v3
        lead = Fraction(m) ** m if model.family == "two_mode" else Fraction(1)
        return PhiPolynomial((float(lead * lam), float(lead)))

    raise UnsupportedClosedForm(
        f"no closed form for family={model.family!r} m={m} n={n}")
