"""Shared helpers: random catalog sectors with couplings attached."""
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from polysl2.algebra import phi_from_psi
from polysl2.catalog import ModelSpec, SectorLabels, build_psi, enumerate_sectors


def random_compact_job(rng, j_max=8, families=("two_mode", "multimode", "dicke")):
    """One random compact sector: returns (model, labels, sector, psi, phi).

    Couplings are O(1) and the effective spin stays at or below j_max.
    The sector is never one-dimensional.
    """
    while True:
        family = families[rng.integers(0, len(families))]
        g = complex(rng.uniform(0.1, 1.5), 0.0)
        if family == "two_mode":
            m = int(rng.integers(1, 4))
            n = int(rng.integers(1, m + 1))
            kappa = int(rng.integers(0, m))
            s = int(rng.integers(1, int(2 * j_max) + 1))
            model = ModelSpec("two_mode", m=m, n=n,
                              omegas=(Fraction(rng.integers(1, 4)),
                                      Fraction(rng.integers(1, 4))), g=g)
            labels = SectorLabels(kappa=kappa, s=s)
            bounds = {"kappa": (kappa, kappa), "s": (s, s)}
        elif family == "multimode":
            m = int(rng.integers(2, 4))
            ks = [int(rng.integers(0, 4)) for _ in range(m)]
            ks[rng.integers(0, m)] = 0
            s = int(rng.integers(1, int(2 * j_max) + 1))
            model = ModelSpec("multimode", m=m, n=1,
                              omegas=tuple(Fraction(rng.integers(1, 4))
                                           for _ in range(m + 1)), g=g)
            labels = SectorLabels(kappas=tuple(ks), s=s)
            bounds = None
        else:
            n_atoms = int(rng.integers(1, int(2 * j_max) + 1))
            j = Fraction(n_atoms, 2) - int(rng.integers(0, n_atoms // 2 + 1))
            kappa = int(rng.integers(1, int(2 * j_max) + 1))
            model = ModelSpec("dicke", n=1, n_atoms=n_atoms, omegas=(1,),
                              epsilon=Fraction(rng.integers(1, 3), 2), g=g)
            labels = SectorLabels(kappa=kappa, j=j)
            bounds = {"kappa": (kappa, kappa), "j": (j, j)}
        if bounds is None:
            from polysl2.catalog import _make_sector
            sectors = _make_sector(model, labels)
        else:
            sectors = enumerate_sectors(model, bounds)
        if not sectors:
            continue
        sector = sectors[0]
        if sector.dim < 2 or Fraction(sector.J) > j_max:
            continue
        psi = build_psi(model, labels)
        phi = phi_from_psi(psi, sector) if psi.degree >= 2 else None
        return model, labels, sector, psi, phi


def with_coupling(sector, a=None, g=None):
    """Override the reduced coupling data of a sector (tests only)."""
    kwargs = {}
    if a is not None:
        kwargs["a"] = float(a)
    if g is not None:
        kwargs["g_mod"] = abs(g)
        kwargs["g_phase"] = float(np.angle(g)) if g != 0 else 0.0
    return replace(sector, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
