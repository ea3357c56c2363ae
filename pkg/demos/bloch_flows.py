#!/usr/bin/env python3
"""Quasiclassical Bloch-type flows on the sector shell.

Integrates the three flow variants (full cluster, mean-field, linear) from
the same initial point of a strongly nonlinear Dicke sector and reports the
conserved quantities.  The shell constant and each variant's energy are
conserved by the cross-product structure, so their drift measures only the
integrator error.
"""
import math
from fractions import Fraction as F

from polysl2 import (BlochState, ModelSpec, SectorLabels, build_psi,
                     enumerate_sectors, phi_from_psi)
from polysl2.dynamics import bloch_flow, integrate

model = ModelSpec("dicke", n=1, n_atoms=8, omegas=(1,), epsilon=1, g=0.4)
kappa, j = 7, F(3)
sector = enumerate_sectors(model, {"kappa": (kappa, kappa), "j": (j, j)})[0]
psi = build_psi(model, SectorLabels(kappa=kappa, j=j))
phi = phi_from_psi(psi, sector)
J = float(sector.J)

print(f"{sector.ref}: J = {sector.J}, resonance, |g| = {sector.g_mod}")
print("=" * 72)

y1, y2 = 0.9, -0.5
state = BlochState((y1, y2, math.sqrt(J * J - y1 * y1 - y2 * y2)), J, True)
t_end = 100.0 / sector.g_mod

for variant in ("cq", "cmf", "linear"):
    rhs, energy = bloch_flow(sector, phi, variant)
    traj = integrate(rhs, state, (0.0, t_end), tol=1e-12, n_samples=400,
                     energy=energy)
    print(f"\nvariant = {variant}")
    print(f"  energy at start     : {energy(state): .10f}")
    print(f"  shell-constant drift: {traj.casimir_drift:.3e}")
    print(f"  energy drift        : {traj.energy_drift:.3e}")
    samples = traj.y[:: len(traj.times) // 5]
    print("  sampled (y1, y2, y0):")
    for t, y in zip(traj.times[:: len(traj.times) // 5], samples):
        print(f"    t = {t:7.2f}   ({y[0]: .6f}, {y[1]: .6f}, {y[2]: .6f})")

print("\nThe three flows share the shell but disagree pointwise: the")
print("mean-field and full-cluster kernels bend the precession that the")
print("linear flow keeps rigid.")
