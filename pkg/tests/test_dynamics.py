"""Bloch-type flows, conservation, charts, propagators and observables."""
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from polysl2.algebra import PhiPolynomial, phi_from_psi
from polysl2.catalog import ModelSpec, SectorLabels, build_psi, enumerate_sectors
from polysl2.coherent import displacement_for, variational_spectrum
from polysl2.dynamics import (BlochState, QuantumState, basis_state,
                              bloch_energy, bloch_flow, bloch_rhs,
                              displaced_state, exact_propagator, hamilton_rhs,
                              integrate, model_observable, observable_series,
                              qa_propagator)
from polysl2.errors import ChartSingularity, DimensionMismatch
from polysl2.exact import assemble_block, diagonalize
from tests.conftest import random_compact_job, with_coupling


def dicke_nonlinear(kappa=5, j=F(3), n_atoms=6, g=0.3, epsilon=F(1)):
    m = ModelSpec("dicke", n=1, n_atoms=n_atoms, omegas=(1,),
                  epsilon=epsilon, g=g)
    sector = enumerate_sectors(m, {"kappa": (kappa, kappa), "j": (j, j)})[0]
    psi = build_psi(m, SectorLabels(kappa=kappa, j=j))
    return m, sector, psi, phi_from_psi(psi, sector)


def shell_point(J, y1, y2, compact=True):
    if compact:
        y0 = math.sqrt(J * J - y1 * y1 - y2 * y2)
    else:
        y0 = math.sqrt(J * J + y1 * y1 + y2 * y2)
    return BlochState((y1, y2, y0), J, compact)


class TestBlochRhs:
    def test_pure_precession(self, rng):
        _, sector, psi, phi = dicke_nonlinear()
        sector = with_coupling(sector, a=0.9, g=0.0)
        J = float(sector.J)
        state = shell_point(J, 0.8, -0.3)
        for variant in ("linear", "cmf", "cq"):
            dy = bloch_rhs(state, sector, phi, variant)
            want = 0.9 * np.array([-state.y[1], state.y[0], 0.0])
            assert dy == pytest.approx(want, abs=1e-12)

    def test_pole_is_moved_by_coupling(self):
        _, sector, psi, phi = dicke_nonlinear()
        J = float(sector.J)
        state = BlochState((0.0, 0.0, -J), J, True)
        dy = bloch_rhs(state, sector, phi, "linear")
        # gradient (2g, 0, a) crossed with (0, 0, -J): finite tangent push
        assert dy == pytest.approx([0.0, 2 * sector.g_mod * J, 0.0], abs=1e-12)

    def test_mean_field_reduces_to_linear(self, rng):
        _, sector, psi, _ = dicke_nonlinear()
        flat = PhiPolynomial((1.0,))
        J = float(sector.J)
        for _ in range(10):
            y1, y2 = rng.uniform(-J / 2, J / 2, size=2)
            state = shell_point(J, y1, y2)
            a = bloch_rhs(state, sector, flat, "cmf")
            b = bloch_rhs(state, sector, flat, "linear")
            assert a == pytest.approx(b, abs=1e-12)

    def test_cluster_kernel_reduces_to_linear(self, rng):
        _, sector, psi, _ = dicke_nonlinear()
        flat = PhiPolynomial((1.0,))
        J = float(sector.J)
        state = shell_point(J, 0.4, 0.9)
        a = bloch_rhs(state, sector, flat, "cq")
        b = bloch_rhs(state, sector, flat, "linear")
        assert a == pytest.approx(b, abs=1e-12)


class TestHamiltonRhs:
    def test_chart_consistency_with_bloch_flow(self, rng):
        _, sector, psi, phi = dicke_nonlinear()
        J = float(sector.J)
        for _ in range(40):
            p = float(rng.uniform(-0.85 * J, 0.85 * J))
            q = float(rng.uniform(0, 2 * math.pi))
            rad = math.sqrt(J * J - p * p)
            state = BlochState((-rad * math.cos(q), rad * math.sin(q), p), J, True)
            dy = bloch_rhs(state, sector, phi, "cmf")
            # chain rule through q = atan2(y2, -y1), p = y0
            dq_ref = (-state.y[0] * dy[1] + state.y[1] * dy[0]) / (rad * rad)
            dq, dp = hamilton_rhs(p, q, sector, phi)
            assert dp == pytest.approx(dy[2], rel=1e-9, abs=1e-9)
            assert dq == pytest.approx(dq_ref, rel=1e-9, abs=1e-9)

    def test_decoupled_azimuth_rate(self):
        _, sector, psi, phi = dicke_nonlinear()
        sector = with_coupling(sector, a=1.3, g=0.0)
        dq, dp = hamilton_rhs(0.3, 1.1, sector, phi)
        assert dp == pytest.approx(0.0, abs=1e-15)
        # the printed-chart azimuth runs against the V0 rate
        assert dq == pytest.approx(-1.3, abs=1e-12)

    def test_pole_singularity(self):
        _, sector, psi, phi = dicke_nonlinear()
        J = float(sector.J)
        with pytest.raises(ChartSingularity):
            hamilton_rhs(J, 0.0, sector, phi)


class TestIntegrate:
    def test_precession_closes(self):
        _, sector, psi, phi = dicke_nonlinear()
        sector = with_coupling(sector, a=0.7, g=0.0)
        J = float(sector.J)
        state = shell_point(J, 1.1, -0.4)
        rhs, energy = bloch_flow(sector, phi, "linear")
        traj = integrate(rhs, state, (0.0, 2 * math.pi / 0.7), tol=1e-12,
                         energy=energy)
        assert np.max(np.abs(traj.y[-1] - traj.y[0])) < 1e-8
        assert traj.casimir_drift < 1e-8
        assert traj.flag is None

    def test_linear_flow_matches_rotation_oracle(self):
        # closed-form rigid rotation about the gradient axis
        _, sector, psi, phi = dicke_nonlinear(g=0.4)
        sector = with_coupling(sector, a=0.5, g=0.4)
        J = float(sector.J)
        state = shell_point(J, 0.9, 0.2)
        rhs, energy = bloch_flow(sector, PhiPolynomial((1.0,)), "cmf")
        t_end = 10.0 / sector.g_mod
        traj = integrate(rhs, state, (0.0, t_end), tol=1e-12,
                         n_samples=60, energy=energy)
        axis = np.array([2 * sector.g_mod, 0.0, sector.a])
        omega = np.linalg.norm(axis)
        n = axis / omega
        y0 = np.array(state.y)
        for t, s in zip(traj.times, traj.states):
            c, s_ = math.cos(omega * t), math.sin(omega * t)
            cross = np.array([n[1] * y0[2] - n[2] * y0[1],
                              n[2] * y0[0] - n[0] * y0[2],
                              n[0] * y0[1] - n[1] * y0[0]])
            want = c * y0 + s_ * cross + (1 - c) * np.dot(n, y0) * n
            assert np.max(np.abs(np.array(s.y) - want)) < 1e-7

    def test_conservation_all_variants(self, rng):
        _, sector, psi, phi = dicke_nonlinear()
        J = float(sector.J)
        horizon = 100.0 / max(abs(sector.a), sector.g_mod)
        for variant in ("cq", "cmf", "linear"):
            state = shell_point(J, 0.5, -0.6)
            rhs, energy = bloch_flow(sector, phi, variant)
            traj = integrate(rhs, state, (0.0, horizon), tol=1e-12,
                             energy=energy)
            assert traj.casimir_drift < 1e-8 * J * J
            e0 = abs(bloch_energy(state, sector, phi, variant))
            assert traj.energy_drift < 1e-7 * max(e0, 1.0)

    def test_noncompact_hyperboloid_flow(self):
        m = ModelSpec("two_mode", m=2, n=0, omegas=(1, 1), g=0.2)
        sector = enumerate_sectors(m, {"kappa": (0, 0), "s": (0, 0)})[0]
        psi = build_psi(m, SectorLabels(kappa=0, s=0))
        phi = phi_from_psi(psi, sector)
        sector = with_coupling(sector, a=2.0, g=0.2)
        J = float(sector.J)
        state = shell_point(J, 0.4, 0.1, compact=False)
        rhs, energy = bloch_flow(sector, phi, "cmf")
        traj = integrate(rhs, state, (0.0, 40.0), tol=1e-12, energy=energy)
        assert traj.casimir_drift < 1e-8
        assert traj.flag is None

    def test_negative_phi_flags_partial_run(self):
        # contrived kernel with a root inside the shell: the flow drifts
        # into the forbidden region and the run comes back flagged
        _, sector, psi, _ = dicke_nonlinear()
        J = float(sector.J)
        contrived = PhiPolynomial((0.25, -1.0))
        state = shell_point(J, 0.0, 1.5)
        state = BlochState((state.y[0], state.y[1], -state.y[2]), J, True)
        rhs, energy = bloch_flow(sector, contrived, "cmf")
        traj = integrate(rhs, state, (0.0, 50.0), tol=1e-10, energy=energy)
        assert traj.flag == "negative-phi"
        assert traj.times[-1] < 50.0
        for s in traj.states:
            assert s.y[2] < 0.25 + 1e-3

    def test_chart_and_bloch_integrations_agree(self):
        _, sector, psi, phi = dicke_nonlinear()
        J = float(sector.J)
        p0, q0 = -0.4, 0.7
        rad = math.sqrt(J * J - p0 * p0)
        state = BlochState((-rad * math.cos(q0), rad * math.sin(q0), p0), J, True)
        rhs, _ = bloch_flow(sector, phi, "cmf")
        traj = integrate(rhs, state, (0.0, 8.0), tol=1e-12, n_samples=30)

        def canonical(t, x):
            dq, dp = hamilton_rhs(x[1], x[0], sector, phi)
            return [dq, dp]

        sol = solve_ivp(canonical, (0.0, 8.0), [q0, p0], method="DOP853",
                        rtol=1e-12, atol=1e-12, t_eval=traj.times)
        for i in range(len(traj.times)):
            q, p = sol.y[0, i], sol.y[1, i]
            rad = math.sqrt(J * J - p * p)
            want = np.array([-rad * math.cos(q), rad * math.sin(q), p])
            assert np.max(np.abs(traj.y[i] - want)) < 1e-6


class TestPropagators:
    def test_zero_time_identity(self, rng):
        _, _, sector, psi, _ = random_compact_job(rng, j_max=3)
        sol = diagonalize(assemble_block(sector, psi))
        assert np.max(np.abs(exact_propagator(sol, 0.0)
                             - np.eye(sector.dim))) < 1e-14

    def test_group_property_and_unitarity(self, rng):
        _, _, sector, psi, _ = random_compact_job(rng, j_max=3)
        sol = diagonalize(assemble_block(sector, psi))
        u1 = exact_propagator(sol, 0.8)
        u2 = exact_propagator(sol, 1.7)
        assert np.max(np.abs(u1 @ u2 - exact_propagator(sol, 2.5))) < 1e-10
        assert np.max(np.abs(u1 @ u1.conj().T - np.eye(sector.dim))) < 1e-10

    def test_norm_preservation(self, rng):
        _, _, sector, psi, _ = random_compact_job(rng, j_max=4)
        sol = diagonalize(assemble_block(sector, psi))
        amps = rng.normal(size=sector.dim) + 1j * rng.normal(size=sector.dim)
        amps /= np.linalg.norm(amps)
        state = QuantumState(amps, sector.ref)
        evolved = exact_propagator(sol, 3.7) @ state.amps
        assert np.linalg.norm(evolved) == pytest.approx(1.0, abs=1e-10)

    def test_qa_matches_exact_on_linear_sector(self):
        m = ModelSpec("two_mode", m=1, n=1, omegas=(F(3, 2), F(2, 3)), g=0.4)
        sector = enumerate_sectors(m, {"kappa": (0, 0), "s": (5, 5)})[0]
        psi = build_psi(m, SectorLabels(kappa=0, s=5))
        phi = phi_from_psi(psi, sector)
        sol = diagonalize(assemble_block(sector, psi))
        spec = variational_spectrum(sector, psi, phi, "cq")
        S = displacement_for(sector, spec.r_used)
        for t in np.linspace(0.0, 100.0 / sector.g_mod, 20):
            dev = np.max(np.abs(qa_propagator(sector, spec, S, float(t))
                                - exact_propagator(sol, float(t))))
            assert dev < 1e-8

    def test_dimension_guard(self):
        _, sector, psi, phi = dicke_nonlinear()
        spec = variational_spectrum(sector, psi, phi, "cq")
        S = displacement_for(sector, spec.r_used)
        from polysl2.coherent import VariationalSpectrum
        bad = VariationalSpectrum("cq", spec.energies[:-1], spec.r_used, (),
                                  sector.ref)
        with pytest.raises(DimensionMismatch):
            qa_propagator(sector, bad, S, 1.0)


class TestObservableSeries:
    def test_identity_observable_is_constant(self, rng):
        _, _, sector, psi, _ = random_compact_job(rng, j_max=3)
        sol = diagonalize(assemble_block(sector, psi))
        out = observable_series(basis_state(sector.dim, 0, sector.ref),
                                np.eye(sector.dim), np.linspace(0, 5, 11),
                                lambda t: exact_propagator(sol, t))
        assert out.values == pytest.approx(np.ones(11), abs=1e-12)
        assert out.max_imag < 1e-10

    def test_rabi_inversion(self):
        m = ModelSpec("dicke", n=1, n_atoms=1, omegas=(1,), epsilon=1, g=0.31)
        sector = enumerate_sectors(m, {"kappa": (1, 1)})[0]
        psi = build_psi(m, SectorLabels(kappa=1, j=F(1, 2)))
        sol = diagonalize(assemble_block(sector, psi))
        times = np.linspace(0.0, 25.0, 60)
        out = observable_series(basis_state(2, 0, sector.ref),
                                model_observable(m, sector, "inversion"),
                                times, lambda t: exact_propagator(sol, t))
        assert out.values == pytest.approx(-np.cos(2 * sector.g_mod * times),
                                           abs=1e-8)

    def test_mixture_averages(self):
        m = ModelSpec("dicke", n=1, n_atoms=1, omegas=(1,), epsilon=1, g=0.31)
        sector = enumerate_sectors(m, {"kappa": (1, 1)})[0]
        psi = build_psi(m, SectorLabels(kappa=1, j=F(1, 2)))
        sol = diagonalize(assemble_block(sector, psi))
        times = np.linspace(0.0, 10.0, 21)
        fmat = model_observable(m, sector, "inversion")
        mixture = [(0.5, basis_state(2, 0, sector.ref)),
                   (0.5, basis_state(2, 1, sector.ref))]
        out = observable_series(mixture, fmat, times,
                                lambda t: exact_propagator(sol, t))
        assert out.values == pytest.approx(np.zeros(21), abs=1e-10)

    def test_displaced_state_recurrence_regression(self):
        # golden series: first computed 2024-08, frozen as regression pins
        m = ModelSpec("dicke", n=1, n_atoms=10, omegas=(1,), epsilon=1, g=0.3)
        sector = enumerate_sectors(m, {"kappa": (10, 10), "j": (5, 5)})[0]
        psi = build_psi(m, SectorLabels(kappa=10, j=F(5)))
        sol = diagonalize(assemble_block(sector, psi))
        state = displaced_state(displacement_for(sector, 0.6), 0, sector.ref)
        times = np.linspace(0.0, 30.0, 7)
        out = observable_series(state, model_observable(m, sector, "inversion"),
                                times, lambda t: exact_propagator(sol, t))
        golden = [-3.623577544766742, -2.5783505881482434, -3.482406227238103,
                  -2.632283773219206, -3.3977711618457103,
                  -2.7621764794577883, -3.385148719907534]
        assert out.values == pytest.approx(golden, rel=1e-9)

    def test_nonequidistant_gaps(self):
        # adjacent gaps genuinely unequal at resonance beyond two levels
        m = ModelSpec("dicke", n=1, n_atoms=10, omegas=(1,), epsilon=1, g=0.3)
        sector = enumerate_sectors(m, {"kappa": (10, 10), "j": (5, 5)})[0]
        psi = build_psi(m, SectorLabels(kappa=10, j=F(5)))
        sol = diagonalize(assemble_block(sector, psi))
        gaps = np.diff(sol.energies)
        assert gaps.max() / gaps.min() > 1 + 1e-6
