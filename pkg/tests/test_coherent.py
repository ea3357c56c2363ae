"""Displacement matrices, variational ladders and closed resonance forms."""
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.linalg import expm

from polysl2.algebra import phi_from_psi
from polysl2.catalog import ModelSpec, SectorLabels, build_psi, enumerate_sectors
from polysl2.coherent import (GCSParameter, approx_error_report,
                              approx_hamiltonian, closed_form_resonance,
                              displacement_for, displacement_matrix,
                              energy_cmf, energy_cq, energy_cq_ground_series,
                              error_functionals, linear_radius,
                              solve_stationarity_cmf, solve_stationarity_cq,
                              trig_kernels, variational_spectrum)
from polysl2.errors import (CutoffTooSmall, DegenerateDenominator,
                            DimensionMismatch, NegativePhiArgument, NoRealRoot,
                            UnsupportedClosedForm)
from polysl2.exact import assemble_block, diagonalize, equidistant_reference
from tests.conftest import random_compact_job, with_coupling


def dense_rotation(twoJ: int, r: float) -> np.ndarray:
    """Independent oracle: exponential of the dense ladder generators."""
    d = twoJ + 1
    yp = np.zeros((d, d))
    for f in range(d - 1):
        yp[f + 1, f] = math.sqrt((twoJ - f) * (f + 1))
    return expm(r * (yp.T - yp))


def dicke_job(kappa, j, n_atoms, g=0.3, epsilon=F(1), w1=F(1)):
    m = ModelSpec("dicke", n=1, n_atoms=n_atoms, omegas=(w1,),
                  epsilon=epsilon, g=g)
    labels = SectorLabels(kappa=kappa, j=F(j))
    sector = enumerate_sectors(m, {"kappa": (kappa, kappa), "j": (j, j)})[0]
    psi = build_psi(m, labels)
    return m, labels, sector, psi, phi_from_psi(psi, sector)


def linear_job(s, w1=F(3, 2), w2=F(2, 3), g=0.4):
    m = ModelSpec("two_mode", m=1, n=1, omegas=(w1, w2), g=g)
    labels = SectorLabels(kappa=0, s=s)
    sector = enumerate_sectors(m, {"kappa": (0, 0), "s": (s, s)})[0]
    psi = build_psi(m, labels)
    return m, labels, sector, psi, phi_from_psi(psi, sector)


class TestTrigKernels:
    def test_identity_displacement(self):
        assert trig_kernels(0.0, True) == pytest.approx((0, 1, 0, 1, 0))
        assert trig_kernels(0.0, False) == pytest.approx((0, 1, 0, 1, 0))

    def test_circular_values(self):
        r = math.pi / 4
        t, c, s, c2, s2 = trig_kernels(r, True)
        assert (t, c, s) == pytest.approx((1, math.sqrt(2) / 2, math.sqrt(2) / 2))
        assert (c2, s2) == pytest.approx((0, 1), abs=1e-15)

    def test_hyperbolic_values(self):
        vals = trig_kernels(1.0, False)
        want = (math.tanh(1), math.cosh(1), math.sinh(1),
                math.cosh(2), math.sinh(2))
        assert vals == pytest.approx(want)


class TestDisplacementMatrix:
    def test_two_level_rotation(self):
        r = 0.37
        S = displacement_matrix(F(1, 2), GCSParameter(r), 2)
        want = np.array([[math.cos(r), math.sin(r)],
                         [-math.sin(r), math.cos(r)]])
        assert np.max(np.abs(S.entries - want)) < 1e-14

    def test_zero_radius_identity(self):
        S = displacement_matrix(F(2), GCSParameter(0.0), 5)
        assert np.array_equal(S.entries, np.eye(5))

    def test_dense_exponential_oracle(self, rng):
        for twoJ in (1, 2, 3, 4, 6, 8):
            for _ in range(3):
                r = float(rng.uniform(0.05, 1.5))
                S = displacement_matrix(F(twoJ, 2), GCSParameter(r), twoJ + 1)
                assert np.max(np.abs(S.entries - dense_rotation(twoJ, r))) < 1e-10

    def test_unitarity_grid(self):
        for twoJ in (5, 13, 27, 40):
            d = twoJ + 1
            for r in np.linspace(0.05, 1.5, 7):
                S = displacement_matrix(F(twoJ, 2), GCSParameter(float(r)), d)
                assert np.max(np.abs(S.entries.T @ S.entries - np.eye(d))) < 1e-10

    def test_compact_cutoff_must_match(self):
        with pytest.raises(DimensionMismatch):
            displacement_matrix(F(1), GCSParameter(0.2), 4)

    def test_noncompact_columns_orthonormal(self):
        S = displacement_matrix(F(1, 4), GCSParameter(0.7, compact=False),
                                80, cols=6)
        assert np.max(np.abs(S.entries.T @ S.entries - np.eye(6))) < 1e-10

    def test_noncompact_cutoff_guard(self):
        with pytest.raises(CutoffTooSmall):
            displacement_matrix(F(1, 4), GCSParameter(1.4, compact=False),
                                12, cols=6)

    def test_noncompact_dense_oracle(self):
        twoJ = 0.5  # weight 1/4 ladder
        big = 220
        yp = np.zeros((big, big))
        for f in range(big - 1):
            yp[f + 1, f] = math.sqrt((twoJ + f) * (f + 1))
        r = 0.6
        oracle = expm(r * (yp.T - yp))
        S = displacement_matrix(F(1, 4), GCSParameter(r, compact=False),
                                60, cols=5)
        assert np.max(np.abs(S.entries - oracle[:60, :5])) < 1e-12


class TestEnergyCq:
    def test_zero_radius_is_diagonal(self, rng):
        _, _, sector, psi, phi = random_compact_job(rng)
        S = displacement_for(sector, 0.0)
        l0 = float(sector.lowest_weight)
        for v in range(sector.dim):
            want = sector.c_shift + sector.a * (l0 + v)
            assert energy_cq(sector, phi, S, v) == pytest.approx(want, abs=1e-12)

    def test_two_level_resonance_exact(self):
        _, _, sector, psi, phi = dicke_job(1, F(1, 2), 1)
        (r,) = solve_stationarity_cq(sector, phi)
        S = displacement_for(sector, r)
        c, g = sector.c_shift, sector.g_mod
        assert energy_cq(sector, phi, S, 0) == pytest.approx(c - g, abs=1e-12)
        assert energy_cq(sector, phi, S, 1) == pytest.approx(c + g, abs=1e-12)

    def test_linear_collapse(self):
        _, _, sector, psi, phi = linear_job(2)
        roots = solve_stationarity_cq(sector, phi)
        best = min(roots, key=lambda r: abs(math.tan(2 * r)
                                            - 2 * sector.g_mod / sector.a))
        S = displacement_for(sector, best)
        ref = equidistant_reference(sector, phi)
        got = [energy_cq(sector, phi, S, v) for v in range(sector.dim)]
        assert got == pytest.approx(ref, abs=1e-9)

    def test_ground_series_matches_matrix_route(self, rng):
        for _ in range(6):
            _, _, sector, psi, phi = random_compact_job(rng, j_max=5)
            r = float(rng.uniform(0.05, 1.2))
            S = displacement_for(sector, r)
            assert energy_cq(sector, phi, S, 0) == pytest.approx(
                energy_cq_ground_series(sector, phi, r), abs=1e-10)


class TestStationarityCq:
    def test_two_level_resonance_radius(self):
        _, _, sector, psi, phi = dicke_job(1, F(1, 2), 1)
        roots = solve_stationarity_cq(sector, phi)
        assert roots == pytest.approx([math.pi / 4], abs=1e-12)

    def test_weak_coupling_small_radius(self):
        _, _, sector, psi, phi = dicke_job(2, F(1), 2, g=1e-6, epsilon=F(5, 2))
        roots = solve_stationarity_cq(sector, phi)
        assert min(roots) < 1e-4

    def test_linear_rotation_condition(self):
        _, _, sector, psi, phi = linear_job(2)
        roots = solve_stationarity_cq(sector, phi)
        target = 2 * sector.g_mod / sector.a
        assert min(abs(math.tan(2 * r) - target) for r in roots) < 1e-10

    def test_root_audit(self, rng):
        from polysl2.coherent import _cq_root_function
        for _ in range(10):
            _, _, sector, psi, phi = random_compact_job(rng, j_max=5)
            g_fun = _cq_root_function(sector, phi)
            for r in solve_stationarity_cq(sector, phi):
                val, scale = g_fun(math.tan(r))
                assert abs(val) <= 1e-9 * scale

    def test_coupling_required(self, rng):
        _, _, sector, psi, phi = random_compact_job(rng)
        with pytest.raises(NoRealRoot):
            solve_stationarity_cq(with_coupling(sector, g=0), phi)


class TestEnergyCmf:
    def test_middle_level_decouples(self):
        # J - v = 0 kills the coupling term
        _, _, sector, psi, phi = dicke_job(4, F(2), 4)
        J = float(sector.J)
        v = int(J)
        if 2 * int(J) == int(2 * J):  # integer J only
            r = 0.4
            _, _, _, c2, _ = trig_kernels(r, True)
            from polysl2.coherent import c_tilde
            want = c_tilde(sector) + sector.a * (v - J) * c2
            assert energy_cmf(sector, phi, r, v) == pytest.approx(want, abs=1e-12)

    def test_dicke_resonance_ladder(self):
        # closed-form radius reproduces the closed-form ladder level by level
        model, labels, sector, psi, phi = dicke_job(2, F(1), 2, g=0.37)
        cos2r, energies = closed_form_resonance(model, labels)
        r = math.acos(cos2r) / 2
        got = [energy_cmf(sector, phi, r, v) for v in range(sector.dim)]
        assert got == pytest.approx(list(energies), abs=1e-12)

    def test_linear_collapse(self):
        _, _, sector, psi, phi = linear_job(3)
        r = linear_radius(sector, phi)
        ref = equidistant_reference(sector, phi)
        got = [energy_cmf(sector, phi, r, v) for v in range(sector.dim)]
        assert got == pytest.approx(ref, abs=1e-10)

    def test_negative_phi_argument(self):
        _, _, sector, psi, phi = dicke_job(3, F(3, 2), 3)
        # push the mean-field point far outside the shell
        from polysl2.algebra import PhiPolynomial
        bad_phi = PhiPolynomial((-5.0, -1.0))
        with pytest.raises(NegativePhiArgument):
            energy_cmf(sector, bad_phi, 0.3, 0)


class TestStationarityCmf:
    def test_two_mode_closed_form_agreement(self):
        for kappa in (0, 1):
            for s in (2, 5, 9):
                model = ModelSpec("two_mode", m=2, n=1, omegas=(1, 2), g=0.3)
                labels = SectorLabels(kappa=kappa, s=s)
                sector = enumerate_sectors(model, {"kappa": (kappa, kappa),
                                                   "s": (s, s)})[0]
                phi = phi_from_psi(build_psi(model, labels), sector)
                cos2r, _ = closed_form_resonance(model, labels)
                roots = solve_stationarity_cmf(sector, phi)
                assert min(abs(math.cos(2 * r) - cos2r) for r in roots) < 1e-9

    def test_dicke_closed_form_agreement(self):
        for kappa, j, n_atoms in ((2, F(1), 2), (5, F(3, 2), 3), (3, F(3), 6)):
            model, labels, sector, psi, phi = dicke_job(kappa, j, n_atoms)
            cos2r, _ = closed_form_resonance(model, labels)
            roots = solve_stationarity_cmf(sector, phi)
            assert min(abs(math.cos(2 * r) - cos2r) for r in roots) < 1e-9

    def test_linear_rotation_condition(self):
        _, _, sector, psi, phi = linear_job(4)
        roots = solve_stationarity_cmf(sector, phi)
        target = 2 * sector.g_mod / sector.a
        assert min(abs(math.tan(2 * r) - target) for r in roots) < 1e-10

    def test_root_audit(self, rng):
        from polysl2.coherent import _cmf_root_function
        for _ in range(10):
            _, _, sector, psi, phi = random_compact_job(rng, j_max=5)
            g_fun = _cmf_root_function(sector, phi)
            for r in solve_stationarity_cmf(sector, phi):
                val, scale = g_fun(r)
                assert abs(val) <= 1e-9 * scale


class TestClosedFormResonance:
    def test_balanced_dicke_third(self):
        model, labels, *_ = dicke_job(2, F(1), 2)
        cos2r, _ = closed_form_resonance(model, labels)
        assert cos2r == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_large_ladder_asymptote(self):
        kappa, s = 1, 400
        model = ModelSpec("two_mode", m=2, n=1, omegas=(1, 2), g=0.3)
        cos2r, _ = closed_form_resonance(model, SectorLabels(kappa=kappa, s=s))
        approx = ((2 * kappa + 1) / (2 * s) - 1) / 3.0
        assert cos2r == pytest.approx(approx, abs=2e-3)

    def test_multimode_branch(self):
        model = ModelSpec("multimode", m=2, n=1, omegas=(1, F(3, 2), F(5, 2)),
                          g=0.2)
        labels = SectorLabels(kappas=(0, 2), s=4)
        cos2r, energies = closed_form_resonance(model, labels)
        from polysl2.catalog import _make_sector
        sector = _make_sector(model, labels)[0]
        phi = phi_from_psi(build_psi(model, labels), sector)
        r = math.acos(cos2r) / 2
        got = [energy_cmf(sector, phi, r, v) for v in range(sector.dim)]
        assert got == pytest.approx(list(energies), abs=1e-9)

    def test_off_resonance_rejected(self):
        model = ModelSpec("two_mode", m=2, n=1, omegas=(1, 3), g=0.3)
        with pytest.raises(UnsupportedClosedForm):
            closed_form_resonance(model, SectorLabels(kappa=0, s=3))

    def test_uncovered_family_rejected(self):
        model = ModelSpec("two_mode", m=3, n=1, omegas=(1, 3), g=0.3)
        with pytest.raises(UnsupportedClosedForm):
            closed_form_resonance(model, SectorLabels(kappa=0, s=3))


class TestApproxHamiltonian:
    def test_similarity_round_trip(self, rng):
        from polysl2.coherent import DisplacementMatrix, VariationalSpectrum
        _, _, sector, psi, _ = random_compact_job(rng, j_max=4)
        block = assemble_block(sector, psi)
        sol = diagonalize(block)
        spec = VariationalSpectrum("cq", sol.energies, 0.0, (), sector.ref)
        S = DisplacementMatrix(sol.amplitudes, sector.J, 0.0, True)
        rebuilt = approx_hamiltonian(sector, spec, S)
        assert np.max(np.abs(rebuilt - block.dense())) < 1e-9

    def test_linear_sector_reconstruction(self):
        _, _, sector, psi, phi = linear_job(3)
        spec = variational_spectrum(sector, psi, phi, "cq")
        S = displacement_for(sector, spec.r_used)
        block = assemble_block(sector, psi)
        assert np.max(np.abs(approx_hamiltonian(sector, spec, S)
                             - block.dense())) < 1e-8

    def test_zero_radius_diagonal(self, rng):
        from polysl2.coherent import VariationalSpectrum
        _, _, sector, psi, _ = random_compact_job(rng, j_max=3)
        S = displacement_for(sector, 0.0)
        energies = np.arange(sector.dim, dtype=float)
        spec = VariationalSpectrum("cmf", energies, 0.0, (), sector.ref)
        out = approx_hamiltonian(sector, spec, S)
        assert np.max(np.abs(out - np.diag(energies))) == 0.0


class TestErrorFunctionals:
    def test_exact_approximation_is_zero(self, rng):
        _, _, sector, psi, _ = random_compact_job(rng, j_max=3)
        block = assemble_block(sector, psi)
        for p in (1, 2):
            try:
                assert error_functionals(block, block.dense(), p) \
                    == pytest.approx(0.0, abs=1e-14)
            except DegenerateDenominator:
                pass

    def test_linear_mean_field_is_exact(self):
        _, _, sector, psi, phi = linear_job(3)
        block = assemble_block(sector, psi)
        spec = variational_spectrum(sector, psi, phi, "cmf")
        S = displacement_for(sector, spec.r_used)
        d2 = error_functionals(block, approx_hamiltonian(sector, spec, S), 2)
        assert d2 < 1e-8

    def test_dicke_regression_value(self):
        # golden number: first computed 2024-08, frozen as a regression pin
        _, _, sector, psi, phi = dicke_job(3, F(3, 2), 3, g=0.4)
        block = assemble_block(sector, psi)
        spec = variational_spectrum(sector, psi, phi, "cmf")
        S = displacement_for(sector, spec.r_used)
        d2 = error_functionals(block, approx_hamiltonian(sector, spec, S), 2)
        assert d2 == pytest.approx(0.06663993924519945, rel=1e-9)
        assert d2 > 0

    def test_degenerate_denominator(self):
        from polysl2.exact import TridiagonalBlock
        block = TridiagonalBlock(np.array([1.0, -1.0]), np.array([0.0]), "t")
        with pytest.raises(DegenerateDenominator):
            error_functionals(block, np.zeros((2, 2)), 1)

    def test_report_has_both_orders(self):
        _, _, sector, psi, phi = linear_job(2)
        block = assemble_block(sector, psi)
        report = approx_error_report(block, block.dense(), "cq")
        assert report.delta2 == pytest.approx(0.0, abs=1e-14)
        assert report.method == "cq"


class TestVariationalSpectrum:
    def test_d2_exactness_sweep(self):
        for kappa in range(1, 8):
            _, _, sector, psi, phi = dicke_job(kappa, F(1, 2), 1, g=0.41)
            sol = diagonalize(assemble_block(sector, psi))
            spec = variational_spectrum(sector, psi, phi, "cq")
            assert np.max(np.abs(spec.energies - sol.energies)) < 1e-8

    def test_ground_state_bound(self, rng):
        for _ in range(15):
            _, _, sector, psi, phi = random_compact_job(rng, j_max=5)
            sol = diagonalize(assemble_block(sector, psi))
            spec = variational_spectrum(sector, psi, phi, "cq")
            assert spec.energies[0] >= sol.energies[0] - 1e-10

    def test_policies_agree_on_unique_root(self):
        _, _, sector, psi, phi = dicke_job(1, F(1, 2), 1)
        a = variational_spectrum(sector, psi, phi, "cq", "min-delta2")
        b = variational_spectrum(sector, psi, phi, "cq", "min-ground")
        assert a.r_used == pytest.approx(b.r_used)

    def test_roots_are_recorded(self):
        _, _, sector, psi, phi = dicke_job(4, F(2), 4)
        spec = variational_spectrum(sector, psi, phi, "cq")
        assert spec.r_used in spec.roots_found
        assert len(spec.roots_found) <= sector.dim
