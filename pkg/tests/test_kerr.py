import math

import numpy as np
import pytest

import mwteleport.kerr as k
from mwteleport.fock import FockState, fock

REFERENCE = k.TransmonSystem(delta_a=100.0, delta_b=50.0, g_a=1.0, g_b=1.0, dims=(3, 4, 4))


class TestSystem:
    def test_dims_validation(self):
        with pytest.raises(ValueError):
            k.TransmonSystem(100.0, 50.0, 1.0, 1.0, dims=(2, 4, 4))
        with pytest.raises(ValueError):
            k.TransmonSystem(100.0, 50.0, 1.0, 1.0, dims=(3, 1, 4))

    def test_detunings_from_lab(self):
        da, db = k.detunings_from_lab(5.0, 4.0, 6.0, 7.0)
        assert da == pytest.approx(2.0)
        assert db == pytest.approx(2.0)

    def test_dispersive_ratio_warning(self):
        with pytest.warns(UserWarning, match="dispersive"):
            k.TransmonSystem(100.0, 50.0, 10.0, 1.0)
        assert REFERENCE.dispersive_ratio() == pytest.approx(1.0 / 50.0)


class TestHamiltonian:
    def test_zero_coupling_is_diagonal(self):
        sys0 = k.TransmonSystem(100.0, 50.0, 0.0, 0.0, dims=(3, 3, 3))
        ham = k.build_hamiltonian(sys0).toarray()
        np.testing.assert_allclose(ham, np.diag(np.diagonal(ham)), atol=1e-14)
        # detuning terms: |2> block at delta_a, |1> block at delta_b
        assert ham[0, 0] == 0.0
        idx_1 = 1 * 9  # (q=1, n_a=0, n_b=0)
        idx_2 = 2 * 9
        assert ham[idx_1, idx_1] == pytest.approx(50.0)
        assert ham[idx_2, idx_2] == pytest.approx(100.0)

    def test_hermitian(self):
        ham = k.build_hamiltonian(REFERENCE).toarray()
        assert np.max(np.abs(ham - ham.conj().T)) < 1e-12

    def test_lower_transition_matrix_element(self):
        ham = k.build_hamiltonian(REFERENCE).toarray()
        # <q=1, n_a=0, n_b | H | q=0, n_a=0, n_b+1> = g_b sqrt(n_b+1)
        for n_b in range(3):
            bra = (1 * 4 + 0) * 4 + n_b
            ket = (0 * 4 + 0) * 4 + (n_b + 1)
            assert ham[bra, ket] == pytest.approx(math.sqrt(n_b + 1), rel=1e-14)

    def test_upper_transition_matrix_element(self):
        ham = k.build_hamiltonian(REFERENCE).toarray()
        # <q=2, n_a, n_b | H | q=1, n_a+1, n_b> = g_a sqrt(n_a+1)
        bra = (2 * 4 + 1) * 4 + 0
        ket = (1 * 4 + 2) * 4 + 0
        assert ham[bra, ket] == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_conserves_total_excitation(self):
        ham = k.build_hamiltonian(REFERENCE)
        exc = k.excitation_operator(REFERENCE)
        comm = (ham @ exc - exc @ ham).toarray()
        assert np.max(np.abs(comm)) < 1e-12


class TestEvolve:
    def test_zero_coupling_exact_phases(self):
        sys0 = k.TransmonSystem(100.0, 50.0, 0.0, 0.0, dims=(3, 2, 2))
        amps = np.zeros((3, 2, 2), dtype=complex)
        amps[0, 0, 0] = amps[1, 0, 0] = amps[2, 0, 0] = 1.0 / math.sqrt(3.0)
        out = k.evolve(sys0, FockState(amps), 0.7)
        assert out.amps[0, 0, 0] == pytest.approx(1 / math.sqrt(3), abs=1e-10)
        assert out.amps[1, 0, 0] == pytest.approx(math.e ** (-1j * 50.0 * 0.7) / math.sqrt(3), abs=1e-9)
        assert out.amps[2, 0, 0] == pytest.approx(math.e ** (-1j * 100.0 * 0.7) / math.sqrt(3), abs=1e-9)

    def test_rabi_sector_matches_closed_form(self):
        # n_a = 0 sector: |0;0,1> <-> |1;0,0> is an exact two-level problem
        with pytest.warns(UserWarning):
            system = k.TransmonSystem(50.0, 2.0, 0.0, 1.0, dims=(3, 2, 2))
        start = fock((3, 2, 2), (0, 0, 1))
        t = 1.7
        out = k.evolve(system, start, t)
        rabi = math.sqrt(2.0 ** 2 + 4.0)
        want = (4.0 / (2.0 ** 2 + 4.0)) * math.sin(rabi * t / 2.0) ** 2
        got = abs(out.amps[1, 0, 0]) ** 2
        assert got == pytest.approx(want, abs=1e-8)

    def test_norm_drift_over_long_horizon(self):
        system = k.TransmonSystem(100.0, 50.0, 1.0, 1.0, dims=(3, 2, 2))
        amps = np.zeros((3, 2, 2), dtype=complex)
        for occ in ((0, 0), (1, 0), (0, 1), (1, 1)):
            amps[0, occ[0], occ[1]] = 0.5
        out = k.evolve(system, FockState(amps), 2000.0)
        assert abs(out.norm2() - 1.0) < 1e-9

    def test_tolerance_halving_convergence(self):
        system = k.TransmonSystem(100.0, 50.0, 1.0, 1.0, dims=(3, 2, 2))
        start = fock((3, 2, 2), (0, 1, 1))
        coarse = k.evolve(system, start, 100.0, tol=1e-10)
        fine = k.evolve(system, start, 100.0, tol=1e-12)
        assert np.max(np.abs(coarse.amps - fine.amps)) < 1e-7

    def test_adaptive_matches_spectral(self):
        system = k.TransmonSystem(100.0, 50.0, 1.0, 1.0, dims=(3, 3, 3))
        dim = 27
        initial = np.zeros(dim, dtype=complex)
        initial[(0 * 3 + 1) * 3 + 1] = 1.0
        probes = np.eye(dim)[:1]
        _, final = k._spectral_amplitudes(system, initial, probes, np.array([0.0, 50.0]))
        out = k.evolve(system, FockState(initial.reshape(3, 3, 3)), 50.0)
        assert np.max(np.abs(out.amps.reshape(-1) - final)) < 1e-7

    def test_dims_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dims"):
            k.evolve(REFERENCE, fock((3, 2, 2), (0, 0, 0)), 1.0)


class TestExtractKerr:
    def test_reference_rates(self):
        report = k.extract_kerr(REFERENCE)
        assert report.chi_stark == pytest.approx(1.0 / 50.0, rel=0.05)
        # static perturbation theory at fourth order
        assert report.chi_kerr == pytest.approx(1.0 / (100.0 * 50.0 ** 2), rel=0.05)
        assert report.fit_residual < 1e-3
        assert report.ground_state_population > 1.0 - 10.0 * (1.0 / 50.0) ** 2
        assert report.prediction == pytest.approx(2.4e-5, rel=1e-12)
        assert report.ratio_to_fourth_order == pytest.approx(
            report.chi_kerr / 2.4e-5, rel=1e-12
        )

    def test_stark_only_when_upper_coupling_off(self):
        system = k.TransmonSystem(100.0, 50.0, 0.0, 1.0, dims=(3, 4, 4))
        report = k.extract_kerr(system)
        assert report.chi_stark == pytest.approx(0.02, rel=0.05)
        assert abs(report.chi_kerr) < 1e-9
        assert math.isnan(report.ratio_to_fourth_order)

    def test_kerr_scales_with_squared_couplings(self):
        # base couplings chosen so the doubled systems stay dispersive
        base = k.extract_kerr(
            k.TransmonSystem(100.0, 50.0, 1.0, 0.5, dims=(3, 4, 4))
        ).chi_kerr
        double_a = k.extract_kerr(
            k.TransmonSystem(100.0, 50.0, 2.0, 0.5, dims=(3, 4, 4))
        ).chi_kerr
        double_b = k.extract_kerr(REFERENCE).chi_kerr
        assert double_a / base == pytest.approx(4.0, rel=0.05)
        assert double_b / base == pytest.approx(4.0, rel=0.05)

    def test_zero_detuning_rejected(self):
        with pytest.warns(UserWarning):
            bad = k.TransmonSystem(100.0, 0.0, 0.1, 0.1, dims=(3, 2, 2))
        with pytest.raises(k.RegimeError, match="detunings"):
            k.extract_kerr(bad)

    def test_strong_coupling_regime_error(self):
        with pytest.warns(UserWarning):
            strong = k.TransmonSystem(100.0, 50.0, 10.0, 10.0, dims=(3, 4, 4))
        with pytest.raises(k.RegimeError, match="linearity"):
            k.extract_kerr(strong)

    def test_probe_time_override(self):
        report = k.extract_kerr(REFERENCE, probe_time=30000.0, n_samples=4000)
        assert report.probe_time == 30000.0
        assert report.n_samples == 4000
        assert report.chi_kerr == pytest.approx(4e-6, rel=0.05)

    def test_no_couplings_rejected(self):
        idle = k.TransmonSystem(100.0, 50.0, 0.0, 0.0, dims=(3, 2, 2))
        with pytest.raises(k.RegimeError, match="nothing to extract"):
            k.extract_kerr(idle)
