import numpy as np
import pytest

from core.exceptions import DegenerateOutcomeError, UnphysicalCorrelatorsError
from core.qmat import BellLabel, bell_projector, random_density_matrix, trace_distance, uhlmann_fidelity
from core.teleport import (
    PairCorrelators,
    RegionLabel,
    SetFamily,
    all_correction_sets,
    bob_output_closed_form,
    closed_form_d_min,
    correction_set,
    d_min,
    f_max,
    mean_fidelity,
    mean_trace_distance,
    outcome_probabilities,
    rho1_from_z,
    rho23_from_correlators,
    sample_correlators,
    sign_analysis,
    teleport_engine,
)

PRODUCT_HALF = PairCorrelators(0.5, 0.0, 0.0, 0.25)


class TestCorrectionSets:
    def test_families(self):
        families = {s.label: s.family for s in all_correction_sets()}
        assert families[BellLabel.PSI_PLUS] is SetFamily.PSI
        assert families[BellLabel.PSI_MINUS] is SetFamily.PSI
        assert families[BellLabel.PHI_PLUS] is SetFamily.PHI
        assert families[BellLabel.PHI_MINUS] is SetFamily.PHI

    def test_unitaries(self):
        for corrections in all_correction_sets():
            for outcome in BellLabel:
                u = corrections.unitary(outcome)
                assert np.allclose(u @ u.conj().T, np.eye(2))
            # Outcome equal to the assumed resource needs no correction
            assert np.allclose(corrections.unitary(corrections.label), np.eye(2))

    def test_tables_are_read_only(self):
        u = correction_set(BellLabel.PHI_PLUS).unitary(BellLabel.PSI_PLUS)
        with pytest.raises(ValueError):
            u[0, 0] = 2.0


class TestStates:
    def test_fully_polarized_pair(self):
        rho = rho23_from_correlators(PairCorrelators(1.0, 0.0, 0.0, 1.0))
        assert np.allclose(rho.entries, np.diag([1, 0, 0, 0]))

    def test_uncorrelated_pair(self):
        rho = rho23_from_correlators(PairCorrelators(0.0, 0.0, 0.0, 0.0))
        assert np.allclose(rho.entries, np.eye(4) / 4)

    def test_unphysical_pair(self):
        c = PairCorrelators(0.0, -1.0, -1.0, 1.0)
        assert not c.is_physical()
        with pytest.raises(UnphysicalCorrelatorsError):
            rho23_from_correlators(c)

    def test_correlator_range(self):
        with pytest.raises(UnphysicalCorrelatorsError):
            PairCorrelators(1.5, 0.0, 0.0, 0.0)
        with pytest.raises(UnphysicalCorrelatorsError):
            PairCorrelators(0.0, float("nan"), 0.0, 0.0)

    def test_single_site_state(self):
        assert np.allclose(rho1_from_z(1.0).entries, np.diag([1, 0]))
        assert np.allclose(rho1_from_z(0.0).entries, np.eye(2) / 2)
        with pytest.raises(UnphysicalCorrelatorsError):
            rho1_from_z(1.5)

    def test_provenance_does_not_affect_equality(self):
        from core.teleport import Provenance
        tagged = PRODUCT_HALF.with_provenance(Provenance("ed", 12))
        assert tagged == PRODUCT_HALF
        assert tagged.provenance.chain_length == 12


class TestEngine:
    def test_ideal_teleportation(self, rng):
        rho1 = random_density_matrix(1, rng)
        for label in BellLabel:
            outcomes = teleport_engine(rho1, bell_projector(label), correction_set(label))
            assert [o.probability for o in outcomes] == pytest.approx([0.25] * 4, abs=1e-12)
            for outcome in outcomes:
                assert uhlmann_fidelity(rho1, outcome.bob_state) == pytest.approx(1.0, abs=1e-12)
                assert trace_distance(rho1, outcome.bob_state) <= 1e-12

    def test_outcome_probabilities(self):
        c = PairCorrelators(0.6, 0.0, 0.0, 0.36)
        outcomes = teleport_engine(rho1_from_z(c.z), rho23_from_correlators(c), correction_set(BellLabel.PHI_PLUS))
        expected = outcome_probabilities(c.z)
        assert expected[SetFamily.PSI] == pytest.approx(0.16)
        assert expected[SetFamily.PHI] == pytest.approx(0.34)
        for outcome in outcomes:
            family = SetFamily.PSI if outcome.j.is_psi else SetFamily.PHI
            assert outcome.probability == pytest.approx(expected[family], abs=1e-12)
        assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)

    def test_bob_state_matches_closed_form(self):
        c = PRODUCT_HALF
        outcomes = teleport_engine(rho1_from_z(c.z), rho23_from_correlators(c), correction_set(BellLabel.PHI_PLUS))
        phi = next(o for o in outcomes if o.j is BellLabel.PHI_PLUS)
        assert np.allclose(phi.bob_state.entries, np.diag([0.75, 0.25]), atol=1e-12)
        closed = bob_output_closed_form(c, BellLabel.PHI_PLUS, SetFamily.PHI)
        assert np.allclose(closed.entries, np.diag([0.75, 0.25]), atol=1e-12)

    def test_zero_probability_outcomes_carry_no_state(self):
        c = PairCorrelators(1.0, 0.0, 0.0, 1.0)
        outcomes = teleport_engine(rho1_from_z(1.0), rho23_from_correlators(c), correction_set(BellLabel.PHI_PLUS))
        for outcome in outcomes:
            assert outcome.degenerate is outcome.j.is_psi
        with pytest.raises(DegenerateOutcomeError):
            bob_output_closed_form(c, BellLabel.PSI_PLUS, SetFamily.PHI)

    def test_engine_agrees_with_closed_forms(self):
        rng = np.random.default_rng(7)
        for c in sample_correlators(rng, 1000):
            for label in BellLabel:
                corrections = correction_set(label)
                assert abs(mean_fidelity(c, corrections, "engine") - mean_fidelity(c, corrections)) <= 1e-10
                assert abs(mean_trace_distance(c, corrections, "engine")
                           - mean_trace_distance(c, corrections)) <= 1e-10


class TestEfficiencies:
    def test_reference_values(self):
        assert mean_fidelity(PRODUCT_HALF, SetFamily.PHI) == pytest.approx(0.90625, abs=1e-12)
        assert mean_fidelity(PRODUCT_HALF, SetFamily.PSI) == pytest.approx(0.84375, abs=1e-12)
        assert mean_trace_distance(PRODUCT_HALF, SetFamily.PHI) == pytest.approx(0.1875, abs=1e-12)

    def test_reference_values_from_engine(self):
        assert mean_fidelity(PRODUCT_HALF, BellLabel.PHI_MINUS, "engine") == pytest.approx(0.90625, abs=1e-10)
        assert mean_fidelity(PRODUCT_HALF, BellLabel.PSI_MINUS, "engine") == pytest.approx(0.84375, abs=1e-10)
        assert mean_trace_distance(PRODUCT_HALF, BellLabel.PHI_PLUS, "engine") == pytest.approx(0.1875, abs=1e-10)

    def test_uncorrelated_input_is_perfect(self):
        c = PairCorrelators(0.0, 0.3, -0.2, 0.1)
        assert f_max(c) == (pytest.approx(1.0, abs=1e-12), SetFamily.PHI)
        assert d_min(c)[0] == pytest.approx(0.0, abs=1e-12)

    def test_fully_polarized_input(self):
        c = PairCorrelators(1.0, 0.0, 0.0, 1.0)
        assert mean_fidelity(c, SetFamily.PHI) == pytest.approx(1.0, abs=1e-12)
        assert mean_trace_distance(c, SetFamily.PHI) == pytest.approx(0.0, abs=1e-12)
        assert mean_fidelity(c, SetFamily.PHI, "engine") == pytest.approx(1.0, abs=1e-10)

    def test_optimum_over_sets(self):
        assert f_max(PRODUCT_HALF) == (pytest.approx(0.90625), SetFamily.PHI)
        assert d_min(PRODUCT_HALF) == (pytest.approx(0.1875), SetFamily.PHI)

    def test_efficiencies_are_even_in_z(self, rng):
        flipped = PairCorrelators(-0.5, 0.0, 0.0, 0.25)
        assert f_max(flipped) == (pytest.approx(0.90625), SetFamily.PHI)
        assert d_min(flipped) == (pytest.approx(0.1875), SetFamily.PHI)
        assert mean_fidelity(flipped, SetFamily.PSI, "engine") == pytest.approx(0.84375, abs=1e-10)
        for c in sample_correlators(rng, 200):
            mirrored = PairCorrelators(-c.z, c.xx, c.yy, c.zz)
            for family in SetFamily:
                assert mean_fidelity(mirrored, family) == pytest.approx(mean_fidelity(c, family), abs=1e-12)
                assert mean_trace_distance(mirrored, family) == pytest.approx(
                    mean_trace_distance(c, family), abs=1e-12)
            assert f_max(mirrored)[1] is f_max(c)[1]
            assert d_min(mirrored)[1] is d_min(c)[1]

    def test_two_point_functions_do_not_matter(self, rng):
        for c in sample_correlators(rng, 200):
            shifted = PairCorrelators(c.z, c.xx / 2, c.yy / 2, c.zz)
            assert f_max(c)[0] == pytest.approx(f_max(shifted)[0], abs=1e-12)
            assert d_min(c)[0] == pytest.approx(d_min(shifted)[0], abs=1e-12)

    def test_d_min_single_expression(self, rng):
        for c in sample_correlators(rng, 500):
            assert d_min(c)[0] == pytest.approx(closed_form_d_min(c.z, c.zz), abs=1e-12)

    def test_efficiencies_within_bounds(self, rng):
        for c in sample_correlators(rng, 500):
            for family in SetFamily:
                assert -1e-12 <= mean_fidelity(c, family) <= 1.0 + 1e-12
                assert -1e-12 <= mean_trace_distance(c, family) <= 1.0 + 1e-12


class TestSignAnalysis:
    def test_psi_region(self):
        analysis = sign_analysis(PairCorrelators(0.6, 0.0, 0.0, -0.5))
        assert analysis.region is RegionLabel.PSI
        assert analysis.value == pytest.approx(0.408, abs=1e-12)
        assert analysis.cubic_sign == 1 and analysis.z_sign == 1

    def test_phi_above_region(self):
        analysis = sign_analysis(PairCorrelators(0.6, 0.0, 0.0, 0.5))
        assert analysis.region is RegionLabel.PHI_ABOVE
        assert analysis.value == pytest.approx(0.192, abs=1e-12)
        assert analysis.cubic_sign == -1

    def test_phi_below_region(self):
        c = PairCorrelators(0.6, 0.0, 0.0, 0.1)
        analysis = sign_analysis(c)
        assert analysis.region is RegionLabel.PHI_BELOW
        assert analysis.value == pytest.approx(closed_form_d_min(c.z, c.zz), abs=1e-12)

    def test_zero_region(self):
        analysis = sign_analysis(PairCorrelators(0.0, 0.0, 0.0, 0.4))
        assert analysis.region is RegionLabel.ZERO
        assert analysis.value == 0.0

    def test_boundary_branches_agree(self):
        z = 0.7
        on_boundary = PairCorrelators(z, 0.0, 0.0, z * z)
        assert sign_analysis(on_boundary).value == pytest.approx(z * (1 - z * z) / 2, abs=1e-12)
        assert z * (1 - on_boundary.zz) / 2 == pytest.approx(z * (1 - z * z) / 2, abs=1e-12)

    def test_branches_match_single_expression(self, rng):
        for c in sample_correlators(rng, 500):
            assert sign_analysis(c).value == pytest.approx(closed_form_d_min(c.z, c.zz), abs=1e-12)


def test_samples_are_physical(rng):
    samples = sample_correlators(rng, 100)
    assert len(samples) == 100
    assert all(c.is_physical(tol=0.0) for c in samples)
