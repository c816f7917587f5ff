import math

import numpy as np
import pytest

from epizootic import (DecayModel, DilutionSchedule, EipConfiguration,
                       VaccinationSchedule, ValidationError, decay_rate,
                       dilution_removals, uptake_flow)
from epizootic.eip import per_center_default_eip


class TestDecayRate:
    def test_insensitive_model_is_pure_half_life(self):
        # Half-life arithmetic on the slowest fitted lifetime.
        decay = DecayModel(lifetime=720.0, temperature_sensitivity=0.0)
        for temp in (-10.0, 20.0, 45.0):
            assert math.isclose(decay_rate(temp, decay), math.log(2) / 720.0)
        assert math.isclose(decay_rate(20.0, decay), 9.63e-4, rel_tol=1e-3)

    def test_reference_temperature_gives_base_rate(self):
        decay = DecayModel(lifetime=300.0, reference_temperature=18.0,
                           temperature_sensitivity=0.07)
        assert math.isclose(decay_rate(18.0, decay), math.log(2) / 300.0)

    def test_linear_modifier(self):
        decay = DecayModel(lifetime=120.0, reference_temperature=20.0,
                           temperature_sensitivity=0.05)
        assert math.isclose(decay_rate(30.0, decay),
                            1.5 * math.log(2) / 120.0)

    def test_monotone_nondecreasing_in_temperature(self):
        decay = DecayModel(lifetime=200.0, temperature_sensitivity=0.04)
        temps = np.linspace(-30, 50, 33)
        rates = [decay_rate(t, decay) for t in temps]
        assert all(b >= a for a, b in zip(rates, rates[1:]))

    def test_cold_extreme_floors_at_zero(self):
        decay = DecayModel(lifetime=200.0, temperature_sensitivity=0.1)
        assert decay_rate(-100.0, decay) == 0.0

    def test_default_lifetime_comes_from_params(self):
        decay = DecayModel()  # defers to the sampled lifetime
        assert math.isclose(decay_rate(20.0, decay, default_lifetime=500.0),
                            math.log(2) / 500.0)


class TestUptakeFlow:
    def test_direct_substitution(self):
        assert uptake_flow(C=100, X=10, J=20, rho_x=0.5) == 25.0

    def test_no_stock_no_flow(self):
        assert uptake_flow(C=0, X=10, J=20, rho_x=0.5) == 0.0

    def test_empty_center_guard(self):
        assert uptake_flow(C=100, X=0, J=0, rho_x=0.5) == 0.0


class TestDilutionRemovals:
    def test_proportional_split(self):
        removed = dilution_removals(5, (8, 0, 2, 0))
        assert np.allclose(removed, (4.0, 0.0, 1.0, 0.0))

    def test_zero_cull(self):
        assert np.all(dilution_removals(0, (8, 0, 2, 0)) == 0)

    def test_capped_at_population(self):
        removed = dilution_removals(100, (4, 3, 2, 1))
        assert removed.sum() == 10

    def test_sampled_variant_matches_proportions_in_expectation(self):
        rng = np.random.default_rng(0)
        totals = np.zeros(4)
        for _ in range(4000):
            totals += dilution_removals(5, (8, 0, 2, 0), rng=rng)
        frequencies = totals / 4000
        assert np.allclose(frequencies, (4.0, 0.0, 1.0, 0.0), atol=0.1)

    def test_sampled_never_exceeds_class_counts(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            removed = dilution_removals(7, (3, 1, 4, 2), rng=rng)
            assert np.all(removed >= 0)
            assert np.all(removed <= (3, 1, 4, 2))
            assert removed.sum() == 7

    def test_rejects_negatives(self):
        with pytest.raises(ValidationError):
            dilution_removals(-1, (1, 1, 1, 1))
        with pytest.raises(ValidationError):
            dilution_removals(1, (-1, 1, 1, 1))


class TestSchedules:
    def test_negative_time_rejected(self):
        with pytest.raises(ValidationError):
            VaccinationSchedule([(-1.0, np.array([1.0]))])

    def test_negative_or_fractional_amounts_rejected(self):
        with pytest.raises(ValidationError):
            DilutionSchedule([(0.0, np.array([-2.0]))])
        with pytest.raises(ValidationError):
            VaccinationSchedule([(0.0, np.array([1.5]))])

    def test_events_sorted_by_time(self):
        sched = VaccinationSchedule([(10.0, np.array([1.0])),
                                     (5.0, np.array([2.0]))])
        assert [tau for tau, _ in sched.events] == [5.0, 10.0]

    def test_event_order_must_permute_both_kinds(self):
        with pytest.raises(ValidationError):
            EipConfiguration(event_order=("vaccination",))
        flipped = EipConfiguration(event_order=("dilution", "vaccination"))
        assert flipped.event_order == ("dilution", "vaccination")

    def test_horizon_and_center_count_checks(self):
        eip = EipConfiguration(
            vaccination=VaccinationSchedule([(100.0, np.array([1.0, 2.0]))]))
        eip.validate_against_horizon(200.0)
        with pytest.raises(ValidationError):
            eip.validate_against_horizon(50.0)
        eip.check_center_count(2)
        with pytest.raises(ValidationError):
            eip.check_center_count(3)

    def test_dict_roundtrip(self):
        eip = EipConfiguration(
            vaccination=VaccinationSchedule([(0.0, np.array([5.0, 0.0]))]),
            dilution=DilutionSchedule([(24.0, np.array([1.0, 1.0]))]),
            decay=DecayModel(lifetime=240.0, temperature_sensitivity=0.02))
        clone = EipConfiguration.from_dict(eip.to_dict())
        assert clone.to_dict() == eip.to_dict()


class TestDefaultPolicy:
    def test_default_budgets_are_exact(self):
        eip = per_center_default_eip([100, 60], vaccinate=True, dilute=True)
        (tau_v, doses), = eip.vaccination.events
        (tau_d, removals), = eip.dilution.events
        assert tau_v == tau_d == 0.0
        assert doses.tolist() == [100.0, 60.0]          # 1 dose/individual
        assert removals.tolist() == [5.0, 3.0]          # 5% cull
