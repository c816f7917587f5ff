import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epizootic import (CenterSpec, CenterState, DilutionSchedule,
                       EipConfiguration, EnvironmentGraph, ModelParams,
                       VaccinationSchedule, ValidationError, dirac_allocation,
                       food_production, integrate, movement_flux, rhs)

NO_EIP = EipConfiguration()


def single_center(kappa=20.0, lam=1.0, xi=100.0):
    return EnvironmentGraph([CenterSpec(kappa=kappa, lam=lam, xi=xi)], [])


class TestMovementFlux:
    def test_hand_evaluated_flux(self):
        # 0.017 * 10 * (20 - 10) / (5 * 20) = 0.017
        assert math.isclose(
            movement_flux(0.017, 10.0, F_dest=20.0, F_source=10.0,
                          J_dest=5.0), 0.017)

    def test_zero_gradient_means_zero_flux(self):
        assert movement_flux(0.017, 10.0, 15.0, 15.0, 5.0) == 0.0

    def test_downhill_clamps_to_zero(self):
        assert movement_flux(0.017, 10.0, F_dest=5.0, F_source=10.0,
                             J_dest=5.0) == 0.0

    def test_degenerate_denominators_guarded(self):
        assert movement_flux(0.017, 10.0, F_dest=0.0, F_source=0.0,
                             J_dest=5.0) == 0.0
        assert movement_flux(0.017, 10.0, F_dest=20.0, F_source=10.0,
                             J_dest=0.0) == 0.0

    @given(st.floats(0.1, 50.0), st.floats(0.1, 50.0), st.floats(0.1, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_food_levels_on_positive_branch(self, fd, fs, step):
        base = movement_flux(0.017, 10.0, fd, fs, 5.0)
        richer_dest = movement_flux(0.017, 10.0, fd + step, fs, 5.0)
        richer_source = movement_flux(0.017, 10.0, fd, fs + step, 5.0)
        assert richer_dest >= base - 1e-12
        assert richer_source <= base + 1e-12


class TestFoodProduction:
    def test_below_cap_produces(self):
        assert food_production(50.0, lam=1.0, xi=100.0) == 1.0

    def test_at_cap_stops(self):
        assert food_production(100.0, lam=1.0, xi=100.0) == 0.0

    def test_zero_rate(self):
        assert food_production(50.0, lam=0.0, xi=100.0) == 0.0


class TestDiracAllocation:
    def test_exact_hit(self):
        assert dirac_allocation(100.0, [(100.0, 50.0)]) == 50.0

    def test_miss(self):
        assert dirac_allocation(99.0, [(100.0, 50.0)]) == 0.0

    def test_simultaneous_drops_add(self):
        assert dirac_allocation(100.0, [(100.0, 50.0), (100.0, 25.0)]) == 75.0

    def test_bucket_covers_step_interval(self):
        assert dirac_allocation(100.0, [(100.7, 5.0)], dt=1.0) == 5.0
        assert dirac_allocation(100.0, [(101.0, 5.0)], dt=1.0) == 0.0

    @given(st.lists(st.tuples(st.floats(0, 50), st.floats(0, 10)),
                    max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_additive_over_schedule_split(self, schedule):
        t = 10.0
        whole = dirac_allocation(t, schedule)
        half = (dirac_allocation(t, schedule[:2])
                + dirac_allocation(t, schedule[2:]))
        assert math.isclose(whole, half, abs_tol=1e-9)


class TestRhs:
    def test_logistic_growth_only(self):
        graph = single_center(kappa=20.0, lam=1.0, xi=100.0)
        params = ModelParams(nu_s=0.0, nu_e=0.0, nu_i=0.0, c_s=0.0, c_e=0.0,
                             c_i=0.0)
        state = [CenterState(S=10.0, F=1.0)]
        deriv = rhs(state, graph, params, NO_EIP, t=0.0, temperature=20.0)
        # F*S*(1 - J/kappa) = 1 * 10 * (1 - 10/20) = 5
        assert math.isclose(deriv.dS[0], 5.0)
        assert deriv.dE[0] == deriv.dI[0] == deriv.dV[0] == 0.0
        assert math.isclose(deriv.dF[0], 1.0)  # production below cap

    def test_infection_flow_moves_s_to_e(self):
        graph = single_center(kappa=1000.0)
        params = ModelParams(beta=0.15, nu_s=0.0, nu_e=0.0, nu_i=0.0,
                             phi=0.0, gamma=0.0, c_s=0.0, c_e=0.0, c_i=0.0)
        state = [CenterState(S=10.0, I=2.0, F=0.0)]
        deriv = rhs(state, graph, params, NO_EIP, 0.0, 20.0)
        assert math.isclose(deriv.dS[0], -3.0)
        assert math.isclose(deriv.dE[0], 3.0)

    def test_empty_center_has_zero_compartment_derivatives(self):
        graph = EnvironmentGraph(
            [CenterSpec(kappa=50, lam=1.0, xi=10.0, centroid=(0, 0)),
             CenterSpec(kappa=50, lam=0.5, xi=10.0, centroid=(5, 0))],
            [(0, 1)])
        state = [CenterState(S=30.0, I=1.0, F=8.0), CenterState(F=1.0)]
        deriv = rhs(state, graph, ModelParams(), NO_EIP, 0.0, 20.0)
        assert deriv.dS[1] == deriv.dE[1] == deriv.dI[1] == deriv.dV[1] == 0.0
        assert deriv.dF[1] > 0.0  # food still regenerates

    def test_invalid_state_raises_with_violations(self):
        graph = single_center()
        with pytest.raises(ValidationError) as err:
            rhs([CenterState(S=-5.0)], graph, ModelParams(), NO_EIP, 0, 20.0)
        assert any("negative S" in v for v in err.value.violations)

    def test_waning_moves_v_to_s_conserving_their_sum(self):
        graph = single_center()
        params = ModelParams(beta=0.0, phi=0.0, gamma=0.0, nu_s=0.0,
                             nu_e=0.0, nu_i=0.0, c_s=0.0, c_e=0.0, c_i=0.0)
        state = [CenterState(S=5.0, V=10.0, F=0.0)]
        deriv = rhs(state, graph, params, NO_EIP, 0.0, 20.0)
        assert deriv.dS[0] > 0.0
        assert math.isclose(deriv.dS[0] + deriv.dV[0], 0.0, abs_tol=1e-15)
        assert math.isclose(deriv.dS[0], params.omega * 10.0)

    def test_infection_term_conserves_population(self):
        """dS+dE+dI+dV sums to zero once deaths and growth are disabled;
        movement telescopes pairwise and uptake/waning shuffle within."""
        rng = np.random.default_rng(42)
        graph = EnvironmentGraph(
            [CenterSpec(kappa=100.0, lam=1.0, xi=10.0, centroid=(i * 3.0, 0))
             for i in range(4)],
            [(0, 1), (1, 2), (2, 3), (0, 2)])
        params = ModelParams(gamma=0.0, nu_s=0.0, nu_e=0.0, nu_i=0.0,
                             c_s=0.0, c_e=0.0, c_i=0.0)
        for _ in range(25):
            state = []
            for _k in range(4):
                s, e, i, v = rng.uniform(0, 40, size=4)
                # J = kappa kills the logistic term while movement stays live.
                scale = 100.0 / (s + e + i + v)
                state.append(CenterState(S=s * scale, E=e * scale,
                                         I=i * scale, V=v * scale,
                                         F=rng.uniform(0.1, 10.0),
                                         C=rng.uniform(0, 50)))
            deriv = rhs(state, graph, params, NO_EIP, 0.0, 20.0)
            total = math.fsum(list(deriv.dS) + list(deriv.dE)
                              + list(deriv.dI) + list(deriv.dV))
            assert abs(total) < 1e-9


class TestIntegrate:
    def test_empty_population_is_absorbing_and_food_fills(self):
        graph = single_center(kappa=20.0, lam=1.0, xi=5.0)
        traj = integrate([CenterState()], graph, ModelParams(), NO_EIP,
                         20.0, horizon=10.0, dt=1.0)
        assert np.all(traj.S == 0) and np.all(traj.I == 0)
        # F climbs by lam*dt per step until the cap.
        assert np.allclose(traj.F[:, 0],
                           np.minimum(np.arange(11.0), 5.0))

    def test_step_halving_agreement_on_smooth_scenario(self, quiet_params):
        # Food frozen (no production, no consumption) keeps every flow
        # continuously differentiable: no cap/floor switching events.
        graph = EnvironmentGraph(
            [CenterSpec(kappa=600.0, lam=0.0, xi=100.0, centroid=(0, 0)),
             CenterSpec(kappa=600.0, lam=0.0, xi=100.0, centroid=(8, 0))],
            [(0, 1)])
        params = quiet_params.with_(c_s=0.0, c_e=0.0, c_i=0.0)
        initial = [CenterState(S=400.0, E=5.0, I=5.0, F=0.3),
                   CenterState(S=300.0, I=2.0, F=0.5)]
        finals = {}
        for dt in (1.0, 0.5):
            traj = integrate(initial, graph, params, NO_EIP, 20.0,
                             horizon=100.0, dt=dt)
            assert traj.final_tally("clamp_events") == 0
            finals[dt] = np.concatenate(
                [traj.S[-1], traj.E[-1], traj.I[-1], traj.V[-1], traj.F[-1]])
        rel = (np.abs(finals[1.0] - finals[0.5])
               / np.maximum(np.abs(finals[0.5]), 1.0))
        assert rel.max() < 1e-2

    def test_no_clamping_on_nominal_scenario(self, quiet_params):
        graph = single_center(kappa=500.0, lam=0.3, xi=2.0)
        traj = integrate([CenterState(S=300.0, I=3.0, F=1.0)], graph,
                         quiet_params, NO_EIP, 20.0, horizon=2000.0, dt=1.0)
        assert traj.final_tally("clamp_events") == 0
        for row in range(0, 2001, 400):
            from epizootic import validate_state

            assert validate_state(traj.state_at(row), graph) == []

    def test_vaccination_never_increases_cumulative_infections(
            self, three_chain_graph, quiet_params):
        initial = [CenterState(S=60.0, I=2.0, F=2.0, C=0.0),
                   CenterState(S=90.0, F=2.0),
                   CenterState(S=40.0, F=2.0)]
        eip = EipConfiguration(vaccination=VaccinationSchedule(
            [(0.0, np.array([60.0, 90.0, 40.0]))]))
        with_vacc = integrate(initial, three_chain_graph, quiet_params, eip,
                              20.0, horizon=3000.0, dt=1.0)
        without = integrate(initial, three_chain_graph,
                            quiet_params.with_(rho_s=0.0, rho_e=0.0,
                                               rho_i=0.0),
                            eip, 20.0, horizon=3000.0, dt=1.0)
        assert (with_vacc.final_tally("infections")
                <= without.final_tally("infections"))

    def test_vaccine_drop_adds_stock_and_dilution_removes_population(self):
        graph = single_center(kappa=200.0, lam=0.0, xi=10.0)
        params = ModelParams(beta=0.0, phi=0.0, gamma=0.0, nu_s=0.0,
                             nu_e=0.0, nu_i=0.0, rho_s=0.0, rho_e=0.0,
                             rho_i=0.0, c_s=0.0, c_e=0.0, c_i=0.0, omega=0.0)
        eip = EipConfiguration(
            vaccination=VaccinationSchedule([(5.0, np.array([40.0]))]),
            dilution=DilutionSchedule([(10.0, np.array([6.0]))]))
        initial = [CenterState(S=30.0, E=6.0, I=12.0, V=12.0, F=0.0)]
        traj = integrate(initial, graph, params, eip, 20.0, horizon=20.0,
                         dt=1.0)
        assert traj.C[5, 0] == 0.0
        assert traj.C[6, 0] > 39.0  # drop lands during step 5, minus decay
        # Cull removes exactly 6 individuals, split 30:6:12:12.
        assert math.isclose(traj.J()[11, 0], 54.0)
        removed = traj.final_tally("diluted")
        assert math.isclose(removed, 6.0)
        assert math.isclose(traj.S[11, 0], 30.0 - 6.0 * 30.0 / 60.0)
        assert math.isclose(traj.final_tally("diluted_infected"),
                            6.0 * 12.0 / 60.0)

    def test_dilution_capped_at_population(self):
        graph = single_center(kappa=100.0, lam=0.0, xi=10.0)
        params = ModelParams(beta=0.0, phi=0.0, gamma=0.0, nu_s=0.0,
                             nu_e=0.0, nu_i=0.0, c_s=0.0, c_e=0.0, c_i=0.0)
        eip = EipConfiguration(dilution=DilutionSchedule(
            [(0.0, np.array([100.0]))]))
        traj = integrate([CenterState(S=10.0, F=0.0)], graph, params, eip,
                         20.0, horizon=5.0, dt=1.0)
        assert math.isclose(traj.final_tally("diluted"), 10.0)
        assert np.all(traj.J()[1:] == 0.0)

    def test_event_at_horizon_applies_to_final_snapshot(self):
        graph = single_center()
        eip = EipConfiguration(vaccination=VaccinationSchedule(
            [(10.0, np.array([7.0]))]))
        traj = integrate([CenterState(S=5.0)], graph, ModelParams(), eip,
                         20.0, horizon=10.0, dt=1.0)
        assert traj.C[-1, 0] == 7.0
        assert traj.C[-2, 0] == 0.0

    def test_dose_accounting_closes(self, quiet_params):
        graph = single_center(kappa=300.0, lam=0.5, xi=5.0)
        eip = EipConfiguration(
            vaccination=VaccinationSchedule([(0.0, np.array([80.0])),
                                             (500.0, np.array([40.0]))]))
        initial = [CenterState(S=100.0, E=10.0, I=10.0, F=2.0)]
        traj = integrate(initial, graph, quiet_params, eip, 20.0,
                         horizon=2000.0, dt=1.0)
        drops = traj.final_tally("dose_drops")
        spent = (traj.final_tally("doses_taken")
                 + traj.final_tally("doses_wasted")
                 + traj.final_tally("dose_decay"))
        residual = traj.C[-1].sum()
        assert drops > 0
        assert abs(drops - (spent + residual)) / drops < 1e-6

    def test_horizon_must_be_step_multiple(self):
        graph = single_center()
        with pytest.raises(ValidationError):
            integrate([CenterState(S=1.0)], graph, ModelParams(), NO_EIP,
                      20.0, horizon=10.5, dt=1.0)

    def test_trajectory_csv_layout(self, tmp_path, two_center_graph):
        initial = [CenterState(S=10.0, F=1.0), CenterState(S=5.0, F=1.0)]
        traj = integrate(initial, two_center_graph, ModelParams(), NO_EIP,
                         20.0, horizon=3.0, dt=1.0)
        path = tmp_path / "traj.csv"
        traj.to_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "center_id", "S", "E", "I", "V", "F", "C"]
        assert len(rows) == 1 + 4 * 2  # header + (steps+1) * centers
        assert rows[1][:2] == ["0.0", "0"]
