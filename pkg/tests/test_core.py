import json
import math

import numpy as np
import pytest

from epizootic import (CenterSpec, CenterState, EnvironmentGraph, ModelParams,
                       ParamRanges, ValidationError, load_graph, sample_params,
                       save_graph, validate_state)
from epizootic.core import (DEFAULT_RANGES, OMEGA_HOURLY,
                            waning_rate_from_annual_fraction)

TABLE_POINTS = {"beta": 0.15, "phi": 5.9e-3, "gamma": 9.9e-4,
                "nu": 1.4e-5, "m": 0.017, "c": 7.9e-3}


def degenerate_ranges():
    intervals = {k: (v, v) for k, v in TABLE_POINTS.items()}
    intervals.update({"rho": (0.30, 0.30), "vaccine_lifetime": (420.0, 420.0),
                      "omega": (OMEGA_HOURLY, OMEGA_HOURLY)})
    return ParamRanges(intervals)


class TestSampleParams:
    def test_degenerate_intervals_reproduce_point_values(self):
        params = sample_params(degenerate_ranges(), rng_seed=1)
        assert params.beta == 0.15
        assert params.phi == 5.9e-3
        assert params.gamma == 9.9e-4
        assert params.nu_s == params.nu_e == params.nu_i == 1.4e-5
        assert params.m_s == params.m_e == params.m_i == 0.017
        assert params.c_s == params.c_e == params.c_i == 7.9e-3
        assert params.rho_s == 0.30
        assert params.vaccine_lifetime == 420.0
        assert params.omega == OMEGA_HOURLY

    def test_degenerate_beta_is_seed_independent(self):
        ranges = ParamRanges({"beta": (0.15, 0.15)})
        a = sample_params(ranges, rng_seed=1)
        b = sample_params(ranges, rng_seed=999)
        assert a.beta == b.beta == 0.15

    def test_kappa_uniform_mean_matches_law_of_large_numbers(self):
        # Independent oracle: mean of U[20, 150] is (20 + 150) / 2 = 85.
        ranges = ParamRanges()
        rng = np.random.default_rng(7)
        draws = [ranges.draw("kappa", rng) for _ in range(10_000)]
        assert abs(np.mean(draws) - 85.0) / 85.0 < 0.05

    def test_same_seed_same_params(self):
        ranges = ParamRanges()
        assert sample_params(ranges, 123) == sample_params(ranges, 123)

    def test_draws_stay_inside_intervals(self):
        ranges = ParamRanges({"rho": (0.10, 0.50),
                              "vaccine_lifetime": (120.0, 720.0)})
        for seed in range(200):
            params = sample_params(ranges, seed)
            assert 0.10 <= params.rho_s <= 0.50
            assert 120.0 <= params.vaccine_lifetime <= 720.0

    def test_family_draw_is_shared_and_overridable(self):
        params = sample_params(ParamRanges({"rho": (0.1, 0.5)}), 5)
        assert params.rho_s == params.rho_e == params.rho_i
        params = sample_params(
            ParamRanges({"m_i": (0.002, 0.002)}), 5)
        assert params.m_s == params.m_e == 0.017
        assert params.m_i == 0.002

    def test_bad_interval_rejected(self):
        with pytest.raises(ValidationError):
            ParamRanges({"beta": (0.2, 0.1)})


class TestValidateState:
    def make_graph(self):
        return EnvironmentGraph([CenterSpec(kappa=50, lam=1.0, xi=100.0)], [])

    def test_all_zero_state_is_ok(self):
        graph = self.make_graph()
        assert validate_state([CenterState()], graph) == []

    def test_negative_compartment_reported_with_center(self):
        graph = self.make_graph()
        violations = validate_state([CenterState(S=-1.0)], graph)
        assert len(violations) == 1
        assert "S" in violations[0] and "0" in violations[0]

    def test_food_over_cap_reported(self):
        graph = self.make_graph()
        violations = validate_state([CenterState(F=101.0)], graph)
        assert violations and "cap" in violations[0]

    def test_length_mismatch_is_usage_error(self):
        graph = self.make_graph()
        with pytest.raises(ValueError):
            validate_state([CenterState(), CenterState()], graph)

    def test_center_state_population(self):
        st = CenterState(S=1, E=2, I=3, V=4)
        assert st.J == 10


class TestEnvironmentGraph:
    def test_needs_at_least_one_center(self):
        with pytest.raises(ValidationError):
            EnvironmentGraph([], [])

    def test_rejects_self_edges_and_bad_endpoints(self):
        center = CenterSpec(kappa=10, lam=0.1, xi=1.0)
        with pytest.raises(ValidationError):
            EnvironmentGraph([center], [(0, 0)])
        with pytest.raises(ValidationError):
            EnvironmentGraph([center, center], [(0, 5)])

    def test_neighbors_and_edge_scale(self, three_chain_graph):
        assert three_chain_graph.neighbors(1) == [0, 2]
        assert three_chain_graph.edge_scale(0, 1) == 1.0

    def test_roundtrip_through_dict(self, three_chain_graph):
        clone = EnvironmentGraph.from_dict(three_chain_graph.to_dict())
        assert clone.edges == three_chain_graph.edges
        assert [c.kappa for c in clone.centers] == \
               [c.kappa for c in three_chain_graph.centers]

    def test_file_roundtrip(self, tmp_path, two_center_graph):
        path = tmp_path / "graph.json"
        save_graph(two_center_graph, path)
        clone = load_graph(path)
        assert clone.to_dict() == two_center_graph.to_dict()

    def test_edge_scale_roundtrip(self):
        graph = EnvironmentGraph(
            [CenterSpec(kappa=10, lam=0.1, xi=1.0),
             CenterSpec(kappa=10, lam=0.1, xi=1.0, centroid=(1.0, 0.0))],
            [(0, 1)], edge_scales={(0, 1): 2.5})
        clone = EnvironmentGraph.from_dict(graph.to_dict())
        assert clone.edge_scale(0, 1) == 2.5

    def test_duplicate_or_gapped_ids_rejected(self):
        base = {"kappa": 10, "lambda": 0.1, "xi": 1.0}
        with pytest.raises(ValidationError):
            EnvironmentGraph.from_dict(
                {"centers": [dict(id=0, **base), dict(id=2, **base)],
                 "edges": []})

    def test_center_spec_validation(self):
        with pytest.raises(ValidationError):
            CenterSpec(kappa=0, lam=0.1, xi=1.0)
        with pytest.raises(ValidationError):
            CenterSpec(kappa=10, lam=-0.1, xi=1.0)
        with pytest.raises(ValidationError):
            CenterSpec(kappa=10, lam=0.1, xi=0.0)


class TestModelParams:
    def test_defaults_match_fitted_values(self):
        p = ModelParams()
        assert (p.beta, p.phi, p.gamma) == (0.15, 5.9e-3, 9.9e-4)
        assert p.T == 8760.0 and p.dt == 1.0

    def test_waning_rate_conversion(self):
        omega = waning_rate_from_annual_fraction(0.28)
        assert math.isclose(1.0 - math.exp(-omega * 8760.0), 0.28)
        assert math.isclose(omega, 3.75e-5, rel_tol=2e-3)
        assert ModelParams().omega == OMEGA_HOURLY

    def test_vaccinated_move_at_susceptible_rate_by_default(self):
        assert ModelParams().vaccinated_movement == 0.017
        assert ModelParams(m_v=0.03).vaccinated_movement == 0.03

    def test_rejects_negative_rates_and_bad_steps(self):
        with pytest.raises(ValidationError):
            ModelParams(beta=-0.1)
        with pytest.raises(ValidationError):
            ModelParams(dt=0.0)
        with pytest.raises(ValidationError):
            ModelParams(T=0.5, dt=1.0)

    def test_default_ranges_cover_fitted_table(self):
        assert DEFAULT_RANGES["kappa"] == (20.0, 150.0)
        assert DEFAULT_RANGES["rho"] == (0.10, 0.50)
        assert DEFAULT_RANGES["vaccine_lifetime"] == (120.0, 720.0)
