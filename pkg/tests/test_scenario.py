"""Topology synthesis geometry, trace profiles, demand splitting, fixtures."""

import math

import numpy as np
import pytest

from d2dlb.model import ModelError, instance_to_json
from d2dlb.no_d2d import min_spectrum_no_d2d
from d2dlb.scenario import (
    TRACE_EPOCH,
    GeoParams,
    TraceRecord,
    fixture,
    generate_topology,
    random_multicell_instance,
    read_trace_csv,
    shannon_rate,
    synthesize_demands,
    synthesize_trace,
    write_trace_csv,
)

TRI_SITES = [(0.0, 0.0), (450.0, 0.0), (225.0, 390.0)]


class TestShannonRates:
    def test_cell_edge_rate(self):
        assert shannon_rate(300.0, GeoParams()) == pytest.approx(12.06, abs=5e-3)

    def test_d2d_range_rate(self):
        assert shannon_rate(30.0, GeoParams()) == pytest.approx(23.7, abs=2e-2)

    def test_monotone_in_distance(self):
        params = GeoParams()
        rates = [shannon_rate(d, params) for d in (10, 50, 100, 200, 300)]
        assert rates == sorted(rates, reverse=True)


class TestGenerateTopology:
    def test_geometry_respected(self):
        params = GeoParams(users_per_cell=15, seed=3)
        topo = generate_topology(TRI_SITES, params)
        for u in topo.user_ids:
            home = topo.home_bs[u]
            assert math.dist(topo.positions[u], topo.positions[home]) <= params.cell_radius_m
        for (u, v), _ in topo.rate_map.items():
            limit = params.cell_radius_m if topo.is_bs(v) else params.d2d_range_m
            assert math.dist(topo.positions[u], topo.positions[v]) <= limit + 1e-9

    def test_every_user_has_home_uplink(self):
        topo = generate_topology(TRI_SITES, GeoParams(users_per_cell=10, seed=5))
        for u in topo.user_ids:
            assert (u, topo.home_bs[u]) in topo.rate_map

    def test_far_cells_have_no_inter_cell_d2d(self):
        params = GeoParams(users_per_cell=25, seed=11)
        topo = generate_topology([(0.0, 0.0), (700.0, 0.0)], params)
        for (u, v), _ in topo.rate_map.items():
            if not topo.is_bs(v):
                assert topo.home_bs[u] == topo.home_bs[v]

    def test_same_seed_same_topology(self):
        a = generate_topology(TRI_SITES, GeoParams(users_per_cell=8, seed=9))
        b = generate_topology(TRI_SITES, GeoParams(users_per_cell=8, seed=9))
        assert a == b

    def test_duplicate_positions_rejected(self):
        with pytest.raises(ModelError):
            generate_topology([(0.0, 0.0), (0.0, 0.0)], GeoParams())


class TestTraces:
    def test_uniform_profile_is_constant(self):
        rng = np.random.default_rng(0)
        records = synthesize_trace(["c1", "c2"], 1, "uniform", rng, windows_per_day=8, base_volume=7.5)
        assert len(records) == 16
        assert all(r.volume_bits == 7.5 for r in records)

    def test_opposite_phases_decorrelate(self):
        rng = np.random.default_rng(1)
        records = synthesize_trace(
            ["c1", "c2"], 2, "diurnal-offset", rng, windows_per_day=24,
            phases=[0.0, math.pi],
        )
        series = {c: [r.volume_bits for r in records if r.cell_id == c] for c in ("c1", "c2")}
        corr = np.corrcoef(series["c1"], series["c2"])[0, 1]
        assert corr < 0.2

    def test_seed_reproducibility(self):
        a = synthesize_trace(["c"], 1, "bursty", np.random.default_rng(4), windows_per_day=12)
        b = synthesize_trace(["c"], 1, "bursty", np.random.default_rng(4), windows_per_day=12)
        assert a == b

    def test_csv_round_trip(self, tmp_path):
        records = synthesize_trace(["c1"], 1, "uniform", np.random.default_rng(0), windows_per_day=4)
        path = tmp_path / "trace.csv"
        write_trace_csv(records, str(path))
        loaded = read_trace_csv(str(path))
        assert loaded == records
        header = path.read_text().splitlines()[0]
        assert header == "timestamp,cell_id,volume_bits"

    def test_negative_volume_rejected(self):
        with pytest.raises(ModelError):
            TraceRecord(TRACE_EPOCH, "c", -1.0)


class TestDemandSynthesis:
    def setup_method(self):
        self.topology = generate_topology(TRI_SITES, GeoParams(users_per_cell=5, seed=2))

    def test_equal_splits_special_case(self):
        rng = np.random.default_rng(0)
        records = [TraceRecord(TRACE_EPOCH, "b1", 120.0)]
        demands = synthesize_demands(records, self.topology, rng, splits=120, slot_seconds=2.0)
        assert len(demands.demands) == 120
        assert float(demands.total_volume) == pytest.approx(120.0, rel=1e-12)

    def test_pro_rata_conservation(self):
        rng = np.random.default_rng(6)
        records = synthesize_trace(
            ["b1", "b2", "b3"], 1, "diurnal-offset", rng, windows_per_day=6, base_volume=40.0
        )
        demands = synthesize_demands(records, self.topology, np.random.default_rng(8), splits=7)
        total_trace = sum(r.volume_bits for r in records)
        assert float(demands.total_volume) == pytest.approx(total_trace, rel=1e-9)

    def test_deadlines_stay_inside_horizon(self):
        rng = np.random.default_rng(10)
        records = synthesize_trace(["b1"], 1, "uniform", rng, windows_per_day=4)
        demands = synthesize_demands(records, self.topology, np.random.default_rng(3), splits=50)
        assert all(j.end <= demands.horizon for j in demands.demands)

    def test_fixed_seed_identical_serialization(self):
        records = synthesize_trace(["b1", "b2"], 1, "bursty", np.random.default_rng(5), windows_per_day=4)
        one = synthesize_demands(records, self.topology, np.random.default_rng(12), splits=5)
        two = synthesize_demands(records, self.topology, np.random.default_rng(12), splits=5)
        assert instance_to_json(self.topology, one) == instance_to_json(self.topology, two)

    def test_zero_volume_window_yields_no_demands(self):
        records = [TraceRecord(TRACE_EPOCH, "b1", 0.0)]
        demands = synthesize_demands(records, self.topology, np.random.default_rng(0))
        assert len(demands.demands) == 0


class TestFixtures:
    def test_toy_values(self):
        topology, demands = fixture("toy-fig1")
        nd_result, _, _ = min_spectrum_no_d2d(topology, demands)
        assert float(nd_result.total) == pytest.approx(6.0)
        assert len(topology.user_ids) == 4
        assert demands.max_delay == 2

    def test_six_task_step_one(self):
        topology, demands = fixture("heuristic-appF")
        nd_result, _, _ = min_spectrum_no_d2d(topology, demands)
        assert nd_result.per_bs_peak == {"b1": 40.0, "b2": 40.0}
        assert [float(j.volume) for j in demands.demands] == [20, 20, 80, 80, 20, 20]

    def test_parameterized_names(self):
        topo_ring, dem_ring = fixture("ring(3)")
        assert len(topo_ring.bs_ids) == 5
        topo_k, dem_k = fixture("complete(4,2)")
        assert len(topo_k.bs_ids) == 4
        topo_f3, dem_f3 = fixture("intra-fig3(2.0,4,8.0)")
        assert len(topo_f3.user_ids) == 2
        assert float(dem_f3.demands[0].volume) == 8.0

    def test_complete_two_two_matches_toy_metrics(self):
        from d2dlb.bounds import build_complete_instance

        inst = build_complete_instance(2, 2, volume=6)
        assert float(inst.spectrum_reduction) == pytest.approx(1 / 3)
        assert float(inst.overhead_ratio) == pytest.approx(1 / 4)

    def test_unknown_fixture(self):
        with pytest.raises(ModelError):
            fixture("nonsense")


class TestRandomInstance:
    def test_determinism(self):
        a = random_multicell_instance(np.random.default_rng(3), 3, 2, 10, 12)
        b = random_multicell_instance(np.random.default_rng(3), 3, 2, 10, 12)
        assert instance_to_json(*a) == instance_to_json(*b)
