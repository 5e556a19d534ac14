import math

import pytest

from evograph.closedform import moran_fixation
from evograph.dynamics import Placement, Rule, SimConfig
from evograph.exactchain import exact_fixation
from evograph.montecarlo import (
    estimate_fixation,
    estimate_one_to_two,
    wilson_interval,
)
from evograph.rng import StreamRNG, stream_key
from evograph.topology import SuperstarSpec, build_family, build_superstar


class TestWilson:
    def test_basic_containment(self):
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi
        assert 0.4 < lo and hi < 0.6

    def test_zero_successes_lower_bound_is_zero(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0
        assert 0 < hi < 0.05

    def test_full_successes_upper_bound_is_one(self):
        lo, hi = wilson_interval(100, 100)
        assert hi == 1.0 and lo > 0.95

    def test_interval_shrinks_with_trials(self):
        widths = []
        for n in (100, 1000, 10000):
            lo, hi = wilson_interval(n // 2, n)
            widths.append(hi - lo)
        assert widths[0] > widths[1] > widths[2]

    def test_calibration_on_synthetic_bernoulli(self):
        # nominal 95% interval covers p in >= 93% of meta-trials
        p = 0.3
        n = 200
        covered = 0
        for i in range(1000):
            rng = StreamRNG(stream_key(31337, i))
            successes = sum(rng.random() < p for _ in range(n))
            lo, hi = wilson_interval(successes, n)
            covered += lo <= p <= hi
        assert covered >= 930

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(7, 5)


class TestEstimateFixation:
    def test_reproducible_reports(self):
        g = build_family("complete", 5)
        cfg = SimConfig(r=2, seed=11)
        a = estimate_fixation(g, cfg, 2000)
        b = estimate_fixation(g, cfg, 2000)
        assert a == b  # wall clock excluded from equality

    def test_raw_engine_matches_reference_bitwise(self):
        g = build_family("star", 6)
        cfg = SimConfig(r=2, rule=Rule.Db, seed=5)
        fast = estimate_fixation(g, cfg, 300, engine="raw")
        ref = estimate_fixation(g, cfg, 300, engine="reference")
        assert fast.successes == ref.successes
        assert fast.steps_total == ref.steps_total

    def test_matches_exact_on_k6(self):
        g = build_family("complete", 6)
        cfg = SimConfig(r=2, seed=13)
        rep = estimate_fixation(g, cfg, 100_000)
        lo, hi = wilson_interval(rep.successes, rep.effective_trials, z=4.0)
        assert lo <= moran_fixation(2, 6) <= hi

    def test_circulations_match_unstructured_formula_3_sigma(self):
        # Bd on circulations reproduces the unstructured fixation formula
        for kind, n in (("complete", 6), ("directed_cycle", 5)):
            g = build_family(kind, n)
            for r in (0.5, 1.0, 2.0):
                rep = estimate_fixation(g, SimConfig(r=r, seed=int(100 * r)), 100_000)
                lo, hi = wilson_interval(rep.successes, rep.effective_trials, z=3.0)
                assert lo <= moran_fixation(r, n) <= hi, (kind, n, r)

    def test_neutral_cycle_each_start_fixes_one_over_n(self):
        # symmetry: condition on the starting node, each fixes w.p. 1/N
        from evograph import _fastpath
        from evograph.dynamics import PLACEMENT_CODES, RULE_CODES, compile_graph

        g = build_family("directed_cycle", 5)
        cg = compile_graph(g)
        res, _, init, _ = _fastpath.simulate_batch(
            cg.out_indptr, cg.out_idx, cg.out_w, cg.out_cum,
            cg.in_indptr, cg.in_src, cg.in_w, cg.in_cum, cg.in_total,
            5, 1.0, RULE_CODES[Rule.Bd], PLACEMENT_CODES[Placement.uniform_node],
            cg.reservoir_ids, 424242, 50_000, 10**7,
        )
        for v in range(5):
            mask = init == v
            wins = int((res[mask] == _fastpath.RES_FIXATION).sum())
            lo, hi = wilson_interval(wins, int(mask.sum()), z=4.0)
            assert lo <= 0.2 <= hi, (v, wins)

    def test_condensed_agrees_with_exact_on_toy_superstar(self):
        g = build_superstar(SuperstarSpec(2, 1, 2))
        fx = exact_fixation(g, 2)
        res = g.reservoir_nodes()
        exact_val = sum(fx.per_node[v] for v in res) / len(res)
        cfg = SimConfig(r=2, placement=Placement.reservoir_only, seed=17)
        rep = estimate_fixation(g, cfg, 50_000, engine="condensed")
        lo, hi = wilson_interval(rep.successes, rep.effective_trials, z=4.0)
        assert lo <= exact_val <= hi

    def test_condensed_and_raw_consistent(self):
        g = build_superstar(SuperstarSpec(3, 3, 2))
        cfg = SimConfig(r=2, placement=Placement.reservoir_only, seed=23)
        raw = estimate_fixation(g, cfg, 10_000, engine="raw")
        con = estimate_fixation(g, cfg, 10_000, engine="condensed")
        assert raw.ci_low < con.point < raw.ci_high

    def test_auto_dispatch(self):
        small = build_superstar(SuperstarSpec(2, 2, 2))
        cfg = SimConfig(r=2, placement="reservoir_only", seed=1)
        assert estimate_fixation(small, cfg, 10).engine == "raw"
        big = build_superstar(SuperstarSpec(50, 50, 3))
        assert estimate_fixation(big, cfg, 10).engine == "condensed"
        bd_only = SimConfig(r=2, rule=Rule.dB, placement="reservoir_only", seed=1)
        assert estimate_fixation(big, bd_only, 10).engine == "raw"

    def test_capped_runs_excluded_with_warning(self):
        # a 2-step cap leaves most replicas unabsorbed (a few go extinct
        # immediately); capped runs never enter the proportion
        g = build_family("complete", 6)
        cfg = SimConfig(r=1, seed=3, max_steps=2)
        with pytest.warns(UserWarning, match="step cap"):
            rep = estimate_fixation(g, cfg, 100)
        assert rep.capped > 50
        assert rep.effective_trials == 100 - rep.capped
        assert rep.successes == 0  # fixation needs at least N-1 steps
        assert rep.point == 0.0

    def test_placement_validation(self):
        g = build_family("complete", 4)
        cfg = SimConfig(r=2, placement="reservoir_only")
        with pytest.raises(ValueError):
            estimate_fixation(g, cfg, 10)


class TestOneToTwo:
    def test_requires_superstar_and_reservoir_bd(self):
        cfgR = SimConfig(r=2, placement="reservoir_only")
        with pytest.raises(ValueError):
            estimate_one_to_two(build_family("star", 9), cfgR, 10)
        g = build_superstar(SuperstarSpec(2, 2, 2))
        with pytest.raises(ValueError):
            estimate_one_to_two(g, SimConfig(r=2, placement="uniform_node"), 10)
        with pytest.raises(ValueError):
            estimate_one_to_two(g, SimConfig(r=2, rule=Rule.dB, placement="reservoir_only"), 10)

    def test_matches_exact_probe_on_toy(self):
        from evograph.exactchain import exact_event_probability

        g = build_superstar(SuperstarSpec(2, 2, 2))
        res_bits = [1 << v for v in g.reservoir_nodes()]

        def res_count(s):
            return sum(1 for b in res_bits if s & b)

        exact = exact_event_probability(
            g,
            2,
            Rule.Bd,
            is_stop=lambda s: res_count(s) != 1,
            is_win=lambda s: res_count(s) >= 2,
            start_masks=[1 << g.reservoir_nodes()[0]],
        )[0]
        cfg = SimConfig(r=2, placement="reservoir_only", seed=29)
        rep = estimate_one_to_two(g, cfg, 50_000)
        lo, hi = wilson_interval(rep.successes, rep.effective_trials, z=4.0)
        assert lo <= exact <= hi

    def test_neutral_probe_is_a_probability(self):
        g = build_superstar(SuperstarSpec(3, 3, 2))
        rep = estimate_one_to_two(g, SimConfig(r=1, placement="reservoir_only", seed=2), 3000)
        assert 0.0 <= rep.point <= 1.0
