from fractions import Fraction

import pytest

from evograph.rootchain import (
    epsilon4_minus,
    epsilon4_minus_exact,
    epsilon4_plus,
    epsilon4_plus_exact,
    solve_root_chain,
)


class TestRecursion:
    def test_start_values(self):
        sol = solve_root_chain(98, 2, 0)
        assert sol.p_up[0] == Fraction(2, 100)
        assert sol.p_down[0] == 0

    def test_start_values_any_b_r(self):
        for b in (2, 10, 500):
            for r in (Fraction(1, 2), Fraction(2), Fraction(5)):
                sol = solve_root_chain(b, r, 0)
                assert sol.p_up[0] == r / (b + r)
                assert sol.p_down[0] == 0

    def test_probabilities_in_unit_interval(self):
        sol = solve_root_chain(50, 3, 20)
        assert all(0 <= p <= 1 for p in sol.p_up + sol.p_down)

    def test_monotone_and_root_mutant_helps(self):
        sol = solve_root_chain(100, 2, 15)
        for i in range(15):
            assert sol.p_up[i + 1] > sol.p_up[i]
            assert sol.p_down[i + 1] > sol.p_down[i]
        for i in range(16):
            assert sol.p_up[i] > sol.p_down[i]

    def test_delta_zero_matches_plain_injection(self):
        # the delta-variant at delta=0 must be the plain recursion
        plain = solve_root_chain(37, Fraction(2), 8)
        variant = solve_root_chain(37, Fraction(2), 8, delta=0)
        assert plain.p_down == variant.p_down and plain.p_up == variant.p_up

    def test_competition_lowers_success(self):
        base = solve_root_chain(100, 2, 6, delta=0)
        crowded = solve_root_chain(100, 2, 6, delta=8)
        assert crowded.p_down[6] < base.p_down[6]

    def test_rejects_single_branch(self):
        with pytest.raises(ValueError):
            solve_root_chain(1, 2, 3)


class TestErrorTerms:
    def test_plug_in_values(self):
        assert epsilon4_plus(5000, 2, 50) == pytest.approx(0.014686, abs=1e-6)
        assert epsilon4_plus(100, 2, 3) == pytest.approx(0.028852, abs=1e-6)
        assert epsilon4_minus(5000, 2, 50, 70) == pytest.approx(0.0590)
        assert epsilon4_minus(100, 2, 3, 10) == pytest.approx(0.34)

    def test_vanish_for_large_b(self):
        assert epsilon4_plus(10**9, 2, 50) < 1e-6
        assert epsilon4_minus(10**9, 2, 50, 70) < 1e-6

    def test_envelope_on_invariant_grid_exact(self):
        # (1 - e4-)*l*r^2/B <= p_down[l] <= (1 + e4+)*l*r^2/B, rationals
        for B in (50, 100, 1000, 5000):
            for r in (Fraction(3, 2), Fraction(2), Fraction(5)):
                for H in (3, 10, 50):
                    em = epsilon4_minus_exact(B, r, H, 0)
                    ep = epsilon4_plus_exact(B, r, H)
                    if em >= 1 or ep >= 1:
                        continue
                    sol = solve_root_chain(B, r, H)
                    for l in range(H + 1):
                        ref = l * r * r / B
                        assert (1 - em) * ref <= sol.p_down[l] <= (1 + ep) * ref
