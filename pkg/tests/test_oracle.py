"""The exhaustive-enumeration oracle must stand on its own feet."""

import itertools
import random

import pytest

from pbtally import (OracleLimitError, brute_count, brute_residual_count,
                     build_formula, parse_opb)
from pbtally.formula import lit_var
from pbtally.oracle import constraint_sum_table

from _helpers import random_formula


def models_by_hand(formula, fixed=None):
    """Reference count via itertools, no numpy, no shared code paths."""
    if formula.unsat_at_load:
        return 0
    fixed = fixed or {}
    free = [v for v in range(1, formula.num_vars + 1) if v not in fixed]
    count = 0
    for bits in itertools.product([False, True], repeat=len(free)):
        assignment = dict(fixed)
        assignment.update(zip(free, bits))
        ok = True
        for c in formula.constraints:
            value = sum(a for a, l in c.terms if assignment[lit_var(l)] == (l > 0))
            if value < c.degree:
                ok = False
                break
        if ok:
            count += 1
    return count


class TestBruteCount:
    def test_single_clause(self):
        f = parse_opb("+1 x1 +1 x2 >= 1 ;\n")
        r = brute_count(f)
        assert r.count == 3
        assert r.enumerated == 4

    def test_knapsack_by_hand(self):
        f = parse_opb("+2 x1 +3 x2 +4 x3 <= 5 ;\n")
        assert brute_count(f).count == 5

    def test_unconstrained_is_power_of_two(self):
        f = parse_opb("* #variable= 6 #constraint= 0\n")
        assert brute_count(f).count == 64

    def test_unsat_at_load(self):
        f = parse_opb("+1 x1 >= 2 ;\n")
        assert f.unsat_at_load
        assert brute_count(f).count == 0

    def test_limit_enforced(self):
        f = parse_opb("* #variable= 25 #constraint= 1\n+1 x1 >= 1 ;\n")
        with pytest.raises(OracleLimitError):
            brute_count(f)

    def test_matches_itertools_reference(self):
        rng = random.Random(11)
        for _ in range(60):
            f = random_formula(rng, max_vars=7)
            assert brute_count(f).count == models_by_hand(f)

    def test_huge_coefficients_use_exact_arithmetic(self):
        big = 1 << 61
        f = build_formula(2, [([(big, 1), (big, 2)], ">=", big)])
        assert brute_count(f).count == 3


class TestBruteResidual:
    def test_empty_assignment_equals_full_count(self):
        rng = random.Random(23)
        for _ in range(30):
            f = random_formula(rng, max_vars=6)
            assert brute_residual_count(f, {}) == brute_count(f).count

    def test_matches_itertools_reference(self):
        rng = random.Random(37)
        for _ in range(60):
            f = random_formula(rng, max_vars=7)
            fixed = {v: rng.random() < 0.5
                     for v in range(1, f.num_vars + 1) if rng.random() < 0.5}
            assert brute_residual_count(f, fixed) == models_by_hand(f, fixed)

    def test_full_assignment_is_zero_or_one(self):
        f = parse_opb("+1 x1 +1 x2 >= 1 ;\n")
        assert brute_residual_count(f, {1: True, 2: False}) == 1
        assert brute_residual_count(f, {1: False, 2: False}) == 0

    def test_limit_counts_free_variables_only(self):
        f = parse_opb("* #variable= 30 #constraint= 1\n+1 x1 >= 1 ;\n")
        fixed = {v: True for v in range(1, 11)}
        assert brute_residual_count(f, fixed) == 1 << 20


class TestSumTable:
    def test_plain_binary_order(self):
        table = constraint_sum_table(((1, 1),), [1, 2])
        assert list(table) == [0, 1, 0, 1]

    def test_negated_literal(self):
        table = constraint_sum_table(((3, -2),), [1, 2])
        assert list(table) == [3, 3, 0, 0]
