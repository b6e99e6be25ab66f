"""Shared builders for the test suite: seeded random formulas and the
mini-formula view of one residual component."""

import random

from pbtally import PBFormula, build_formula
from pbtally.formula import lit_var


def random_formula(rng: random.Random, max_vars: int = 10, density: float = 1.0,
                   max_coeff: int = 6, max_cstrs=None):
    """A small random formula mixing operators, signs, and coefficients."""
    n = rng.randint(1, max_vars)
    m = rng.randint(0, int((n + 3) * density))
    if max_cstrs is not None:
        m = min(m, max_cstrs)
    cons = []
    for _ in range(m):
        k = rng.randint(1, min(n, 5))
        vs = rng.sample(range(1, n + 1), k)
        terms = [(rng.randint(-max_coeff, max_coeff) or 1,
                  v if rng.random() < 0.5 else -v)
                 for v in vs]
        op = rng.choice([">=", "<=", "="])
        # degrees drawn from the reachable sum interval, so most
        # constraints are satisfiable; a thin tail stays infeasible
        lo = sum(min(c, 0) for c, _ in terms)
        hi = sum(max(c, 0) for c, _ in terms)
        if op == "=":
            deg = sum(c for c, _ in terms if rng.random() < 0.5)
            if rng.random() < 0.1:
                deg += rng.choice([-1, 1])
        elif rng.random() < 0.97:
            deg = rng.randint(lo - 1, hi) if op == ">=" else rng.randint(lo, hi + 1)
        elif op == ">=":
            deg = hi + rng.randint(1, 4)
        else:
            deg = lo - rng.randint(1, 4)
        cons.append((terms, op, deg))
    return build_formula(n, cons)


def tight_formula(rng: random.Random, max_vars: int = 12):
    """Overlapping mid-window constraints: mostly satisfiable, but the
    search has to work for it, so conflicts happen at real depth."""
    n = rng.randint(4, max_vars)
    m = rng.randint(2, max(2, int(n * 1.4)))
    cons = []
    for _ in range(m):
        k = rng.randint(2, min(n, 6))
        vs = rng.sample(range(1, n + 1), k)
        terms = [(rng.randint(1, 7), v if rng.random() < 0.5 else -v) for v in vs]
        total = sum(c for c, _ in terms)
        deg = rng.randint(total // 4, max(1, int(total * 0.55)))
        cons.append((terms, ">=", deg))
    return build_formula(n, cons)


def clause_heavy_formula(rng: random.Random, max_vars: int = 9):
    """Mostly clauses plus one small knapsack; splits often, keys repeat."""
    n = rng.randint(4, max_vars)
    cons = []
    for _ in range(rng.randint(1, n)):
        k = rng.randint(1, min(n, 3))
        vs = rng.sample(range(1, n + 1), k)
        terms = [(1, v if rng.random() < 0.5 else -v) for v in vs]
        cons.append((terms, ">=", 1))
    k = rng.randint(2, min(n, 4))
    vs = rng.sample(range(1, n + 1), k)
    terms = [(rng.randint(1, 4), v) for v in vs]
    cons.append((terms, "<=", rng.randint(2, 8)))
    return build_formula(n, cons)


def component_subformula(formula: PBFormula, comp) -> PBFormula:
    """The residual component as a standalone formula.

    Variables are renumbered 1..k in ascending order of the component's
    ids and each constraint keeps only its in-component literals with the
    component's recorded gap as degree.
    """
    var_map = {v: i + 1 for i, v in enumerate(comp.var_ids)}
    bodies = []
    for cid, gap in zip(comp.cstr_ids, comp.gaps):
        c = formula.constraints[cid]
        terms = []
        for coeff, lit in c.terms:
            v = lit_var(lit)
            if v in var_map:
                terms.append((coeff, var_map[v] if lit > 0 else -var_map[v]))
        bodies.append((tuple(terms), gap))
    return PBFormula(len(comp.var_ids), bodies)


def random_partial_assignment(rng: random.Random, num_vars: int, rate: float = 0.4):
    return {v: rng.random() < 0.5 for v in range(1, num_vars + 1)
            if rng.random() < rate}
