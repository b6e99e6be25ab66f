"""Exact model counting by component-splitting conflict-driven search.

The search keeps a stack of frames, one per subproblem being counted.
A frame owns a branching literal; each branch is propagated, split into
variable-disjoint residual components, and every component is either
answered from the cache or pushed as a child frame. A finished frame
reports models(branch true) + models(branch false), multiplied into its
parent, and unconstrained variables contribute a power of two directly.

Conflicts are analyzed into learned constraints as in a clause-learning
satisfiability search. Because a conflict proves the current combination
of assumptions impossible, every cache entry inserted after the backjump
target's decision was made is purged: such entries were computed while
an impossible sibling subproblem was still considered open and their
values cannot be trusted. Learned constraints also only ever force
variables inside the subproblem currently being counted, which keeps
independently-multiplied components actually independent.
"""

from __future__ import annotations

import time
from typing import Optional

from .components import Component, CountCache, encode_component
from .engine import Engine, UNASSIGNED
from .formula import PBFormula, lit_var

_BUDGET_CHECK_MASK = (1 << 14) - 1


class SolveTimeout(Exception):
    """The count did not finish inside the configured wall-clock budget."""


class MemoryBudgetExceeded(Exception):
    """Accounted cache plus learned-constraint bytes left the budget."""


class CounterConfig:
    """Knobs for one counting run; defaults match the command line."""

    __slots__ = ("heuristic", "vcis_static_only", "saturate_keys",
                 "max_cache_bytes", "max_memory_bytes", "timeout_s", "seed",
                 "fingerprint_cache", "max_learned",
                 "collect_learned_log", "collect_decision_log", "debug_checks")

    def __init__(self, heuristic: str = "vcis", vcis_static_only: bool = False,
                 saturate_keys: bool = True, max_cache_bytes: int = 256 << 20,
                 max_memory_bytes: Optional[int] = None,
                 timeout_s: Optional[float] = None, seed: int = 0,
                 fingerprint_cache: bool = False, max_learned: int = 10000,
                 collect_learned_log: bool = False,
                 collect_decision_log: bool = False,
                 debug_checks: bool = False):
        if heuristic not in ("vcis", "baseline"):
            raise ValueError("heuristic must be 'vcis' or 'baseline'")
        self.heuristic = heuristic
        self.vcis_static_only = vcis_static_only
        self.saturate_keys = saturate_keys
        self.max_cache_bytes = max_cache_bytes
        self.max_memory_bytes = max_memory_bytes
        self.timeout_s = timeout_s
        self.seed = seed
        self.fingerprint_cache = fingerprint_cache
        self.max_learned = max_learned
        self.collect_learned_log = collect_learned_log
        self.collect_decision_log = collect_decision_log
        self.debug_checks = debug_checks


class SearchStats:
    __slots__ = ("decisions", "conflicts", "propagations", "learned",
                 "cache_hits", "cache_misses", "cache_stores",
                 "cache_evictions", "cache_purged", "cache_entries",
                 "cache_bytes_peak", "peak_depth", "peak_open_components")

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__slots__}

    def __repr__(self) -> str:
        return "SearchStats(%s)" % ", ".join(
            "%s=%d" % (name, getattr(self, name)) for name in self.__slots__)


class CountResult:
    __slots__ = ("count", "stats", "cache")

    def __init__(self, count: int, stats: SearchStats, cache: CountCache):
        self.count = count
        self.stats = stats
        self.cache = cache

    def __repr__(self) -> str:
        return "CountResult(count=%d)" % self.count


def dedup_constraints(formula: PBFormula) -> PBFormula:
    """Drop normalized constraints whose body already appeared."""
    seen = set()
    bodies = []
    for c in formula.constraints:
        body = c.body()
        if body in seen:
            continue
        seen.add(body)
        bodies.append(body)
    return PBFormula(formula.num_vars, bodies, formula.unsat_at_load)


def compute_vcis_scores(formula: PBFormula):
    """Per-variable coefficient-impact scores and preferred phases.

    Each occurrence of a variable contributes its coefficient divided by
    the constraint's degree: 1.0 when setting that literal alone settles
    the constraint, small when the literal barely matters. A variable's
    score is the mean contribution over the constraints containing it
    (0.0 if it appears in none), and its preferred phase is the polarity
    carrying the larger summed contribution, positive on ties.
    """
    n = formula.num_vars
    impact_sum = [0.0] * (n + 1)
    occ = [0] * (n + 1)
    pos_mass = [0.0] * (n + 1)
    neg_mass = [0.0] * (n + 1)
    for c in formula.constraints:
        k = c.degree
        for coeff, lit in c.terms:
            v = lit_var(lit)
            ratio = coeff / k
            impact_sum[v] += ratio
            occ[v] += 1
            if lit > 0:
                pos_mass[v] += ratio
            else:
                neg_mass[v] += ratio
    scores = [0.0] * (n + 1)
    phases = [True] * (n + 1)
    for v in range(1, n + 1):
        if occ[v]:
            scores[v] = impact_sum[v] / occ[v]
        phases[v] = pos_mass[v] >= neg_mass[v]
    return scores, phases


class _Frame:
    """One subproblem on the search stack.

    The frame at stack index i made its decision at level i; the root
    frame at index 0 decides nothing and only collects the product over
    the top-level components.
    """

    __slots__ = ("comp", "key", "entry_level", "lit", "phase",
                 "branch_sum", "prod", "pending", "needs_body")

    def __init__(self, comp, key, entry_level: int, lit):
        self.comp = comp
        self.key = key
        self.entry_level = entry_level
        self.lit = lit
        self.phase = 0
        self.branch_sum = 0
        self.prod = 1
        self.pending = None
        self.needs_body = True


class ModelCounter:
    """Single-use driver: construct, then call :meth:`run` once."""

    def __init__(self, formula: PBFormula, config: Optional[CounterConfig] = None):
        self.config = config or CounterConfig()
        self.formula = dedup_constraints(formula)
        self.engine = Engine(self.formula, max_learned=self.config.max_learned)
        self.cache = CountCache(max_bytes=self.config.max_cache_bytes,
                                fingerprint_only=self.config.fingerprint_cache,
                                seed=self.config.seed)
        self.stats = SearchStats()
        self.vcis_scores, self.vcis_phases = compute_vcis_scores(self.formula)
        self.learned_log = []
        self.decision_log = []
        self.level_log_pos = [0]
        self._var_stamp = [0] * (self.formula.num_vars + 1)
        self._cstr_stamp = [0] * len(self.formula.constraints)
        self._stamp = 0
        self._ops = 0
        self._deadline = None

    # ----- pieces ---------------------------------------------------------

    def _split_scope(self, scope_vars):
        """Residual components among the given unassigned variables.

        Two variables connect when an unsatisfied original constraint
        contains both. Returns ``(components, n_free)`` with free
        variables (in no active constraint) only counted: each doubles
        the model count of the surrounding subproblem.
        """
        engine = self.engine
        val = engine.val
        occ = engine.occ_static
        gapv = engine.gapv
        constraints = engine.constraints
        self._stamp += 1
        stamp = self._stamp
        vstamp = self._var_stamp
        cstamp = self._cstr_stamp
        comps = []
        free = 0
        for v0 in scope_vars:
            if val[v0] != UNASSIGNED or vstamp[v0] == stamp:
                continue
            vstamp[v0] = stamp
            comp_vars = []
            comp_cids = []
            queue = [v0]
            while queue:
                v = queue.pop()
                comp_vars.append(v)
                for ci, _, _ in occ[v]:
                    if cstamp[ci] == stamp:
                        continue
                    cstamp[ci] = stamp
                    if gapv[ci] <= 0:
                        continue
                    comp_cids.append(ci)
                    for _, lit in constraints[ci].terms:
                        w = lit_var(lit)
                        if val[w] != UNASSIGNED or vstamp[w] == stamp:
                            continue
                        vstamp[w] = stamp
                        queue.append(w)
            if not comp_cids:
                free += 1
                continue
            comp_vars.sort()
            comp_cids.sort()
            comps.append(Component(comp_vars, comp_cids,
                                   [gapv[ci] for ci in comp_cids]))
        return comps, free

    def _pick_literal(self, comp: Component) -> int:
        """Branching literal for a component, ties to the smallest id."""
        engine = self.engine
        cfg = self.config
        if cfg.heuristic == "baseline":
            active = set(comp.cstr_ids)
            best_v = comp.var_ids[0]
            best = -1.0
            for v in comp.var_ids:
                occ_count = 0
                for ci, _, _ in engine.occ_static[v]:
                    if ci in active and engine.gapv[ci] > 0:
                        occ_count += 1
                score = engine.activity[v] + occ_count
                if score > best:
                    best = score
                    best_v = v
            return best_v

        scores = self.vcis_scores
        if cfg.vcis_static_only:
            best_v = comp.var_ids[0]
            best = -1.0
            for v in comp.var_ids:
                if scores[v] > best:
                    best = scores[v]
                    best_v = v
        else:
            activity = engine.activity
            act_max = 0.0
            sta_max = 0.0
            for v in comp.var_ids:
                if activity[v] > act_max:
                    act_max = activity[v]
                if scores[v] > sta_max:
                    sta_max = scores[v]
            best_v = comp.var_ids[0]
            best = -1.0
            for v in comp.var_ids:
                score = 0.0
                if act_max > 0.0:
                    score += 0.5 * (activity[v] / act_max)
                if sta_max > 0.0:
                    score += 0.5 * (scores[v] / sta_max)
                if score > best:
                    best = score
                    best_v = v
        return best_v if self.vcis_phases[best_v] else -best_v

    def _budget_tick(self) -> None:
        self._ops += 1
        if self._ops & _BUDGET_CHECK_MASK:
            return
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise SolveTimeout("timed out after %.3fs" % self.config.timeout_s)
        limit = self.config.max_memory_bytes
        if limit is not None:
            used = self.cache.bytes_used + self.engine.learned_bytes
            if used > limit:
                raise MemoryBudgetExceeded(
                    "accounted %d bytes exceeds budget %d" % (used, limit))

    def _handle_conflict(self, confl_ci: int, stack) -> bool:
        """Learn from a conflict and rewind. False means zero models overall."""
        self.stats.conflicts += 1
        self._budget_tick()
        engine = self.engine
        outcome = engine.analyze(confl_ci)
        if outcome is None:
            return False
        terms, degree, jump = outcome
        engine.backjump_to(jump)
        # results stored while the contradicted assumptions were open are
        # not trustworthy; drop everything inserted since
        self.cache.purge_from(self.level_log_pos[jump + 1])
        del self.level_log_pos[jump + 1:]
        del stack[jump + 1:]
        frame = stack[jump]
        frame.prod = 1
        frame.pending = None
        frame.needs_body = True
        if self.config.collect_learned_log:
            slack_now = sum(a for a, lit in terms
                            if engine.lit_value(lit) is not False) - degree
            forcing = any(engine.lit_value(lit) is None and a > slack_now
                          for a, lit in terms)
            self.learned_log.append((terms, degree, jump,
                                     slack_now >= 0 and forcing))
        engine.add_learned(terms, degree)
        return True

    def _note_decision(self, lit: int) -> None:
        self.stats.decisions += 1
        self._budget_tick()
        if self.config.collect_decision_log:
            self.decision_log.append((self.engine.current_level(), lit))

    # ----- main loop --------------------------------------------------------

    def run(self) -> CountResult:
        cfg = self.config
        stats = self.stats
        engine = self.engine
        cache = self.cache
        if cfg.timeout_s is not None:
            self._deadline = time.monotonic() + cfg.timeout_s

        count = None
        if self.formula.unsat_at_load:
            count = 0
        stack = [_Frame(None, None, -1, 0)]
        stats.peak_depth = 1

        while count is None:
            frame = stack[-1]
            if frame.needs_body:
                if frame.comp is None:
                    engine.clear_scope()
                else:
                    engine.set_scope(frame.comp.var_ids)
                confl = engine.propagate()
                if confl is not None:
                    if not self._handle_conflict(confl, stack):
                        count = 0
                        break
                    continue
                if cfg.debug_checks:
                    engine.check_integrity()
                frame.needs_body = False
                if frame.comp is None:
                    scope = range(1, engine.num_vars + 1)
                else:
                    scope = frame.comp.var_ids
                comps, free = self._split_scope(scope)
                frame.prod = 1 << free
                frame.pending = comps
                open_comps = sum(len(fr.pending) for fr in stack if fr.pending)
                open_comps += len(stack) - 1
                if open_comps > stats.peak_open_components:
                    stats.peak_open_components = open_comps
            elif frame.pending:
                comp = frame.pending.pop()
                key = encode_component(comp, engine.constraints, cfg.saturate_keys)
                cached = cache.lookup(key)
                if cached is not None:
                    frame.prod *= cached
                    continue
                if cfg.debug_checks:
                    assert all(engine.val[v] == UNASSIGNED for v in comp.var_ids)
                lit = self._pick_literal(comp)
                child = _Frame(comp, key, engine.current_level(), lit)
                stack.append(child)
                if len(stack) > stats.peak_depth:
                    stats.peak_depth = len(stack)
                self.level_log_pos.append(cache.log_position())
                engine.decide(lit)
                self._note_decision(lit)
            else:
                if len(stack) == 1:
                    count = frame.prod
                    break
                frame.branch_sum += frame.prod
                engine.backjump_to(frame.entry_level)
                del self.level_log_pos[frame.entry_level + 1:]
                if frame.phase == 0:
                    frame.phase = 1
                    frame.lit = -frame.lit
                    frame.prod = 1
                    frame.pending = None
                    frame.needs_body = True
                    self.level_log_pos.append(cache.log_position())
                    engine.decide(frame.lit)
                    self._note_decision(frame.lit)
                else:
                    total = frame.branch_sum
                    cache.store(frame.key, total)
                    stack.pop()
                    stack[-1].prod *= total

        assert 0 <= count <= (1 << self.formula.num_vars)
        stats.propagations = engine.n_propagations
        stats.learned = engine.learned_total
        stats.cache_hits = cache.hits
        stats.cache_misses = cache.misses
        stats.cache_stores = cache.stores
        stats.cache_evictions = cache.evictions
        stats.cache_purged = cache.purged
        stats.cache_entries = len(cache)
        stats.cache_bytes_peak = cache.bytes_peak
        return CountResult(count, stats, cache)


def count_models(formula: PBFormula, config: Optional[CounterConfig] = None) -> CountResult:
    """Exact number of complete assignments satisfying the formula."""
    return ModelCounter(formula, config).run()
