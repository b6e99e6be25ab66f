"""Assignment trail, slack-driven propagation, and conflict learning.

All search state lives on one trail of literals split into decision
levels. Each constraint carries two running numbers:

* gap: degree minus the coefficient mass of its true literals. At or
  below 0 the constraint is satisfied outright.
* slack: coefficient mass of its not-yet-false literals minus the
  degree. Below 0 no extension can satisfy it (a conflict), and any
  unassigned literal whose coefficient exceeds the slack must be true.

Propagation is two-phase: enqueueing a literal only records it, the
arithmetic happens when the trail pointer reaches it, so a backjump can
undo exactly the applied prefix.

Conflicts are rewritten into learned constraints by cancelling the
reason of the most recently falsified propagated literal into the
conflict. Before each cancellation the reason is weakened down to the
literals that were already false when it propagated and ceiling-divided
by the propagated coefficient; that keeps the combined constraint
contradicting the current assignment at every step, so the loop either
reaches a constraint that forces something after a backjump or proves
the formula empty of models.
"""

from __future__ import annotations

from typing import Optional

from .formula import PBConstraint, PBFormula, lit_var

UNASSIGNED = -1

#: learned coefficients and degrees above this trigger the clausal fallback
COEFF_GUARD = 1 << 62

_ACTIVITY_DECAY = 0.98
_ACTIVITY_CAP = 1e100


class Engine:
    """Propagation and learning over one normalized formula.

    Constraint ids index ``constraints``; the originals come first and
    learned constraints are appended after ``first_learned``. Evicted
    learned constraints keep their id but are marked dead and their
    occurrence entries are dropped lazily.
    """

    def __init__(self, formula: PBFormula, max_learned: int = 10000):
        n = formula.num_vars
        self.num_vars = n
        self.constraints = list(formula.constraints)
        self.first_learned = len(self.constraints)
        self.max_learned = max_learned

        self.val = [UNASSIGNED] * (n + 1)
        self.level = [0] * (n + 1)
        self.pos = [0] * (n + 1)
        self.reason = [-1] * (n + 1)
        self.activity = [0.0] * (n + 1)

        self.trail = []
        self.trail_lim = []
        self.qhead = 0

        self.occ_static = [[] for _ in range(n + 1)]
        self.occ_learned = [[] for _ in range(n + 1)]
        self.scan_terms = []
        self.slack = []
        self.gapv = []
        self.alive = []
        self.reason_count = []
        self.c_activity = []
        for c in self.constraints:
            for coeff, lit in c.terms:
                self.occ_static[lit_var(lit)].append((c.cid, coeff, lit > 0))
            self.scan_terms.append(tuple(sorted(
                c.terms, key=lambda t: (-t[0], lit_var(t[1])))))
            self.slack.append(c.coef_sum() - c.degree)
            self.gapv.append(c.degree)
            self.alive.append(True)
            self.reason_count.append(0)
            self.c_activity.append(0.0)

        # constraints that may force literals under the current assignment
        # without any new trail event; drained by propagate()
        self.dirty = list(range(len(self.constraints)))
        self.in_dirty = [True] * len(self.constraints)

        # propagation scope: when nonzero, learned constraints may only
        # force variables stamped with the current scope mark
        self.scope_stamp = [0] * (n + 1)
        self.scope_current = 0
        self._scope_seq = 0

        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.learned_live = 0
        self.learned_total = 0
        self.learned_bytes = 0
        self.n_propagations = 0

    # ----- assignment queries -------------------------------------------

    def current_level(self) -> int:
        return len(self.trail_lim)

    def lit_value(self, lit: int):
        """True, False, or None for unassigned."""
        v = self.val[lit_var(lit)]
        if v == UNASSIGNED:
            return None
        return (v == 1) == (lit > 0)

    def _is_false(self, lit: int) -> bool:
        v = self.val[lit_var(lit)]
        return v != UNASSIGNED and (v == 1) == (lit < 0)

    def assignment_dict(self) -> dict:
        return {lit_var(lit): lit > 0 for lit in self.trail}

    def trail_view(self):
        return [(lit, self.level[lit_var(lit)], self.reason[lit_var(lit)])
                for lit in self.trail]

    # ----- scope ---------------------------------------------------------

    def set_scope(self, var_ids) -> None:
        """Restrict learned-constraint propagation to the given variables.

        Original constraints need no restriction: each one always lies
        entirely inside the subproblem being worked on. Learned
        constraints can span unrelated subproblems, and letting them
        force variables outside the current one would entangle counts
        that must stay independent.
        """
        self._scope_seq += 1
        mark = self._scope_seq
        stamp = self.scope_stamp
        for v in var_ids:
            stamp[v] = mark
        self.scope_current = mark

    def clear_scope(self) -> None:
        """Allow learned constraints to force any variable."""
        self.scope_current = 0

    # ----- trail ---------------------------------------------------------

    def decide(self, lit: int) -> None:
        assert self.val[lit_var(lit)] == UNASSIGNED
        self.trail_lim.append(len(self.trail))
        self._enqueue(lit, -1)

    def _enqueue(self, lit: int, reason_ci: int) -> None:
        v = lit_var(lit)
        self.val[v] = 1 if lit > 0 else 0
        self.level[v] = len(self.trail_lim)
        self.pos[v] = len(self.trail)
        self.reason[v] = reason_ci
        if reason_ci >= 0:
            self.reason_count[reason_ci] += 1
            self.n_propagations += 1
        self.trail.append(lit)

    def _mark_dirty(self, ci: int) -> None:
        if not self.in_dirty[ci]:
            self.in_dirty[ci] = True
            self.dirty.append(ci)

    def propagate(self) -> Optional[int]:
        """Run to fixpoint. Returns a conflicting constraint id, or None."""
        while True:
            if self.qhead < len(self.trail):
                confl = self._apply(self.trail[self.qhead])
                self.qhead += 1
                if confl is not None:
                    return confl
            elif self.dirty:
                ci = self.dirty.pop()
                self.in_dirty[ci] = False
                if not self.alive[ci]:
                    continue
                confl = self._scan_forcing(ci)
                if confl is not None:
                    return confl
            else:
                return None

    def _apply(self, lit: int) -> Optional[int]:
        """Fold one trail literal into every affected slack and gap.

        Always completes the full update so a later undo is exact; the
        first conflict seen is reported after the scan.
        """
        v = lit_var(lit)
        truth = lit > 0
        confl = None
        gapv = self.gapv
        slack = self.slack
        for ci, coeff, is_pos in self.occ_static[v]:
            if is_pos == truth:
                gapv[ci] -= coeff
            else:
                s = slack[ci] - coeff
                slack[ci] = s
                if s < 0:
                    if confl is None:
                        confl = ci
                elif gapv[ci] > 0:
                    self._mark_dirty(ci)
        lst = self.occ_learned[v]
        if lst:
            alive = self.alive
            dead_seen = False
            for ci, coeff, is_pos in lst:
                if not alive[ci]:
                    dead_seen = True
                    continue
                if is_pos == truth:
                    gapv[ci] -= coeff
                else:
                    s = slack[ci] - coeff
                    slack[ci] = s
                    if s < 0:
                        if confl is None:
                            confl = ci
                    elif gapv[ci] > 0:
                        self._mark_dirty(ci)
            if dead_seen:
                self.occ_learned[v] = [e for e in lst if alive[e[0]]]
        return confl

    def _undo_apply(self, lit: int) -> None:
        v = lit_var(lit)
        truth = lit > 0
        gapv = self.gapv
        slack = self.slack
        for ci, coeff, is_pos in self.occ_static[v]:
            if is_pos == truth:
                gapv[ci] += coeff
            else:
                slack[ci] += coeff
        for ci, coeff, is_pos in self.occ_learned[v]:
            if not self.alive[ci]:
                continue
            if is_pos == truth:
                gapv[ci] += coeff
            else:
                slack[ci] += coeff

    def _scan_forcing(self, ci: int) -> Optional[int]:
        """Force every literal whose coefficient exceeds the slack."""
        s = self.slack[ci]
        if s < 0:
            return ci
        if self.gapv[ci] <= 0:
            return None
        val = self.val
        scoped = self.scope_current if ci >= self.first_learned else 0
        stamp = self.scope_stamp
        for coeff, lit in self.scan_terms[ci]:
            if coeff <= s:
                break
            v = lit_var(lit)
            if val[v] != UNASSIGNED:
                continue
            if scoped and stamp[v] != scoped:
                continue
            self._enqueue(lit, ci)
        return None

    def backjump_to(self, target_level: int) -> None:
        """Retract every assignment above the target decision level."""
        assert 0 <= target_level <= len(self.trail_lim)
        if target_level == len(self.trail_lim):
            return
        target = self.trail_lim[target_level]
        trail = self.trail
        for i in range(len(trail) - 1, target - 1, -1):
            lit = trail[i]
            v = lit_var(lit)
            if i < self.qhead:
                self._undo_apply(lit)
            r = self.reason[v]
            if r >= 0:
                self.reason_count[r] -= 1
            self.val[v] = UNASSIGNED
            self.reason[v] = -1
        del trail[target:]
        del self.trail_lim[target_level:]
        if self.qhead > target:
            self.qhead = target
        # pending forcing scans belonged to the abandoned branch
        for ci in self.dirty:
            self.in_dirty[ci] = False
        self.dirty.clear()

    # ----- activities ----------------------------------------------------

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > _ACTIVITY_CAP:
            scale = 1.0 / _ACTIVITY_CAP
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= scale
            self.var_inc *= scale

    def _bump_constraint(self, ci: int) -> None:
        if ci < self.first_learned:
            return
        self.c_activity[ci] += self.cla_inc
        if self.c_activity[ci] > _ACTIVITY_CAP:
            scale = 1.0 / _ACTIVITY_CAP
            for cj in range(self.first_learned, len(self.constraints)):
                self.c_activity[cj] *= scale
            self.cla_inc *= scale

    def _bump_and_decay(self, touched) -> None:
        for v in touched:
            self._bump_var(v)
        self.var_inc /= _ACTIVITY_DECAY
        self.cla_inc /= _ACTIVITY_DECAY

    # ----- conflict analysis ----------------------------------------------

    def analyze(self, confl_ci: int):
        """Turn a conflict into a learned constraint and a backjump level.

        Returns ``(terms, degree, backjump_level)``, or None when the
        contradiction persists with every decision retracted, meaning the
        whole search is over with zero models. The returned constraint is
        implied by the original formula, is falsified by the current
        assignment, and forces at least one literal once the trail is cut
        back to the returned level.
        """
        self._bump_constraint(confl_ci)
        c = self.constraints[confl_ci]
        # weaken every non-falsified literal away so the conflict is a
        # pure statement about assigned-false literals
        coeffs = {}
        degree = c.degree
        for coeff, lit in c.terms:
            if self._is_false(lit):
                coeffs[lit] = coeff
            else:
                degree -= coeff
        assert degree >= 1, "constraint was not actually conflicting"
        touched = set()

        while True:
            # saturate: mass above the degree never matters
            for lit, a in coeffs.items():
                if a > degree:
                    coeffs[lit] = degree

            by_level = {}
            for lit, a in coeffs.items():
                d = self.level[lit_var(lit)]
                s, m = by_level.get(d, (0, 0))
                by_level[d] = (s + a, a if a > m else m)

            above_root = sum(s for d, (s, _) in by_level.items() if d >= 1)
            if above_root - degree < 0:
                # still contradictory with every decision undone
                for lit in coeffs:
                    touched.add(lit_var(lit))
                self._bump_and_decay(touched)
                return None

            # walk candidate backjump levels from the deepest falsified
            # level down; the first candidate whose slack admits a forcing
            # coefficient is the deepest asserting cut, the one that
            # retracts the least work
            deep_levels = sorted((d for d in by_level if d >= 1), reverse=True)
            running_sum = 0
            running_max = 0
            for d in deep_levels:
                s, m = by_level[d]
                running_sum += s
                if m > running_max:
                    running_max = m
                slack_after = running_sum - degree
                if slack_after >= 0 and running_max > slack_after:
                    terms = tuple(sorted(((a, lit) for lit, a in coeffs.items()),
                                         key=lambda t: lit_var(t[1])))
                    for lit in coeffs:
                        touched.add(lit_var(lit))
                    self._bump_and_decay(touched)
                    return terms, degree, d - 1

            new_degree = self._resolve_step(coeffs, degree, touched)
            if new_degree is None:
                terms, fdeg, jump = self._fallback_clause(touched)
                self._bump_and_decay(touched)
                return terms, fdeg, jump
            degree = new_degree

    def _resolve_step(self, coeffs: dict, degree: int, touched: set):
        """Cancel the reason of the deepest propagated literal into coeffs.

        Mutates ``coeffs`` in place and returns the new degree, or None
        when no falsified literal was propagated (or the arithmetic would
        outgrow the guard), in which case the caller falls back to a
        clause over the current decisions.
        """
        p_lit = None
        p_pos = -1
        for lit in coeffs:
            v = lit_var(lit)
            if self.reason[v] >= 0 and self.pos[v] > p_pos:
                p_pos = self.pos[v]
                p_lit = lit
        if p_lit is None:
            return None

        v_p = lit_var(p_lit)
        r_ci = self.reason[v_p]
        self._bump_constraint(r_ci)
        touched.add(v_p)
        reason = self.constraints[r_ci]
        forced_lit = -p_lit

        # weaken the reason down to its forced literal plus the literals
        # already false when it propagated, then ceiling-divide by the
        # forced coefficient; the quotient was still propagating then
        rdeg = reason.degree
        rcoeffs = {}
        a_forced = None
        for coeff, lit in reason.terms:
            if lit == forced_lit:
                a_forced = coeff
                continue
            if self._is_false(lit) and self.pos[lit_var(lit)] < p_pos:
                rcoeffs[lit] = coeff
            else:
                rdeg -= coeff
        assert a_forced is not None, "reason does not contain its forced literal"
        assert rdeg >= 1
        if a_forced > 1:
            rdeg = -(-rdeg // a_forced)
            for lit in rcoeffs:
                rcoeffs[lit] = -(-rcoeffs[lit] // a_forced)

        mult = coeffs.pop(p_lit)
        new_degree = degree + mult * rdeg - mult
        if new_degree > COEFF_GUARD:
            return None
        for lit, a in rcoeffs.items():
            merged = coeffs.get(lit, 0) + mult * a
            if merged > COEFF_GUARD:
                return None
            coeffs[lit] = merged
        assert new_degree >= 1
        return new_degree

    def _fallback_clause(self, touched: set):
        """Clause forbidding the current decision sequence.

        The branch is contradictory, so the original formula implies that
        these decisions cannot all hold together. With all but the last
        decision in place the clause forces that last one flipped.
        """
        terms = []
        for d in range(1, len(self.trail_lim) + 1):
            dec = self.trail[self.trail_lim[d - 1]]
            touched.add(lit_var(dec))
            terms.append((1, -dec))
        terms.sort(key=lambda t: lit_var(t[1]))
        return tuple(terms), 1, len(self.trail_lim) - 1

    # ----- learned constraint store ---------------------------------------

    def add_learned(self, terms, degree: int) -> int:
        """Append a learned constraint and queue it for a forcing scan."""
        assert self.qhead == len(self.trail), "trail must be fully applied"
        cid = len(self.constraints)
        c = PBConstraint(cid, terms, degree)
        self.constraints.append(c)
        self.scan_terms.append(tuple(sorted(
            terms, key=lambda t: (-t[0], lit_var(t[1])))))
        s = 0
        g = degree
        for coeff, lit in terms:
            if not self._is_false(lit):
                s += coeff
            if self.lit_value(lit) is True:
                g -= coeff
            self.occ_learned[lit_var(lit)].append((cid, coeff, lit > 0))
        self.slack.append(s - degree)
        self.gapv.append(g)
        self.alive.append(True)
        self.reason_count.append(0)
        self.c_activity.append(self.cla_inc)
        self.in_dirty.append(False)
        self._mark_dirty(cid)
        self.learned_live += 1
        self.learned_total += 1
        self.learned_bytes += self._learned_cost(len(terms))
        if self.learned_live > self.max_learned:
            self._reduce_learned(protect=cid)
        return cid

    @staticmethod
    def _learned_cost(n_terms: int) -> int:
        return 24 * n_terms + 80

    def _reduce_learned(self, protect: int) -> None:
        """Evict cold learned constraints down to 3/4 of the cap.

        Constraints currently serving as a reason on the trail stay, as
        does the just-added one. Dead ids keep their slot; occurrence
        entries are cleaned up lazily during later scans.
        """
        target = 3 * self.max_learned // 4
        cands = [ci for ci in range(self.first_learned, len(self.constraints))
                 if self.alive[ci] and self.reason_count[ci] == 0 and ci != protect]
        cands.sort(key=lambda ci: self.c_activity[ci])
        for ci in cands:
            if self.learned_live <= target:
                break
            self.alive[ci] = False
            self.learned_live -= 1
            self.learned_bytes -= self._learned_cost(len(self.constraints[ci].terms))
            self.constraints[ci] = None
            self.scan_terms[ci] = ()

    # ----- integrity (debug) ----------------------------------------------

    def check_integrity(self, expect_quiescent: bool = True) -> None:
        """Recompute all incremental state from scratch and compare.

        Slow; meant for tests. With ``expect_quiescent`` the trail must be
        fully applied and original constraints must be at their forcing
        fixpoint. Also replays the trail to confirm every propagated
        literal was genuinely forced by its recorded reason at the moment
        it was enqueued.
        """
        n = self.num_vars
        assigned = {}
        for i, lit in enumerate(self.trail):
            v = lit_var(lit)
            assert self.val[v] == (1 if lit > 0 else 0), "trail/val mismatch at %d" % i
            assert self.pos[v] == i, "trail position drift on x%d" % v
            assert v not in assigned, "duplicate trail variable x%d" % v
            assigned[v] = lit > 0
        for v in range(1, n + 1):
            if v not in assigned:
                assert self.val[v] == UNASSIGNED, "stale value on x%d" % v

        # slack and gap reflect exactly the applied prefix of the trail
        applied = {}
        for lit in self.trail[:self.qhead]:
            applied[lit_var(lit)] = lit > 0
        for ci, c in enumerate(self.constraints):
            if not self.alive[ci]:
                continue
            s = -c.degree
            g = c.degree
            for coeff, lit in c.terms:
                truth = applied.get(lit_var(lit))
                if truth is None or truth == (lit > 0):
                    s += coeff
                if truth is not None and truth == (lit > 0):
                    g -= coeff
            assert self.slack[ci] == s, "slack drift on constraint %d" % ci
            assert self.gapv[ci] == g, "gap drift on constraint %d" % ci

        # replay: each propagated literal had coefficient > slack when set
        replay = {}
        for lit in self.trail:
            v = lit_var(lit)
            r = self.reason[v]
            if r >= 0:
                reason = self.constraints[r]
                assert reason is not None and self.alive[r], "dead reason %d" % r
                s = -reason.degree
                a_lit = None
                for coeff, rl in reason.terms:
                    if rl == lit:
                        a_lit = coeff
                    rv = replay.get(lit_var(rl))
                    if rv is None or rv == (rl > 0):
                        s += coeff
                assert a_lit is not None, "reason lacks its literal"
                assert a_lit > s, "literal was not forced by its reason"
            replay[v] = lit > 0

        if expect_quiescent:
            assert self.qhead == len(self.trail), "unapplied trail entries"
            assert not self.dirty, "pending forcing scans"
            for ci in range(self.first_learned):
                if self.gapv[ci] <= 0:
                    continue
                s = self.slack[ci]
                assert s >= 0, "unnoticed conflict on constraint %d" % ci
                for coeff, lit in self.scan_terms[ci]:
                    if coeff <= s:
                        break
                    assert self.val[lit_var(lit)] != UNASSIGNED, \
                        "missed forcing on constraint %d" % ci
