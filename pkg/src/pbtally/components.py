"""Variable-disjoint residual subproblems and the count cache.

Under a partial assignment, satisfied constraints drop away and the rest
of the formula often falls apart into groups that share no variables.
Each group can be counted on its own and the results multiplied. Groups
are encoded to canonical byte keys so that an identical residual
subproblem, reached anywhere else in the search tree, is answered from
the cache instead of being recounted.

Cache entries are append-logged. The search can purge every entry
inserted after a recorded log position, which is how results computed
under assumptions that later turned out contradictory are kept out of
the store.
"""

from __future__ import annotations

import random
from hashlib import blake2b
from typing import Iterable, Optional

from .formula import Assignment, PBFormula, constraint_gap, lit_var


class Component:
    """One residual subproblem.

    ``var_ids`` are the unassigned variables, ascending. ``cstr_ids`` are
    the ids of the active (not yet satisfied) constraints over them,
    ascending, and ``gaps[i]`` is the remaining degree of constraint
    ``cstr_ids[i]``. Every unassigned variable of every listed constraint
    appears in ``var_ids``.
    """

    __slots__ = ("var_ids", "cstr_ids", "gaps")

    def __init__(self, var_ids: Iterable[int], cstr_ids: Iterable[int], gaps: Iterable[int]):
        self.var_ids = tuple(var_ids)
        self.cstr_ids = tuple(cstr_ids)
        self.gaps = tuple(gaps)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Component)
                and self.var_ids == other.var_ids
                and self.cstr_ids == other.cstr_ids
                and self.gaps == other.gaps)

    def __hash__(self):
        return hash((self.var_ids, self.cstr_ids, self.gaps))

    def __repr__(self) -> str:
        return "Component(vars=%r, cstrs=%r, gaps=%r)" % (
            self.var_ids, self.cstr_ids, self.gaps)


def residual_components(formula: PBFormula, assignment: Assignment):
    """Split the residual formula into connected components.

    Two unassigned variables are connected when some active constraint
    contains both. Returns ``(components, free_vars)`` where ``free_vars``
    lists unassigned variables that occur in no active constraint.
    Components come out ordered by their smallest variable.
    """
    gaps = {}
    occ = {}
    for c in formula.constraints:
        g = constraint_gap(c, assignment)
        if g <= 0:
            continue
        gaps[c.cid] = g
        for _, lit in c.terms:
            v = lit_var(lit)
            if v not in assignment:
                occ.setdefault(v, []).append(c.cid)

    seen_vars = set()
    seen_cstrs = set()
    components = []
    free_vars = []
    for start in range(1, formula.num_vars + 1):
        if start in assignment or start in seen_vars:
            continue
        if start not in occ:
            free_vars.append(start)
            continue
        seen_vars.add(start)
        queue = [start]
        comp_vars = []
        comp_cstrs = []
        while queue:
            v = queue.pop()
            comp_vars.append(v)
            for cid in occ[v]:
                if cid in seen_cstrs:
                    continue
                seen_cstrs.add(cid)
                comp_cstrs.append(cid)
                for _, lit in formula.constraints[cid].terms:
                    w = lit_var(lit)
                    if w in assignment or w in seen_vars:
                        continue
                    seen_vars.add(w)
                    queue.append(w)
        comp_vars.sort()
        comp_cstrs.sort()
        components.append(Component(comp_vars, comp_cstrs,
                                    [gaps[cid] for cid in comp_cstrs]))
    return components, free_vars


def saturate_gap(gap: int, min_open_coeff: int) -> int:
    """Canonical remaining degree for cache keys.

    When the remaining degree is positive but below every open
    coefficient, any single true literal closes it, so all such degrees
    describe the same set of solutions. They are collapsed onto the
    smallest open coefficient.
    """
    return min_open_coeff if gap < min_open_coeff else gap


def _write_uvarint(out: bytearray, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_uvarint(data: bytes, pos: int):
    result = 0
    shift = 0
    while True:
        byte = data[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7


def encode_component(comp: Component, constraints, saturate: bool = True) -> bytes:
    """Canonical byte key of a component.

    Layout: variable count, first variable, then successive deltas; the
    same for constraint ids; then one remaining-degree value per
    non-clausal constraint in id order. Active clausal constraints always
    have a remaining degree of exactly 1, so theirs is omitted. With
    ``saturate`` the stored degree is first canonicalized through
    :func:`saturate_gap`, merging residual subproblems that differ only
    in degrees too low to matter.
    """
    out = bytearray()
    _write_uvarint(out, len(comp.var_ids))
    prev = 0
    for v in comp.var_ids:
        _write_uvarint(out, v - prev)
        prev = v
    _write_uvarint(out, len(comp.cstr_ids))
    prev = 0
    for cid in comp.cstr_ids:
        _write_uvarint(out, cid - prev)
        prev = cid
    in_comp = set(comp.var_ids)
    for cid, gap in zip(comp.cstr_ids, comp.gaps):
        c = constraints[cid]
        if c.is_clausal():
            continue
        if saturate:
            min_open = min(a for a, l in c.terms if lit_var(l) in in_comp)
            gap = saturate_gap(gap, min_open)
        _write_uvarint(out, gap - 1)
    return bytes(out)


def decode_component(data: bytes, constraints) -> Component:
    """Inverse of :func:`encode_component`.

    The returned gaps are the values stored in the key, which for a
    saturating encoder are the canonicalized degrees rather than the raw
    ones; clausal constraints decode to a gap of 1.
    """
    pos = 0
    n_vars, pos = _read_uvarint(data, pos)
    var_ids = []
    prev = 0
    for _ in range(n_vars):
        delta, pos = _read_uvarint(data, pos)
        prev += delta
        var_ids.append(prev)
    n_cstrs, pos = _read_uvarint(data, pos)
    cstr_ids = []
    prev = 0
    for _ in range(n_cstrs):
        delta, pos = _read_uvarint(data, pos)
        prev += delta
        cstr_ids.append(prev)
    gaps = []
    for cid in cstr_ids:
        if constraints[cid].is_clausal():
            gaps.append(1)
        else:
            stored, pos = _read_uvarint(data, pos)
            gaps.append(stored + 1)
    if pos != len(data):
        raise ValueError("trailing bytes in component key")
    return Component(var_ids, cstr_ids, gaps)


class CountCache:
    """Byte-key to model-count store with an insertion log.

    The log gives every entry a position; ``purge_from(pos)`` drops all
    entries inserted at or after ``pos``, which the search uses to
    retract results computed under assumptions a conflict later refuted.
    When the byte budget overflows, a random entry among the oldest
    window is evicted, so long-lived entries near the root go last.

    ``fingerprint_only`` replaces keys by 16-byte digests. That trades
    away exactness: a digest collision would silently merge two different
    subproblems, so it is opt-in and excluded from verification modes.
    """

    __slots__ = ("max_bytes", "fingerprint_only", "bytes_used", "bytes_peak",
                 "hits", "misses", "stores", "evictions", "purged",
                 "debug_corrupt_after",
                 "_store", "_log", "_scan_start", "_rng", "_store_seq")

    ENTRY_OVERHEAD = 64
    EVICTION_WINDOW = 1024

    def __init__(self, max_bytes: int = 256 << 20, fingerprint_only: bool = False,
                 seed: int = 0):
        self.max_bytes = max_bytes
        self.fingerprint_only = fingerprint_only
        self.bytes_used = 0
        self.bytes_peak = 0
        self.hits = 0
        self.misses = 0
        self.stores = 0
        self.evictions = 0
        self.purged = 0
        #: test hook: the Nth successful store writes a wrong count
        self.debug_corrupt_after: Optional[int] = None
        self._store = {}
        self._log = []
        self._scan_start = 0
        self._rng = random.Random(seed)
        self._store_seq = 0

    def __len__(self) -> int:
        return len(self._store)

    def _key(self, key: bytes) -> bytes:
        if self.fingerprint_only:
            return blake2b(key, digest_size=16).digest()
        return key

    @staticmethod
    def _entry_bytes(key: bytes, count: int) -> int:
        return len(key) + max(1, (count.bit_length() + 7) // 8) + CountCache.ENTRY_OVERHEAD

    def log_position(self) -> int:
        """Current end of the insertion log; feed to :meth:`purge_from`."""
        return len(self._log)

    def lookup(self, key: bytes):
        entry = self._store.get(self._key(key))
        if entry is None:
            self.misses += 1
            return None
        self.hits += 1
        return entry[0]

    def store(self, key: bytes, count: int) -> None:
        k = self._key(key)
        if k in self._store:
            # the earlier entry for the same subproblem stays authoritative
            return
        if self.debug_corrupt_after is not None and self._store_seq == self.debug_corrupt_after:
            count += 1
        self._store_seq += 1
        self._store[k] = (count, len(self._log))
        self._log.append(k)
        self.stores += 1
        self.bytes_used += self._entry_bytes(k, count)
        if self.bytes_used > self.bytes_peak:
            self.bytes_peak = self.bytes_used
        if self.bytes_used > self.max_bytes:
            self._evict()

    def purge_from(self, pos: int) -> int:
        """Remove every entry inserted at log position ``pos`` or later."""
        if pos >= len(self._log):
            return 0
        removed = 0
        for i in range(pos, len(self._log)):
            k = self._log[i]
            if k is None:
                continue
            count, _ = self._store.pop(k)
            self.bytes_used -= self._entry_bytes(k, count)
            removed += 1
        del self._log[pos:]
        if self._scan_start > pos:
            self._scan_start = pos
        self.purged += removed
        return removed

    def _evict(self) -> None:
        while self.bytes_used > self.max_bytes and self._store:
            log = self._log
            start = self._scan_start
            while start < len(log) and log[start] is None:
                start += 1
            self._scan_start = start
            if start >= len(log):
                return
            end = min(start + self.EVICTION_WINDOW, len(log))
            live = [i for i in range(start, end) if log[i] is not None]
            idx = live[self._rng.randrange(len(live))] if len(live) > 1 else live[0]
            k = log[idx]
            log[idx] = None
            count, _ = self._store.pop(k)
            self.bytes_used -= self._entry_bytes(k, count)
            self.evictions += 1
