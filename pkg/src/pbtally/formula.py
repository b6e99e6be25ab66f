"""Pseudo-Boolean formulas in normalized ">=" form.

Literals are signed integers: ``+v`` is variable ``v`` itself, ``-v`` its
negation. Variables are numbered ``1..num_vars``. Every stored constraint
has positive saturated coefficients over distinct variables and a degree
of at least 1; weaker material is either dropped as trivially true or
recorded as an unsatisfiable-input marker on the formula.

Coefficients, degrees, and per-constraint coefficient sums must fit in a
signed 64-bit integer; anything larger is rejected when the formula is
built. Model counts themselves are unbounded Python integers.
"""

from __future__ import annotations

from typing import Iterable, Sequence

I64_MAX = (1 << 63) - 1

GE = ">="
EQ = "="
LE = "<="
RELATIONAL_OPS = (GE, EQ, LE)

#: A partial assignment: variable id -> bool.
Assignment = dict

RawTerm = tuple  # (signed coefficient, signed literal)


class OpbParseError(ValueError):
    """Malformed OPB input. The message always names the offending line."""

    def __init__(self, line_no: int, message: str):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


class CoefficientOverflowError(OverflowError):
    """A coefficient, degree, or coefficient sum left the 64-bit range."""


def lit_var(lit: int) -> int:
    """Variable id of a literal."""
    return lit if lit > 0 else -lit


def lit_is_true(lit: int, assignment: Assignment) -> bool:
    """True when the literal evaluates to 1 under the partial assignment."""
    return assignment.get(lit_var(lit)) == (lit > 0)


def lit_is_false(lit: int, assignment: Assignment) -> bool:
    """True when the literal evaluates to 0 under the partial assignment."""
    return assignment.get(lit_var(lit)) == (lit < 0)


class PBConstraint:
    """One normalized constraint: sum(coeff * literal) >= degree.

    ``terms`` is a tuple of ``(coeff, lit)`` pairs sorted by variable id,
    with every coefficient positive and no variable repeated.
    """

    __slots__ = ("cid", "terms", "degree")

    def __init__(self, cid: int, terms: Sequence[tuple], degree: int):
        self.cid = cid
        self.terms = tuple(terms)
        self.degree = degree

    def coef_sum(self) -> int:
        return sum(c for c, _ in self.terms)

    def is_clausal(self) -> bool:
        """An ordinary disjunctive clause: every coefficient and the degree are 1."""
        return self.degree == 1 and all(c == 1 for c, _ in self.terms)

    def variables(self) -> list:
        return [lit_var(l) for _, l in self.terms]

    def body(self) -> tuple:
        """Identity of the constraint minus its id, usable as a dict key."""
        return (self.terms, self.degree)

    def __repr__(self) -> str:
        lhs = " + ".join(
            "%d*%sx%d" % (c, "~" if l < 0 else "", lit_var(l)) for c, l in self.terms
        )
        return "PBConstraint(%d: %s >= %d)" % (self.cid, lhs or "0", self.degree)


class PBFormula:
    """An immutable conjunction of normalized constraints over 1..num_vars.

    ``unsat_at_load`` is set when some input constraint could not be
    satisfied by any assignment (its coefficient sum is below its degree);
    such constraints are not stored, the flag stands in for them.
    """

    __slots__ = ("num_vars", "constraints", "unsat_at_load")

    def __init__(self, num_vars: int, bodies: Iterable[tuple], unsat_at_load: bool = False):
        if num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        constraints = []
        for terms, degree in bodies:
            constraints.append(PBConstraint(len(constraints), terms, degree))
        self.num_vars = num_vars
        self.constraints = tuple(constraints)
        self.unsat_at_load = unsat_at_load
        for c in self.constraints:
            for _, lit in c.terms:
                v = lit_var(lit)
                if not 1 <= v <= num_vars:
                    raise ValueError("constraint %d references x%d outside 1..%d"
                                     % (c.cid, v, num_vars))

    def __repr__(self) -> str:
        return "PBFormula(num_vars=%d, constraints=%d%s)" % (
            self.num_vars, len(self.constraints),
            ", unsat_at_load" if self.unsat_at_load else "")


def _check_i64(value: int, what: str) -> int:
    if value > I64_MAX or value < -I64_MAX - 1:
        raise CoefficientOverflowError("%s exceeds the 64-bit range" % what)
    return value


def _normalize_geq(raw_terms: Iterable[RawTerm], degree: int):
    """Normalize ``sum(raw) >= degree`` into one canonical body.

    Returns ``("ok", terms, degree)``, ``("trivial",)`` for a constraint no
    assignment can violate, or ``("unsat",)`` for one no assignment can
    satisfy. Duplicate variables are merged; a literal and its negation
    cancel through x + ~x = 1.
    """
    net: dict = {}
    rhs = _check_i64(degree, "degree")
    for coeff, lit in raw_terms:
        _check_i64(coeff, "coefficient")
        v = lit_var(lit)
        if v < 1:
            raise ValueError("variable ids must be >= 1")
        if lit > 0:
            net[v] = net.get(v, 0) + coeff
        else:
            # a * ~x  ==  a - a*x
            net[v] = net.get(v, 0) - coeff
            rhs -= coeff
        _check_i64(net[v], "merged coefficient")
        _check_i64(rhs, "adjusted degree")
    terms = []
    for v in sorted(net):
        c = net[v]
        if c == 0:
            continue
        if c > 0:
            terms.append((c, v))
        else:
            # -a * x  ==  a * ~x - a
            terms.append((-c, -v))
            rhs = _check_i64(rhs - c, "adjusted degree")
    if rhs <= 0:
        return ("trivial",)
    # saturation: a coefficient above the degree acts exactly like the degree
    terms = [(min(c, rhs), l) for c, l in terms]
    total = sum(c for c, _ in terms)
    _check_i64(total, "coefficient sum")
    if total < rhs:
        return ("unsat",)
    return ("ok", tuple(terms), rhs)


def normalize_terms(raw_terms: Sequence[RawTerm], op: str, degree: int):
    """Normalize one input constraint into zero, one, or two ">=" bodies.

    Returns ``(bodies, unsat)`` where each body is a ``(terms, degree)``
    pair ready for :class:`PBFormula`, and ``unsat`` reports whether any
    direction of the constraint is unsatisfiable outright. "<=" input is
    multiplied by -1 on both sides; "=" input becomes a ">=" / "<=" pair.
    """
    if op not in RELATIONAL_OPS:
        raise ValueError("unknown relational operator %r" % (op,))
    directions = []
    if op in (GE, EQ):
        directions.append((raw_terms, degree))
    if op in (LE, EQ):
        directions.append(([(-c, l) for c, l in raw_terms], -degree))
    bodies = []
    unsat = False
    for terms, rhs in directions:
        result = _normalize_geq(terms, rhs)
        if result[0] == "ok":
            bodies.append((result[1], result[2]))
        elif result[0] == "unsat":
            unsat = True
    return bodies, unsat


def build_formula(num_vars: int, raw_constraints: Iterable[tuple]) -> PBFormula:
    """Build a normalized formula from ``(raw_terms, op, degree)`` triples."""
    bodies = []
    unsat = False
    for raw_terms, op, degree in raw_constraints:
        new_bodies, this_unsat = normalize_terms(raw_terms, op, degree)
        bodies.extend(new_bodies)
        unsat = unsat or this_unsat
    return PBFormula(num_vars, bodies, unsat)


def constraint_gap(c: PBConstraint, assignment: Assignment) -> int:
    """Degree minus the coefficient sum of literals true under the assignment.

    A value of 0 or less means the constraint is satisfied no matter how
    the remaining variables are set.
    """
    return c.degree - sum(coeff for coeff, lit in c.terms if lit_is_true(lit, assignment))


def constraint_slack(c: PBConstraint, assignment: Assignment) -> int:
    """Coefficient sum of not-yet-false literals minus the degree.

    A negative value means no extension of the assignment can satisfy the
    constraint.
    """
    return sum(coeff for coeff, lit in c.terms if not lit_is_false(lit, assignment)) - c.degree


def _parse_opb_int(token: str, line_no: int, what: str) -> int:
    text = token
    if text.startswith("+"):
        text = text[1:]
    if not text or not (text.isdigit() or (text[0] == "-" and text[1:].isdigit())):
        raise OpbParseError(line_no, "malformed %s token %r" % (what, token))
    value = int(text)
    if value > I64_MAX or value < -I64_MAX - 1:
        raise OpbParseError(line_no, "%s %r exceeds the 64-bit range" % (what, token))
    return value


def _parse_opb_literal(token: str, line_no: int) -> int:
    text = token
    negated = False
    if text.startswith("~"):
        negated = True
        text = text[1:]
    if not text.startswith("x") or not text[1:].isdigit():
        raise OpbParseError(line_no, "malformed literal token %r" % (token,))
    index = int(text[1:])
    if index < 1:
        raise OpbParseError(line_no, "variable index must be >= 1 in %r" % (token,))
    if index > I64_MAX:
        raise OpbParseError(line_no, "variable index %r exceeds the 64-bit range" % (token,))
    return -index if negated else index


def parse_opb(source) -> PBFormula:
    """Parse OPB text (str or bytes) into a normalized formula.

    Comment lines start with ``*``; a ``#variable=`` header, when present,
    fixes the variable count (unreferenced trailing variables then count as
    free). Each constraint line is ``<coeff> <lit> ... <op> <degree> ;``
    with ``op`` among ``>=``, ``=``, ``<=``. Objective lines and nonlinear
    terms are rejected.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8", "replace")
    elif isinstance(source, str):
        text = source
    else:
        raise TypeError("parse_opb expects str or bytes")

    header_vars = None
    max_var = 0
    bodies = []
    unsat = False
    for line_no, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("*"):
            if header_vars is None and "#variable=" in line:
                after = line.split("#variable=", 1)[1].strip()
                head = after.split()
                if head and head[0].isdigit():
                    header_vars = int(head[0])
            continue
        if line.startswith("min:") or line.startswith("max:"):
            raise OpbParseError(line_no, "objective lines are not supported")

        tokens = line.split()
        if tokens[-1] == ";":
            tokens.pop()
        elif tokens[-1].endswith(";"):
            tokens[-1] = tokens[-1][:-1]
        else:
            raise OpbParseError(line_no, "missing ';' terminator")
        if not tokens:
            raise OpbParseError(line_no, "empty constraint")

        op_positions = [i for i, t in enumerate(tokens) if t in RELATIONAL_OPS]
        if len(op_positions) != 1:
            raise OpbParseError(line_no, "expected exactly one relational operator")
        op_idx = op_positions[0]
        if op_idx != len(tokens) - 2:
            raise OpbParseError(line_no, "expected a single degree after the operator")
        op = tokens[op_idx]
        degree = _parse_opb_int(tokens[-1], line_no, "degree")

        term_tokens = tokens[:op_idx]
        if len(term_tokens) % 2 != 0:
            raise OpbParseError(line_no, "malformed term list (odd token count)")
        raw_terms = []
        for i in range(0, len(term_tokens), 2):
            coeff_tok, lit_tok = term_tokens[i], term_tokens[i + 1]
            if coeff_tok.startswith("x") or coeff_tok.startswith("~"):
                raise OpbParseError(line_no, "nonlinear terms are not supported")
            coeff = _parse_opb_int(coeff_tok, line_no, "coefficient")
            lit = _parse_opb_literal(lit_tok, line_no)
            max_var = max(max_var, lit_var(lit))
            raw_terms.append((coeff, lit))

        try:
            new_bodies, this_unsat = normalize_terms(raw_terms, op, degree)
        except CoefficientOverflowError as exc:
            raise OpbParseError(line_no, str(exc)) from exc
        bodies.extend(new_bodies)
        unsat = unsat or this_unsat

    num_vars = max_var if header_vars is None else max(header_vars, max_var)
    return PBFormula(num_vars, bodies, unsat)


def parse_opb_file(path) -> PBFormula:
    with open(path, "rb") as handle:
        return parse_opb(handle.read())


def emit_opb(formula: PBFormula) -> str:
    """Render a normalized formula back to OPB text.

    Inverse of :func:`parse_opb` on normalized formulas: negated literals
    come out as ``~x<i>`` and every constraint is a ``>=`` line.
    """
    lines = ["* #variable= %d #constraint= %d" % (formula.num_vars, len(formula.constraints))]
    for c in formula.constraints:
        parts = []
        for coeff, lit in c.terms:
            name = "x%d" % lit if lit > 0 else "~x%d" % -lit
            parts.append("+%d %s" % (coeff, name))
        parts.append(">= %d ;" % c.degree)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
