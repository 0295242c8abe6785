"""Exact LP suite: response polytope, simplex-embedding feasibility,
contextual fraction, minimal negativity.

The central solvability decision: the ontic space for the feasibility
check is the vertex set of the response polytope.  Any valuation family
lies inside that polytope, so its mixtures can be rebased onto the
vertices without changing what is reproducible — which turns a bilinear
existence question into a finite linear program.

Everything here is exact rational; no floating point touches any
certification path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from . import linalg
from .connection import build_object_complex, decompose, valuation_from_values
from .core_model import (
    EmpiricalModel,
    GptFragment,
    OperationalEquivalence,
    effect_equivalences,
    probability,
    state_equivalences,
    validate_fragment,
)
from .lp import LinearProgram, LpSolution

_ZERO = Fraction(0)
_ONE = Fraction(1)

MAX_EFFECTS = 20
MAX_EQUIVALENCES = 12
MAX_ASSIGNMENTS = 4096


class ScaleCapError(ValueError):
    """Input is beyond the desk-scale caps of the exact enumerations."""


class DisturbingModelError(ValueError):
    """Model marginals disagree on a context intersection."""


# ---------------------------------------------------------------------------
# response polytope


@dataclass(frozen=True)
class ResponsePolytope:
    """Feasible effect valuations: box, per-measurement normalization,
    and one equality per effect dependence.

    ``vertices`` is the irredundant, lexicographically sorted extreme-point
    list; ``constraints`` the defining rows as (coefficients, op, rhs) over
    effect indices.  ``status`` is "empty" when the system is inconsistent.
    """

    status: str
    vertices: tuple[tuple[Fraction, ...], ...]
    constraints: tuple[tuple[tuple[Fraction, ...], str, Fraction], ...]

    @property
    def is_empty(self) -> bool:
        return self.status == "empty"


def _incidence(point, constraints):
    active = set()
    for idx, (coeffs, beta) in enumerate(constraints):
        if sum(c * x for c, x in zip(coeffs, point)) == beta:
            active.add(idx)
    return frozenset(active)


def _cut_vertices(dim, box, extras):
    """Vertex set of {t : box, and a.t <= beta for (a, beta) in extras}.

    Incremental double description seeded on the bounding box; vertex
    incidence is rebuilt from scratch after every insertion, which keeps
    the combinatorial adjacency test exact under degeneracy.
    """
    constraints = []
    for k, (lo, hi) in enumerate(box):
        unit = tuple(_ONE if j == k else _ZERO for j in range(dim))
        constraints.append((unit, hi))
        constraints.append((tuple(-x for x in unit), -lo))
    corners = []
    for bits in product((0, 1), repeat=dim):
        corners.append(
            tuple(box[k][1] if bits[k] else box[k][0] for k in range(dim))
        )
    points = corners
    seen = len(constraints)
    incidence = [_incidence(p, constraints) for p in points]
    for a, beta in extras:
        constraints.append((a, beta))
        seen += 1
        margins = [sum(c * x for c, x in zip(a, p)) - beta for p in points]
        keep = [i for i, v in enumerate(margins) if v < 0]
        on = [i for i, v in enumerate(margins) if v == 0]
        drop = [i for i, v in enumerate(margins) if v > 0]
        if not keep and not on:
            return []
        if not drop:
            incidence = [_incidence(p, constraints) for p in points]
            continue
        survivors = {points[i] for i in keep + on}
        for i in keep:
            for j in drop:
                shared = incidence[i] & incidence[j]
                blocked = any(
                    w not in (i, j) and shared <= incidence[w]
                    for w in range(len(points))
                )
                if blocked:
                    continue
                num = beta - sum(c * x for c, x in zip(a, points[i]))
                den = margins[j] - margins[i]
                lam = num / den if den else None
                assert lam is not None and 0 < lam < 1
                survivors.add(
                    tuple(
                        x + lam * (y - x)
                        for x, y in zip(points[i], points[j])
                    )
                )
        points = sorted(survivors)
        incidence = [_incidence(p, constraints) for p in points]
    return points


def response_vertices(
    f: GptFragment, eqs: Sequence[OperationalEquivalence] | None = None
) -> ResponsePolytope:
    """Exact vertex enumeration of the valuation polytope.

    Equivalence coefficients may reference index ``len(f.effects)``, which
    stands for the unit effect and contributes its constant value 1 to the
    equality's right-hand side.
    """
    if eqs is None:
        eqs = effect_equivalences(f, include_unit=True)
    n = len(f.effects)
    if n > MAX_EFFECTS:
        raise ScaleCapError(f"scale cap: {n} effects exceeds {MAX_EFFECTS}")
    if len(eqs) > MAX_EQUIVALENCES:
        raise ScaleCapError(
            f"scale cap: {len(eqs)} equivalences exceeds {MAX_EQUIVALENCES}"
        )

    equalities: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for meas in f.measurements:
        row = [_ZERO] * n
        for r in meas:
            row[r] += _ONE
        equalities.append((tuple(row), _ONE))
    for eq in eqs:
        if eq.kind != "effect":
            raise ValueError(f"expected effect equivalences, got {eq.kind!r}")
        row = [_ZERO] * n
        rhs = _ZERO
        for r, c in eq.coefficients.items():
            if r == n:
                rhs -= c
            elif 0 <= r < n:
                row[r] += c
            else:
                raise ValueError(f"equivalence references missing effect {r}")
        equalities.append((tuple(row), rhs))

    constraints: list[tuple[tuple[Fraction, ...], str, Fraction]] = []
    for r in range(n):
        unit = tuple(_ONE if j == r else _ZERO for j in range(n))
        constraints.append((unit, ">=", _ZERO))
        constraints.append((unit, "<=", _ONE))
    constraints.extend((row, "=", rhs) for row, rhs in equalities)

    matrix = [list(row) for row, _ in equalities]
    rhs_vec = [rhs for _, rhs in equalities]
    base = linalg.solve(matrix, rhs_vec)
    if base is None:
        return ResponsePolytope("empty", (), tuple(constraints))
    basis = linalg.nullspace(matrix)
    dim = len(basis)
    if dim == 0:
        ok = all(_ZERO <= x <= _ONE for x in base)
        vertices = (tuple(base),) if ok else ()
        return ResponsePolytope(
            "ok" if ok else "empty", vertices, tuple(constraints)
        )

    # per basis vector, a coordinate owned by it alone fixes a bound on t_k
    box = []
    for k in range(dim):
        owned = next(
            j
            for j in range(n)
            if basis[k][j] != 0
            and all(basis[k2][j] == 0 for k2 in range(dim) if k2 != k)
        )
        reach = (1 + abs(base[owned])) / abs(basis[k][owned])
        box.append((-reach - 1, reach + 1))

    extras = []
    for r in range(n):
        direction = tuple(basis[k][r] for k in range(dim))
        extras.append((tuple(-x for x in direction), base[r]))
        extras.append((direction, _ONE - base[r]))
    t_vertices = _cut_vertices(dim, box, extras)
    vertices = sorted(
        {
            tuple(
                base[r] + sum(basis[k][r] * t[k] for k in range(dim))
                for r in range(n)
            )
            for t in t_vertices
        }
    )
    status = "ok" if vertices else "empty"
    return ResponsePolytope(status, tuple(vertices), tuple(constraints))


# ---------------------------------------------------------------------------
# simplex-embedding feasibility and negativity


def _prepared(f, eqs_states, eqs_effects):
    if f.transformations:
        raise ValueError(
            "fragments with transformations are not supported by the "
            "embedding feasibility check"
        )
    report = validate_fragment(f)
    if not report.ok:
        raise ValueError(f"fragment fails validation: {report.violations}")
    if eqs_states is None:
        eqs_states = state_equivalences(f)
    if eqs_effects is None:
        eqs_effects = effect_equivalences(f, include_unit=True)
    polytope = response_vertices(f, eqs_effects)
    assert not polytope.is_empty, (
        "a validated fragment's own probabilities inhabit the polytope"
    )
    return eqs_states, eqs_effects, polytope


def _embedding_constraints(program, f, eqs_states, vertices, name):
    """Rows shared by the feasibility and the negativity programs.

    ``name(lam, s)`` maps an ontic point and a state index to a dict of
    signed variable names, so the same rows serve split variables too.
    """
    n_states = len(f.states)
    for s in range(n_states):
        row: dict[str, Fraction] = {}
        for lam in range(len(vertices)):
            for var, sign in name(lam, s).items():
                row[var] = sign
        program.add_constraint(row, "=", 1)
    for eq in eqs_states:
        for lam in range(len(vertices)):
            row = {}
            for s, c in eq.coefficients.items():
                for var, sign in name(lam, s).items():
                    row[var] = sign * c
            program.add_constraint(row, "=", 0)
    for r in range(len(f.effects)):
        for s in range(n_states):
            row = {}
            for lam, vertex in enumerate(vertices):
                if vertex[r] == 0:
                    continue
                for var, sign in name(lam, s).items():
                    row[var] = sign * vertex[r]
            program.add_constraint(row, "=", probability(f, s, r))


def noncontextual_lp(
    f: GptFragment,
    eqs_states: Sequence[OperationalEquivalence] | None = None,
    eqs_effects: Sequence[OperationalEquivalence] | None = None,
) -> LpSolution:
    """Feasibility of a classical embedding over the response vertices.

    Searches for per-state mixtures mu(lam | s) >= 0 that sum to one,
    respect every state dependence pointwise, and reproduce the fragment's
    probability table through the vertex valuations.  Optimal means such
    an embedding exists; infeasible carries an exact Farkas certificate.
    """
    eqs_states, eqs_effects, polytope = _prepared(f, eqs_states, eqs_effects)
    program = LinearProgram("min")
    for lam in range(len(polytope.vertices)):
        for s in range(len(f.states)):
            program.add_variable(f"mu_{lam}_{s}")
    _embedding_constraints(
        program,
        f,
        eqs_states,
        polytope.vertices,
        lambda lam, s: {f"mu_{lam}_{s}": _ONE},
    )
    return program.solve()


def minimal_negativity(
    f: GptFragment,
    eqs_states: Sequence[OperationalEquivalence] | None = None,
    eqs_effects: Sequence[OperationalEquivalence] | None = None,
) -> tuple[LpSolution, Fraction | None]:
    """Cheapest signed embedding: mu = plus - minus, minimizing the total
    minus mass.  Zero exactly when the unsigned feasibility check passes."""
    eqs_states, eqs_effects, polytope = _prepared(f, eqs_states, eqs_effects)
    program = LinearProgram("min")
    for lam in range(len(polytope.vertices)):
        for s in range(len(f.states)):
            program.add_variable(f"pos_{lam}_{s}")
            program.add_variable(f"neg_{lam}_{s}", objective=1)
    _embedding_constraints(
        program,
        f,
        eqs_states,
        polytope.vertices,
        lambda lam, s: {f"pos_{lam}_{s}": _ONE, f"neg_{lam}_{s}": -_ONE},
    )
    solution = program.solve()
    assert solution.status == "optimal", (
        "signed mixtures always reach the table of a validated fragment"
    )
    return solution, solution.objective


# ---------------------------------------------------------------------------
# contextual fraction


@dataclass(frozen=True)
class FractionReport:
    """Convex split of an empirical model's behavior.

    ``ncf + cf + df == 1`` always.  ``p_nc`` is the normalized globally
    explainable part, ``p_sc`` the normalized remainder, ``p_d`` the
    normalized disturbing part (only from the disturbance pipeline).
    ``p_sc`` is reported as the remainder only; no strong-contextuality
    certificate is attached to it, which ``p_sc_certified`` records.
    """

    ncf: Fraction
    cf: Fraction
    df: Fraction
    p_nc: EmpiricalModel | None
    p_sc: EmpiricalModel | None
    p_d: EmpiricalModel | None = None
    p_sc_certified: bool = field(default=False)

    def __post_init__(self):
        total = self.ncf + self.cf + self.df
        assert total == 1, f"fractions sum to {total}"
        for part in (self.ncf, self.cf, self.df):
            assert 0 <= part <= 1


def assert_nondisturbing(m: EmpiricalModel) -> None:
    """Raise DisturbingModelError naming the first disagreeing intersection."""
    h = m.hypergraph
    for i in range(len(h.contexts)):
        for j in range(i + 1, len(h.contexts)):
            shared = [x for x in h.contexts[i] if x in h.contexts[j]]
            if shared and m.marginal(i, shared) != m.marginal(j, shared):
                raise DisturbingModelError(
                    f"contexts {h.contexts[i]} and {h.contexts[j]} disagree "
                    f"on their intersection {tuple(shared)}"
                )


def _global_assignments(m: EmpiricalModel):
    names = m.hypergraph.measurements
    count = 1
    for name in names:
        count *= m.outcomes[name]
        if count > MAX_ASSIGNMENTS:
            raise ScaleCapError(
                f"scale cap: more than {MAX_ASSIGNMENTS} global assignments"
            )
    return [
        dict(zip(names, combo))
        for combo in product(*(range(m.outcomes[x]) for x in names))
    ]


def contextual_fraction(m: EmpiricalModel) -> FractionReport:
    """Largest weight of a global-assignment mixture fitting under the model.

    Maximizes the total weight of deterministic global assignments whose
    context restrictions stay below every table entry; the optimum is the
    noncontextual fraction, its complement the contextual fraction, and
    the two normalized parts recompose the input exactly.
    """
    assert_nondisturbing(m)
    assignments = _global_assignments(m)
    program = LinearProgram("max")
    for g in range(len(assignments)):
        program.add_variable(f"w_{g}", objective=1)
    h = m.hypergraph
    for i, context in enumerate(h.contexts):
        for local in m.assignments(context):
            row = {
                f"w_{g}": _ONE
                for g, assignment in enumerate(assignments)
                if all(assignment[x] == o for x, o in zip(context, local))
            }
            if row:
                program.add_constraint(
                    row, "<=", m.table_value(i, local)
                )
    solution = program.solve()
    assert solution.status == "optimal"
    ncf = solution.objective
    cf = 1 - ncf

    p_nc = p_sc = None
    if ncf > 0:
        tables = []
        for i, context in enumerate(h.contexts):
            table = []
            for local in m.assignments(context):
                mass = sum(
                    (
                        solution.assignment[f"w_{g}"]
                        for g, assignment in enumerate(assignments)
                        if all(
                            assignment[x] == o
                            for x, o in zip(context, local)
                        )
                    ),
                    _ZERO,
                )
                table.append(mass / ncf)
            tables.append(tuple(table))
        p_nc = EmpiricalModel(h, dict(m.outcomes), tuple(tables))
    if cf > 0:
        tables = []
        for i, context in enumerate(h.contexts):
            table = []
            for flat, local in enumerate(m.assignments(context)):
                nc_part = p_nc.tables[i][flat] * ncf if p_nc else _ZERO
                table.append((m.tables[i][flat] - nc_part) / cf)
            tables.append(tuple(table))
        p_sc = EmpiricalModel(h, dict(m.outcomes), tuple(tables))
    return FractionReport(ncf=ncf, cf=cf, df=_ZERO, p_nc=p_nc, p_sc=p_sc)


# ---------------------------------------------------------------------------
# witness-decomposition bridge


def fraction_via_connection(
    f: GptFragment,
    solution: LpSolution,
    eqs_effects: Sequence[OperationalEquivalence] | None = None,
    state_index: int = 0,
    measurement_index: int = 0,
) -> Fraction:
    """Noncontextual weight recovered from the witness's exact parts.

    Every response vertex used by the witness is turned into an effect-loop
    valuation, split into potential and connection; the potential part's
    spoke values are paired with one measurement's effects and averaged
    under the witness weights.  On feasible instances each valuation is
    fully exact, so the result equals the embedding's total weight — the
    noncontextual fraction of the reproduced behavior.
    """
    if solution.status != "optimal":
        raise ValueError("bridge needs a feasible embedding witness")
    if eqs_effects is None:
        eqs_effects = effect_equivalences(f, include_unit=True)
    polytope = response_vertices(f, eqs_effects)
    oc = build_object_complex("effect", f, eqs_effects, view="topological")
    total = _ZERO
    for lam, vertex in enumerate(polytope.vertices):
        weight = solution.assignment.get(f"mu_{lam}_{state_index}", _ZERO)
        if weight == 0:
            continue
        xi = valuation_from_values(oc, list(vertex) + [_ONE])
        dec = decompose(oc, xi)
        for r in f.measurements[measurement_index]:
            spoke = oc.star_edge(r)
            total += weight * (xi[spoke] - dec.connection[spoke])
    return total
