"""Marginal disagreement: detection, scenario extension, and fraction splits.

Contexts that share measurements may disagree on the shared marginals.  This
module finds those disagreements exactly, rewrites scenarios so they cannot
occur (per-context measurement copies), splits edge valuations into
potential + connection + disturbance, and extends the fraction decomposition
with a disturbing part so the three weights still sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from . import ddg, linalg
from .connection import ConnectionDecomposition, ObjectComplex
from .core_model import EmpiricalModel
from .lp import LinearProgram
from .noncontextuality import FractionReport, contextual_fraction
from .vorobyev import CompatibilityHypergraph

Finding = tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...], Fraction]


def _marginal(
    model: EmpiricalModel, ctx_index: int, onto: Sequence[str]
) -> dict[tuple[int, ...], Fraction]:
    context = model.hypergraph.contexts[ctx_index]
    positions = [context.index(name) for name in onto]
    table = model.tables[ctx_index]
    out: dict[tuple[int, ...], Fraction] = {}
    ranges = [range(model.outcomes[name]) for name in context]
    for flat, assignment in enumerate(product(*ranges)):
        key = tuple(assignment[p] for p in positions)
        out[key] = out.get(key, Fraction(0)) + table[flat]
    return out


def detect_disturbance(model: EmpiricalModel) -> list[Finding]:
    """All context pairs whose shared marginals differ, with exact L-inf gaps.

    Returns ``(context_a, context_b, shared_measurements, gap)`` tuples in
    context-index order; an empty list is exactly non-disturbance.
    """
    h = model.hypergraph
    order = {name: k for k, name in enumerate(h.measurements)}
    findings: list[Finding] = []
    for i in range(len(h.contexts)):
        for j in range(i + 1, len(h.contexts)):
            shared = sorted(
                set(h.contexts[i]) & set(h.contexts[j]), key=order.__getitem__
            )
            if not shared:
                continue
            left = _marginal(model, i, shared)
            right = _marginal(model, j, shared)
            gap = max(abs(left[key] - right[key]) for key in left)
            if gap > 0:
                findings.append(
                    (h.contexts[i], h.contexts[j], tuple(shared), gap)
                )
    return findings


@dataclass(frozen=True)
class ExtensionResult:
    """Rewritten scenario plus the copy -> original measurement mapping."""

    model: EmpiricalModel
    mapping: dict[str, str]


def _split_measurement(
    model: EmpiricalModel, name: str
) -> tuple[EmpiricalModel, dict[str, str]]:
    h = model.hypergraph
    renames: dict[str, str] = {m: m for m in h.measurements if m != name}
    contexts = []
    copies = []
    for i, context in enumerate(h.contexts):
        if name in context:
            copy = f"{name}@{i}"
            assert copy not in h.measurements, f"name collision on {copy}"
            copies.append(copy)
            renames[copy] = name
            contexts.append(tuple(copy if m == name else m for m in context))
        else:
            contexts.append(context)
    measurements = tuple(m for m in h.measurements if m != name) + tuple(copies)
    outcomes = {
        m: model.outcomes[renames[m]] for m in measurements
    }
    rebuilt = EmpiricalModel(
        CompatibilityHypergraph(measurements, tuple(contexts)),
        outcomes,
        model.tables,  # same rows: copies keep their column positions
    )
    return rebuilt, renames


def extend_scenario(model: EmpiricalModel) -> ExtensionResult:
    """Split disturbing shared measurements into per-context copies.

    Iterates on the first measurement of the first disagreeing intersection
    until detection comes back empty, so the result is non-disturbing by
    construction; non-disturbing input passes through unchanged.
    """
    current = model
    mapping = {m: m for m in model.hypergraph.measurements}
    while True:
        findings = detect_disturbance(current)
        if not findings:
            return ExtensionResult(current, mapping)
        _, _, shared, _ = findings[0]
        current, renames = _split_measurement(current, shared[0])
        mapping = {new: mapping[old] for new, old in renames.items()}


def decompose_with_eta(
    oc: ObjectComplex, xi: ddg.Cochain, charts: Mapping[int, object]
) -> ConnectionDecomposition:
    """Split xi into d(potential) + connection + disturbance.

    The potential is the least-squares fit over within-chart edges only;
    edges crossing a chart boundary contribute nothing to it and absorb
    their full residual into the disturbance cochain, so the connection
    lives strictly inside charts and the recomposition is exact.
    """
    if xi.degree != 1:
        raise ValueError(f"valuations have degree 1, got {xi.degree}")
    complex_ = oc.complex
    edges = complex_.simplices(1)
    for edge in edges:
        for v in edge:
            if v not in charts:
                raise ValueError(f"chart map missing vertex {v}")
    kept = [e for e in edges if charts[e[0]] == charts[e[1]]]

    vertices = complex_.vertices
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    lap = [[Fraction(0)] * n for _ in range(n)]
    rhs = [Fraction(0) for _ in range(n)]
    neighbors: dict[int, list[int]] = {v: [] for v in vertices}
    for a, b in kept:
        ia, ib = index[a], index[b]
        lap[ia][ia] += 1
        lap[ib][ib] += 1
        lap[ia][ib] -= 1
        lap[ib][ia] -= 1
        value = xi[(a, b)]
        rhs[ib] += value
        rhs[ia] -= value
        neighbors[a].append(b)
        neighbors[b].append(a)

    pinned: set[int] = set()
    seen: set[int] = set()
    for start in vertices:
        if start in seen:
            continue
        component = {start}
        queue = [start]
        while queue:
            v = queue.pop()
            for w in neighbors[v]:
                if w not in component:
                    component.add(w)
                    queue.append(w)
        seen |= component
        pinned.add(
            oc.base_vertex if oc.base_vertex in component else min(component)
        )

    free = [i for i, v in enumerate(vertices) if v not in pinned]
    system = [[lap[i][j] for j in free] for i in free]
    target = [rhs[i] for i in free]
    solution = linalg.solve(system, target)
    assert solution is not None, "within-chart Laplacian system must be solvable"
    potential = ddg.Cochain(
        0,
        {
            (vertices[i],): solution[pos]
            for pos, i in enumerate(free)
            if solution[pos] != 0
        },
    )
    residual = xi - ddg.coboundary(complex_, potential)
    kept_set = set(kept)
    omega = ddg.Cochain(1, {e: residual[e] for e in kept_set})
    eta = ddg.Cochain(1, {e: residual[e] for e in edges if e not in kept_set})
    return ConnectionDecomposition(
        complex=complex_,
        potential=potential,
        connection=omega,
        disturbance=eta,
        view=oc.view,
    )


def fractions_with_disturbance(model: EmpiricalModel) -> FractionReport:
    """Fraction report with the disturbing weight split off first.

    The disturbing fraction is one minus the largest sub-mass that all
    contexts can shed while agreeing on every shared marginal (an exact LP);
    the noncontextual/contextual split of the agreeing part is then rescaled
    so the three weights sum to one exactly.
    """
    if not detect_disturbance(model):
        return contextual_fraction(model)

    h = model.hypergraph
    order = {name: k for k, name in enumerate(h.measurements)}
    program = LinearProgram(sense="max")
    program.add_variable("t", objective=1)
    names: list[list[str]] = []
    for i, context in enumerate(h.contexts):
        row = []
        for flat, value in enumerate(model.tables[i]):
            var = f"u_{i}_{flat}"
            program.add_variable(var)
            program.add_constraint({var: 1}, "<=", value)
            row.append(var)
        names.append(row)
        program.add_constraint(
            {**{var: 1 for var in row}, "t": -1}, "=", 0
        )
    for i in range(len(h.contexts)):
        for j in range(i + 1, len(h.contexts)):
            shared = sorted(
                set(h.contexts[i]) & set(h.contexts[j]), key=order.__getitem__
            )
            if not shared:
                continue
            for key in product(*(range(model.outcomes[m]) for m in shared)):
                coeffs: dict[str, Fraction] = {}
                for ctx_index, sign in ((i, 1), (j, -1)):
                    context = h.contexts[ctx_index]
                    positions = [context.index(name) for name in shared]
                    ranges = [range(model.outcomes[m]) for m in context]
                    for flat, assignment in enumerate(product(*ranges)):
                        if tuple(assignment[p] for p in positions) == key:
                            var = names[ctx_index][flat]
                            coeffs[var] = coeffs.get(var, Fraction(0)) + sign
                program.add_constraint(coeffs, "=", 0)
    solution = program.solve()
    assert solution.status == "optimal", solution.status
    t = solution.assignment.get("t", Fraction(0))
    common = tuple(
        tuple(solution.assignment.get(var, Fraction(0)) for var in row)
        for row in names
    )

    leftover = None
    if t < 1:
        leftover = EmpiricalModel(
            h,
            dict(model.outcomes),
            tuple(
                tuple(
                    (p - u) / (1 - t)
                    for p, u in zip(model.tables[i], common[i])
                )
                for i in range(len(h.contexts))
            ),
        )
    if t == 0:
        return FractionReport(
            ncf=Fraction(0),
            cf=Fraction(0),
            df=Fraction(1),
            p_nc=None,
            p_sc=None,
            p_d=leftover,
        )
    agreeing = EmpiricalModel(
        h,
        dict(model.outcomes),
        tuple(tuple(u / t for u in row) for row in common),
    )
    inner = contextual_fraction(agreeing)
    return FractionReport(
        ncf=t * inner.ncf,
        cf=t * inner.cf,
        df=1 - t,
        p_nc=inner.p_nc,
        p_sc=inner.p_sc,
        p_d=leftover,
    )
