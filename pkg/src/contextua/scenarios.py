"""Canonical fragments, empirical models, and random corpora.

Everything quantum lives here: Born-rule numbers are computed in floating
point and rationalized once per independent table entry (denominator bound
10**6), so every module downstream of a generator works with exact
rationals.  Generators assert their own output contracts — fragments
validate, empirical model tables are non-disturbing — rather than trusting
the construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from random import Random
from typing import Mapping, Sequence

from ._rat import rationalize
from .core_model import (
    EmpiricalModel,
    GptFragment,
    OnticRepresentation,
    probability,
    validate_fragment,
)
from .ddg import SimplicialComplex
from .interference import EventMeasure
from .vorobyev import CompatibilityHypergraph, is_acyclic

_ZERO = Fraction(0)
_ONE = Fraction(1)

# Measurement angles maximizing c(a0,b0) + c(a0,b1) + c(a1,b0) - c(a1,b1)
# for the singlet-type correlator c(x, y) = cos(x - y): all four terms hit
# cos(pi/4), so the combination reaches 2*sqrt(2).
TSIRELSON_ANGLES = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)

# Overlap of the optimal pentagram rays with the symmetric axis state:
# <psi|v_i><v_i|psi> = 1/sqrt(5) for every ray i.
KCBS_OVERLAP = 1.0 / math.sqrt(5.0)


def _check_model(m: EmpiricalModel) -> EmpiricalModel:
    """Assert exact marginal agreement on every context intersection."""
    h = m.hypergraph
    for i in range(len(h.contexts)):
        for j in range(i + 1, len(h.contexts)):
            shared = [x for x in h.contexts[i] if x in h.contexts[j]]
            if not shared:
                continue
            left = m.marginal(i, shared)
            right = m.marginal(j, shared)
            assert left == right, (
                f"generated model disturbs on {shared} between contexts "
                f"{h.contexts[i]} and {h.contexts[j]}"
            )
    return m


def _check_fragment(f: GptFragment) -> GptFragment:
    report = validate_fragment(f)
    assert report.ok, f"generated fragment fails validation: {report.violations}"
    return f


# ---------------------------------------------------------------------------
# exact fragments


def classical_simplex(n: int) -> GptFragment:
    """Simplex theory on ``n`` outcomes: corner states, coordinate effects."""
    if n < 2:
        raise ValueError(f"need at least two outcomes, got {n}")
    states = tuple(
        tuple(_ONE if j == i else _ZERO for j in range(n)) for i in range(n)
    )
    return _check_fragment(
        GptFragment(
            dimension=n,
            states=states,
            effects=states,
            unit_effect=tuple(_ONE for _ in range(n)),
            measurements=(tuple(range(n)),),
        )
    )


def gbit() -> GptFragment:
    """Square-state theory: 4 extremal states, 2 binary measurements.

    The four states are the corners of a square at fixed height; the two
    measurements read off the two square coordinates.  The alternating sum
    of the corners vanishes, which is the single state dependence.
    """
    half = Fraction(1, 2)
    states = (
        (_ONE, _ONE, _ONE),
        (-_ONE, _ONE, _ONE),
        (-_ONE, -_ONE, _ONE),
        (_ONE, -_ONE, _ONE),
    )
    effects = (
        (half, _ZERO, half),
        (-half, _ZERO, half),
        (_ZERO, half, half),
        (_ZERO, -half, half),
    )
    return _check_fragment(
        GptFragment(
            dimension=3,
            states=states,
            effects=effects,
            unit_effect=(_ZERO, _ZERO, _ONE),
            measurements=((0, 1), (2, 3)),
        )
    )


def halving_fragment() -> GptFragment:
    """Two-outcome classical fragment with a mixed third state.

    The third state is the even mixture of the two corners, so the state
    dependence has weights (1, 1, -2).  The second measurement halves the
    first effect, producing effect dependencies that are not sign-balanced.
    """
    half = Fraction(1, 2)
    return _check_fragment(
        GptFragment(
            dimension=2,
            states=((_ONE, _ZERO), (_ZERO, _ONE), (half, half)),
            effects=((_ONE, _ZERO), (_ZERO, _ONE), (half, _ZERO), (half, _ONE)),
            unit_effect=(_ONE, _ONE),
            measurements=((0, 1), (2, 3)),
        )
    )


_QUBIT_AXES = (
    (_ONE, _ZERO, _ZERO),
    (_ZERO, _ONE, _ZERO),
    (_ZERO, _ZERO, _ONE),
)


def _into_ball(point: Sequence[float | Fraction]) -> tuple[Fraction, ...]:
    """Rationalize a Bloch vector and shrink it exactly into the unit ball."""
    norm = math.sqrt(sum(float(x) ** 2 for x in point))
    if norm > 1.0 + 1e-9:
        raise ValueError(f"Bloch vector {tuple(point)} lies outside the unit ball")
    vec = tuple(rationalize(x) for x in point)
    sq = sum(x * x for x in vec)
    if sq > 1:
        scale = rationalize(1.0 / math.sqrt(float(sq)))
        while scale * scale * sq > 1:
            scale *= Fraction(999_999, 1_000_000)
        vec = tuple(scale * x for x in vec)
    return vec


def qubit_fragment(
    points: Sequence[Sequence[float | Fraction]] | None = None,
    axes: Sequence[Sequence[float | Fraction]] | None = None,
) -> GptFragment:
    """Qubit in the Bloch picture: state (1, r), effect (1/2, a/2).

    ``points`` are the state Bloch vectors (default: the six axis points),
    ``axes`` the measurement directions (default: x, y, z).  Inputs are
    rationalized and shrunk into the unit ball, which keeps every pairing
    (1 +- a.r)/2 inside [0, 1] exactly.
    """
    half = Fraction(1, 2)
    ball_axes = (
        _QUBIT_AXES if axes is None else tuple(_into_ball(a) for a in axes)
    )
    if points is None:
        ball_points = tuple(a for a in ball_axes) + tuple(
            tuple(-x for x in a) for a in ball_axes
        )
    else:
        ball_points = tuple(_into_ball(p) for p in points)
    states = tuple((_ONE,) + r for r in ball_points)
    effects = []
    measurements = []
    for a in ball_axes:
        measurements.append((len(effects), len(effects) + 1))
        effects.append((half,) + tuple(x / 2 for x in a))
        effects.append((half,) + tuple(-x / 2 for x in a))
    return _check_fragment(
        GptFragment(
            dimension=4,
            states=states,
            effects=tuple(effects),
            unit_effect=(_ONE, _ZERO, _ZERO, _ZERO),
            measurements=tuple(measurements),
        )
    )


def _pr_components() -> tuple[tuple[Fraction, ...], ...]:
    """Correlator-coordinate states (1, a0, a1, b0, b1, a0b0, a0b1, a1b0, a1b1)."""

    def corr(c00, c01, c10, c11):
        return (_ONE, _ZERO, _ZERO, _ZERO, _ZERO) + tuple(
            Fraction(c) for c in (c00, c01, c10, c11)
        )

    def det(a0, a1, b0, b1):
        return (_ONE,) + tuple(
            Fraction(v) for v in (a0, a1, b0, b1, a0 * b0, a0 * b1, a1 * b0, a1 * b1)
        )

    return (
        corr(1, 1, 1, -1),
        corr(-1, -1, -1, 1),
        det(1, 1, 1, 1),
        det(1, 1, -1, -1),
        det(-1, -1, 1, 1),
        det(-1, -1, -1, -1),
    )


def pr_box_fragment() -> GptFragment:
    """Two-party binary no-signalling fragment in correlator coordinates.

    Nine components: the unit, four single-party expectations, and four
    product expectations.  Sixteen effects (one per outcome pair of each
    measurement pair), six states: the two extremal correlated boxes and
    four deterministic ones.  The average of the correlated boxes meets
    the average of the four deterministic states, which is the one state
    dependence the construction plants.
    """
    quarter = Fraction(1, 4)
    effects = []
    measurements = []
    for x in range(2):
        for y in range(2):
            measurements.append(tuple(len(effects) + k for k in range(4)))
            for i in range(2):
                for j in range(2):
                    vec = [_ZERO] * 9
                    vec[0] = quarter
                    vec[1 + x] = quarter * (-1) ** i
                    vec[3 + y] = quarter * (-1) ** j
                    vec[5 + 2 * x + y] = quarter * (-1) ** (i + j)
                    effects.append(tuple(vec))
    return _check_fragment(
        GptFragment(
            dimension=9,
            states=_pr_components(),
            effects=tuple(effects),
            unit_effect=(_ONE,) + (_ZERO,) * 8,
            measurements=tuple(measurements),
        )
    )


def noisy_pr_fragment(weight: Fraction | str | float = Fraction(3, 4)) -> GptFragment:
    """PR fragment with every state mixed toward the uniform box.

    ``weight`` is the surviving extremal fraction; the uniform box is the
    correlator-free state (1, 0, ..., 0).  Mixing each state with the same
    fixed vector preserves the state dependence because its coefficients
    sum to zero.
    """
    w = Fraction(weight).limit_denominator(10**6)
    if not 0 <= w <= 1:
        raise ValueError(f"weight must lie in [0, 1], got {w}")
    base = pr_box_fragment()
    uniform = (_ONE,) + (_ZERO,) * 8
    states = tuple(
        tuple(w * s + (1 - w) * u for s, u in zip(state, uniform))
        for state in base.states
    )
    return _check_fragment(
        GptFragment(
            dimension=9,
            states=states,
            effects=base.effects,
            unit_effect=base.unit_effect,
            measurements=base.measurements,
        )
    )


# ---------------------------------------------------------------------------
# empirical models

_TWO_PARTY = CompatibilityHypergraph(
    measurements=("a0", "a1", "b0", "b1"),
    contexts=(("a0", "b0"), ("a0", "b1"), ("a1", "b0"), ("a1", "b1")),
)


def _two_party_model(correlators: Sequence[Fraction]) -> EmpiricalModel:
    """Uniform-marginal two-party model from four exact correlators."""
    tables = []
    for c in correlators:
        assert abs(c) <= 1, f"correlator {c} out of range"
        agree = (1 + c) / 4
        differ = (1 - c) / 4
        tables.append((agree, differ, differ, agree))
    return _check_model(
        EmpiricalModel(
            hypergraph=_TWO_PARTY,
            outcomes={m: 2 for m in _TWO_PARTY.measurements},
            tables=tuple(tables),
        )
    )


def pr_box() -> EmpiricalModel:
    """Extremal no-signalling box: outcomes agree except when x = y = 1."""
    return _two_party_model(
        (Fraction(1), Fraction(1), Fraction(1), Fraction(-1))
    )


def chsh_quantum(
    angles: Sequence[float] | None = None,
) -> EmpiricalModel:
    """Singlet-type two-party model with correlator cos(angle difference).

    ``angles`` is (a0, a1, b0, b1); the default is the maximizing set.
    Each correlator is rationalized once, after which the uniform marginals
    are exact by construction.
    """
    a0, a1, b0, b1 = TSIRELSON_ANGLES if angles is None else tuple(angles)
    correlators = tuple(
        rationalize(math.cos(x - y)) for x in (a0, a1) for y in (b0, b1)
    )
    return _two_party_model(correlators)


def chsh_value(m: EmpiricalModel) -> Fraction:
    """c00 + c01 + c10 - c11 from a two-party binary model's tables."""
    values = []
    for i in range(4):
        e = _ZERO
        for (a, b), p in zip(
            ((0, 0), (0, 1), (1, 0), (1, 1)),
            m.tables[i],
        ):
            e += p if a == b else -p
        values.append(e)
    return values[0] + values[1] + values[2] - values[3]


def kcbs_quantum() -> EmpiricalModel:
    """Pentagon of exclusive binary measurements at the symmetric optimum.

    Adjacent measurements never both fire, and each fires with the same
    rationalized probability r ~ 1/sqrt(5); the shared value makes every
    intersection marginal agree exactly.
    """
    r = rationalize(KCBS_OVERLAP)
    names = tuple(f"v{i}" for i in range(5))
    contexts = tuple((names[i], names[(i + 1) % 5]) for i in range(5))
    table = (1 - 2 * r, r, r, _ZERO)
    return _check_model(
        EmpiricalModel(
            hypergraph=CompatibilityHypergraph(names, contexts),
            outcomes={n: 2 for n in names},
            tables=tuple(table for _ in contexts),
        )
    )


def kcbs_value(m: EmpiricalModel) -> Fraction:
    """Sum over contexts of the probability that the first member fires."""
    total = _ZERO
    for i, context in enumerate(m.hypergraph.contexts):
        total += m.marginal(i, context[:1])[(1,)]
    return total


def product_model(
    h: CompatibilityHypergraph,
    outcomes: Mapping[str, int],
    marginals: Mapping[str, Sequence[Fraction]],
) -> EmpiricalModel:
    """Independent-measurement model: every context table is a product."""
    tables = []
    for context in h.contexts:
        table = []
        for assignment in _assignments(context, outcomes):
            p = _ONE
            for m, o in zip(context, assignment):
                p *= Fraction(marginals[m][o])
            table.append(p)
        tables.append(tuple(table))
    return _check_model(
        EmpiricalModel(hypergraph=h, outcomes=dict(outcomes), tables=tuple(tables))
    )


def induced_singleton_model(f: GptFragment, state_index: int) -> EmpiricalModel:
    """One singleton context per fragment measurement, read off one state."""
    names = tuple(f"m{i}" for i in range(len(f.measurements)))
    outcomes = {
        name: len(meas) for name, meas in zip(names, f.measurements)
    }
    tables = tuple(
        tuple(probability(f, state_index, r) for r in meas)
        for meas in f.measurements
    )
    return _check_model(
        EmpiricalModel(
            hypergraph=CompatibilityHypergraph(names, tuple((n,) for n in names)),
            outcomes=outcomes,
            tables=tables,
        )
    )


# ---------------------------------------------------------------------------
# measures


def two_slit_measure(amplitude_a: complex, amplitude_b: complex) -> EventMeasure:
    """Two-path intensity measure: masses |psi_a|^2, |psi_b|^2, |psi_a+psi_b|^2."""
    a = complex(amplitude_a)
    b = complex(amplitude_b)
    return EventMeasure(
        atoms=("a", "b"),
        masses={
            frozenset("a"): abs(a) ** 2,
            frozenset("b"): abs(b) ** 2,
            frozenset("ab"): abs(a + b) ** 2,
        },
    )


# ---------------------------------------------------------------------------
# random corpora


def _assignments(context: Sequence[str], outcomes: Mapping[str, int]):
    from itertools import product

    return product(*(range(outcomes[m]) for m in context))


def _random_distribution(rng: Random, k: int) -> tuple[Fraction, ...]:
    weights = [rng.randint(0, 6) for _ in range(k)]
    if not any(weights):
        weights[rng.randrange(k)] = 1
    total = sum(weights)
    return tuple(Fraction(w, total) for w in weights)


def random_complex(rng: Random, max_simplices: int = 30) -> SimplicialComplex:
    """Face closure of a few random generators, capped at ``max_simplices``."""
    while True:
        n = rng.randint(3, 8)
        generators = []
        for _ in range(rng.randint(1, 5)):
            size = rng.randint(1, min(4, n))
            generators.append(rng.sample(range(n), size))
        complex_ = SimplicialComplex(generators)
        total = sum(
            len(complex_.simplices(d)) for d in range(complex_.dimension + 1)
        )
        if total <= max_simplices:
            return complex_


def random_acyclic_hypergraph(
    rng: Random, max_measurements: int | None = None
) -> CompatibilityHypergraph:
    """Join-tree growth: each new context reuses part of one existing context.

    Every context after the first takes a subset of a single previous
    context plus at least one fresh measurement, so the result always
    reduces to the empty hypergraph.  ``max_measurements`` caps the total
    measurement count (useful to keep downstream LPs small).
    """
    fresh = 0
    cap = max_measurements if max_measurements is not None else 11

    def take(k):
        nonlocal fresh
        names = tuple(f"m{fresh + i}" for i in range(k))
        fresh += k
        return names

    contexts = [take(min(rng.randint(1, 3), cap))]
    for _ in range(rng.randint(0, 4)):
        if fresh >= cap:
            break
        anchor = rng.choice(contexts)
        shared = tuple(
            m for m in anchor if rng.random() < 0.5
        )
        contexts.append(shared + take(min(rng.randint(1, 2), cap - fresh)))
    measurements = tuple(f"m{i}" for i in range(fresh))
    h = CompatibilityHypergraph(measurements, tuple(contexts))
    assert is_acyclic(h)
    return h


def _rip_order(h: CompatibilityHypergraph) -> list[int]:
    """Construction order in which each context meets earlier ones inside
    a single earlier context; exists exactly for acyclic hypergraphs."""
    sets = [frozenset(c) for c in h.contexts]
    remaining = list(range(len(sets)))
    peeled = []
    while remaining:
        if len(remaining) == 1:
            peeled.append(remaining.pop())
            break
        for idx in remaining:
            others = [j for j in remaining if j != idx]
            separator = sets[idx] & frozenset().union(*(sets[j] for j in others))
            if any(separator <= sets[j] for j in others):
                peeled.append(idx)
                remaining.remove(idx)
                break
        else:
            raise ValueError("hypergraph is not acyclic")
    peeled.reverse()
    return peeled


def _table_marginal(
    table: dict, context: Sequence[str], onto: Sequence[str]
) -> dict:
    positions = [list(context).index(m) for m in onto]
    out: dict[tuple[int, ...], Fraction] = {}
    for assignment, p in table.items():
        key = tuple(assignment[pos] for pos in positions)
        out[key] = out.get(key, _ZERO) + p
    return out


def random_nondisturbing_model(
    h: CompatibilityHypergraph,
    rng: Random,
    outcomes: Mapping[str, int] | None = None,
) -> EmpiricalModel:
    """Random exactly-consistent empirical model on ``h``.

    On an acyclic hypergraph the tables are built in join-tree order:
    each context extends the marginal it inherits by a fresh random
    conditional, which parameterizes every consistent family.  On cyclic
    hypergraphs the fallback is a random mixture of deterministic global
    assignments (consistent, but never contextual).
    """
    if outcomes is None:
        outcomes = {m: rng.randint(2, 3) for m in h.measurements}
    tables: dict[int, dict] = {}
    if is_acyclic(h):
        placed: list[int] = []
        for idx in _rip_order(h):
            context = h.contexts[idx]
            seen = {m for j in placed for m in h.contexts[j]}
            shared = tuple(m for m in context if m in seen)
            rest = tuple(m for m in context if m not in shared)
            if not placed or not shared:
                base = {(): _ONE}
                shared = ()
                rest = tuple(context)
            else:
                anchor = next(
                    j for j in placed if set(shared) <= set(h.contexts[j])
                )
                base = _table_marginal(tables[anchor], h.contexts[anchor], shared)
            rest_keys = list(_assignments(rest, outcomes))
            table: dict[tuple[int, ...], Fraction] = {}
            for shared_key, mass in base.items():
                conditional = _random_distribution(rng, len(rest_keys))
                for rest_key, weight in zip(rest_keys, conditional):
                    merged = dict(zip(shared, shared_key))
                    merged.update(zip(rest, rest_key))
                    full = tuple(merged[m] for m in context)
                    table[full] = mass * weight
            tables[idx] = table
            placed.append(idx)
    else:
        count = rng.randint(1, 6)
        globals_ = [
            {m: rng.randrange(outcomes[m]) for m in h.measurements}
            for _ in range(count)
        ]
        weights = _random_distribution(rng, count)
        for idx, context in enumerate(h.contexts):
            table = {}
            for g, w in zip(globals_, weights):
                key = tuple(g[m] for m in context)
                table[key] = table.get(key, _ZERO) + w
            tables[idx] = table
    flat = []
    for idx, context in enumerate(h.contexts):
        flat.append(
            tuple(
                tables[idx].get(assignment, _ZERO)
                for assignment in _assignments(context, outcomes)
            )
        )
    return _check_model(
        EmpiricalModel(hypergraph=h, outcomes=dict(outcomes), tables=tuple(flat))
    )


def random_fragment(rng: Random, with_transformations: bool = False) -> GptFragment:
    """Random simplex-embedded fragment; always validates.

    States are random distributions, each measurement is a random fuzzy
    partition of the coordinates, so with the unit included the effect
    family always outnumbers the dimension and carries dependencies.
    """
    dim = rng.randint(2, 4)
    states = tuple(_random_distribution(rng, dim) for _ in range(rng.randint(2, 4)))
    effects: list[tuple[Fraction, ...]] = []
    measurements = []
    for _ in range(rng.randint(2, 3)):
        k = rng.randint(2, 3)
        rows = [_random_distribution(rng, k) for _ in range(dim)]
        measurements.append(tuple(len(effects) + i for i in range(k)))
        for i in range(k):
            effects.append(tuple(rows[j][i] for j in range(dim)))
    transformations = ()
    if with_transformations:
        transformations = tuple(
            tuple(
                tuple(column[row] for column in columns)
                for row in range(dim)
            )
            for columns in (
                [_random_distribution(rng, dim) for _ in range(dim)]
                for _ in range(rng.randint(1, 2))
            )
        )
    return _check_fragment(
        GptFragment(
            dimension=dim,
            states=states,
            effects=tuple(effects),
            unit_effect=tuple(_ONE for _ in range(dim)),
            measurements=tuple(measurements),
            transformations=transformations,
        )
    )


def random_ontic_table(
    f: GptFragment, rng: Random, contextual: bool
) -> OnticRepresentation:
    """Random response/distribution tables for ``f``.

    With ``contextual=False`` the tables come from splitting the simplex
    corners of a simplex-embedded fragment: distributions, responses, and
    kernels are all read off the fragment's own vectors through the split,
    so every residual vanishes identically.  With ``contextual=True`` the
    tables are free random rationals and generically reproduce nothing.
    """
    n_trans = len(f.transformations)
    if contextual:
        lam = rng.randint(2, 4)
        distributions = tuple(
            _random_distribution(rng, lam) for _ in f.states
        )
        responses = tuple(
            tuple(Fraction(rng.randint(0, 8), 8) for _ in range(lam))
            for _ in f.effects
        )
        kernels = (
            tuple(
                tuple(_random_distribution(rng, lam) for _ in range(lam))
                for _ in range(n_trans)
            )
            if n_trans
            else None
        )
        return OnticRepresentation(lam, distributions, responses, kernels)

    split: list[tuple[int, Fraction]] = []
    for corner in range(f.dimension):
        if rng.random() < 0.3:
            a = Fraction(rng.randint(1, 3), 4)
            split.append((corner, a))
            split.append((corner, 1 - a))
        else:
            split.append((corner, _ONE))
    rng.shuffle(split)
    lam = len(split)
    distributions = tuple(
        tuple(c * state[j] for j, c in split) for state in f.states
    )
    responses = tuple(
        tuple(effect[j] for j, _ in split) for effect in f.effects
    )
    kernels = (
        tuple(
            tuple(
                tuple(c2 * matrix[j2][j1] for j2, c2 in split)
                for j1, _ in split
            )
            for matrix in f.transformations
        )
        if n_trans
        else None
    )
    return OnticRepresentation(lam, distributions, responses, kernels)


# ---------------------------------------------------------------------------
# named registry for the command line


def _two_slit_cli(phase: float = 0.0) -> EventMeasure:
    amp = math.sqrt(0.5)
    return two_slit_measure(amp, amp * complex(math.cos(phase), math.sin(phase)))


def _chsh_cli(a0=None, a1=None, b0=None, b1=None) -> EmpiricalModel:
    defaults = TSIRELSON_ANGLES
    angles = tuple(
        float(v) if v is not None else d
        for v, d in zip((a0, a1, b0, b1), defaults)
    )
    return chsh_quantum(angles)


SCENARIOS: dict[str, tuple[str, object]] = {
    "classical-bit": ("fragment", lambda: classical_simplex(2)),
    "classical-simplex": ("fragment", lambda n=3: classical_simplex(int(n))),
    "gbit": ("fragment", gbit),
    "halving": ("fragment", halving_fragment),
    "qubit": ("fragment", qubit_fragment),
    "pr-box-fragment": ("fragment", pr_box_fragment),
    "noisy-pr-fragment": ("fragment", lambda weight="3/4": noisy_pr_fragment(weight)),
    "pr-box": ("model", pr_box),
    "chsh-quantum": ("model", _chsh_cli),
    "kcbs-quantum": ("model", kcbs_quantum),
    "two-slit": ("measure", _two_slit_cli),
}
