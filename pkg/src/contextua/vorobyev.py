"""Compatibility hypergraphs, Graham reduction, and the cohomological
noncontextuality certificate for object complexes.

Graham reduction repeatedly (1) deletes a measurement that belongs to exactly
one context and (2) deletes a context contained in another.  A hypergraph that
reduces to nothing is acyclic; on acyclic scenarios every non-disturbing
behaviour extends to a global distribution, so acyclicity certifies the
absence of contextuality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import ddg

if TYPE_CHECKING:  # pragma: no cover
    from .connection import ObjectComplex


@dataclass(frozen=True)
class CompatibilityHypergraph:
    """Measurement names plus the list of jointly measurable subsets."""

    measurements: tuple[str, ...]
    contexts: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))
        object.__setattr__(
            self, "contexts", tuple(tuple(c) for c in self.contexts)
        )
        seen = set()
        for context in self.contexts:
            if len(set(context)) != len(context):
                raise ValueError(f"repeated measurement in context {context}")
            key = frozenset(context)
            if key in seen:
                raise ValueError(f"duplicate context {context}")
            seen.add(key)
            for m in context:
                if m not in self.measurements:
                    raise ValueError(f"context {context} uses unknown measurement {m!r}")
        covered = {m for c in self.contexts for m in c}
        missing = [m for m in self.measurements if m not in covered]
        if missing:
            raise ValueError(f"measurements in no context: {missing}")

    @property
    def is_empty(self) -> bool:
        return not self.contexts and not self.measurements


#: A reduction step: (rule name, payload...).  Rules are
#: ("lone-measurement", m, context), ("subset-context", child, parent) and
#: ("empty-context", context).
ReductionStep = tuple


def graham_reduce(
    h: CompatibilityHypergraph, choice_seed: int | None = None
) -> tuple[CompatibilityHypergraph, list[ReductionStep]]:
    """Reduce to the fixpoint; return it plus the replayable step trace.

    The default order is deterministic: the lexicographically least lone
    measurement first, then the least-index subset context.  ``choice_seed``
    randomizes the choices instead (used to check that the emptiness verdict
    does not depend on the order).
    """
    rng = random.Random(choice_seed) if choice_seed is not None else None
    contexts = [list(c) for c in h.contexts]
    trace: list[ReductionStep] = []
    while True:
        # rule 1: a measurement in exactly one context
        counts: dict[str, int] = {}
        for context in contexts:
            for m in context:
                counts[m] = counts.get(m, 0) + 1
        lone = sorted(m for m, n in counts.items() if n == 1)
        if lone:
            m = rng.choice(lone) if rng else lone[0]
            idx = next(i for i, c in enumerate(contexts) if m in c)
            trace.append(("lone-measurement", m, tuple(contexts[idx])))
            contexts[idx].remove(m)
            continue
        # empty contexts count as subsets of anything and simply drop out
        empties = [i for i, c in enumerate(contexts) if not c]
        if empties:
            i = rng.choice(empties) if rng else empties[0]
            trace.append(("empty-context", ()))
            contexts.pop(i)
            continue
        # rule 2: a context contained in another
        subset_pairs = [
            (i, j)
            for i, ci in enumerate(contexts)
            for j, cj in enumerate(contexts)
            if i != j and set(ci) <= set(cj)
        ]
        if subset_pairs:
            i, j = rng.choice(subset_pairs) if rng else subset_pairs[0]
            trace.append(("subset-context", tuple(contexts[i]), tuple(contexts[j])))
            contexts.pop(i)
            continue
        break
    remaining = sorted({m for c in contexts for m in c})
    # Deduplicate identical contexts defensively (rule 2 already handles them).
    reduced = CompatibilityHypergraph(tuple(remaining), tuple(tuple(c) for c in contexts))
    return reduced, trace


def is_acyclic(h: CompatibilityHypergraph) -> bool:
    """True iff Graham reduction empties the hypergraph."""
    reduced, _ = graham_reduce(h)
    return reduced.is_empty


def generalized_vorobyev(oc: "ObjectComplex") -> str:
    """Cohomological noncontextuality certificate for an object complex.

    With no attached disks, a trivial first cohomology means every closed
    valuation difference integrates to a potential, so no equivalence loop can
    carry a phase: the verdict is "noncontextual-certified".  A nontrivial
    group certifies nothing in either direction, hence "inconclusive".
    """
    if oc.view != "topological":
        raise ValueError("certificate requires the topological view (no attached disks)")
    group = ddg.homology(oc.complex, 1)
    if group.betti == 0:
        return "noncontextual-certified"
    return "inconclusive"
