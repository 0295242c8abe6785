#!/usr/bin/env python3
"""One-screen summary of every built-in scenario.

Fragments get the embedding verdict, minimal negativity, and the loop count
of both object complexes; tables get the fraction split; event measures get
their pair interference.  Useful as a quick smoke check after changes —
the noisy fragment rows take a few seconds each.
"""

import argparse
from fractions import Fraction

from contextua.core_model import (
    effect_equivalences,
    state_equivalences,
    validate_fragment,
)
from contextua.disturbance import fractions_with_disturbance
from contextua.interference import all_i2
from contextua.noncontextuality import minimal_negativity, noncontextual_lp
from contextua.scenarios import SCENARIOS


def fragment_row(name, f):
    report = validate_fragment(f)
    solution = noncontextual_lp(f)
    _, negativity = minimal_negativity(f)
    loops = len(state_equivalences(f)) + len(effect_equivalences(f, include_unit=True))
    return (
        f"{name:>18} {f.dimension:>4} {'ok' if report.ok else 'BROKEN':>7}"
        f" {loops:>6} {solution.status:>11} {str(negativity):>11}"
    )


def model_row(name, m):
    split = fractions_with_disturbance(m)
    return (
        f"{name:>18} {len(m.hypergraph.contexts):>9} {str(split.ncf):>10}"
        f" {str(split.cf):>16} {str(split.df):>8}"
    )


def measure_row(name, m):
    pairs = all_i2(m)
    worst = max(pairs.values(), key=abs, default=Fraction(0))
    return f"{name:>18} {len(m.atoms):>6} {len(pairs):>7} {float(worst):>12.6f}"


def main() -> None:
    argparse.ArgumentParser(description=__doc__).parse_args()
    made = {name: (kind, factory()) for name, (kind, factory) in SCENARIOS.items()}

    print(f"{'fragment':>18} {'dim':>4} {'valid':>7} {'loops':>6} {'embedding':>11} {'negativity':>11}")
    for name, (kind, obj) in made.items():
        if kind == "fragment":
            print(fragment_row(name, obj))
    print()
    print(f"{'table':>18} {'contexts':>9} {'ncf':>10} {'cf':>16} {'df':>8}")
    for name, (kind, obj) in made.items():
        if kind == "model":
            print(model_row(name, obj))
    print()
    print(f"{'measure':>18} {'atoms':>6} {'pairs':>7} {'max |i2|':>12}")
    for name, (kind, obj) in made.items():
        if kind == "measure":
            print(measure_row(name, obj))


if __name__ == "__main__":
    main()
