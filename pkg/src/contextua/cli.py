"""Command-line front end: load JSON descriptions, run analyses, report.

Every subcommand prints a human-readable table by default and canonical JSON
with ``--json``; identical inputs and flags produce byte-identical output.
Exit codes: 0 on success, 1 when ``--strict`` is set and the analysis verdict
is negative (contextual / infeasible / disturbing / invalid), 2 on input
errors (unknown subcommand, malformed JSON, scale caps), each with its own
message.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from multiprocessing import Pool
from random import Random

from . import ddg
from . import noncontextuality as _nc
from ._rat import format_rational, parse_rational
from .connection import (
    build_object_complex,
    curvature,
    decompose,
    decomposition_report,
    disk_integral,
    loop_phases,
    monodromy_class,
    valuation_from_values,
)
from .core_model import (
    EmpiricalModel,
    effect_equivalences,
    fragment_from_json,
    fragment_to_json,
    model_from_json,
    model_to_json,
    probability,
    state_equivalences,
    transformation_equivalences,
    validate_fragment,
)
from .disturbance import (
    detect_disturbance,
    extend_scenario,
    fractions_with_disturbance,
)
from .interference import all_i2, all_i3, measure_from_json, measure_to_json
from .noncontextuality import (
    DisturbingModelError,
    ScaleCapError,
    contextual_fraction,
    minimal_negativity,
    noncontextual_lp,
)
from .scenarios import (
    SCENARIOS,
    pr_box,
    random_acyclic_hypergraph,
    random_fragment,
    random_nondisturbing_model,
)
from .vorobyev import CompatibilityHypergraph, generalized_vorobyev, graham_reduce


class _InputError(Exception):
    """User-input problem: reported on stderr with exit code 2."""


# -- loading -----------------------------------------------------------------


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load(parser_fn, path: str, what: str):
    text = _read(path)
    try:
        return parser_fn(text)
    except json.JSONDecodeError as exc:
        raise _InputError(f"malformed JSON in {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise _InputError(f"bad {what} file {path}: {exc}") from exc


def _load_hypergraph(path: str) -> CompatibilityHypergraph:
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _InputError(f"malformed JSON in {path}: {exc}") from exc
    try:
        if isinstance(doc, dict) and "hypergraph" in doc:
            return model_from_json(text).hypergraph
        return CompatibilityHypergraph(
            tuple(doc["measurements"]),
            tuple(tuple(c) for c in doc["contexts"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise _InputError(f"bad hypergraph file {path}: {exc}") from exc


def _parse_values(text: str, expected: int) -> list[Fraction]:
    try:
        values = [parse_rational(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _InputError(f"bad --values entry: {exc}") from exc
    if len(values) != expected:
        raise _InputError(
            f"--values needs {expected} comma-separated rationals, got {len(values)}"
        )
    return values


def _coerce_param(raw: str):
    for parse in (int, Fraction, float):
        try:
            return parse(raw)
        except ValueError:
            continue
    return raw


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise _InputError(f"--param expects key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        params[key.strip()] = _coerce_param(raw.strip())
    return params


# -- shared pieces -----------------------------------------------------------

_KIND_EQUIVALENCES = {
    "state": state_equivalences,
    "effect": lambda f: effect_equivalences(f, include_unit=True),
    "transformation": transformation_equivalences,
}


def _object_values(args, f, kind: str) -> list[Fraction]:
    if kind == "state":
        expected = len(f.states)
    elif kind == "effect":
        expected = len(f.effects) + 1  # unit valuation rides along
    else:
        expected = len(f.transformations)
    if args.values is None:
        raise _InputError(
            f"--values with {expected} rationals is required for kind {kind!r}"
        )
    return _parse_values(args.values, expected)


def _complex_for(args, path: str, view: str):
    f = _load(fragment_from_json, path, "fragment")
    kind = args.kind
    eqs = _KIND_EQUIVALENCES[kind](f)
    oc = build_object_complex(kind, f, eqs, view)
    xi = valuation_from_values(oc, _object_values(args, f, kind))
    return oc, xi


# -- subcommand handlers: (report, bad_verdict) ------------------------------


def _cmd_validate(args):
    f = _load(fragment_from_json, args.file, "fragment")
    report = validate_fragment(f)
    return (
        {"ok": report.ok, "structural": report.structural, "violations": report.violations},
        not report.ok,
    )


def _cmd_equivalences(args):
    f = _load(fragment_from_json, args.file, "fragment")

    def payload(eqs):
        return [
            {
                "kind": eq.kind,
                "coefficients": {
                    str(i): format_rational(c)
                    for i, c in sorted(eq.coefficients.items())
                },
            }
            for eq in eqs
        ]

    report = {
        "states": payload(state_equivalences(f)),
        "effects": payload(effect_equivalences(f, include_unit=True)),
        "transformations": payload(transformation_equivalences(f)),
    }
    return report, False


def _cmd_nc_check(args):
    f = _load(fragment_from_json, args.file, "fragment")
    try:
        solution = noncontextual_lp(f)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    report = {"status": solution.status}
    if solution.status == "infeasible":
        report["certificate_verified"] = solution.certificate_checks()
    return report, solution.status != "optimal"


def _cmd_fraction(args):
    m = _load(model_from_json, args.file, "model")
    report = contextual_fraction(m)
    payload = {
        "ncf": format_rational(report.ncf),
        "cf": format_rational(report.cf),
        "df": format_rational(report.df),
        "has_noncontextual_part": report.p_nc is not None,
        "has_contextual_part": report.p_sc is not None,
    }
    return payload, report.cf > 0


def _cmd_negativity(args):
    f = _load(fragment_from_json, args.file, "fragment")
    try:
        _, negativity = minimal_negativity(f)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    return {"negativity": format_rational(negativity)}, negativity > 0


def _cmd_decompose(args):
    oc, xi = _complex_for(args, args.file, args.view)
    dec = decompose(oc, xi)
    return decomposition_report(oc, dec), False


def _cmd_curvature(args):
    oc, xi = _complex_for(args, args.file, "geometrical")
    dec = decompose(oc, xi)
    curv = curvature(oc, dec)
    report = {
        "curvature": {
            ".".join(str(v) for v in spx): format_rational(value)
            for spx, value in curv.values.items()
        },
        "disk_integrals": {
            str(oc.loops[i][0]): format_rational(disk_integral(oc, curv, i))
            for i in range(len(oc.disks))
        },
    }
    return report, False


def _cmd_phases(args):
    oc, xi = _complex_for(args, args.file, "topological")
    dec = decompose(oc, xi)
    phases = loop_phases(oc, dec)
    report = {
        "phases": {
            str(eq_id): format_rational(value) for eq_id, value in phases.items()
        },
        "all_zero": all(value == 0 for value in phases.values()),
    }
    flatness = ddg.coboundary(oc.complex, dec.connection)
    if flatness.is_zero:
        report["monodromy"] = monodromy_class(oc, dec)
    return report, not report["all_zero"]


def _cmd_homology(args):
    complex_ = _load(ddg.complex_from_json, args.file, "complex")
    group = ddg.homology(complex_, args.n)
    report = {
        "degree": group.degree,
        "betti": group.betti,
        "torsion": list(group.torsion),
    }
    return report, False


def _cmd_vorobyev(args):
    if args.generalized is not None:
        complex_ = _load(ddg.complex_from_json, args.generalized, "complex")
        betti = ddg.homology(complex_, 1).betti
        verdict = "noncontextual-certified" if betti == 0 else "inconclusive"
        return {"verdict": verdict, "betti_1": betti}, False
    if args.file is None:
        raise _InputError("vorobyev needs a hypergraph file or --generalized")
    h = _load_hypergraph(args.file)
    reduced, trace = graham_reduce(h)
    report = {
        "acyclic": reduced.is_empty,
        "remaining_contexts": [list(c) for c in reduced.contexts],
        "trace": [list(step[:1]) + [list(x) if isinstance(x, tuple) else x for x in step[1:]] for step in trace],
    }
    return report, False


def _cmd_interference(args):
    m = _load(measure_from_json, args.file, "measure")
    table = all_i2(m) if args.order == 2 else all_i3(m)

    def fmt(value):
        return format_rational(value) if isinstance(value, Fraction) else repr(float(value))

    report = {
        "order": args.order,
        "values": {"|".join(key): fmt(value) for key, value in sorted(table.items())},
    }
    return report, False


_RANDOM_KINDS = {
    "random-fragment": "fragment",
    "random-acyclic-model": "model",
}


def _emit_random(name: str, seed: int) -> str:
    if name == "random-fragment":
        return fragment_to_json(random_fragment(Random(seed)))
    h = random_acyclic_hypergraph(Random(seed), max_measurements=6)
    m = random_nondisturbing_model(
        h, Random(seed + 1), outcomes={name: 2 for name in h.measurements}
    )
    return model_to_json(m)


def _cmd_scenarios(args):
    if args.action == "list":
        names = sorted(SCENARIOS) + sorted(_RANDOM_KINDS)
        rows = [
            {"name": name, "kind": SCENARIOS[name][0] if name in SCENARIOS else _RANDOM_KINDS[name]}
            for name in sorted(names)
        ]
        return {"scenarios": rows}, False
    if args.name is None:
        raise _InputError("scenarios emit needs a scenario name")
    params = _parse_params(args.param)
    if args.name in _RANDOM_KINDS:
        if params:
            raise _InputError("random scenarios take --seed, not --param")
        return {"_raw": _emit_random(args.name, args.seed)}, False
    if args.name not in SCENARIOS:
        raise _InputError(
            f"unknown scenario {args.name!r}; try `contextua scenarios list`"
        )
    kind, factory = SCENARIOS[args.name]
    try:
        obj = factory(**params)
    except TypeError as exc:
        raise _InputError(f"bad parameters for {args.name}: {exc}") from exc
    except ValueError as exc:
        raise _InputError(f"bad parameter value for {args.name}: {exc}") from exc
    serializer = {
        "fragment": fragment_to_json,
        "model": model_to_json,
        "measure": measure_to_json,
    }[kind]
    return {"_raw": serializer(obj)}, False


def _cmd_disturbance(args):
    m = _load(model_from_json, args.file, "model")
    findings = detect_disturbance(m)
    report = {
        "disturbing": bool(findings),
        "findings": [
            {
                "contexts": [list(a), list(b)],
                "intersection": list(shared),
                "gap": format_rational(gap),
            }
            for a, b, shared, gap in findings
        ],
    }
    if args.extend:
        ext = extend_scenario(m)
        report["extension"] = {
            "contexts": [list(c) for c in ext.model.hypergraph.contexts],
            "mapping": dict(sorted(ext.mapping.items())),
        }
    if args.fractions:
        fractions = fractions_with_disturbance(m)
        report["fractions"] = {
            "ncf": format_rational(fractions.ncf),
            "cf": format_rational(fractions.cf),
            "df": format_rational(fractions.df),
        }
    return report, bool(findings)


# -- sweep -------------------------------------------------------------------


def _two_party_model_at(weight: Fraction) -> EmpiricalModel:
    from .scenarios import noisy_pr_fragment

    f = noisy_pr_fragment(weight)
    h = pr_box().hypergraph
    tables = tuple(
        tuple(probability(f, 0, 4 * ctx + flat) for flat in range(4))
        for ctx in range(4)
    )
    return EmpiricalModel(h, {m: 2 for m in h.measurements}, tables)


def _planted_gap_model(gap: Fraction) -> EmpiricalModel:
    h = CompatibilityHypergraph(("a", "b", "c"), (("a", "b"), ("b", "c")))
    q = Fraction(1, 2) - gap
    uniform = (Fraction(1, 4),) * 4
    skewed = (q / 2, q / 2, (1 - q) / 2, (1 - q) / 2)
    return EmpiricalModel(h, {"a": 2, "b": 2, "c": 2}, (uniform, skewed))


def _sweep_point(family: str, param_text: str) -> dict:
    param = parse_rational(param_text)
    if family == "pr-noise":
        from .scenarios import noisy_pr_fragment

        _, negativity = minimal_negativity(noisy_pr_fragment(param))
        report = contextual_fraction(_two_party_model_at(param))
        negativity_text = format_rational(negativity)
    else:  # disturbance-gap
        report = fractions_with_disturbance(_planted_gap_model(param))
        negativity_text = ""
    return {
        "param": param_text,
        "ncf": format_rational(report.ncf),
        "cf": format_rational(report.cf),
        "df": format_rational(report.df),
        "negativity": negativity_text,
    }


_SWEEP_DEFAULTS = {
    "pr-noise": "0,1/4,1/2,3/4,1",
    "disturbance-gap": "0,1/8,1/4,3/8,1/2",
}


def _cmd_sweep(args):
    family = args.family
    points_text = args.points or _SWEEP_DEFAULTS[family]
    points = [tok.strip() for tok in points_text.split(",") if tok.strip()]
    for tok in points:
        try:
            value = parse_rational(tok)
        except ValueError as exc:
            raise _InputError(f"bad sweep point {tok!r}: {exc}") from exc
        if family == "pr-noise" and not 0 <= value <= 1:
            raise _InputError(f"pr-noise weight must be in [0,1], got {tok}")
        if family == "disturbance-gap" and not 0 <= value <= Fraction(1, 2):
            raise _InputError(f"disturbance gap must be in [0,1/2], got {tok}")
    jobs = [(family, tok) for tok in points]
    if args.workers > 1:
        with Pool(args.workers) as pool:
            rows = pool.starmap(_sweep_point, jobs)
    else:
        rows = [_sweep_point(*job) for job in jobs]
    if args.emit_csv:
        lines = ["param,ncf,cf,df,negativity"]
        lines += [
            ",".join(row[key] for key in ("param", "ncf", "cf", "df", "negativity"))
            for row in rows
        ]
        try:
            with open(args.emit_csv, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise _InputError(f"cannot write {args.emit_csv}: {exc}") from exc
    return {"family": family, "rows": rows}, False


# -- parser and entry point --------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextua",
        description="Exact contextuality analysis for operational models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument(
            "--strict",
            action="store_true",
            help="exit 1 when the verdict is contextual/infeasible/disturbing",
        )

    def cap_flag(p):
        p.add_argument(
            "--scale-cap",
            type=int,
            metavar="N",
            help="raise every analysis size guard to N",
        )

    p = sub.add_parser("validate", help="check a fragment's structure and invariants")
    p.add_argument("file")
    common(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("equivalences", help="linear dependencies among states/effects")
    p.add_argument("file")
    common(p)
    p.set_defaults(handler=_cmd_equivalences)

    p = sub.add_parser("nc-check", help="simplex-embedding feasibility LP")
    p.add_argument("file")
    common(p)
    cap_flag(p)
    p.set_defaults(handler=_cmd_nc_check)

    p = sub.add_parser("fraction", help="contextual fraction of an empirical model")
    p.add_argument("file")
    common(p)
    cap_flag(p)
    p.set_defaults(handler=_cmd_fraction)

    p = sub.add_parser("negativity", help="minimal negativity over response vertices")
    p.add_argument("file")
    common(p)
    cap_flag(p)
    p.set_defaults(handler=_cmd_negativity)

    for name, handler, fixed_view, blurb in (
        ("decompose", _cmd_decompose, None, "potential/connection split"),
        ("curvature", _cmd_curvature, "geometrical", "curvature"),
        ("phases", _cmd_phases, "topological", "loop phases"),
    ):
        p = sub.add_parser(name, help=f"{blurb} of an object-valuation cochain")
        p.add_argument("file")
        p.add_argument(
            "--kind",
            choices=("state", "effect", "transformation"),
            default="state",
        )
        if fixed_view is None:
            p.add_argument(
                "--view",
                choices=("geometrical", "topological"),
                default="geometrical",
            )
        p.add_argument(
            "--values",
            help="comma-separated rational valuation, one entry per object",
        )
        common(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("homology", help="integer homology of a complex")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1, help="degree (default 1)")
    common(p)
    p.set_defaults(handler=_cmd_homology)

    p = sub.add_parser("vorobyev", help="Graham reduction / certificate")
    p.add_argument("file", nargs="?")
    p.add_argument(
        "--generalized",
        metavar="COMPLEX",
        help="run the H1 certificate on a complex file instead",
    )
    common(p)
    p.set_defaults(handler=_cmd_vorobyev)

    p = sub.add_parser("interference", help="pairwise/triple interference terms")
    p.add_argument("file")
    p.add_argument("--order", type=int, choices=(2, 3), default=2)
    common(p)
    p.set_defaults(handler=_cmd_interference)

    p = sub.add_parser("disturbance", help="marginal disagreement analysis")
    p.add_argument("file")
    p.add_argument("--extend", action="store_true", help="include the split scenario")
    p.add_argument(
        "--fractions", action="store_true", help="include the NCF/CF/DF split"
    )
    common(p)
    cap_flag(p)
    p.set_defaults(handler=_cmd_disturbance)

    p = sub.add_parser("scenarios", help="list or emit canonical inputs")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?")
    p.add_argument(
        "--param",
        action="append",
        metavar="K=V",
        help="factory parameter, repeatable",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for random-* scenarios")
    common(p)
    p.set_defaults(handler=_cmd_scenarios)

    p = sub.add_parser("sweep", help="parameter sweeps with CSV output")
    p.add_argument("family", choices=sorted(_SWEEP_DEFAULTS))
    p.add_argument("--points", help="comma-separated parameter values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--emit-csv", metavar="PATH")
    common(p)
    p.set_defaults(handler=_cmd_sweep)

    return parser


def _render_human(report: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = " " * indent
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render_human(value, indent + 2))
        elif isinstance(value, list):
            if value and all(isinstance(item, dict) for item in value):
                lines.append(f"{pad}{key}:")
                for item in value:
                    lines.append(f"{pad}  -")
                    lines.extend(_render_human(item, indent + 4))
            else:
                lines.append(f"{pad}{key}: {json.dumps(value)}")
        else:
            lines.append(f"{pad}{key}: {value}")
    return lines


def _apply_scale_cap(cap: int | None):
    previous = (_nc.MAX_EFFECTS, _nc.MAX_EQUIVALENCES, _nc.MAX_ASSIGNMENTS)
    if cap is None:
        return previous
    if cap < 1:
        raise _InputError(f"--scale-cap must be positive, got {cap}")
    _nc.MAX_EFFECTS = cap
    _nc.MAX_EQUIVALENCES = cap
    _nc.MAX_ASSIGNMENTS = cap
    return previous


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed its message
        code = exc.code
        return code if isinstance(code, int) else 2
    previous_caps = None
    try:
        previous_caps = _apply_scale_cap(getattr(args, "scale_cap", None))
        report, bad = args.handler(args)
    except ScaleCapError as exc:
        print(f"input error: scale cap exceeded: {exc}", file=sys.stderr)
        return 2
    except DisturbingModelError as exc:
        print(f"input error: disturbing model: {exc}", file=sys.stderr)
        return 2
    except _InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    finally:
        if previous_caps is not None:
            _nc.MAX_EFFECTS, _nc.MAX_EQUIVALENCES, _nc.MAX_ASSIGNMENTS = previous_caps
    if "_raw" in report:
        print(report["_raw"])
    elif args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(_render_human(report)))
    if args.strict and bad:
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
