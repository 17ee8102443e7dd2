"""Command-line front end: thompson, lattice, state and measure subcommands."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from . import heatmeasure as hm
from .dyadic import parse_dyadic
from .forest import parse_tree
from .lattice import (
    Config,
    CrossedElement,
    gauge_act_config,
    holonomy,
    jones_act_config,
    parse_gauge_values,
    parse_group,
    parse_values,
)
from .sampling import (
    random_element,
    random_forest,
    random_gauge,
    random_tree,
    random_velement,
    random_weights,
)
from .state import (
    LeafWeights,
    check_gauge_invariance,
    check_jones_invariance,
    check_state_preserving,
    cylinder_state,
    omega_t,
    parse_weights,
)
from .thompson import act_dyadic, as_pl_map, classify, inverse, multiply, parse_element

EXIT_OK, EXIT_PARSE, EXIT_INCONCLUSIVE = 0, 2, 3


class UsageError(ValueError):
    pass


def thread_cap() -> int:
    raw = os.environ.get("TG_LAB_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"TG_LAB_THREADS must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise UsageError("TG_LAB_THREADS must be at least 1")
    return cap


def _map(fn: Callable, items: Sequence) -> list:
    cap = thread_cap()
    if cap == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))


# thompson


def cmd_thompson(args) -> dict:
    if args.action == "mul":
        out = parse_element(args.elements[0])
        for text in args.elements[1:]:
            out = multiply(out, parse_element(text))
        return {"element": str(out), "class": classify(out)}
    if len(args.elements) != 1:
        raise UsageError(f"'{args.action}' takes exactly one element")
    g = parse_element(args.elements[0])
    if args.action == "inv":
        inv = inverse(g)
        return {"element": str(inv), "class": classify(inv)}
    if args.action == "classify":
        return {"element": str(g), "class": classify(g)}
    if args.action == "pl":
        return {
            "element": str(g),
            "pieces": [
                {"domain": str(p.domain), "slope_exponent": p.slope_exponent, "image_left": str(p.image_left)}
                for p in as_pl_map(g)
            ],
        }
    if args.action == "orbit":
        if args.point is None:
            raise UsageError("orbit needs a starting dyadic")
        d = parse_dyadic(args.point)
        orbit = [d]
        for _ in range(args.steps):
            d = act_dyadic(g, d)
            orbit.append(d)
        return {"element": str(g), "orbit": [str(p) for p in orbit]}
    raise UsageError(f"unknown thompson action {args.action!r}")


# lattice


def _config_from(args) -> Config:
    k = parse_group(args.group).k
    tree = parse_tree(args.tree)
    return Config(tree, parse_values(args.values), k)


def cmd_lattice(args) -> dict:
    x = _config_from(args)
    if args.action == "holonomy":
        return {str(d): v for d, v in holonomy(x).items()}
    if args.action == "gauge":
        if args.gauge is None:
            raise UsageError("gauge needs --gauge values")
        s = parse_gauge_values(args.gauge, x.tree, x.k)
        return gauge_act_config(s, x).to_json()
    if args.action == "jones":
        if args.element is None:
            raise UsageError("jones needs --element")
        return jones_act_config(parse_element(args.element), x).to_json()
    raise UsageError(f"unknown lattice action {args.action!r}")


# state


def _residual_report(check: str, residuals: list[float], **extra) -> dict:
    return {
        "check": check,
        **extra,
        "samples": len(residuals),
        "max_residual": max(residuals) if residuals else 0.0,
        "nonzero": sum(1 for r in residuals if r != 0),
    }


def cmd_state(args) -> dict:
    rng = random.Random(args.seed)
    if args.action == "check-preserving":
        k = parse_group(args.group).k
        cases = []
        for _ in range(args.samples):
            tree = random_tree(rng, rng.randint(1, 5), 4)
            x = random_element(rng, tree, k)
            f = random_forest(rng, tree.n_leaves, rng.randint(0, 3))
            lw = LeafWeights(tree, tuple(random_weights(rng, k) for _ in range(tree.n_leaves)))
            cases.append((x, f, lw, lw.extend(f, lambda d: random_weights(rng, k))))
        res = _map(lambda c: check_state_preserving(*c), cases)
        return _residual_report(args.action, res, group=f"zmod:{k}", seed=args.seed)
    if args.action == "check-gauge":
        k = parse_group(args.group).k
        cases = []
        for _ in range(args.samples):
            tree = random_tree(rng, rng.randint(1, 5), 4)
            lw = LeafWeights(tree, tuple(random_weights(rng, k) for _ in range(tree.n_leaves)))
            cases.append((random_element(rng, tree, k), random_gauge(rng, tree, k), lw))
        res = _map(lambda c: check_gauge_invariance(*c), cases)
        return _residual_report(args.action, res, group=f"zmod:{k}", seed=args.seed)
    if args.action == "check-jones":
        if args.const_weights is None:
            raise UsageError("check-jones needs --const-weights")
        w = parse_weights(args.const_weights)
        if args.group is not None and parse_group(args.group).k != w.k:
            raise UsageError("--group and --const-weights disagree on the group order")
        cases = []
        for _ in range(args.samples):
            tree = random_tree(rng, rng.randint(1, 4), 3)
            cases.append((random_element(rng, tree, w.k), random_velement(rng, 5, 3)))
        res = _map(lambda c: check_jones_invariance(c[0], c[1], w), cases)
        return _residual_report(args.action, res, weights=str(w), seed=args.seed)
    if args.action == "eval":
        if args.cylinder:
            if args.beta is None:
                raise UsageError("cylinder evaluation needs --beta")
            value = cylinder_state([_parse_cylinder(c) for c in args.cylinder], hm.parse_beta(args.beta))
            return {"value": _complex_json(value)}
        if args.element is None or args.weights is None:
            raise UsageError("eval needs --element and --weights, or --cylinder and --beta")
        text = args.element
        if os.path.exists(text):
            with open(text) as fh:
                text = fh.read()
        x = CrossedElement.from_json(json.loads(text))
        value = omega_t(x, LeafWeights.constant(x.tree, parse_weights(args.weights)))
        return {"value": _complex_json(value)}
    raise UsageError(f"unknown state action {args.action!r}")


def _parse_cylinder(text: str):
    body, _, coeff = text.partition("@")
    constraint = {}
    for part in body.split(";"):
        part = part.strip()
        if not part:
            continue
        point, _, values = part.partition(":")
        values = values.strip()
        if not (values.startswith("{") and values.endswith("}")):
            raise UsageError(f"cylinder constraint {part!r} must look like d:{{n,...}}")
        constraint[parse_dyadic(point)] = {int(v) for v in values[1:-1].split(",") if v.strip()}
    return constraint, complex(coeff) if coeff else 1.0


def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


# measure


def cmd_measure(args) -> dict:
    a = args.action
    if a == "zb":
        return {"b": args.b, "Z": hm.partition_function(args.b)}
    if a == "mass":
        return {"b": args.b, "n": args.n, "mass": hm.mass(args.b, args.n)}
    if a == "hellinger":
        if args.pair is not None:
            x, y = args.pair
            return {"a": x, "b": y, "rho": hm.hellinger_pair(x, y), "neg_log_rho": hm.neg_log_pair(x, y)}
        return {
            "b": args.b,
            "k": args.k,
            "rho": hm.hellinger_translate(args.b, args.k),
            "neg_log_rho": hm.neg_log_translate(args.b, args.k),
        }
    if a == "kakutani":
        report = hm.kakutani_series(
            hm.parse_beta(args.beta), hm.parse_transform(args.transform), args.levels
        )
        return report.to_json()
    if a == "semifinite":
        return hm.semifinite_series(hm.parse_beta(args.beta), args.t, args.levels).to_json()
    if a == "closure":
        value = hm.closure_diagnostic(hm.parse_beta(args.beta), args.p, args.n)
        return {"beta": args.beta, "p": args.p, "n": args.n, "mass": value}
    if a == "summability":
        beta = hm.parse_beta(args.beta)
        return {
            "beta": str(beta),
            "p": args.p,
            "p_summable": _summability_json(hm.summability_test(beta, args.p)),
            "summable": _summability_json(hm.summability_test(beta, 1.0)),
        }
    if a == "rotsupport":
        r = parse_element(args.element)
        return {"element": str(r), "support": [str(d) for d in hm.rotation_support(r, args.levels)]}
    raise UsageError(f"unknown measure action {a!r}")


def _summability_json(result) -> dict:
    if isinstance(result, hm.Summable):
        return {"result": "summable", "value": result.value}
    if isinstance(result, hm.Divergent):
        return {"result": "divergent"}
    return {"result": "numeric-only", "partial_sums": list(result.partial_sums)}


# output


def _rows(report: dict) -> tuple[list[str], list[list]]:
    if "terms_by_level" in report:
        keys = [k for k in ("terms_by_level", "level_sums", "partial_sums", "max_term_by_level", "nonzero_by_level") if k in report]
        header = ["level"] + keys
        rows = [[lvl] + [report[k][i] for k in keys] for i, lvl in enumerate(report["levels"])]
        return header, rows
    return ["key", "value"], [[k, json.dumps(v) if isinstance(v, (dict, list)) else v] for k, v in report.items()]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2)
    if fmt == "csv":
        header, rows = _rows(report)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue().rstrip("\n")
    lines = []
    for key, value in report.items():
        if isinstance(value, list) and len(value) > 8:
            value = f"[{len(value)} entries, last {json.dumps(value[-1])}]"
        elif isinstance(value, (dict, list)):
            value = json.dumps(value)
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="tglab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    th = sub.add_parser("thompson", help="Thompson group arithmetic")
    th.add_argument("action", choices=("mul", "inv", "classify", "orbit", "pl"))
    th.add_argument("elements", nargs="+", help="element expressions; orbit takes ELEMENT DYADIC")
    th.add_argument("--steps", type=int, default=1)
    th.set_defaults(run=cmd_thompson)

    la = sub.add_parser("lattice", parents=[common], help="configurations, gauge and holonomy")
    la.add_argument("action", choices=("holonomy", "gauge", "jones"))
    la.add_argument("--group", required=True)
    la.add_argument("--tree", required=True)
    la.add_argument("--values", required=True)
    la.add_argument("--gauge")
    la.add_argument("--element")
    la.set_defaults(run=cmd_lattice)

    st = sub.add_parser("state", parents=[common], help="state checks and evaluation")
    st.add_argument("action", choices=("check-preserving", "check-gauge", "check-jones", "eval"))
    st.add_argument("--group")
    st.add_argument("--samples", type=int, default=100)
    st.add_argument("--const-weights", dest="const_weights")
    st.add_argument("--weights")
    st.add_argument("--element")
    st.add_argument("--cylinder", action="append")
    st.add_argument("--beta")
    st.set_defaults(run=cmd_state)

    me = sub.add_parser("measure", parents=[common], help="heat-kernel measures and series")
    me.add_argument("action", choices=("zb", "mass", "hellinger", "kakutani", "semifinite", "closure", "summability", "rotsupport"))
    me.add_argument("--b", type=float)
    me.add_argument("--n", type=int, default=0)
    me.add_argument("--k", type=int, default=1)
    me.add_argument("--pair", type=float, nargs=2)
    me.add_argument("--beta")
    me.add_argument("--transform")
    me.add_argument("--levels", type=int, default=10)
    me.add_argument("--t", type=float, default=1.0)
    me.add_argument("--p", type=float, default=0.4)
    me.add_argument("--element")
    me.set_defaults(run=cmd_measure)

    for p in (th,):
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.add_argument("--seed", type=int, default=0)
    return parser


_REQUIRED = {
    ("state", "check-preserving"): ["group"],
    ("state", "check-gauge"): ["group"],
    ("measure", "zb"): ["b"],
    ("measure", "mass"): ["b"],
    ("measure", "kakutani"): ["beta", "transform"],
    ("measure", "semifinite"): ["beta"],
    ("measure", "closure"): ["beta"],
    ("measure", "summability"): ["beta"],
    ("measure", "rotsupport"): ["element"],
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "thompson" and args.action == "orbit":
        if len(args.elements) != 2:
            parser.error("orbit takes ELEMENT DYADIC")
        args.elements, args.point = args.elements[:1], args.elements[1]
    else:
        args.point = None
    missing = [f"--{m}" for m in _REQUIRED.get((args.command, args.action), []) if getattr(args, m) is None]
    if args.command == "measure" and args.action == "hellinger" and args.pair is None and args.b is None:
        missing.append("--b or --pair")
    if missing:
        parser.error(f"{args.command} {args.action} needs {', '.join(missing)}")
    try:
        report = args.run(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    print(render(report, args.format))
    if report.get("verdict") == hm.Verdict.INCONCLUSIVE.value:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
