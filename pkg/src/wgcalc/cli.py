"""
Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 request beyond the exact
budget, 4 a Monte Carlo check outside its 4-sigma band.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .channels import (
    BudgetError, ChannelError, ChannelModel, KINDS, MomentReport, SpectrumReport,
    fraction_str, limit_spectrum,
)
from .diagram import (
    DiagramError, contract, evaluate_symbolic, load_diagram, normalize_haar_boxes,
    group_boxes, symbolic_moment,
)
from .montecarlo import (
    RngConfig, mc_channel_moments, mc_diagram_expectation, mc_hayden,
    mc_monomial_integral, mc_spectrum, within_sigma,
)
from .perm import Permutation, partitions
from .weingarten import (
    MonomialSpec, format_cycle_type, monomial_integral, weingarten_asymptotic,
    weingarten_table,
)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CHECK = 0, 2, 3, 4
WG_TABLE_MAX_P = 8


class CheckFailed(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _index_tuple(text: str) -> tuple[int, ...]:
    if text.strip() == "":
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated indices: {text!r}") from None


def _binding(text: str) -> tuple[str, int]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected SPACE=DIM, got {text!r}")
    return name, _positive(value)


def _rational_str(x) -> str:
    if isinstance(x, (Fraction, int)):
        return fraction_str(Fraction(x))
    x = complex(x)
    return repr(x.real) if x.imag == 0 else str(x)


# ---------------------------------------------------------------------------
# commands; each returns (json object, csv rows, csv field names)
# ---------------------------------------------------------------------------

def cmd_wg_table(args):
    if args.p > WG_TABLE_MAX_P:
        raise BudgetError(f"exact tables are limited to p <= {WG_TABLE_MAX_P}")
    tables, rows = [], []
    for n in args.n:
        table = weingarten_table(n, args.p)
        entries = []
        for lam in partitions(args.p):
            rep = Permutation.from_cycles(args.p, *_cycles_for(lam))
            exact = table[lam]
            asym = weingarten_asymptotic(n, rep)
            ratio = float(asym / exact) if exact != 0 else None
            entry = {"class": format_cycle_type(lam), "exact": fraction_str(exact),
                     "asymptotic": fraction_str(asym), "ratio": ratio}
            entries.append(entry)
            rows.append(dict(n=n, **{k: ("" if v is None else v) for k, v in entry.items()}))
        tables.append({"n": n, "rows": entries})
    return {"p": args.p, "tables": tables}, rows, ("n", "class", "exact", "asymptotic", "ratio")


def _cycles_for(lam):
    out, start = [], 1
    for part in lam:
        out.append(tuple(range(start, start + part)))
        start += part
    return out


def _model(args) -> ChannelModel:
    return ChannelModel(args.model, args.n, args.k, args.t)


def cmd_moments(args):
    model = _model(args)
    ps = list(range(1, args.p_max + 1))
    cfg = RngConfig(args.seed, 0, args.shards)
    mcs = mc_channel_moments(model, ps, args.samples, cfg) if args.samples > 0 else {}
    reports = []
    for p in ps:
        note = None
        try:
            exact = model.exact_moment(p)
        except BudgetError as exc:
            exact, note = None, str(exc)
        try:
            limit = model.limit_moment(p, args.regime)
        except ValueError as exc:
            limit, note = None, str(exc)
        reports.append(MomentReport(model.kind, model.n, model.k, model.t, p, exact, limit,
                                    args.regime, mcs.get(p), args.seed if mcs else None, note))
    obj = {"reports": [r.to_json() for r in reports]}
    return obj, [r.csv_row() for r in reports], MomentReport.CSV_FIELDS


def cmd_spectrum_scan(args):
    if list(args.n) != sorted(set(args.n)):
        raise ChannelError("the n-grid must be strictly increasing")
    reports = []
    for i, n in enumerate(args.n):
        model = ChannelModel(args.model, n, args.k, args.t)
        cfg = RngConfig(args.seed, 2 * i, args.shards)
        stats = mc_spectrum(model, args.samples, cfg, full=args.full)
        top = min(len(stats.mean), model.output_dim)
        try:
            predicted = limit_spectrum(model.kind, n, args.k, model.t, args.regime)[:top]
        except ValueError:
            predicted = []
        hayden = None
        if model.kind in ("conjugate", "generalized"):
            t = model.t if model.kind == "generalized" else Fraction(1, args.k)
            overlaps = mc_hayden(model, args.samples, RngConfig(args.seed, 2 * i + 1, args.shards))
            hayden = {"min_overlap": float(overlaps.min()),
                      "all_hold": bool(np.all(overlaps >= float(t) - 1e-10)), "t": fraction_str(t)}
        reports.append(SpectrumReport(model.kind, n, args.k, model.t,
                                      [float(x) for x in stats.mean[:top]],
                                      [float(x) for x in stats.stderr()[:top]], predicted,
                                      stats.samples, args.seed, hayden))
    rows = [row for r in reports for row in r.csv_rows()]
    return {"reports": [r.to_json() for r in reports]}, rows, SpectrumReport.CSV_FIELDS


def _tensor_json(value):
    if np.ndim(value) == 0:
        return {"value": _rational_str(value)}
    arr = np.asarray(value, dtype=object)
    return {"shape": list(arr.shape),
            "data": np.vectorize(_rational_str, otypes=[object])(arr).tolist()}


def cmd_diagram_eval(args):
    d = load_diagram(args.file)
    bindings = d.dims
    bindings.update(dict(args.bind or []))
    if args.mode == "contract":
        value = contract(d)
        obj = dict(mode="contract", **_tensor_json(value))
        rows = [{"term": "value", "value": obj.get("value", json.dumps(obj.get("data")))}]
        return obj, rows, ("term", "value")
    norm = normalize_haar_boxes(d)
    notes = []
    for g in norm.groups():
        us, bars = group_boxes(norm, g)
        if len(us) != len(bars):
            notes.append(f"group {g!r} has {len(us)} U and {len(bars)} Ubar boxes; "
                         f"the Haar average vanishes")
    terms = symbolic_moment(d)
    total = evaluate_symbolic(terms, bindings)
    obj = {"mode": args.mode, "bindings": bindings, "terms": [], "total": _rational_str(total)}
    rows = []
    for t in terms:
        entry = t.to_json()
        if args.mode == "expect-numeric":
            entry["value"] = _rational_str(t.evaluate(bindings))
        obj["terms"].append(entry)
        rows.append({"term": t.describe(), "value": entry.get("value", "")})
    rows.append({"term": "total", "value": obj["total"]})
    if notes:
        obj["note"] = "; ".join(notes)
    if args.mode == "expect-numeric" and args.samples > 0:
        if bindings != d.dims:
            raise DiagramError("Monte Carlo needs the dimensions stored in the diagram file")
        re, im = mc_diagram_expectation(d, args.samples, RngConfig(args.seed, 0, args.shards))
        obj["mc"] = {"real": re.to_json(), "imag": im.to_json(), "seed": args.seed}
        obj["mc_within_4sigma"] = within_sigma(re, complex(total).real) and within_sigma(im, complex(total).imag)
    return obj, rows, ("term", "value")


def cmd_mc_check(args):
    cfg = RngConfig(args.seed, 0, args.shards)
    if args.kind == "monomial":
        spec = MonomialSpec(args.i, args.j, args.i_conj, args.j_conj)
        exact = monomial_integral(args.n, spec)
        re, im = mc_monomial_integral(args.n, spec, args.samples, cfg)
        ok = within_sigma(re, exact) and within_sigma(im, 0)
        obj = {"kind": "monomial", "n": args.n, "exact": fraction_str(exact),
               "mc": {"real": re.to_json(), "imag": im.to_json(), "seed": args.seed},
               "within_4sigma": ok}
        rows = [{"quantity": "monomial", "exact": fraction_str(exact), "mc_mean": re.mean,
                 "mc_stderr": re.stderr, "within_4sigma": ok}]
    else:
        model = _model(args)
        exact = model.exact_moment(args.p)
        est = mc_channel_moments(model, [args.p], args.samples, cfg)[args.p]
        ok = within_sigma(est, exact)
        obj = {"kind": "moment", "model": model.kind, "n": model.n, "k": model.k, "p": args.p,
               "exact": fraction_str(exact), "mc": dict(est.to_json(), seed=args.seed),
               "within_4sigma": ok}
        rows = [{"quantity": f"E tr(Z^{args.p})", "exact": fraction_str(exact),
                 "mc_mean": est.mean, "mc_stderr": est.stderr, "within_4sigma": ok}]
    if not ok:
        obj["_failed"] = True
    return obj, rows, ("quantity", "exact", "mc_mean", "mc_stderr", "within_4sigma")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _global_flags(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=_seed, default=default(0),
                        help="64-bit RNG seed (default 0)")
    parser.add_argument("--shards", type=_positive, default=default(1),
                        help="worker threads for Monte Carlo; results do not depend on it (default 1)")
    parser.add_argument("--format", choices=("json", "csv"), default=default("json"),
                        help="output format (default json)")
    parser.add_argument("--out", type=Path, default=default(None),
                        help="write to this file instead of stdout")


def _model_flags(parser, p_flag: str | None):
    parser.add_argument("--model", choices=KINDS, required=True, help="channel model")
    parser.add_argument("--n", type=_positive, required=True, help="output dimension n")
    parser.add_argument("--k", type=_positive, required=True, help="environment dimension k")
    parser.add_argument("--t", type=_fraction, default=None,
                        help="input fraction t in (0, 1], generalized model only")
    if p_flag:
        parser.add_argument(p_flag, type=_positive, required=True, help="moment order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgcalc", description="Weingarten calculus and random quantum channel toolkit.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wg-table", parents=[common], help="exact and asymptotic Weingarten values")
    p.add_argument("--p", type=_positive, required=True, help=f"order, at most {WG_TABLE_MAX_P}")
    p.add_argument("--n", type=_positive, nargs="+", required=True, help="dimensions")
    p.set_defaults(func=cmd_wg_table)

    p = sub.add_parser("moments", parents=[common], help="exact, limit and Monte Carlo moments")
    _model_flags(p, "--p-max")
    p.add_argument("--samples", type=int, default=10000,
                   help="Monte Carlo samples, 0 to skip (default 10000)")
    p.add_argument("--regime", choices=("I", "II"), default="II",
                   help="limit column: I is k -> infinity, II is n -> infinity (default II)")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("spectrum-scan", parents=[common], help="mean ordered eigenvalues along an n-grid")
    p.add_argument("--model", choices=KINDS, required=True, help="channel model")
    p.add_argument("--k", type=_positive, required=True, help="environment dimension k")
    p.add_argument("--t", type=_fraction, default=None, help="input fraction t (generalized model)")
    p.add_argument("--n", type=_positive, nargs="+", required=True, help="increasing list of n")
    p.add_argument("--samples", type=_positive, default=100, help="samples per n (default 100)")
    p.add_argument("--regime", choices=("I", "II"), default="II", help="prediction regime (default II)")
    p.add_argument("--full", action="store_true",
                   help="diagonalize the full n^2 x n^2 output instead of the k^2 Gram matrix")
    p.set_defaults(func=cmd_spectrum_scan)

    p = sub.add_parser("diagram-eval", parents=[common], help="evaluate a JSON diagram file")
    p.add_argument("file", type=Path, help="diagram JSON file")
    p.add_argument("--mode", choices=("contract", "expect-symbolic", "expect-numeric"),
                   default="contract", help="evaluation mode (default contract)")
    p.add_argument("--bind", type=_binding, action="append", metavar="SPACE=DIM",
                   help="dimension binding for symbolic evaluation; repeatable")
    p.add_argument("--samples", type=int, default=0,
                   help="Monte Carlo samples for expect-numeric (default 0: none)")
    p.set_defaults(func=cmd_diagram_eval)

    p = sub.add_parser("mc-check", parents=[common], help="compare an exact value with Monte Carlo")
    p.add_argument("--kind", choices=("monomial", "moment"), required=True, help="quantity to check")
    p.add_argument("--n", type=_positive, required=True, help="unitary or output dimension")
    p.add_argument("--k", type=_positive, default=1, help="environment dimension (moment)")
    p.add_argument("--model", choices=KINDS, default="conjugate", help="channel model (moment)")
    p.add_argument("--t", type=_fraction, default=None, help="input fraction t (generalized model)")
    p.add_argument("--p", type=_positive, default=2, help="moment order (moment)")
    p.add_argument("--i", type=_index_tuple, default=(), help="row indices of U, comma-separated")
    p.add_argument("--j", type=_index_tuple, default=(), help="column indices of U")
    p.add_argument("--i-conj", type=_index_tuple, default=(), help="row indices of conj(U)")
    p.add_argument("--j-conj", type=_index_tuple, default=(), help="column indices of conj(U)")
    p.add_argument("--samples", type=_positive, default=100000, help="samples (default 100000)")
    p.set_defaults(func=cmd_mc_check)
    return parser


def _emit(obj, rows, fields, fmt: str, out: Path | None):
    if fmt == "json":
        text = json.dumps({k: v for k, v in obj.items() if not k.startswith("_")}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is cmd_moments and args.samples < 0:
        parser.error("--samples must be non-negative")
    try:
        obj, rows, fields = args.func(args)
    except BudgetError as exc:
        print(f"wgcalc: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DiagramError, ChannelError, ValueError) as exc:
        print(f"wgcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(obj, rows, fields, args.format, args.out)
    if obj.get("_failed") or obj.get("mc_within_4sigma") is False:
        print("wgcalc: Monte Carlo estimate outside the 4-sigma band", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
